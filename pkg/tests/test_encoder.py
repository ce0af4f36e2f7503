import numpy as np
import pytest

from artx.encoder import Encoder, EncoderMode, EncoderSpec, ObservationIntegrityError, encode


def random_obs(rng, n=None):
    shape = (n, 5, 5) if n else (5, 5)
    tiles = rng.integers(0, 8, size=shape)
    obs = np.eye(8, dtype=np.uint8)[tiles]
    return np.moveaxis(obs, -1, -3)


def test_headless_layout():
    obs = np.zeros((8, 5, 5), dtype=np.uint8)
    obs[0] = 1
    x = encode(obs, EncoderSpec())
    assert x.shape == (200,)
    np.testing.assert_array_equal(x[:25], 1.0)
    np.testing.assert_array_equal(x[25:], 0.0)


def test_headless_channel_major_order():
    obs = np.zeros((8, 5, 5), dtype=np.uint8)
    obs[0] = 1
    obs[0, 1, 3], obs[6, 1, 3] = 0, 1
    x = encode(obs, EncoderSpec())
    assert x[6 * 25 + 1 * 5 + 3] == 1.0


def test_deterministic_both_modes():
    obs = random_obs(np.random.default_rng(0))
    for spec in (EncoderSpec(), EncoderSpec(EncoderMode.STATIC_HEAD, 16, 7)):
        np.testing.assert_array_equal(encode(obs, spec), encode(obs, spec))


def test_static_head_separates_observations():
    rng = np.random.default_rng(1)
    enc = Encoder(EncoderSpec("static_head", head_dim=16, seed=3))
    collisions = 0
    for _ in range(100):
        a, b = random_obs(rng), random_obs(rng)
        if np.array_equal(a, b):
            continue
        ya, yb = enc(a), enc(b)
        if not (np.abs(ya - yb) > 1e-12).any():
            collisions += 1
    assert collisions == 0


def test_outputs_in_unit_interval():
    rng = np.random.default_rng(2)
    for spec in (EncoderSpec(), EncoderSpec("static_head", head_dim=32, seed=1)):
        enc = Encoder(spec)
        for obs in random_obs(rng, 50):
            y = enc(obs)
            assert y.shape == (spec.out_dim,)
            assert ((y >= 0) & (y <= 1)).all()


def test_headless_injective():
    rng = np.random.default_rng(4)
    seen = {}
    for obs in random_obs(rng, 300):
        key = obs.tobytes()
        code = encode(obs, EncoderSpec()).tobytes()
        assert seen.setdefault(code, key) == key


@pytest.mark.parametrize("active", [0, 2])
def test_malformed_cell(active):
    obs = random_obs(np.random.default_rng(5))
    obs[:, 2, 3] = 0
    obs[:active, 2, 3] = 1
    with pytest.raises(ObservationIntegrityError, match=r"\(2, 3\)"):
        encode(obs, EncoderSpec())


def test_wrong_shape():
    with pytest.raises(ObservationIntegrityError):
        encode(np.ones((8, 4, 4)), EncoderSpec())
