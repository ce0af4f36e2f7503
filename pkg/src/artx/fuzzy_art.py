"""Fuzzy ART online clustering with per-category visit counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ArtInputError(ValueError):
    """Input vector outside the unit hypercube."""


class DimensionError(ValueError):
    pass


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True)
class ArtParams:
    alpha: float = 0.01
    rho: float = 1.0
    beta: float = 1.0
    max_epochs: int = 100
    convergence_tol: float = 1e-9
    # None means unlimited
    max_categories: int | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not self.convergence_tol >= 0:
            raise ValueError(f"convergence_tol must be >= 0, got {self.convergence_tol}")
        if self.max_categories is not None and self.max_categories < 1:
            raise ValueError(f"max_categories must be >= 1, got {self.max_categories}")


def complement_code(x) -> np.ndarray:
    """Return ``[x, 1 - x]``; every entry of ``x`` must lie in [0, 1]."""
    x = np.asarray(x, dtype=np.float64).ravel()
    bad = np.flatnonzero(~((x >= 0.0) & (x <= 1.0)))
    if bad.size:
        i = int(bad[0])
        raise ArtInputError(f"input entry {i} = {x[i]!r} is outside [0, 1]")
    return np.concatenate([x, 1.0 - x])


def fuzzy_and(u, v) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionError(f"fuzzy AND of shapes {u.shape} and {v.shape}")
    return np.minimum(u, v)


def activation(x_cc, w, alpha: float) -> float:
    """Choice function |x ^ w|_1 / (alpha + |w|_1)."""
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    w = np.asarray(w, dtype=np.float64)
    return float(fuzzy_and(x_cc, w).sum() / (alpha + w.sum()))


def vigilance(x_cc, w) -> float:
    """Match function |x ^ w|_1 / |x|_1."""
    x_cc = np.asarray(x_cc, dtype=np.float64)
    norm = x_cc.sum()
    if not norm > 0:
        raise DegenerateInputError("vigilance undefined for an input with zero 1-norm")
    return float(fuzzy_and(x_cc, w).sum() / norm)


def converged(prev, curr, tol: float) -> bool:
    """True iff both weight sets hold the same categories and no weight moved more than ``tol``."""
    prev = np.asarray(prev, dtype=np.float64)
    curr = np.asarray(curr, dtype=np.float64)
    if prev.shape != curr.shape:
        return False
    if prev.size == 0:
        return True
    return bool(np.max(np.abs(curr - prev)) <= tol)


class ArtModel:
    """Long-term memory of a Fuzzy ART network.

    Category indices are 0-based. ``weights`` is a ``(C, 2 * dim)`` array and
    ``counts[j]`` is the number of inputs credited to category ``j``.
    """

    def __init__(self, dim: int, params: ArtParams | None = None):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = int(dim)
        self.params = params if params is not None else ArtParams()
        self._w = np.empty((16, 2 * self.dim), dtype=np.float64)
        self._wsum = np.empty(16, dtype=np.float64)
        self._n = np.zeros(16, dtype=np.int64)
        self._size = 0

    @property
    def weights(self) -> np.ndarray:
        return self._w[: self._size]

    @property
    def counts(self) -> np.ndarray:
        return self._n[: self._size]

    @property
    def n_categories(self) -> int:
        return self._size

    def __len__(self) -> int:
        return self._size

    def _code(self, x_raw) -> np.ndarray:
        x = np.asarray(x_raw, dtype=np.float64).ravel()
        if x.shape[0] != self.dim:
            raise DimensionError(f"expected input of length {self.dim}, got {x.shape[0]}")
        return complement_code(x)

    def _new_category(self) -> int:
        if self._size == self._w.shape[0]:
            cap = 2 * self._w.shape[0]
            w = np.empty((cap, 2 * self.dim), dtype=np.float64)
            w[: self._size] = self._w[: self._size]
            s = np.empty(cap, dtype=np.float64)
            s[: self._size] = self._wsum[: self._size]
            n = np.zeros(cap, dtype=np.int64)
            n[: self._size] = self._n[: self._size]
            self._w, self._wsum, self._n = w, s, n
        j = self._size
        self._w[j] = 1.0
        self._wsum[j] = 2.0 * self.dim
        self._n[j] = 0
        self._size += 1
        return j

    def _search(self, x_cc: np.ndarray) -> tuple[int | None, int | None]:
        """Return (resonant winner, best-activation category); either may be None."""
        if self._size == 0:
            return None, None
        w = self._w[: self._size]
        overlap = np.minimum(w, x_cc).sum(axis=1)
        act = overlap / (self.params.alpha + self._wsum[: self._size])
        # descending activation, ties by ascending index
        order = np.argsort(-act, kind="stable")
        match = overlap / x_cc.sum()
        passing = match[order] >= self.params.rho
        first = int(np.argmax(passing))
        winner = int(order[first]) if passing[first] else None
        return winner, int(order[0])

    def _learn(self, j: int, x_cc: np.ndarray) -> None:
        w = self._w[j]
        if self.params.beta == 1.0:
            np.minimum(w, x_cc, out=w)
        else:
            # w - beta * (w - (x ^ w)) never rounds above w
            w -= self.params.beta * (w - np.minimum(w, x_cc))
        self._wsum[j] = w.sum()

    def _resolve(self, x_cc: np.ndarray) -> int:
        winner, best = self._search(x_cc)
        if winner is None:
            cap = self.params.max_categories
            if cap is not None and self._size >= cap:
                winner = best
            else:
                winner = self._new_category()
        self._learn(winner, x_cc)
        return winner

    def classify_learn(self, x_raw) -> int:
        """Classify one input, learn it into the winning category and count the visit."""
        j = self._resolve(self._code(x_raw))
        self._n[j] += 1
        return j

    def classify_only(self, x_raw) -> int | None:
        """Winner selection without touching weights or counts."""
        winner, _ = self._search(self._code(x_raw))
        return winner

    def batch_learn(self, X, rng: np.random.Generator) -> list[int]:
        """Shuffled multi-epoch learning until the weights settle or ``max_epochs`` is hit.

        Returns the final epoch's category for each input, in the original
        order of ``X``. Only the final epoch is credited to the counts.
        """
        coded = [self._code(x) for x in X]
        if not coded:
            return []
        labels = [0] * len(coded)
        n_epoch = 0
        while True:
            prev = self.weights.copy()
            for i in rng.permutation(len(coded)):
                labels[i] = self._resolve(coded[i])
            n_epoch += 1
            if n_epoch >= self.params.max_epochs or converged(
                prev, self.weights, self.params.convergence_tol
            ):
                break
        for j in labels:
            self._n[j] += 1
        return labels

    def category_count(self, j: int) -> int:
        if not 0 <= j < self._size:
            raise KeyError(f"unknown category {j} (model has {self._size})")
        return int(self._n[j])

    def copy(self) -> "ArtModel":
        other = ArtModel(self.dim, self.params)
        other._w = self._w.copy()
        other._wsum = self._wsum.copy()
        other._n = self._n.copy()
        other._size = self._size
        return other

    def dumps(self) -> str:
        p = self.params
        lines = [f"art {self.dim} {self._size} {p.alpha!r} {p.rho!r} {p.beta!r}"]
        for j in range(self._size):
            ws = " ".join(format(v, ".17g") for v in self._w[j])
            lines.append(f"{j} {int(self._n[j])} {ws}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str, **param_overrides) -> "ArtModel":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        if head[0] != "art" or len(head) != 6:
            raise ValueError(f"bad ART snapshot header: {lines[0]!r}")
        dim, n_cat = int(head[1]), int(head[2])
        params = ArtParams(
            alpha=float(head[3]), rho=float(head[4]), beta=float(head[5]), **param_overrides
        )
        model = cls(dim, params)
        if len(lines) - 1 != n_cat:
            raise ValueError(f"snapshot declares {n_cat} categories but has {len(lines) - 1}")
        for line in lines[1:]:
            parts = line.split()
            if len(parts) != 2 + 2 * dim:
                raise ValueError(f"category line has {len(parts)} fields, expected {2 + 2 * dim}")
            j = model._new_category()
            if j != int(parts[0]):
                raise ValueError(f"category lines out of order at {parts[0]}")
            model._n[j] = int(parts[1])
            model._w[j] = np.array([float(v) for v in parts[2:]])
            model._wsum[j] = model._w[j].sum()
        return model
