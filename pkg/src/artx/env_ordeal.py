"""Ordeal: fetch the sword from one cave, then slay the duck in the other.

Episode totals are -1 (duck reached without the sword), 0 (quit or time
out), 1 (sword only) or 2 (sword, then duck). Observations are the 5x5 view
around the agent, one-hot over 8 tile types.
"""

from __future__ import annotations

import dataclasses
from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from importlib import resources
from pathlib import Path

import numpy as np

VIEW = 5
RADIUS = VIEW // 2
MAX_STEPS = 500


class Tile(IntEnum):
    EMPTY = 0
    WALL = 1
    AGENT = 2
    SWORD = 3
    DUCK = 4
    CAVE_DOOR_A = 5
    CAVE_DOOR_B = 6
    SNOW = 7


N_TILES = len(Tile)


class Action(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    QUIT = 4


N_ACTIONS = len(Action)
MOVES = {Action.UP: (-1, 0), Action.DOWN: (1, 0), Action.LEFT: (0, -1), Action.RIGHT: (0, 1)}


class Room(IntEnum):
    OVERWORLD = 0
    CAVE_A = 1
    CAVE_B = 2


ROOM_NAMES = {"overworld": Room.OVERWORLD, "cave_a": Room.CAVE_A, "cave_b": Room.CAVE_B}
DOOR_TILES = (Tile.CAVE_DOOR_A, Tile.CAVE_DOOR_B)
CHARS = {".": Tile.EMPTY, "#": Tile.WALL, "~": Tile.SNOW, "A": Tile.CAVE_DOOR_A, "B": Tile.CAVE_DOOR_B}
TILE_CHARS = {
    Tile.EMPTY: ".",
    Tile.WALL: "#",
    Tile.AGENT: "@",
    Tile.SWORD: "S",
    Tile.DUCK: "D",
    Tile.CAVE_DOOR_A: "A",
    Tile.CAVE_DOOR_B: "B",
    Tile.SNOW: "~",
}


class LayoutError(ValueError):
    """Layout file is malformed or the level cannot be solved."""


class EpisodeFinishedError(RuntimeError):
    pass


@dataclass
class Layout:
    rooms: dict[Room, np.ndarray]  # static tiles, sword/duck/agent markers removed
    start: tuple[int, int]
    sword: tuple[int, int]
    duck: tuple[int, int]
    # arrival cell when entering room via a door tile, keyed by (room, door tile)
    arrivals: dict[tuple[Room, Tile], tuple[int, int]]
    # destination room when stepping on a door tile in a room
    links: dict[tuple[Room, Tile], Room]

    @classmethod
    def parse(cls, text: str) -> "Layout":
        blocks: dict[Room, list[str]] = {}
        current = None
        for raw in text.splitlines():
            line = raw.rstrip()
            if not line or line.startswith("#") and current is None:
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1].strip()
                if name not in ROOM_NAMES:
                    raise LayoutError(f"unknown room block [{name}]")
                current = ROOM_NAMES[name]
                blocks[current] = []
            elif current is None:
                raise LayoutError(f"grid row before any room header: {line!r}")
            else:
                blocks[current].append(line)
        if set(blocks) != set(Room):
            raise LayoutError(f"layout needs blocks {sorted(ROOM_NAMES)}, got {sorted(r.name for r in blocks)}")

        rooms, marks = {}, {}
        for room, rows in blocks.items():
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise LayoutError(f"ragged rows in room {room.name}")
            floor = Tile.SNOW if any("~" in r for r in rows) else Tile.EMPTY
            grid = np.empty((len(rows), width), dtype=np.int8)
            for i, row in enumerate(rows):
                for j, ch in enumerate(row):
                    if ch in "@SD":
                        marks.setdefault(ch, []).append((room, (i, j)))
                        grid[i, j] = floor
                    elif ch in CHARS:
                        grid[i, j] = CHARS[ch]
                    else:
                        raise LayoutError(f"unknown tile {ch!r} in room {room.name} at ({i}, {j})")
            rooms[room] = grid

        def unique(ch, room):
            found = marks.get(ch, [])
            if len(found) != 1 or found[0][0] != room:
                raise LayoutError(f"expected exactly one {ch!r} in room {room.name}")
            return found[0][1]

        start = unique("@", Room.OVERWORLD)
        sword = unique("S", Room.CAVE_A)
        duck = unique("D", Room.CAVE_B)

        links, arrivals = {}, {}
        for door in DOOR_TILES:
            where = [(room, tuple(int(v) for v in np.argwhere(g == door)[0])) for room, g in rooms.items()
                     if (g == door).sum() == 1]
            counts = [int((g == door).sum()) for g in rooms.values()]
            if len(where) != 2 or sum(counts) != 2:
                raise LayoutError(f"door {door.name} must appear once in exactly two rooms")
            (r1, p1), (r2, p2) = where
            links[(r1, door)], links[(r2, door)] = r2, r1
            for room, pos in where:
                arrivals[(room, door)] = _arrival_cell(rooms[room], pos, room)
        return cls(rooms, start, sword, duck, arrivals, links)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "Layout":
        if path is None:
            text = resources.files("artx").joinpath("data/ordeal.txt").read_text()
        else:
            text = Path(path).read_text()
        return cls.parse(text)


def _arrival_cell(grid: np.ndarray, door: tuple[int, int], room: Room) -> tuple[int, int]:
    h, w = grid.shape
    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        r, c = door[0] + dr, door[1] + dc
        if 0 <= r < h and 0 <= c < w and grid[r, c] not in (Tile.WALL, *DOOR_TILES):
            return (r, c)
    raise LayoutError(f"door at {door} in room {room.name} has no walkable neighbour")


@dataclass
class WorldState:
    room: Room
    agent_pos: tuple[int, int]
    has_sword: bool
    duck_pos: tuple[int, int] | None
    duck_alive: bool
    step_count: int = 0
    done: bool = False
    score: int = 0

    def key(self):
        """Hashable identity for graph search (step counter excluded)."""
        return (int(self.room), self.agent_pos, self.has_sword, self.duck_pos, self.duck_alive,
                self.done, self.score)


@dataclass
class StepResult:
    obs: np.ndarray
    extrinsic: float
    done: bool


class OrdealEnv:
    def __init__(self, layout: Layout | str | Path | None = None, max_steps: int = MAX_STEPS):
        self.layout = layout if isinstance(layout, Layout) else Layout.load(layout)
        self.max_steps = max_steps
        self._eye = np.eye(N_TILES, dtype=np.uint8)
        self._padded = {
            room: np.pad(g, RADIUS, constant_values=Tile.WALL) for room, g in self.layout.rooms.items()
        }
        self.state: WorldState | None = None

    def reset(self, seed: int | None = None) -> StepResult:
        # the level is fixed; the seed is accepted for interface symmetry
        lay = self.layout
        self.state = WorldState(Room.OVERWORLD, lay.start, False, lay.duck, True)
        return StepResult(self.observe(), 0.0, False)

    def get_state(self) -> WorldState:
        return dataclasses.replace(self.state)

    def set_state(self, state: WorldState) -> None:
        self.state = dataclasses.replace(state)

    def step(self, action) -> StepResult:
        s = self.state
        if s is None or s.done:
            raise EpisodeFinishedError("step() on a finished episode; call reset()")
        action = Action(int(action))
        reward = 0
        s.step_count += 1
        if action is Action.QUIT:
            s.done = True
        else:
            reward = self._move(s, action)
        if not s.done and s.step_count >= self.max_steps:
            s.done = True
        s.score += reward
        return StepResult(self.observe(), float(reward), s.done)

    def _move(self, s: WorldState, action: Action) -> int:
        grid = self.layout.rooms[s.room]
        dr, dc = MOVES[action]
        r, c = s.agent_pos[0] + dr, s.agent_pos[1] + dc
        tile = grid[r, c]
        reward = 0
        if tile == Tile.WALL:
            pass
        elif tile in DOOR_TILES:
            door = Tile(tile)
            s.room = self.layout.links[(s.room, door)]
            s.agent_pos = self.layout.arrivals[(s.room, door)]
        else:
            s.agent_pos = (r, c)
        if s.room is Room.CAVE_A and not s.has_sword and s.agent_pos == self.layout.sword:
            s.has_sword = True
            reward += 1
        if s.room is Room.CAVE_B and s.duck_alive:
            if s.agent_pos != s.duck_pos:
                s.duck_pos = self._duck_step(s)
            if s.agent_pos == s.duck_pos:
                s.done = True
                if s.has_sword:
                    s.duck_alive = False
                    reward += 1
                else:
                    reward -= 1
        return reward

    def _duck_step(self, s: WorldState) -> tuple[int, int]:
        grid = self.layout.rooms[Room.CAVE_B]
        (ar, ac), (dr, dc) = s.agent_pos, s.duck_pos
        candidates = []
        if ar != dr:
            candidates.append((dr + (1 if ar > dr else -1), dc))
        if ac != dc:
            candidates.append((dr, dc + (1 if ac > dc else -1)))
        for r, c in candidates:
            if grid[r, c] not in (Tile.WALL, *DOOR_TILES):
                return (r, c)
        return s.duck_pos

    def render_room(self, state: WorldState | None = None) -> np.ndarray:
        """Full tile grid of the agent's current room with all entities drawn."""
        s = state if state is not None else self.state
        grid = self.layout.rooms[s.room].copy()
        if s.room is Room.CAVE_A and not s.has_sword:
            grid[self.layout.sword] = Tile.SWORD
        if s.room is Room.CAVE_B and s.duck_alive:
            grid[s.duck_pos] = Tile.DUCK
        grid[s.agent_pos] = Tile.AGENT
        return grid

    def view(self, state: WorldState | None = None) -> np.ndarray:
        """5x5 tile window centred on the agent; outside the room reads as wall."""
        s = state if state is not None else self.state
        r, c = s.agent_pos
        win = self._padded[s.room][r : r + VIEW, c : c + VIEW].copy()
        if s.room is Room.CAVE_A and not s.has_sword:
            sr, sc = self.layout.sword[0] - r + RADIUS, self.layout.sword[1] - c + RADIUS
            if 0 <= sr < VIEW and 0 <= sc < VIEW:
                win[sr, sc] = Tile.SWORD
        if s.room is Room.CAVE_B and s.duck_alive:
            dr, dc = s.duck_pos[0] - r + RADIUS, s.duck_pos[1] - c + RADIUS
            if 0 <= dr < VIEW and 0 <= dc < VIEW:
                win[dr, dc] = Tile.DUCK
        win[RADIUS, RADIUS] = Tile.AGENT
        return win

    def observe(self, state: WorldState | None = None) -> np.ndarray:
        """Binary ``(8, 5, 5)`` tensor, channel ``t`` marks cells holding tile ``t``."""
        return self._eye[self.view(state)].transpose(2, 0, 1).copy()

    def ascii(self, state: WorldState | None = None) -> str:
        return "\n".join("".join(TILE_CHARS[Tile(t)] for t in row) for row in self.render_room(state))


def _search_graph(env: OrdealEnv):
    """Breadth-first search over reachable world states from reset.

    Yields ``(state, parent_key, action)`` in BFS order; terminal states are
    yielded but not expanded.
    """
    env.reset()
    root = env.get_state()
    seen = {root.key()}
    queue = deque([root])
    yield root, None, None
    while queue:
        s = queue.popleft()
        if s.done:
            continue
        for a in Action:
            env.set_state(s)
            env.step(a)
            nxt = env.get_state()
            k = nxt.key()
            if k in seen:
                continue
            seen.add(k)
            queue.append(nxt)
            yield nxt, s.key(), a


def reachable_totals(env: OrdealEnv) -> set[int]:
    """Every episode total an action sequence can realise.

    Quitting is always available, so the running score of any reachable
    live state is itself an achievable total.
    """
    return {s.score for s, _, _ in _search_graph(env)}


def bfs_solve(env: OrdealEnv) -> list[Action]:
    """Shortest action sequence that finishes the episode with score 2."""
    parents = {}
    goal = None
    for s, parent, a in _search_graph(env):
        parents[s.key()] = (parent, a, s.step_count)
        if s.done and s.score == 2:
            goal = s
            break
    env.reset()
    if goal is None:
        raise LayoutError("layout is unsolvable: no path collects the sword and then slays the duck")
    plan = []
    k = goal.key()
    while parents[k][0] is not None:
        parent, a, _ = parents[k]
        plan.append(a)
        k = parent
    plan.reverse()
    if len(plan) >= env.max_steps:
        raise LayoutError(f"shortest solution needs {len(plan)} steps, cap is {env.max_steps}")
    return plan
