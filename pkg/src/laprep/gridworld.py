"""Deterministic gridworlds with wall carving and their induced Markov chains.

Walls are removed edges of the 4-neighbour grid graph; every cell stays a
state. The goal's outgoing row teleports uniformly over all cells, which
folds the episodic reset into a single ergodic chain.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .chain import check_ergodic
from .errors import Disconnected, InvalidSize, NotErgodic, SchemaError, TooManyWalls

FORMAT_VERSION = 1

# up, down, left, right
ACTIONS = ((-1, 0), (1, 0), (0, -1), (0, 1))
ACTION_NAMES = ("up", "down", "left", "right")

# RNG stream ids mixed into a cell seed: walls 0, GDO init 1, GDO sampling 2.
WALL_STREAM = 0

Cell = tuple[int, int]
Edge = tuple[Cell, Cell]


def _edge(a: Cell, b: Cell) -> Edge:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class GridEnv:
    n: int
    m: int
    goal: Cell
    removed_edges: frozenset = field(default_factory=frozenset)
    seed: int = 0

    def __post_init__(self):
        r, c = self.goal
        if not (0 <= r < self.n and 0 <= c < self.m):
            raise InvalidSize(f"goal {self.goal} outside {self.n}x{self.m} grid")
        all_edges = set(adjacency_edges(self.n, self.m))
        for e in self.removed_edges:
            if e not in all_edges:
                raise SchemaError(f"{e} is not a pair of 4-adjacent cells (or not normalized)")

    @property
    def num_cells(self) -> int:
        return self.n * self.m

    def index(self, cell: Cell) -> int:
        return cell[0] * self.m + cell[1]

    def cell(self, idx: int) -> Cell:
        return divmod(idx, self.m)

    @property
    def walls(self) -> int:
        return len(self.removed_edges)

    def open_edges(self) -> list[Edge]:
        return [e for e in adjacency_edges(self.n, self.m) if e not in self.removed_edges]

    def neighbours(self) -> dict[Cell, list[Cell]]:
        nbrs: dict[Cell, list[Cell]] = {divmod(i, self.m): [] for i in range(self.num_cells)}
        for a, b in self.open_edges():
            nbrs[a].append(b)
            nbrs[b].append(a)
        return nbrs

    def is_connected(self) -> bool:
        nbrs = self.neighbours()
        start = (0, 0)
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in nbrs[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == self.num_cells

    def move(self, cell: Cell, action: int) -> Cell:
        dr, dc = ACTIONS[action]
        r, c = cell[0] + dr, cell[1] + dc
        if not (0 <= r < self.n and 0 <= c < self.m):
            return cell
        if _edge(cell, (r, c)) in self.removed_edges:
            return cell
        return (r, c)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "n": self.n,
            "m": self.m,
            "goal": list(self.goal),
            "removed_edges": [[list(a), list(b)] for a, b in sorted(self.removed_edges)],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridEnv":
        try:
            version = d.get("format_version", FORMAT_VERSION)
            if version != FORMAT_VERSION:
                raise SchemaError(f"unsupported format_version {version}")
            edges = frozenset(_edge(tuple(a), tuple(b)) for a, b in d["removed_edges"])
            return cls(int(d["n"]), int(d["m"]), tuple(d["goal"]), edges, int(d["seed"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(f"malformed environment JSON: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "GridEnv":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "GridEnv":
        return cls.from_json(Path(path).read_text())


def adjacency_edges(n: int, m: int) -> list[Edge]:
    edges = []
    for r in range(n):
        for c in range(m):
            if c + 1 < m:
                edges.append(((r, c), (r, c + 1)))
            if r + 1 < n:
                edges.append(((r, c), (r + 1, c)))
    return sorted(edges)


def build_grid(n: int, m: int) -> GridEnv:
    if n < 2 or m < 2:
        raise InvalidSize(f"grid must be at least 2x2, got {n}x{m}")
    return GridEnv(n, m, (n - 1, m - 1))


def wilson_tree(env: GridEnv, rng: np.random.Generator) -> set[Edge]:
    """Uniform spanning tree of the open-edge graph by loop-erased random walks."""
    nbrs = env.neighbours()
    cells = sorted(nbrs)
    root = cells[int(rng.integers(len(cells)))]
    in_tree = {root}
    nxt: dict[Cell, Cell] = {}
    tree: set[Edge] = set()
    for start in cells:
        u = start
        while u not in in_tree:
            opts = nbrs[u]
            nxt[u] = opts[int(rng.integers(len(opts)))]
            u = nxt[u]
        u = start
        while u not in in_tree:
            in_tree.add(u)
            tree.add(_edge(u, nxt[u]))
            u = nxt[u]
    return tree


def carve_walls(env: GridEnv, w: int, seed: int) -> GridEnv:
    """Remove ``w`` open edges while keeping the grid connected.

    A uniform spanning tree is drawn first and only non-tree edges are
    candidates; the candidate order is a fixed seeded permutation, so the
    walls at ``w`` are a prefix of the walls at ``w + 1``.
    """
    if w < 0:
        raise TooManyWalls("w must be non-negative")
    if w == 0:
        return replace(env, seed=seed)
    if not env.is_connected():
        raise Disconnected("cannot carve walls in a disconnected grid")
    open_edges = env.open_edges()
    limit = len(open_edges) - (env.num_cells - 1)
    if w > limit:
        raise TooManyWalls(f"w={w} exceeds {limit} removable edges")
    rng = np.random.default_rng([seed, WALL_STREAM])
    tree = wilson_tree(env, rng)
    candidates = [e for e in open_edges if e not in tree]
    order = rng.permutation(len(candidates))
    chosen = {candidates[i] for i in order[:w]}
    return replace(env, removed_edges=frozenset(env.removed_edges | chosen), seed=seed)


@dataclass(frozen=True)
class ErgodicChain:
    P: np.ndarray
    r: np.ndarray
    state_labels: tuple

    @property
    def size(self) -> int:
        return self.P.shape[0]


def uniform_policy(env: GridEnv) -> np.ndarray:
    return np.full((env.num_cells, len(ACTIONS)), 1.0 / len(ACTIONS))


def to_chain(env: GridEnv, policy="uniform") -> ErgodicChain:
    """Markov chain and expected per-state reward under ``policy``.

    ``policy`` is ``"uniform"`` or an array of shape (cells, 4) whose rows
    are action distributions in the order up, down, left, right.
    """
    if not env.is_connected():
        raise Disconnected("grid graph is disconnected")
    n_s = env.num_cells
    if isinstance(policy, str):
        if policy != "uniform":
            raise ValueError(f"unknown policy {policy!r}")
        pi = uniform_policy(env)
    else:
        pi = np.asarray(policy, dtype=np.float64)
        if pi.shape != (n_s, len(ACTIONS)):
            raise ValueError(f"policy table must have shape {(n_s, len(ACTIONS))}")
        if np.any(pi < 0) or np.any(np.abs(pi.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("policy rows must be probability distributions")
    goal_idx = env.index(env.goal)
    P = np.zeros((n_s, n_s))
    r = np.zeros(n_s)
    for s in range(n_s):
        if s == goal_idx:
            P[s, :] = 1.0 / n_s
            r[s] = -1.0
            continue
        cell = env.cell(s)
        for a in range(len(ACTIONS)):
            t = env.index(env.move(cell, a))
            P[s, t] += pi[s, a]
            r[s] += pi[s, a] * (1.0 if t == goal_idx else -1.0)
    labels = tuple(env.cell(s) for s in range(n_s))
    if not check_ergodic(P):
        raise NotErgodic("induced chain is not irreducible and aperiodic")
    return ErgodicChain(P, r, labels)
