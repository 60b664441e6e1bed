#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Graph Module for the Ising toolkit
The configuration model: clone pairings, spin configurations with cached energy,
switchings and rooted neighborhoods
"""

from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import InvalidInputError, InvalidParameterError, InvalidSwitchError
from .utils.logger import get_logger

logger = get_logger(__name__)

SWITCH_MODES = ("cross", "parallel")


class Pairing:
    """
    A perfect matching on d*n clones; clone c belongs to vertex c // d
    """

    def __init__(self, n: int, d: int, mate: Sequence[int]):
        self.n = int(n)
        self.d = int(d)
        self.mate = np.asarray(mate, dtype=np.int64)
        self._validate()
        self._neighbors: Optional[List[Tuple[int, ...]]] = None
        self._loops: Optional[List[int]] = None

    def _validate(self):
        size = self.n * self.d
        if self.mate.shape != (size,):
            raise InvalidInputError(f"mate must have {size} entries, got {self.mate.shape}")
        clones = np.arange(size)
        if np.any(self.mate < 0) or np.any(self.mate >= size):
            raise InvalidInputError("mate entries out of range")
        if np.any(self.mate == clones) or np.any(self.mate[self.mate] != clones):
            raise InvalidInputError("mate is not a fixed-point-free involution")

    @property
    def num_clones(self) -> int:
        return self.n * self.d

    @property
    def num_edges(self) -> int:
        return self.n * self.d // 2

    def vertex_of(self, clone: int) -> int:
        return clone // self.d

    def edges(self) -> np.ndarray:
        """Clone edges (c, mate(c)) with c < mate(c), ascending in c"""
        clones = np.arange(self.num_clones)
        lower = clones[clones < self.mate]
        return np.column_stack([lower, self.mate[lower]])

    def vertex_edges(self) -> np.ndarray:
        """Edges as vertex pairs, same order as edges()"""
        return self.edges() // self.d

    def neighbors(self, v: int) -> Tuple[int, ...]:
        """Non-loop neighbors of v with multiplicity"""
        self._build_tables()
        return self._neighbors[v]

    def loop_count(self, v: int) -> int:
        self._build_tables()
        return self._loops[v]

    def neighbor_table(self) -> List[Tuple[int, ...]]:
        self._build_tables()
        return self._neighbors

    def _build_tables(self):
        if self._neighbors is not None:
            return
        other = (self.mate // self.d).reshape(self.n, self.d)
        neighbors = []
        loops = []
        for v in range(self.n):
            row = [int(w) for w in other[v]]
            neighbors.append(tuple(w for w in row if w != v))
            loops.append((self.d - len(neighbors[-1])) // 2)
        self._neighbors = neighbors
        self._loops = loops

    def multiplicity(self, u: int, v: int) -> int:
        """Number of (non-loop) edges between u and v"""
        return self.neighbors(u).count(v)

    def copy(self) -> "Pairing":
        return Pairing(self.n, self.d, self.mate.copy())

    def __eq__(self, other) -> bool:
        return (isinstance(other, Pairing) and self.n == other.n and self.d == other.d
                and np.array_equal(self.mate, other.mate))

    def __hash__(self) -> int:
        return hash((self.n, self.d, self.mate.tobytes()))

    def __repr__(self) -> str:
        return f"Pairing(n={self.n}, d={self.d})"

    # ---------------------- text format ----------------------

    def to_text(self) -> str:
        lines = [f"{self.n} {self.d}"]
        lines.extend(f"{a} {b}" for a, b in self.edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Pairing":
        lines = [line.strip() for line in text.splitlines() if line.strip()]
        if not lines:
            raise InvalidInputError("empty pairing text")
        try:
            n, d = (int(x) for x in lines[0].split())
            mate = np.full(n * d, -1, dtype=np.int64)
            for line in lines[1:1 + n * d // 2]:
                a, b = (int(x) for x in line.split())
                mate[a], mate[b] = b, a
        except ValueError as e:
            raise InvalidInputError(f"malformed pairing text: {e}")
        return cls(n, d, mate)


class SpinConfig:
    """
    +-1 spins on the vertices of a pairing with cached plus count and monochromatic-edge count

    Plus and minus vertices are kept in index lists so a uniform vertex of either sign is O(1).
    """

    def __init__(self, pairing: Pairing, spins: Sequence[int]):
        spins = [int(s) for s in spins]
        if len(spins) != pairing.n or any(s not in (1, -1) for s in spins):
            raise InvalidInputError(f"spins must be {pairing.n} values in {{+1, -1}}")
        self.pairing = pairing
        self._spins = spins
        self._neighbors = pairing.neighbor_table()
        self.plus_list: List[int] = [v for v, s in enumerate(spins) if s == 1]
        self.minus_list: List[int] = [v for v, s in enumerate(spins) if s == -1]
        self._position: List[int] = [0] * pairing.n
        for i, v in enumerate(self.plus_list):
            self._position[v] = i
        for i, v in enumerate(self.minus_list):
            self._position[v] = i
        self.H = count_mono(pairing, spins)

    @property
    def n(self) -> int:
        return self.pairing.n

    @property
    def k_plus(self) -> int:
        return len(self.plus_list)

    @property
    def magnetization(self) -> float:
        return 2.0 * self.k_plus / self.n - 1.0

    @property
    def spins(self) -> np.ndarray:
        return np.array(self._spins, dtype=np.int8)

    def spin(self, v: int) -> int:
        return self._spins[v]

    def field(self, v: int) -> int:
        """Sum of non-loop neighbor spins of v"""
        s = self._spins
        return sum(s[w] for w in self._neighbors[v])

    def flip_delta(self, v: int) -> int:
        return -self._spins[v] * self.field(v)

    def swap_delta(self, u: int, v: int) -> int:
        """Change of H when opposite spins at u and v are exchanged"""
        a_uv = self.pairing.multiplicity(u, v)
        return -self._spins[u] * self.field(u) - self._spins[v] * self.field(v) - 2 * a_uv

    def flip(self, v: int) -> None:
        """Flip v, updating H and the index lists"""
        self.H += self.flip_delta(v)
        source, target = (self.plus_list, self.minus_list) if self._spins[v] == 1 else (self.minus_list, self.plus_list)
        i = self._position[v]
        last = source.pop()
        if last != v:
            source[i] = last
            self._position[last] = i
        self._position[v] = len(target)
        target.append(v)
        self._spins[v] = -self._spins[v]

    def swap(self, u: int, v: int) -> None:
        """Exchange the opposite spins of u and v; k_plus is unchanged"""
        if self._spins[u] == self._spins[v]:
            raise InvalidInputError(f"swap needs opposite spins at {u} and {v}")
        self.H += self.swap_delta(u, v)
        iu, iv = self._position[u], self._position[v]
        if self._spins[u] == 1:
            self.plus_list[iu] = v
            self.minus_list[iv] = u
        else:
            self.minus_list[iu] = v
            self.plus_list[iv] = u
        self._position[u], self._position[v] = iv, iu
        self._spins[u], self._spins[v] = self._spins[v], self._spins[u]

    def copy(self) -> "SpinConfig":
        return SpinConfig(self.pairing, self._spins)

    def recount(self) -> int:
        return count_mono(self.pairing, self._spins)


@dataclass(frozen=True)
class Switch:
    """Edges (c1, c2), (c3, c4) replaced by (c1, c4), (c2, c3) [cross] or (c1, c3), (c2, c4) [parallel]"""
    c1: int
    c2: int
    c3: int
    c4: int
    mode: str = "cross"

    def new_edges(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        if self.mode == "cross":
            return (self.c1, self.c4), (self.c2, self.c3)
        return (self.c1, self.c3), (self.c2, self.c4)

    def inverse(self) -> "Switch":
        (a, b), (c, e) = self.new_edges()
        return Switch(a, b, c, e, "parallel")


@dataclass
class LocalBall:
    """BFS ball of radius r around a root in the multigraph"""
    root: int
    radius: int
    depth: Dict[int, int]
    children: Dict[int, List[int]]
    num_edges: int
    has_loop: bool
    is_tree: bool

    @property
    def vertices(self) -> List[int]:
        return list(self.depth)

    @property
    def boundary(self) -> List[int]:
        return [v for v, r in self.depth.items() if r == self.radius]


# ---------------------- operations ----------------------

def sample_uniform_pairing(n: int, d: int, rng: np.random.Generator) -> Pairing:
    """
    Uniform perfect matching on d*n clones

    The lowest unmatched clone is matched to a uniformly chosen remaining clone, repeatedly.

    Args:
        n: Number of vertices
        d: Degree
        rng: Random stream

    Returns:
        Pairing
    """
    size = n * d
    if size % 2 != 0:
        raise InvalidParameterError(f"d*n must be even, got d={d}, n={n}")
    # pool holds the unmatched clones, position maps clone -> index in pool
    pool = list(range(size))
    position = list(range(size))
    mate = [-1] * size
    draws = rng.random(size // 2)
    draw = 0
    for c in range(size):
        if mate[c] != -1:
            continue
        _remove(pool, position, c)
        j = int(draws[draw] * len(pool))
        draw += 1
        partner = pool[j]
        _remove(pool, position, partner)
        mate[c], mate[partner] = partner, c
    logger.debug(f"sample_uniform_pairing n={n} d={d}")
    return Pairing(n, d, mate)


def _remove(pool: List[int], position: List[int], item: int) -> None:
    i = position[item]
    last = pool.pop()
    if last != item:
        pool[i] = last
        position[last] = i


def count_mono(pairing: Pairing, spins) -> int:
    """Monochromatic edges over all d*n/2 pairing edges, loops included"""
    s = np.asarray(spins)
    edges = pairing.vertex_edges()
    return int(np.count_nonzero(s[edges[:, 0]] == s[edges[:, 1]]))


def _check_switch(pairing: Pairing, switch: Switch) -> None:
    clones = (switch.c1, switch.c2, switch.c3, switch.c4)
    if len(set(clones)) != 4:
        raise InvalidSwitchError(f"switch clones must be distinct: {clones}")
    if switch.mode not in SWITCH_MODES:
        raise InvalidSwitchError(f"unknown switch mode {switch.mode}")
    if not all(0 <= c < pairing.num_clones for c in clones):
        raise InvalidSwitchError(f"switch clones out of range: {clones}")
    if pairing.mate[switch.c1] != switch.c2 or pairing.mate[switch.c3] != switch.c4:
        raise InvalidSwitchError(f"edges ({switch.c1},{switch.c2}) and ({switch.c3},{switch.c4}) not in pairing")


def apply_switch(pairing: Pairing, switch: Switch) -> Pairing:
    """Replace the two switch edges; returns a new pairing"""
    _check_switch(pairing, switch)
    mate = pairing.mate.copy()
    for a, b in switch.new_edges():
        mate[a], mate[b] = b, a
    return Pairing(pairing.n, pairing.d, mate)


def switch_delta_h(pairing: Pairing, spins, switch: Switch) -> int:
    """Change of the monochromatic-edge count caused by a switch"""
    _check_switch(pairing, switch)
    s = np.asarray(spins)
    d = pairing.d

    def mono(a, b):
        return int(s[a // d] == s[b // d])

    (a, b), (c, e) = switch.new_edges()
    before = mono(switch.c1, switch.c2) + mono(switch.c3, switch.c4)
    return mono(a, b) + mono(c, e) - before


def random_switch(pairing: Pairing, rng: np.random.Generator) -> Switch:
    """Two distinct uniform edges, random orientation, random mode"""
    edges = pairing.edges()
    if len(edges) < 2:
        raise InvalidSwitchError("a switch needs at least two edges")
    i, j = rng.choice(len(edges), size=2, replace=False)
    first, second = edges[i], edges[j]
    if rng.random() < 0.5:
        first = first[::-1]
    if rng.random() < 0.5:
        second = second[::-1]
    mode = SWITCH_MODES[int(rng.random() < 0.5)]
    return Switch(int(first[0]), int(first[1]), int(second[0]), int(second[1]), mode)


def neighborhood(pairing: Pairing, v: int, r: int) -> LocalBall:
    """
    Breadth-first ball of radius r around v

    Loops and multi-edges are kept; edges incident to vertices of depth < r are explored.

    Args:
        pairing: Configuration-model pairing
        v: Root vertex
        r: Radius

    Returns:
        LocalBall; is_tree iff the ball is loopless and acyclic
    """
    if r < 0:
        raise InvalidParameterError(f"radius must be non-negative, got {r}")
    d = pairing.d
    depth = {v: 0}
    children: Dict[int, List[int]] = {v: []}
    seen_clones = set()
    num_edges = 0
    has_loop = False
    queue = deque([v])
    while queue:
        u = queue.popleft()
        if depth[u] >= r:
            continue
        for c in range(u * d, (u + 1) * d):
            if c in seen_clones:
                continue
            partner = int(pairing.mate[c])
            seen_clones.add(c)
            seen_clones.add(partner)
            num_edges += 1
            w = partner // d
            if w == u:
                has_loop = True
                continue
            if w not in depth:
                depth[w] = depth[u] + 1
                children[w] = []
                children[u].append(w)
                queue.append(w)
    is_tree = not has_loop and num_edges == len(depth) - 1
    return LocalBall(root=v, radius=r, depth=depth, children=children,
                     num_edges=num_edges, has_loop=has_loop, is_tree=is_tree)
