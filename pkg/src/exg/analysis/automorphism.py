"""Automorphism groups of small directed graphs.

:func:`automorphism_group` runs colour refinement (each vertex's colour is
split by the multisets of colours on its out- and in-neighbours) and then an
individualise-and-refine backtracking search.  Generators are collected
along a stabiliser chain ``G = G_0 >= G_1 >= ...`` where ``G_k`` fixes the
first ``k`` base points; at each level only vertices not already known to
share an orbit with the base point are searched.  The generators therefore
generate the whole group, and its order is the product of the basic orbit
lengths.

:func:`brute_force_aut` enumerates every permutation and serves as the
oracle for graphs with at most eight vertices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional, Tuple

from exg.analysis.digraph import Digraph, Partition
from exg.errors import TooLarge

BRUTE_FORCE_LIMIT = 8


@dataclass(frozen=True)
class AutGroup:
    generators: Tuple[Tuple[int, ...], ...]
    orbit_partition: Partition
    order: Optional[int] = None

    @property
    def is_trivial(self):
        return not self.generators


def is_automorphism(g: Digraph, perm) -> bool:
    if sorted(perm) != list(range(g.n)):
        return False
    # a bijection on a finite edge set: image inside E means image == E
    return all(perm[v] in g.succ[perm[u]] for u, v in g.edges())


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def add_permutation(self, perm):
        for v, w in enumerate(perm):
            self.union(v, w)

    def partition(self):
        return Partition.from_labels([self.find(v) for v in range(len(self.parent))])


# -- colour refinement -----------------------------------------------------


class _Refiner:
    def __init__(self, g: Digraph):
        self.n = g.n
        self.succ = [sorted(s) for s in g.succ]
        self.pred = [sorted(p) for p in g.pred]

    def refine(self, colors):
        """Refine to the coarsest equitable colouring below ``colors``.

        Colour numbers are ranks of isomorphism-invariant signatures, so two
        runs that start from corresponding colourings end with corresponding
        colours.  The returned trace records every split and must match for
        two colourings to be related by an automorphism.
        """
        count = len(set(colors))
        trace = []
        while True:
            sigs = [
                (
                    colors[v],
                    tuple(sorted(colors[w] for w in self.succ[v])),
                    tuple(sorted(colors[w] for w in self.pred[v])),
                )
                for v in range(self.n)
            ]
            distinct = sorted(set(sigs))
            rank = {s: i for i, s in enumerate(distinct)}
            colors = [rank[s] for s in sigs]
            trace.append(tuple(distinct))
            if len(distinct) == count:
                return colors, tuple(trace)
            count = len(distinct)

    def individualize(self, colors, v):
        """Give ``v`` its own colour, placed just after its old cell mates."""
        out = [2 * c for c in colors]
        out[v] += 1
        return self.refine(out)


def _cells(colors):
    cells = {}
    for v, c in enumerate(colors):
        cells.setdefault(c, []).append(v)
    return cells


def _target_cell(colors):
    """Smallest non-singleton cell (lowest colour on ties), or None if discrete."""
    best = None
    for c, members in sorted(_cells(colors).items()):
        if len(members) > 1 and (best is None or len(members) < len(best)):
            best = members
    return best


def _search(ref: _Refiner, g: Digraph, left, right):
    """Find an automorphism mapping the ``left`` colouring onto ``right``."""
    cell = _target_cell(left)
    if cell is None:
        where = {c: v for v, c in enumerate(right)}
        perm = tuple(where[c] for c in left)
        return perm if is_automorphism(g, perm) else None
    x = cell[0]
    color = left[x]
    left2, ltrace = ref.individualize(left, x)
    candidates = [y for y, c in enumerate(right) if c == color]
    # trying x itself first finds the identity-like extension fast
    candidates.sort(key=lambda y: (y != x, y))
    for y in candidates:
        right2, rtrace = ref.individualize(right, y)
        if rtrace != ltrace:
            continue
        perm = _search(ref, g, left2, right2)
        if perm is not None:
            return perm
    return None


def automorphism_group(g: Digraph) -> AutGroup:
    """Generators, orbits and order of the automorphism group of ``g``.

    Vertex labels are ignored; only the arc structure counts.
    """
    ref = _Refiner(g)
    colors, _ = ref.refine([0] * g.n)

    # base points and the colourings that individualise them in turn
    levels = []
    while True:
        cell = _target_cell(colors)
        if cell is None:
            break
        b = cell[0]
        nxt, trace = ref.individualize(colors, b)
        levels.append((b, colors, nxt, trace))
        colors = nxt

    uf = _UnionFind(g.n)
    gens: List[Tuple[int, ...]] = []
    order = 1
    for b, colors, fixed, ftrace in reversed(levels):
        for v in range(g.n):
            if v == b or colors[v] != colors[b] or uf.find(v) == uf.find(b):
                continue
            right, rtrace = ref.individualize(colors, v)
            if rtrace != ftrace:
                continue
            perm = _search(ref, g, fixed, right)
            if perm is not None:
                gens.append(perm)
                uf.add_permutation(perm)
        order *= uf.size[uf.find(b)]

    return AutGroup(tuple(gens), uf.partition(), order)


def brute_force_aut(g: Digraph) -> AutGroup:
    """Enumerate all ``n!`` permutations; the orbit oracle for tiny graphs."""
    if g.n > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"brute force limited to {BRUTE_FORCE_LIMIT} vertices, got {g.n}")
    identity = tuple(range(g.n))
    uf = _UnionFind(g.n)
    gens = []
    order = 0
    for perm in itertools.permutations(range(g.n)):
        if is_automorphism(g, perm):
            order += 1
            if perm != identity:
                gens.append(perm)
                uf.add_permutation(perm)
    return AutGroup(tuple(gens), uf.partition(), order)
