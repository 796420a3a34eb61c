"""Small directed-graph toolkit used by the parallelism analysis.

Vertices are the integers ``0..n-1``.  An optional label per vertex carries
``(exec_id, region_id)`` when the graph came from an execution graph; vertex
order always follows ascending exec id so that index order is a valid
tie-break everywhere.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from exg.errors import (
    EmptyGraph,
    EmptySet,
    InvalidPartition,
    NotADag,
    SamePair,
)


class Digraph:
    def __init__(self, n: int, edges=(), labels: Optional[Sequence[Tuple[int, int]]] = None):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        self.n = n
        self.succ: List[set] = [set() for _ in range(n)]
        self.pred: List[set] = [set() for _ in range(n)]
        for u, v in edges:
            self.add_edge(u, v)
        if labels is not None and len(labels) != n:
            raise ValueError(f"{len(labels)} labels for {n} vertices")
        self.labels = list(labels) if labels is not None else None

    def add_edge(self, u, v):
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise IndexError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
        self.succ[u].add(v)
        self.pred[v].add(u)

    @classmethod
    def from_execution_graph(cls, g, kinds=None):
        """Index the vertices of ``g`` by ascending exec id.

        Parallel edges of different kinds collapse into one arc.
        """
        verts = g.vertices
        index = {v.exec_id: i for i, v in enumerate(verts)}
        arcs = {(index[s], index[d]) for s, d, _ in g.edge_set(kinds)}
        return cls(len(verts), sorted(arcs), [(v.exec_id, v.region_id) for v in verts])

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in sorted(self.succ[u])]

    def num_edges(self):
        return sum(len(s) for s in self.succ)

    def has_edge(self, u, v):
        return v in self.succ[u]

    def exec_id(self, v):
        return self.labels[v][0] if self.labels else v

    def edge_set(self):
        return frozenset(self.edges())

    def __repr__(self):
        return f"Digraph(n={self.n}, edges={self.edges()})"


def topological_order(g: Digraph) -> Optional[List[int]]:
    """Kahn's algorithm, smallest index first; None if there is a cycle."""
    import heapq

    indeg = [len(p) for p in g.pred]
    heap = [v for v in range(g.n) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for w in g.succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, w)
    return order if len(order) == g.n else None


def is_dag(g: Digraph) -> bool:
    return topological_order(g) is not None


def require_dag(g: Digraph) -> List[int]:
    order = topological_order(g)
    if order is None:
        raise NotADag("graph contains a directed cycle")
    return order


class Reachability:
    """``reach(u, v)``: a directed path with at least one edge leads from u to v.

    Rows are Python-int bitsets.  DAGs are closed in one reverse topological
    sweep; graphs with cycles fall back to a BFS from every vertex.
    """

    def __init__(self, g: Digraph):
        self.n = g.n
        rows = [0] * g.n
        order = topological_order(g)
        if order is not None:
            for v in reversed(order):
                bits = 0
                for w in g.succ[v]:
                    bits |= (1 << w) | rows[w]
                rows[v] = bits
        else:
            for s in range(g.n):
                bits = 0
                queue = deque(g.succ[s])
                while queue:
                    v = queue.popleft()
                    if bits >> v & 1:
                        continue
                    bits |= 1 << v
                    queue.extend(g.succ[v])
                rows[s] = bits
        self.rows = rows
        # column view: who reaches v
        cols = [0] * g.n
        for u, bits in enumerate(rows):
            v = 0
            while bits:
                if bits & 1:
                    cols[v] |= 1 << u
                bits >>= 1
                v += 1
        self.cols = cols
        self._all = (1 << g.n) - 1

    def __call__(self, u, v) -> bool:
        return bool(self.rows[u] >> v & 1)

    reach = __call__

    def related_mask(self, v):
        """Bitset of vertices comparable with ``v`` (either direction), excluding v."""
        return (self.rows[v] | self.cols[v]) & ~(1 << v)

    def ind_class_mask(self, v):
        return self._all & ~self.related_mask(v)


def reachability(g: Digraph) -> Reachability:
    return Reachability(g)


def _mask(vertices):
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def _members(mask):
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return out


def independent(r: Reachability, u, v) -> bool:
    if u == v:
        raise SamePair("independence is defined on distinct vertices")
    return not r(u, v) and not r(v, u)


def ind_class(r: Reachability, v) -> FrozenSet[int]:
    """Vertices independent of ``v``, together with ``v`` itself."""
    return frozenset(_members(r.ind_class_mask(v)))


def _nonempty(vertices):
    vs = list(vertices)
    if not vs:
        raise EmptySet("vertex set must be non-empty")
    return vs


def is_independent_set(r: Reachability, vertices) -> bool:
    vs = _nonempty(vertices)
    m = _mask(vs)
    return all(not (r.related_mask(v) & m) for v in vs)


def is_maximally_independent(r: Reachability, vertices) -> bool:
    """``I`` equals the intersection of the independence classes of its members."""
    vs = _nonempty(vertices)
    inter = r._all
    for v in vs:
        inter &= r.ind_class_mask(v)
    return inter == _mask(vs)


def ind_class_sizes(r: Reachability) -> List[int]:
    return [bin(r.ind_class_mask(v)).count("1") for v in range(r.n)]


def is_completely_serial(g: Digraph) -> bool:
    require_dag(g)
    r = Reachability(g)
    return all(s == 1 for s in ind_class_sizes(r))


def is_completely_parallel(g: Digraph) -> bool:
    require_dag(g)
    r = Reachability(g)
    return all(s == g.n for s in ind_class_sizes(r))


# -- partitions and quotients ----------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Blocks of a vertex set, ordered by their smallest member."""

    blocks: Tuple[Tuple[int, ...], ...]
    block_of: Tuple[int, ...] = field(repr=False, compare=False)

    @classmethod
    def from_blocks(cls, blocks, n=None):
        clean = [tuple(sorted(b)) for b in blocks]
        if any(not b for b in clean):
            raise InvalidPartition("empty block")
        clean.sort(key=lambda b: b[0])
        size = sum(len(b) for b in clean)
        if n is None:
            n = size
        block_of = [-1] * n
        for i, b in enumerate(clean):
            for v in b:
                if not 0 <= v < n:
                    raise InvalidPartition(f"vertex {v} outside 0..{n - 1}")
                if block_of[v] != -1:
                    raise InvalidPartition(f"vertex {v} in two blocks")
                block_of[v] = i
        if -1 in block_of:
            raise InvalidPartition(f"vertex {block_of.index(-1)} not covered")
        return cls(tuple(clean), tuple(block_of))

    @classmethod
    def from_labels(cls, labels):
        """Group vertices by equal label (any hashable)."""
        groups: Dict[object, list] = {}
        for v, lab in enumerate(labels):
            groups.setdefault(lab, []).append(v)
        return cls.from_blocks(groups.values(), len(labels))

    @classmethod
    def singletons(cls, n):
        return cls.from_blocks([[v] for v in range(n)], n)

    @classmethod
    def whole(cls, n):
        return cls.from_blocks([list(range(n))], n) if n else cls((), ())

    @property
    def n(self):
        return len(self.block_of)

    def __len__(self):
        return len(self.blocks)

    def is_discrete(self):
        return len(self.blocks) == self.n

    def compose(self, coarser: "Partition") -> "Partition":
        """Pull ``coarser`` (a partition of this partition's blocks) back to vertices."""
        if coarser.n != len(self.blocks):
            raise InvalidPartition(
                f"outer partition covers {coarser.n} items, inner has {len(self.blocks)} blocks"
            )
        return Partition.from_labels([coarser.block_of[b] for b in self.block_of])


@dataclass
class QuotientGraph:
    """Quotient of a digraph by a partition.

    Vertex ``i`` of :attr:`graph` stands for ``partition.blocks[i]``.
    ``kind_sets`` maps each quotient arc to the dependency kinds merged
    into it (empty when the source graph carried no kinds).
    """

    graph: Digraph
    partition: Partition
    kind_sets: Dict[Tuple[int, int], FrozenSet[str]] = field(default_factory=dict)

    @property
    def n(self):
        return self.graph.n


def quotient(g: Digraph, p: Partition, edge_kinds=None) -> QuotientGraph:
    """``edge_kinds`` optionally maps each arc ``(u, v)`` of ``g`` to a set of kind names."""
    if p.n != g.n:
        raise InvalidPartition(f"partition covers {p.n} vertices, graph has {g.n}")
    kinds: Dict[Tuple[int, int], set] = {}
    arcs = set()
    for u, v in g.edges():
        bu, bv = p.block_of[u], p.block_of[v]
        if bu == bv:
            continue
        arcs.add((bu, bv))
        if edge_kinds is not None:
            kinds.setdefault((bu, bv), set()).update(edge_kinds.get((u, v), ()))
    labels = None
    if g.labels is not None:
        labels = [g.labels[b[0]] for b in p.blocks]
    qg = Digraph(len(p.blocks), sorted(arcs), labels)
    return QuotientGraph(qg, p, {a: frozenset(k) for a, k in sorted(kinds.items())})


def is_dag_preserving(g: Digraph, p: Partition) -> bool:
    require_dag(g)
    return is_dag(quotient(g, p).graph)


def longest_path_vertices(g: Digraph) -> int:
    """Most vertices on any directed path."""
    if g.n == 0:
        raise EmptyGraph("longest path of an empty graph")
    order = require_dag(g)
    depth = [1] * g.n
    for v in order:
        for w in g.succ[v]:
            if depth[v] + 1 > depth[w]:
                depth[w] = depth[v] + 1
    return max(depth)


def check_chain(q) -> bool:
    """True iff the graph is a single directed path v1 -> v2 -> ... -> vk."""
    g = q.graph if isinstance(q, QuotientGraph) else q
    if g.n == 0:
        return False
    if g.num_edges() != g.n - 1:
        return False
    if any(len(s) > 1 for s in g.succ) or any(len(p) > 1 for p in g.pred):
        return False
    sources = [v for v in range(g.n) if not g.pred[v]]
    if len(sources) != 1:
        return False
    # walk from the source; a path must visit everything
    seen, v = 1, sources[0]
    while g.succ[v]:
        (v,) = g.succ[v]
        seen += 1
        if seen > g.n:
            return False
    return seen == g.n


def is_weakly_connected(g: Digraph) -> bool:
    if g.n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in g.succ[v] | g.pred[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == g.n


def exec_time_class(r: Reachability, block) -> int:
    vs = _nonempty(block)
    return 1 if is_independent_set(r, vs) else len(vs)


def exec_time_quotient(g: Digraph, p: Partition, r: Optional[Reachability] = None) -> int:
    if p.n != g.n:
        raise InvalidPartition(f"partition covers {p.n} vertices, graph has {g.n}")
    if r is None:
        r = Reachability(g)
    return sum(exec_time_class(r, b) for b in p.blocks)
