"""Iterated orbit quotients and the aggregate analysis report."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional

from exg.analysis.automorphism import automorphism_group
from exg.analysis.digraph import (
    Digraph,
    Partition,
    QuotientGraph,
    Reachability,
    check_chain,
    exec_time_quotient,
    ind_class_sizes,
    is_dag,
    is_independent_set,
    is_weakly_connected,
    longest_path_vertices,
    quotient,
    require_dag,
)
from exg.errors import InvariantViolation
from exg.graph import DependencyKind, ExecutionGraph


@dataclass
class SymExploreResult:
    final_quotient: QuotientGraph
    partitions: List[Partition]
    composed_partition: Partition
    iterations: int

    @property
    def is_chain(self):
        return check_chain(self.final_quotient)


def sym_explore(g: Digraph, edge_kinds=None) -> SymExploreResult:
    """Quotient by automorphism orbits until the symmetry group is trivial.

    Each round quotients the *current* quotient, and the per-round
    partitions are composed so the result also partitions the vertices of
    ``g`` itself.  ``edge_kinds`` (arc -> kind names) is only used to label
    the final quotient's arcs.
    """
    require_dag(g)
    composed = Partition.singletons(g.n)
    current = g
    partitions = []
    while True:
        group = automorphism_group(current)
        if group.is_trivial:
            break
        orbits = group.orbit_partition
        if len(orbits) >= current.n:
            raise InvariantViolation("non-trivial group with singleton orbits")
        partitions.append(orbits)
        composed = composed.compose(orbits)
        current = quotient(current, orbits).graph
        if len(partitions) > g.n:
            raise InvariantViolation("orbit quotient did not terminate")
    final = quotient(g, composed, edge_kinds)
    if final.graph.edge_set() != current.edge_set():
        raise InvariantViolation("composed quotient disagrees with iterated quotient")
    return SymExploreResult(final, partitions, composed, len(partitions))


def classify_shape(q: QuotientGraph) -> str:
    if q.n == 1:
        return "parallel"
    if check_chain(q):
        return "chain"
    return "other"


def analysis_view(g: ExecutionGraph) -> Digraph:
    """The RAW+EXT projection analysed for parallelism."""
    return Digraph.from_execution_graph(g, {DependencyKind.RAW, DependencyKind.EXT})


@dataclass
class AnalysisReport:
    trace_id: int
    num_vertices: int
    num_edges: int
    is_dag: bool
    completely_serial: bool
    completely_parallel: bool
    ind_class_sizes: Dict[int, int]
    longest_path_vertices: int
    iterations: int
    quotient_blocks: List[List[int]]
    quotient_edges: List[dict]
    shape: str
    is_chain: bool
    blocks_independent: bool
    exec_time: int
    corollary_applies: bool
    corollary_holds: Optional[bool] = None

    def summary(self):
        b = _flag
        return (
            f"completely_parallel={b(self.completely_parallel)} "
            f"completely_serial={b(self.completely_serial)} "
            f"chain={b(self.is_chain)} shape={self.shape} "
            f"quotient={len(self.quotient_blocks)} ExecT={self.exec_time} "
            f"longest_path={self.longest_path_vertices}"
        )


def _flag(v):
    return "true" if v else "false"


def analyze(g: ExecutionGraph) -> AnalysisReport:
    """Run the full analysis on the RAW(+EXT) projection of ``g``.

    Raises :class:`InvariantViolation` if the quotient is a chain of
    independent blocks over a connected graph but its ExecT differs from the
    longest path (the two must agree in that case).
    """
    dg = analysis_view(g)
    require_dag(dg)
    r = Reachability(dg)
    sizes = ind_class_sizes(r)
    n = dg.n
    kinds = {}
    index = {v.exec_id: i for i, v in enumerate(g.vertices)}
    for s, d, k in g.edge_set({DependencyKind.RAW, DependencyKind.EXT}):
        kinds.setdefault((index[s], index[d]), set()).add(k.value)

    if n == 0:
        return AnalysisReport(
            g.trace_id, 0, 0, True, True, True, {}, 0, 0, [], [], "empty", False, True, 0, False
        )

    res = sym_explore(dg, kinds)
    composed = res.composed_partition
    ids = [dg.exec_id(v) for v in range(n)]
    blocks = [[ids[v] for v in b] for b in composed.blocks]
    q = res.final_quotient
    qedges = [
        {"from": u, "to": v, "kinds": sorted(q.kind_sets.get((u, v), ()))}
        for u, v in q.graph.edges()
    ]
    indep = all(is_independent_set(r, b) for b in composed.blocks)
    exec_time = exec_time_quotient(dg, composed, r)
    longest = longest_path_vertices(dg)
    chain = check_chain(q)

    applies = chain and indep and is_weakly_connected(dg)
    holds = None
    if applies:
        holds = exec_time == longest
        if not holds:
            raise InvariantViolation(
                f"chain quotient of independent blocks has ExecT={exec_time} "
                f"but the longest path has {longest} vertices"
            )

    return AnalysisReport(
        trace_id=g.trace_id,
        num_vertices=n,
        num_edges=dg.num_edges(),
        is_dag=is_dag(dg),
        completely_serial=all(s == 1 for s in sizes),
        completely_parallel=all(s == n for s in sizes),
        ind_class_sizes={ids[v]: sizes[v] for v in range(n)},
        longest_path_vertices=longest,
        iterations=res.iterations,
        quotient_blocks=blocks,
        quotient_edges=qedges,
        shape=classify_shape(q),
        is_chain=chain,
        blocks_independent=indep,
        exec_time=exec_time,
        corollary_applies=applies,
        corollary_holds=holds,
    )
