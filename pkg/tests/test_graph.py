import random

import pytest

from exg.errors import MalformedTrace, SelfDependency
from exg.graph import (
    ALL_KINDS,
    AddressTable,
    BuildConfig,
    DependencyKind,
    DepPolicy,
    Edge,
    ExecutionGraph,
    RenameMap,
    TableMode,
    add_dep,
    add_dep_ext,
    build_eg,
    dependency_pairs,
    project,
    update_table,
    verify_topo_order,
)
from exg.kernels import Grain, run_heat, run_madd, run_mmult
from exg.trace import AccessKind, AccessRecord, Address, ProgramTrace, Recorder, TaskInstance
from helpers import (
    SEED,
    definitional_deps,
    random_flat_trace,
    random_nested_trace,
    strict_definitional_raw,
)

RAW, WAR, WAW, EXT = (DependencyKind[k] for k in ("RAW", "WAR", "WAW", "EXT"))
R, W = AccessKind.READ, AccessKind.WRITE
T1, T2, T3, T4 = (TaskInstance(0, i) for i in range(1, 5))
A = Address(0, 0)

STRICT_RAW = BuildConfig(TableMode.STRICT, DepPolicy.PLAIN, {RAW})
MULTI_ALL = BuildConfig(TableMode.MULTI_READER, DepPolicy.PLAIN, {RAW, WAR, WAW})


def only(graphs):
    (g,) = graphs.values()
    return g


class TestStrictTable:
    @pytest.mark.parametrize(
        "first,second,expected",
        [
            (W, R, [(T1, RAW)]),
            (R, W, [(T1, WAR)]),
            (W, W, [(T1, WAW)]),
            (R, R, []),
        ],
    )
    def test_branch_table(self, first, second, expected):
        table = AddressTable(TableMode.STRICT)
        assert update_table(table, A, T1, first) == []
        assert update_table(table, A, T2, second) == expected
        assert table.find(A) == (T2, second)

    def test_first_access_is_empty(self):
        assert AddressTable(TableMode.STRICT).update(A, T1, W) == []

    def test_read_after_read_overwrites_entry(self):
        table = AddressTable(TableMode.STRICT)
        table.update(A, T1, W)
        table.update(A, T2, R)
        # T3 sees T2's read, not T1's write
        assert table.update(A, T3, R) == []
        assert table.update(A, T4, W) == [(T3, WAR)]

    def test_self_dependency_is_returned(self):
        table = AddressTable(TableMode.STRICT)
        table.update(A, T1, R)
        assert table.update(A, T1, W) == [(T1, WAR)]


class TestMultiReaderTable:
    def test_readers_and_writer(self):
        table = AddressTable(TableMode.MULTI_READER)
        assert table.update(A, T1, W) == []
        assert table.update(A, T2, R) == [(T1, RAW)]
        assert table.update(A, T3, R) == [(T1, RAW)]
        assert table.update(A, T4, W) == [(T2, WAR), (T3, WAR), (T1, WAW)]

    def test_write_clears_readers(self):
        table = AddressTable(TableMode.MULTI_READER)
        table.update(A, T1, R)
        table.update(A, T2, W)
        assert table.update(A, T3, W) == [(T2, WAW)]

    def test_matches_definition_on_random_sequences(self, rng):
        for _ in range(100):
            tasks = [TaskInstance(0, i) for i in range(1, 6)]
            seq = [(rng.choice(tasks), rng.choice([R, W])) for _ in range(rng.randint(1, 12))]
            records = [AccessRecord(0, t, A, k, 0) for t, k in seq]
            table = AddressTable(TableMode.MULTI_READER)
            got = set()
            for t, k in seq:
                for prev, kind in table.update(A, t, k):
                    if prev != t:
                        got.add((prev.exec_id, t.exec_id, kind.value))
            assert got == definitional_deps(records)


class TestAddDep:
    def test_duplicates_collapse(self):
        g = ExecutionGraph()
        add_dep(g, T1, T2, RAW)
        add_dep(g, T1, T2, RAW)
        assert g.edges == [Edge(1, 2, RAW)]

    def test_kinds_kept_apart(self):
        g = ExecutionGraph()
        add_dep(g, T1, T2, RAW)
        add_dep(g, T1, T2, WAW)
        assert g.num_edges() == 2

    def test_self_dependency(self):
        with pytest.raises(SelfDependency):
            add_dep(ExecutionGraph(), T1, T1, RAW)


class TestAddDepExt:
    def test_back_dependency_renews(self):
        g = ExecutionGraph()
        rmap = RenameMap(max_exec_id=2)
        add_dep_ext(g, rmap, T2, T1, RAW)
        assert g.edge_set() == {(1, 3, EXT), (2, 3, RAW)}
        assert rmap[1] == 3
        assert g.vertex(3).region_id == T1.region_id

    def test_forward_dependency(self):
        g = ExecutionGraph()
        add_dep_ext(g, RenameMap(2), T1, T2, RAW)
        assert g.edge_set() == {(1, 2, RAW)}

    def test_renamed_task_resolves(self):
        g = ExecutionGraph()
        rmap = RenameMap(max_exec_id=2)
        add_dep_ext(g, rmap, T2, T1, RAW)
        # T1 is now incarnation 3; a later dependency of T1 on T2 needs no renewal
        add_dep_ext(g, rmap, T2, T1, WAW)
        assert g.edge_set() == {(1, 3, EXT), (2, 3, RAW), (2, 3, WAW)}

    def test_self_dependency(self):
        with pytest.raises(SelfDependency):
            add_dep_ext(ExecutionGraph(), RenameMap(1), T1, T1, RAW)

    def test_nested_script(self):
        rec = Recorder()
        with rec.trace(0):
            outer = rec.begin_task(0)
            rec.write(A)
            inner = rec.begin_task(0)
            rec.read(A)
            rec.write(A)
            rec.end_task()
            rec.read(A)
            rec.end_task()
        trace = rec.finalize()
        assert (outer.exec_id, inner.exec_id) == (1, 2)
        g = only(build_eg(trace, BuildConfig(dep_policy=DepPolicy.EXT, kind_filter={RAW})))
        assert g.edge_set() == {(1, 2, RAW), (1, 3, EXT), (2, 3, RAW)}
        assert verify_topo_order(g)
        # without renewal the same trace produces a 2-cycle
        plain = only(build_eg(trace, BuildConfig(dep_policy=DepPolicy.PLAIN, kind_filter={RAW})))
        assert plain.edge_set() == {(1, 2, RAW), (2, 1, RAW)}
        assert not verify_topo_order(plain)


class TestBuild:
    def test_empty_trace(self):
        assert build_eg(ProgramTrace()) == {}

    def test_madd_isolated(self):
        g = only(build_eg(run_madd(2), BuildConfig(TableMode.MULTI_READER, DepPolicy.PLAIN, {RAW})))
        assert g.num_vertices() == 4 and g.num_edges() == 0

    def test_mmult_chains(self):
        trace = run_mmult(2)
        g = only(build_eg(trace, BuildConfig(TableMode.MULTI_READER, DepPolicy.PLAIN, {RAW})))
        assert g.num_vertices() == 8
        # oracle: last writer of C(i,j) before each read, from the access list
        expected = {(s, d) for s, d, k in definitional_deps(list(trace.records)) if k == "RAW"}
        assert set(dependency_pairs(g)) == expected
        assert expected == {(1, 2), (3, 4), (5, 6), (7, 8)}

    def test_full_kinds_superset(self):
        trace = run_mmult(2)
        full = only(build_eg(trace, MULTI_ALL))
        raw = only(build_eg(trace, BuildConfig(kind_filter={RAW})))
        assert full.num_edges() > raw.num_edges()
        assert project(full, {RAW}).edge_set() == raw.edge_set()

    def test_separate_graphs_per_trace(self):
        rec = Recorder()
        for tid in (4, 9):
            with rec.trace(tid):
                with rec.task(1):
                    rec.write(A)
                with rec.task(1):
                    rec.read(A)
        graphs = build_eg(rec.finalize())
        assert sorted(graphs) == [4, 9]
        assert graphs[4].edge_set() == {(1, 2, RAW)}
        assert graphs[9].edge_set() == {(3, 4, RAW)}

    def test_isolated_vertices_kept(self):
        rec = Recorder()
        with rec.trace(0):
            with rec.task(1):
                rec.read(A)
        assert [v.exec_id for v in only(build_eg(rec.finalize())).vertices] == [1]

    def test_no_self_edges(self):
        g = only(build_eg(run_mmult(2, Grain.COARSE), MULTI_ALL))
        assert all(e.src != e.dst for e in g.edges)

    def test_rejects_invalid_exec_id(self):
        bad = ProgramTrace((AccessRecord(0, TaskInstance(0, 0), A, R, 0),), 0, 1)
        with pytest.raises(MalformedTrace):
            build_eg(bad)

    def test_rejects_exec_id_above_max(self):
        bad = ProgramTrace((AccessRecord(0, T3, A, R, 0),), 0, 1)
        with pytest.raises(MalformedTrace):
            build_eg(bad)


class TestProject:
    def test_identity(self):
        g = only(build_eg(run_mmult(2), MULTI_ALL))
        assert project(g, ALL_KINDS) == g

    def test_raw_only(self):
        g = only(build_eg(run_mmult(2), MULTI_ALL))
        assert dependency_pairs(project(g, {RAW})) == [(1, 2), (3, 4), (5, 6), (7, 8)]

    def test_ext_of_plain_graph(self):
        g = only(build_eg(run_mmult(2), MULTI_ALL))
        assert project(g, {EXT}).num_edges() == 0

    def test_empty_kinds(self):
        with pytest.raises(ValueError):
            project(ExecutionGraph(), set())


class TestTopoOrder:
    def test_backward_edge(self):
        g = ExecutionGraph()
        g.insert_edge(T2, T1, RAW)
        assert not verify_topo_order(g)

    def test_cycle(self):
        g = ExecutionGraph()
        g.insert_edge(T1, T2, RAW)
        g.insert_edge(T2, T3, RAW)
        g.insert_edge(T3, T1, RAW)
        assert not verify_topo_order(g)

    @pytest.mark.parametrize("grain", list(Grain))
    def test_kernel_graphs(self, grain):
        for trace in (run_madd(3, grain), run_mmult(2, grain), run_heat(3, 3, grain)):
            for cfg in (MULTI_ALL, STRICT_RAW, BuildConfig()):
                assert verify_topo_order(only(build_eg(trace, cfg)))


# -- properties over random scripts ------------------------------------------


def test_policy_agreement_on_flat_traces():
    rng = random.Random(SEED)
    for _ in range(200):
        trace = random_flat_trace(rng)
        for mode in TableMode:
            plain = build_eg(trace, BuildConfig(mode, DepPolicy.PLAIN, ALL_KINDS - {EXT}))
            ext = build_eg(trace, BuildConfig(mode, DepPolicy.EXT, ALL_KINDS - {EXT}))
            assert plain == ext
            assert all(not project(g, {EXT}).num_edges() for g in ext.values())


def test_strict_raw_subset_of_multi_reader():
    rng = random.Random(SEED + 1)
    for _ in range(200):
        trace = random_flat_trace(rng)
        strict = build_eg(trace, BuildConfig(TableMode.STRICT, DepPolicy.PLAIN, ALL_KINDS))
        multi = build_eg(trace, BuildConfig(TableMode.MULTI_READER, DepPolicy.PLAIN, ALL_KINDS))
        for tid in strict:
            assert strict[tid].edge_set({RAW}) <= multi[tid].edge_set({RAW})
            assert strict[tid].edge_set({WAR}) <= multi[tid].edge_set({WAR})


def test_edge_provenance_against_brute_force():
    rng = random.Random(SEED + 2)
    for _ in range(200):
        trace = random_flat_trace(rng)
        g = only(build_eg(trace, BuildConfig(TableMode.MULTI_READER, DepPolicy.PLAIN, ALL_KINDS)))
        expected = {(s, d, DependencyKind(k)) for s, d, k in definitional_deps(list(trace.records))}
        assert g.edge_set() == expected


def test_strict_raw_against_brute_force():
    rng = random.Random(SEED + 3)
    for _ in range(200):
        trace = random_flat_trace(rng)
        g = only(build_eg(trace, STRICT_RAW))
        assert set(dependency_pairs(g)) == strict_definitional_raw(list(trace.records))


def test_ext_policy_always_topological():
    rng = random.Random(SEED + 4)
    for _ in range(300):
        trace = random_nested_trace(rng)
        for mode in TableMode:
            for g in build_eg(trace, BuildConfig(mode, DepPolicy.EXT, ALL_KINDS - {EXT})).values():
                assert verify_topo_order(g)


def test_renewed_ids_exceed_trace_ids():
    rng = random.Random(SEED + 5)
    renewed_any = False
    for _ in range(200):
        trace = random_nested_trace(rng)
        (g,) = build_eg(trace, BuildConfig(kind_filter=ALL_KINDS - {EXT})).values()
        fresh = [v.exec_id for v in g.vertices if v.exec_id > trace.max_exec_id]
        for e in g.edges:
            if e.kind is EXT:
                assert e.dst > trace.max_exec_id
                renewed_any = True
        assert len(fresh) == len(set(fresh))
    assert renewed_any
