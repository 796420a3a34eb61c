"""Shared generators and brute-force oracles.

The oracles here never call into the code they check: reachability is by
explicit path search, dependencies are recomputed by scanning the access
list backwards, and kernel accesses are enumerated from the loop nests.
"""

import itertools

from exg.analysis import Digraph
from exg.trace import AccessKind, Address, Recorder

SEED = 1234


# -- graphs ----------------------------------------------------------------


def random_dag(rng, n, p=0.35):
    """Random DAG whose vertex numbering is shuffled (not a topological order)."""
    order = list(range(n))
    rng.shuffle(order)
    edges = [
        (order[i], order[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < p
    ]
    return Digraph(n, edges)


def random_digraph(rng, n, p=0.3):
    edges = [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < p]
    return Digraph(n, edges)


def brute_reach(g):
    """reach[u][v] by depth-first enumeration of simple paths."""
    out = [[False] * g.n for _ in range(g.n)]

    def walk(start, v, seen):
        for w in g.succ[v]:
            out[start][w] = True
            if w not in seen:
                walk(start, w, seen | {w})

    for s in range(g.n):
        walk(s, s, {s})
    return out


def brute_independent(reach, u, v):
    return not reach[u][v] and not reach[v][u]


def brute_is_independent(reach, subset):
    return all(brute_independent(reach, u, v) for u, v in itertools.combinations(subset, 2))


def brute_is_maximal(reach, n, subset):
    if not brute_is_independent(reach, subset):
        return False
    rest = [v for v in range(n) if v not in subset]
    return not any(brute_is_independent(reach, list(subset) + [v]) for v in rest)


def brute_longest_path(g):
    best = 0

    def walk(v, length):
        nonlocal best
        best = max(best, length)
        for w in g.succ[v]:
            walk(w, length + 1)

    for v in range(g.n):
        walk(v, 1)
    return best


def chain(n):
    return Digraph(n, [(i, i + 1) for i in range(n - 1)])


def diamond():
    # a=0, b=1, c=2, d=3
    return Digraph(4, [(0, 1), (0, 2), (1, 3), (2, 3)])


# -- traces ----------------------------------------------------------------


def random_flat_trace(rng, tasks=6, addresses=4, max_accesses=4):
    rec = Recorder()
    with rec.trace(0):
        for _ in range(rng.randint(1, tasks)):
            with rec.task(rng.randint(0, 2)):
                for _ in range(rng.randint(1, max_accesses)):
                    kind = rng.choice([AccessKind.READ, AccessKind.WRITE])
                    rec.record_access(Address(0, rng.randrange(addresses)), kind)
    return rec.finalize()


def random_nested_trace(rng, steps=20, addresses=3, max_depth=4):
    """Random interleaving of task begin/end and accesses, nesting allowed."""
    rec = Recorder()
    with rec.trace(0):
        rec.begin_task(0)
        for _ in range(steps):
            op = rng.random()
            if op < 0.25 and len(rec.task_stack) < max_depth:
                rec.begin_task(rng.randint(0, 2))
            elif op < 0.45 and len(rec.task_stack) > 1:
                rec.end_task()
            else:
                kind = rng.choice([AccessKind.READ, AccessKind.WRITE])
                rec.record_access(Address(0, rng.randrange(addresses)), kind)
        while rec.task_stack:
            rec.end_task()
    return rec.finalize()


def definitional_deps(records):
    """Every dependency implied by the access list, by scanning backwards.

    RAW: a read and the closest earlier write to the same address.
    WAR: a write and every read after the previous write (or since the start).
    WAW: a write and the closest earlier write.
    Self pairs are dropped.  Returns a set of (src_exec, dst_exec, kind_name).
    """
    out = set()
    for i, r in enumerate(records):
        before = [p for p in records[:i] if p.address == r.address]
        last_w = next((p for p in reversed(before) if p.kind is AccessKind.WRITE), None)
        if r.kind is AccessKind.READ:
            if last_w is not None:
                out.add((last_w.task.exec_id, r.task.exec_id, "RAW"))
        else:
            if last_w is not None:
                out.add((last_w.task.exec_id, r.task.exec_id, "WAW"))
                cut = max(k for k, p in enumerate(before) if p is last_w)
                readers = before[cut + 1:]
            else:
                readers = before
            for p in readers:
                out.add((p.task.exec_id, r.task.exec_id, "WAR"))
    return {(s, d, k) for s, d, k in out if s != d}


def strict_definitional_raw(records):
    """RAW pairs when only the single most recent access is remembered."""
    out = set()
    for i, r in enumerate(records):
        if r.kind is not AccessKind.READ:
            continue
        prev = next((p for p in reversed(records[:i]) if p.address == r.address), None)
        if prev is not None and prev.kind is AccessKind.WRITE and prev.task != r.task:
            out.add((prev.task.exec_id, r.task.exec_id))
    return out


def all_automorphisms(g):
    """Every automorphism of ``g``, by extending partial maps vertex by vertex.

    Only degree and adjacency checks prune the search, so it stays an
    exhaustive enumeration; fine for sparse graphs of a few dozen vertices.
    """
    deg = [(len(g.pred[v]), len(g.succ[v])) for v in range(g.n)]
    found = []

    def extend(perm, used):
        v = len(perm)
        if v == g.n:
            found.append(tuple(perm))
            return
        for w in range(g.n):
            if w in used or deg[w] != deg[v]:
                continue
            if all(
                (u in g.succ[v]) == (perm[u] in g.succ[w]) and (v in g.succ[u]) == (w in g.succ[perm[u]])
                for u in range(v)
            ):
                perm.append(w)
                used.add(w)
                extend(perm, used)
                perm.pop()
                used.discard(w)

    extend([], set())
    return found


def orbits_of(perms, n):
    """Orbit blocks of the group generated by ``perms`` (closure by search)."""
    seen, blocks = set(), []
    for v in range(n):
        if v in seen:
            continue
        block, todo = {v}, [v]
        while todo:
            x = todo.pop()
            for p in perms:
                if p[x] not in block:
                    block.add(p[x])
                    todo.append(p[x])
        seen |= block
        blocks.append(sorted(block))
    return blocks
