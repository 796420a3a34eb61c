"""JSON encodings for graph and report files, and DOT export.

Graph file keys, in order: ``version``, ``trace_id``, ``vertices`` (list of
``{exec_id, region_id}`` sorted by exec id), ``edges`` (list of
``{from, to, kind}`` sorted by ``(from, to, kind)``).

Report file keys, in order: ``version``, ``trace_id``, ``num_vertices``,
``num_edges``, ``is_dag``, ``completely_serial``, ``completely_parallel``,
``longest_path_vertices``, ``ind_class_sizes`` (list of ``{exec_id, size}``),
``sym_explore`` (``iterations``, ``shape``, ``is_chain``,
``blocks_independent``, ``exec_time``, ``corollary_applies``,
``corollary_holds``, ``blocks``, ``edges``).

All writers produce byte-identical output for equal inputs.
"""

from __future__ import annotations

import json

from exg.analysis.explore import AnalysisReport
from exg.errors import MalformedGraph
from exg.graph import KIND_ORDER, DependencyKind, ExecutionGraph
from exg.trace import TaskInstance

FILE_VERSION = 1


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def graph_to_dict(g: ExecutionGraph) -> dict:
    return {
        "version": FILE_VERSION,
        "trace_id": g.trace_id,
        "vertices": [{"exec_id": v.exec_id, "region_id": v.region_id} for v in g.vertices],
        "edges": [{"from": e.src, "to": e.dst, "kind": e.kind.value} for e in g.edges],
    }


def dumps_graph(g: ExecutionGraph) -> str:
    return _dump(graph_to_dict(g))


def _int(obj, key, where):
    value = obj.get(key) if isinstance(obj, dict) else None
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise MalformedGraph(f"{where}: {key!r} must be a non-negative integer")
    return value


def graph_from_dict(doc) -> ExecutionGraph:
    if not isinstance(doc, dict):
        raise MalformedGraph("graph document must be an object")
    if doc.get("version") != FILE_VERSION:
        raise MalformedGraph(f"unsupported graph file version {doc.get('version')!r}")
    trace_id = _int(doc, "trace_id", "graph")
    verts = doc.get("vertices")
    edges = doc.get("edges")
    if not isinstance(verts, list) or not isinstance(edges, list):
        raise MalformedGraph("graph needs 'vertices' and 'edges' lists")
    g = ExecutionGraph(trace_id)
    known = {}
    for i, v in enumerate(verts):
        eid = _int(v, "exec_id", f"vertex {i}")
        if eid in known:
            raise MalformedGraph(f"vertex {i}: duplicate exec_id {eid}")
        known[eid] = TaskInstance(_int(v, "region_id", f"vertex {i}"), eid)
        g.add_vertex(known[eid])
    for i, e in enumerate(edges):
        src, dst = _int(e, "from", f"edge {i}"), _int(e, "to", f"edge {i}")
        if src not in known or dst not in known:
            raise MalformedGraph(f"edge {i}: endpoint not among vertices")
        try:
            kind = DependencyKind(e.get("kind"))
        except ValueError:
            raise MalformedGraph(f"edge {i}: unknown kind {e.get('kind')!r}") from None
        g.insert_edge(known[src], known[dst], kind)
    return g


def loads_graph(text: str) -> ExecutionGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedGraph(f"not valid JSON: {exc}") from None
    return graph_from_dict(doc)


def report_to_dict(rep: AnalysisReport) -> dict:
    return {
        "version": FILE_VERSION,
        "trace_id": rep.trace_id,
        "num_vertices": rep.num_vertices,
        "num_edges": rep.num_edges,
        "is_dag": rep.is_dag,
        "completely_serial": rep.completely_serial,
        "completely_parallel": rep.completely_parallel,
        "longest_path_vertices": rep.longest_path_vertices,
        "ind_class_sizes": [
            {"exec_id": k, "size": v} for k, v in sorted(rep.ind_class_sizes.items())
        ],
        "sym_explore": {
            "iterations": rep.iterations,
            "shape": rep.shape,
            "is_chain": rep.is_chain,
            "blocks_independent": rep.blocks_independent,
            "exec_time": rep.exec_time,
            "corollary_applies": rep.corollary_applies,
            "corollary_holds": rep.corollary_holds,
            "blocks": rep.quotient_blocks,
            "edges": rep.quotient_edges,
        },
    }


def dumps_report(rep: AnalysisReport) -> str:
    return _dump(report_to_dict(rep))


def report_from_dict(doc) -> AnalysisReport:
    try:
        if doc["version"] != FILE_VERSION:
            raise MalformedGraph(f"unsupported report version {doc['version']!r}")
        sx = doc["sym_explore"]
        return AnalysisReport(
            trace_id=doc["trace_id"],
            num_vertices=doc["num_vertices"],
            num_edges=doc["num_edges"],
            is_dag=doc["is_dag"],
            completely_serial=doc["completely_serial"],
            completely_parallel=doc["completely_parallel"],
            ind_class_sizes={d["exec_id"]: d["size"] for d in doc["ind_class_sizes"]},
            longest_path_vertices=doc["longest_path_vertices"],
            iterations=sx["iterations"],
            quotient_blocks=[list(b) for b in sx["blocks"]],
            quotient_edges=[dict(e) for e in sx["edges"]],
            shape=sx["shape"],
            is_chain=sx["is_chain"],
            blocks_independent=sx["blocks_independent"],
            exec_time=sx["exec_time"],
            corollary_applies=sx["corollary_applies"],
            corollary_holds=sx["corollary_holds"],
        )
    except (KeyError, TypeError) as exc:
        raise MalformedGraph(f"bad report document: missing or invalid {exc}") from None


def load_document(text: str):
    """Parse either a graph file or a report file."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedGraph(f"not valid JSON: {exc}") from None
    if isinstance(doc, dict) and "sym_explore" in doc:
        return report_from_dict(doc)
    return graph_from_dict(doc)


# -- DOT -------------------------------------------------------------------


def _q(text):
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _kind_label(kinds):
    return ",".join(sorted(kinds, key=lambda k: KIND_ORDER[DependencyKind(k)]))


def graph_to_dot(g: ExecutionGraph) -> str:
    """Vertices are named ``"<exec_id>: <region_id>"``; parallel edges merge their kinds."""
    name = {v.exec_id: f"{v.exec_id}: {v.region_id}" for v in g.vertices}
    merged = {}
    for e in g.edges:
        merged.setdefault((e.src, e.dst), []).append(e.kind.value)
    lines = [f"digraph trace_{g.trace_id} {{"]
    lines += [f"  {_q(name[v.exec_id])};" for v in g.vertices]
    for (s, d), kinds in sorted(merged.items()):
        lines.append(f"  {_q(name[s])} -> {_q(name[d])} [label={_q(_kind_label(kinds))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def quotient_to_dot(rep: AnalysisReport) -> str:
    """One node per block, labelled with its members' exec ids."""
    lines = [f"digraph quotient_{rep.trace_id} {{"]
    for i, block in enumerate(rep.quotient_blocks):
        label = ",".join(str(x) for x in sorted(block))
        lines.append(f"  q{i} [label={_q(label)}];")
    for e in rep.quotient_edges:
        attr = f" [label={_q(_kind_label(e['kinds']))}]" if e["kinds"] else ""
        lines.append(f"  q{e['from']} -> q{e['to']}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_dot(doc) -> str:
    if isinstance(doc, AnalysisReport):
        return quotient_to_dot(doc)
    return graph_to_dot(doc)


def to_structured(doc) -> str:
    if isinstance(doc, AnalysisReport):
        return dumps_report(doc)
    return dumps_graph(doc)

