"""CSV ingestion and JSON / DOT result files."""
from __future__ import annotations

import csv
import json
import os
import re
import tempfile
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import DataError, DataMatrix
from .graphstats import GraphEstimate, graph_summary


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def ingest_csv(path) -> DataMatrix:
    """Read a rectangular numeric CSV; a non-numeric first row is a header.

    Parse errors name the 1-based (line, column) of the offending cell.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = [(k + 1, r) for k, r in enumerate(csv.reader(fh))
                if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    labels: Sequence[str] = ()
    first_line, first = rows[0]
    if not all(_is_number(c.strip()) for c in first):
        labels = [c.strip() for c in first]
        rows = rows[1:]
        if not rows:
            raise DataError(f"{path}: header but no data rows")
    width = len(labels) if labels else len(rows[0][1])
    values = []
    for line, r in rows:
        if len(r) != width:
            raise DataError(f"{path}: ragged row at line {line} ({len(r)} fields, expected {width})")
        out = []
        for col, cell in enumerate(r, start=1):
            try:
                out.append(float(cell.strip()))
            except ValueError:
                raise DataError(f"{path}: non-numeric cell {cell!r} at ({line},{col})") from None
        values.append(out)
    return DataMatrix(np.array(values), tuple(labels))


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else None
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def result_document(method: str, params: dict, fit, graph: GraphEstimate,
                    labels: Sequence[str], stability: Optional[dict] = None,
                    extra: Optional[dict] = None) -> dict:
    summ = graph_summary(graph)
    edges = [dict(i=i, j=j, label_i=labels[i], label_j=labels[j], weight=float(fit.S[i, j]))
             for i, j in graph.edges()]
    doc = {
        "method": method,
        "params": params,
        "p": graph.p,
        "labels": list(labels),
        "objective_trace": list(fit.objective_trace),
        "edges": edges,
        "summary": dict(edges=summ.edges, isolated=summ.isolated, cliques=summ.cliques,
                        singleton_cliques=summ.singleton_cliques,
                        largest_clique=summ.largest_clique),
    }
    if stability is not None:
        doc["stability"] = stability
    if extra:
        doc.update(extra)
    return _clean(doc)


def dumps_result(doc: dict) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def to_dot(graph: GraphEstimate, labels: Sequence[str], weights: Optional[np.ndarray] = None,
           include_isolated: bool = False, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    deg = graph.adjacency.sum(axis=1)
    for v in range(graph.p):
        if include_isolated or deg[v] > 0:
            lines.append(f'  "{_esc(labels[v])}";')
    for i, j in graph.edges():
        attr = f" [weight={float(weights[i, j])!r}]" if weights is not None else ""
        lines.append(f'  "{_esc(labels[i])}" -- "{_esc(labels[j])}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _esc(s: str) -> str:
    return str(s).replace("\\", "\\\\").replace('"', '\\"')


def emit_outputs(doc: dict, graph: GraphEstimate, weights, labels, json_path=None,
                 dot_path=None, include_isolated: bool = False) -> None:
    """Write the JSON result and DOT graph, each via temp file + rename."""
    if json_path is not None:
        atomic_write_text(json_path, dumps_result(doc))
    if dot_path is not None:
        atomic_write_text(dot_path, to_dot(graph, labels, weights, include_isolated))


def adjacency_from_json(path) -> np.ndarray:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    A = np.zeros((doc["p"], doc["p"]), dtype=bool)
    for e in doc["edges"]:
        A[e["i"], e["j"]] = A[e["j"], e["i"]] = True
    return A


_DOT_EDGE = re.compile(r'^\s*"((?:[^"\\]|\\.)*)"\s*--\s*"((?:[^"\\]|\\.)*)"')


def adjacency_from_dot(path, labels: Sequence[str]) -> np.ndarray:
    """Adjacency of a DOT file written by :func:`to_dot`, indexed by ``labels``."""
    index = {str(l): k for k, l in enumerate(labels)}
    A = np.zeros((len(labels), len(labels)), dtype=bool)
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        m = _DOT_EDGE.match(line)
        if m:
            a, b = (re.sub(r"\\(.)", r"\1", g) for g in m.groups())
            i, j = index[a], index[b]
            A[i, j] = A[j, i] = True
    return A
