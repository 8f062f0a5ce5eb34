"""Text formats: matrices (tm-v1/fm-v1), clusterings (cc-v1), solver reports
(solve-v1), solver config, multiway-cut graphs, trajectory CSVs, manifests.

Numbers are written with repr, which round-trips floats exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .bnb import HeuristicsConfig, SolveResult, SolverConfig
from .clustering import CycleClustering, ObjectiveValue
from .errors import FileFormatError
from .generate.multiway_cut import MultiwayCutInstance
from .markov import FlowMatrix, TransitionMatrix, _frozen, validate_stochastic


def _format_rows(entries: np.ndarray) -> list[str]:
    return [" ".join(repr(float(v)) for v in row) for row in entries]


def write_transition_matrix(path, tm: TransitionMatrix) -> None:
    lines = [str(tm.n)] + _format_rows(tm.entries)
    Path(path).write_text("\n".join(lines) + "\n")


def write_flow_matrix(path, fm: FlowMatrix) -> None:
    lines = [f"FM {fm.n}"] + _format_rows(fm.entries)
    Path(path).write_text("\n".join(lines) + "\n")


def _read_matrix_body(lines, n, path):
    if len(lines) < n + 1:
        raise FileFormatError(f"{path}: expected {n} matrix rows")
    rows = []
    for k in range(1, n + 1):
        parts = lines[k].split()
        if len(parts) != n:
            raise FileFormatError(f"{path}: row {k} has {len(parts)} entries, want {n}")
        rows.append([float(p) for p in parts])
    return np.array(rows, dtype=float)


def read_transition_matrix(path) -> TransitionMatrix:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FileFormatError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 1 or not header[0].isdigit():
        raise FileFormatError(
            f"{path}: expected a plain bin count header, got {lines[0]!r}"
        )
    n = int(header[0])
    return validate_stochastic(_read_matrix_body(lines, n, path))


def read_flow_matrix(path) -> FlowMatrix:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FileFormatError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 2 or header[0] != "FM" or not header[1].isdigit():
        raise FileFormatError(f"{path}: expected 'FM <n>' header, got {lines[0]!r}")
    n = int(header[1])
    return FlowMatrix(_frozen(_read_matrix_body(lines, n, path)))


def read_matrix(path):
    """Dispatch on the header token; returns TransitionMatrix or FlowMatrix."""
    first = Path(path).read_text().split("\n", 1)[0]
    if first.startswith("FM"):
        return read_flow_matrix(path)
    return read_transition_matrix(path)


def write_clustering(path, c: CycleClustering, value: ObjectiveValue) -> None:
    doc = {
        "n": c.n,
        "m": c.m,
        "alpha": value.alpha,
        "assignment": [int(k) for k in c.assignment],
        "objective": {
            "total": value.total,
            "flow": value.flow_part,
            "coherence": value.coherence_part,
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_clustering(path):
    """Returns (clustering, alpha, stored objective dict)."""
    doc = json.loads(Path(path).read_text())
    try:
        c = CycleClustering(n=int(doc["n"]), m=int(doc["m"]),
                            assignment=np.array(doc["assignment"], dtype=int))
        return c, float(doc["alpha"]), dict(doc["objective"])
    except KeyError as exc:
        raise FileFormatError(f"{path}: missing key {exc}") from exc


def write_solve_report(path, result: SolveResult) -> None:
    doc = {
        "primal": result.primal,
        "dual_bound": None if math.isinf(result.dual_bound) else result.dual_bound,
        "gap": result.gap,
        "nodes": result.nodes,
        "wall_time": result.wall_time,
        "status": result.status,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_solver_config(path) -> SolverConfig:
    doc = json.loads(Path(path).read_text())
    heur = doc.get("heuristics", {})
    return SolverConfig(
        gap_tol=float(doc.get("gap_tol", 1e-6)),
        time_limit_s=doc.get("time_limit_s"),
        node_limit=doc.get("node_limit"),
        node_selection=doc.get("node_selection", "best_bound"),
        heuristics=HeuristicsConfig(
            greedy=bool(heur.get("greedy", True)),
            rounding=bool(heur.get("rounding", True)),
            exchange=bool(heur.get("exchange", True)),
        ),
    )


def read_multiway_cut(path) -> MultiwayCutInstance:
    """Line 1: 'n m'; line 2: m terminal labels; then 'u v weight' lines."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise FileFormatError(f"{path}: need header and terminal lines")
    head = lines[0].split()
    if len(head) != 2:
        raise FileFormatError(f"{path}: expected 'n m' header")
    n, m = int(head[0]), int(head[1])
    terminals = tuple(int(t) for t in lines[1].split())
    if len(terminals) != m:
        raise FileFormatError(f"{path}: expected {m} terminals")
    edges = []
    for ln in lines[2:]:
        parts = ln.split()
        if len(parts) != 3:
            raise FileFormatError(f"{path}: bad edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return MultiwayCutInstance(n, tuple(edges), terminals)


def write_multiway_cut(path, mc: MultiwayCutInstance) -> None:
    lines = [f"{mc.n_vertices} {len(mc.terminals)}",
             " ".join(str(t) for t in mc.terminals)]
    lines += [f"{u} {v} {repr(w)}" for u, v, w in mc.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def write_points_csv(path, points: np.ndarray, labels=None) -> None:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    dim = pts.shape[1]
    if labels is None:
        labels = ("x", "y") if dim == 2 else tuple(f"x{i + 1}" for i in range(dim))
    header = ",".join(("step",) + tuple(labels))
    lines = [header]
    for k, row in enumerate(pts):
        lines.append(",".join([str(k)] + [repr(float(v)) for v in row]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_manifest(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
