"""Linearized cycle-clustering MIP: construction, LP text round-trip, extraction.

Variable order is fixed and deterministic: assignment binaries x_i_k by
(i, k), then flow products e_i_j_k by (i, j, k), coherence products c_i_j_k
by (i < j, k), then f_1..f_m, then g_1..g_m. Product variables are only
created for pairs whose coefficient is nonzero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.sparse import csr_matrix

from .clustering import CycleClustering, objective, successor
from .errors import (
    FileFormatError,
    FractionalSolutionError,
    InfeasibleAssignmentError,
    InvalidClusterCountError,
    ObjectiveMismatchError,
)
from .markov import FlowMatrix

INT_TOL = 1e-6
OBJ_TOL = 1e-6


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "binary" | "continuous"
    lb: float
    ub: float
    obj: float


class MipInstance:
    """Immutable catalog of variables plus sparse linear constraints."""

    def __init__(self, variables, con_names, matrix, senses, rhs,
                 n, m, alpha, weights=None):
        self.variables = list(variables)
        self.con_names = list(con_names)
        self.matrix = matrix.tocsr()
        self.matrix.sort_indices()
        self.senses = np.asarray(senses, dtype="<U1")
        self.rhs = np.asarray(rhs, dtype=float)
        self.n = n
        self.m = m
        self.alpha = alpha
        self.weights = weights
        self.var_index = {v.name: i for i, v in enumerate(self.variables)}

    @property
    def ncols(self) -> int:
        return len(self.variables)

    @property
    def nrows(self) -> int:
        return len(self.con_names)

    def column_bounds(self):
        lb = np.array([v.lb for v in self.variables])
        ub = np.array([v.ub for v in self.variables])
        return lb, ub

    def column_objective(self) -> np.ndarray:
        return np.array([v.obj for v in self.variables])

    def binary_columns(self) -> np.ndarray:
        return np.array([v.kind == "binary" for v in self.variables], dtype=bool)

    def constraint(self, i):
        """(name, {column: coefficient}, sense, rhs) for row i."""
        row = self.matrix.getrow(i)
        coefs = {int(c): float(v) for c, v in zip(row.indices, row.data)}
        return self.con_names[i], coefs, str(self.senses[i]), float(self.rhs[i])

    def x_column(self, i: int, k: int) -> int:
        """Column of the assignment binary for bin i, cluster k (1-based)."""
        return (i - 1) * self.m + (k - 1)


def _pairs_for_model(q: np.ndarray):
    """Ordered flow pairs (d != 0) and unordered coherence pairs (mass > 0)."""
    n = q.shape[0]
    d = q - q.T
    ei, ej = np.nonzero(d != 0.0)
    keep = ei != ej
    epairs = np.stack([ei[keep], ej[keep]], axis=1)
    s = q + q.T
    ci, cj = np.nonzero(np.triu(s, k=1) > 0.0)
    cpairs = np.stack([ci, cj], axis=1)
    return epairs, cpairs


def build_mip(W: FlowMatrix, m: int, alpha: float) -> MipInstance:
    """Assemble the linearized clustering model for a fixed cluster count.

    Emits assignment and covering rows, flow/coherence defining equalities
    over product variables, all four bounding rows per product, and the
    symmetry-breaking fix x_1_1 = 1.
    """
    n = W.n
    if m < 3 or m > n:
        raise InvalidClusterCountError(m, n)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    q = W.entries
    d = q - q.T
    epairs, cpairs = _pairs_for_model(q)
    ne, nc = len(epairs), len(cpairs)

    off_e = n * m
    off_c = off_e + ne * m
    off_f = off_c + nc * m
    off_g = off_f + m
    ncols = off_g + m

    variables = []
    for i in range(1, n + 1):
        for k in range(1, m + 1):
            fixed = i == 1 and k == 1
            variables.append(Variable(f"x_{i}_{k}", "binary",
                                      1.0 if fixed else 0.0, 1.0, 0.0))
    for i0, j0 in epairs:
        for k in range(1, m + 1):
            variables.append(Variable(f"e_{i0 + 1}_{j0 + 1}_{k}", "continuous",
                                      0.0, 1.0, 0.0))
    for i0, j0 in cpairs:
        for k in range(1, m + 1):
            variables.append(Variable(f"c_{i0 + 1}_{j0 + 1}_{k}", "continuous",
                                      0.0, 1.0, 0.0))
    for k in range(1, m + 1):
        variables.append(Variable(f"f_{k}", "continuous", 0.0, math.inf, 1.0))
    for k in range(1, m + 1):
        variables.append(Variable(f"g_{k}", "continuous", 0.0, math.inf, alpha))

    rows, cols, vals = [], [], []
    con_names, senses, rhs = [], [], []

    def add_row(name, sense, b, row_cols, row_vals):
        idx = len(con_names)
        con_names.append(name)
        senses.append(sense)
        rhs.append(b)
        rows.append(np.full(len(row_cols), idx, dtype=np.int64))
        cols.append(np.asarray(row_cols, dtype=np.int64))
        vals.append(np.asarray(row_vals, dtype=float))

    for i in range(1, n + 1):
        add_row(f"assign_{i}", "E", 1.0,
                [(i - 1) * m + k for k in range(m)], np.ones(m))
    for k in range(1, m + 1):
        add_row(f"setcover_{k}", "G", 1.0,
                [(i0) * m + (k - 1) for i0 in range(n)], np.ones(n))
    for k in range(1, m + 1):
        e_cols = off_e + np.arange(ne) * m + (k - 1)
        coef = np.concatenate([[1.0], -d[epairs[:, 0], epairs[:, 1]]]) if ne \
            else np.array([1.0])
        col_list = np.concatenate([[off_f + k - 1], e_cols]) if ne \
            else np.array([off_f + k - 1])
        add_row(f"flowdef_{k}", "E", 0.0, col_list, coef)
    qdiag = np.diag(q)
    diag_bins = np.nonzero(qdiag != 0.0)[0]
    for k in range(1, m + 1):
        c_cols = off_c + np.arange(nc) * m + (k - 1)
        x_cols = diag_bins * m + (k - 1)
        col_list = np.concatenate([[off_g + k - 1], x_cols, c_cols])
        coef = np.concatenate([[1.0], -qdiag[diag_bins],
                               -(q[cpairs[:, 0], cpairs[:, 1]]
                                 + q[cpairs[:, 1], cpairs[:, 0]]) if nc
                               else np.empty(0)])
        add_row(f"cohdef_{k}", "E", 0.0, col_list, coef)

    def add_product_rows(tag, pair_array, offset, partner_cluster):
        npairs = len(pair_array)
        if npairs == 0:
            return
        p = np.repeat(np.arange(npairs), m)
        k0 = np.tile(np.arange(m), npairs)
        var = offset + p * m + k0
        i0 = pair_array[p, 0]
        j0 = pair_array[p, 1]
        xa = i0 * m + k0
        xb = j0 * m + partner_cluster(k0)
        base = len(con_names)
        nv = npairs * m
        for t, (name_fmt, sense, b) in enumerate([
            ("p1_{}", "L", 0.0), ("p2_{}", "L", 0.0), ("p3_{}", "G", -1.0),
        ]):
            con_names.extend(
                name_fmt.format(f"{tag}_{i + 1}_{j + 1}_{k + 1}")
                for i, j, k in zip(i0, j0, k0)
            )
            senses.extend([sense] * nv)
            rhs.extend([b] * nv)
        # rows interleave per variable: p1, p2, p3 blocks for variable t
        r1 = base + 0 * nv + np.arange(nv)
        r2 = base + 1 * nv + np.arange(nv)
        r3 = base + 2 * nv + np.arange(nv)
        rows.append(np.concatenate([r1, r1, r2, r2, r3, r3, r3]))
        cols.append(np.concatenate([var, xa, var, xb, var, xa, xb]))
        vals.append(np.concatenate([
            np.ones(nv), -np.ones(nv),
            np.ones(nv), -np.ones(nv),
            np.ones(nv), -np.ones(nv), -np.ones(nv),
        ]))

    add_product_rows("e", epairs, off_e, lambda k0: (k0 + 1) % m)
    add_product_rows("c", cpairs, off_c, lambda k0: k0)

    matrix = csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(con_names), ncols),
    )
    return MipInstance(variables, con_names, matrix, senses, rhs,
                       n=n, m=m, alpha=alpha, weights=W)


def model_objective_value(mip: MipInstance, values: Mapping[str, float]) -> float:
    total = 0.0
    for v in mip.variables:
        if v.obj != 0.0:
            total += v.obj * values[v.name]
    return total


def solution_values(mip: MipInstance, c: CycleClustering) -> np.ndarray:
    """Variable values implied by an integral clustering, in column order.

    Products take their exact 0/1 values; f_k and g_k are read off their
    defining rows so the result satisfies every constraint of the model.
    """
    n, m = mip.n, mip.m
    out = np.zeros(mip.ncols)
    for i in range(1, n + 1):
        out[mip.x_column(i, int(c.assignment[i - 1]))] = 1.0
    for name, col in mip.var_index.items():
        if name.startswith(("e_", "c_")):
            _, i, j, k = name.split("_")
            i, j, k = int(i), int(j), int(k)
            partner = successor(k, m) if name.startswith("e_") else k
            out[col] = out[mip.x_column(i, k)] * out[mip.x_column(j, partner)]
    csc = mip.matrix.tocsc()
    # f_k/g_k each appear in exactly one row, with coefficient 1
    for k in range(1, m + 1):
        for name in (f"f_{k}", f"g_{k}"):
            col = mip.var_index[name]
            row = int(csc.indices[csc.indptr[col]:csc.indptr[col + 1]][0])
            r = mip.matrix.getrow(row)
            acc = float(r.data @ out[r.indices]) - out[col]
            out[col] = mip.rhs[row] - acc
    return out


def solution_dict(mip: MipInstance, c: CycleClustering) -> dict:
    vals = solution_values(mip, c)
    return {v.name: float(vals[i]) for i, v in enumerate(mip.variables)}


def clustering_from_solution(mip: MipInstance, values: Mapping[str, float]) -> CycleClustering:
    """Round a near-binary solution to a clustering and cross-check it.

    The recomputed objective must agree with the model objective implied by
    `values`; disagreement signals a linearization bug.
    """
    n, m = mip.n, mip.m
    x = np.empty((n, m))
    for i in range(1, n + 1):
        for k in range(1, m + 1):
            v = float(values[f"x_{i}_{k}"])
            if abs(v - round(v)) > INT_TOL or round(v) not in (0.0, 1.0):
                raise FractionalSolutionError(f"x_{i}_{k}", v)
            x[i - 1, k - 1] = round(v)
    row_sums = x.sum(axis=1)
    bad = np.nonzero(np.abs(row_sums - 1.0) > INT_TOL)[0]
    if bad.size:
        raise InfeasibleAssignmentError(
            f"bin {int(bad[0]) + 1} is assigned to {int(row_sums[bad[0]])} clusters"
        )
    if np.any(x.sum(axis=0) < 1.0 - INT_TOL):
        k = int(np.nonzero(x.sum(axis=0) < 1.0 - INT_TOL)[0][0]) + 1
        raise InfeasibleAssignmentError(f"cluster {k} is empty")
    assignment = np.argmax(x, axis=1) + 1
    clustering = CycleClustering(n=n, m=m, assignment=assignment)
    if mip.weights is None:
        raise ValueError("instance carries no weight matrix to verify against")
    direct = objective(mip.weights, clustering, mip.alpha)
    model_value = model_objective_value(mip, values)
    if abs(direct.total - model_value) > OBJ_TOL:
        raise ObjectiveMismatchError(model_value, direct.total)
    return clustering


# ---------------------------------------------------------------------------
# CPLEX-LP-style text format
# ---------------------------------------------------------------------------

_SENSE_SYMBOL = {"L": "<=", "G": ">=", "E": "="}
_SYMBOL_SENSE = {v: k for k, v in _SENSE_SYMBOL.items()}


def _num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _terms(pairs) -> str:
    parts = []
    for idx, (name, coef) in enumerate(pairs):
        mag = abs(coef)
        body = name if mag == 1.0 else f"{_num(mag)} {name}"
        if idx == 0:
            parts.append(body if coef > 0 else f"- {body}")
        else:
            parts.append(f"+ {body}" if coef > 0 else f"- {body}")
    return " ".join(parts)


def export_model(mip: MipInstance) -> str:
    """Deterministic LP-format text; parse_model inverts it exactly."""
    lines = ["Maximize"]
    obj_terms = [(v.name, v.obj) for v in mip.variables if v.obj != 0.0]
    lines.append(f" obj: {_terms(obj_terms)}")
    lines.append("Subject To")
    mat = mip.matrix
    for r in range(mip.nrows):
        lo, hi = mat.indptr[r], mat.indptr[r + 1]
        pairs = [(mip.variables[c].name, float(v))
                 for c, v in zip(mat.indices[lo:hi], mat.data[lo:hi])]
        sym = _SENSE_SYMBOL[str(mip.senses[r])]
        lines.append(f" {mip.con_names[r]}: {_terms(pairs)} {sym} {_num(mip.rhs[r])}")
    lines.append("Bounds")
    for v in mip.variables:
        if v.lb == v.ub:
            lines.append(f" {v.name} = {_num(v.lb)}")
        elif math.isinf(v.ub) and math.isinf(v.lb):
            lines.append(f" {v.name} free")
        elif math.isinf(v.ub):
            lines.append(f" {v.name} >= {_num(v.lb)}")
        elif math.isinf(v.lb):
            lines.append(f" {v.name} <= {_num(v.ub)}")
        else:
            lines.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    lines.append("Binaries")
    for v in mip.variables:
        if v.kind == "binary":
            lines.append(f" {v.name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def _parse_terms(tokens):
    pairs = []
    sign = 1.0
    pending = None
    for tok in tokens:
        if tok == "+":
            sign = 1.0
        elif tok == "-":
            sign = -1.0
        else:
            try:
                val = float(tok)
            except ValueError:
                coef = sign if pending is None else sign * pending
                pairs.append((tok, coef))
                sign, pending = 1.0, None
            else:
                pending = val
    if pending is not None:
        raise FileFormatError("dangling coefficient in term list")
    return pairs


def parse_model(text: str) -> MipInstance:
    """Rebuild a MipInstance from export_model output.

    The parsed instance carries no weight matrix.
    """
    section = None
    obj_pairs = []
    constraints = []  # (name, pairs, sense, rhs)
    bounds = []       # (name, lb, ub) in file order
    binaries = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low in ("maximize", "subject to", "bounds", "binaries", "end"):
            section = low
            continue
        if section == "maximize":
            body = line.split(":", 1)[1] if ":" in line else line
            obj_pairs.extend(_parse_terms(body.split()))
        elif section == "subject to":
            if ":" not in line:
                raise FileFormatError(f"constraint line without name: {line!r}")
            name, body = line.split(":", 1)
            tokens = body.split()
            sym = None
            for s in ("<=", ">=", "="):
                if s in tokens:
                    sym = s
                    break
            if sym is None:
                raise FileFormatError(f"constraint without sense: {line!r}")
            pos = tokens.index(sym)
            pairs = _parse_terms(tokens[:pos])
            constraints.append((name.strip(), pairs, _SYMBOL_SENSE[sym],
                                float(tokens[pos + 1])))
        elif section == "bounds":
            tokens = line.split()
            if len(tokens) == 2 and tokens[1] == "free":
                bounds.append((tokens[0], -math.inf, math.inf))
            elif len(tokens) == 3 and tokens[1] == "=":
                v = float(tokens[2])
                bounds.append((tokens[0], v, v))
            elif len(tokens) == 3 and tokens[1] == ">=":
                bounds.append((tokens[0], float(tokens[2]), math.inf))
            elif len(tokens) == 3 and tokens[1] == "<=":
                bounds.append((tokens[0], -math.inf, float(tokens[2])))
            elif len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
                bounds.append((tokens[2], float(tokens[0]), float(tokens[4])))
            else:
                raise FileFormatError(f"unrecognized bounds line: {line!r}")
        elif section == "binaries":
            binaries.update(line.split())
        elif section == "end":
            raise FileFormatError("content after End")
        else:
            raise FileFormatError(f"content before Maximize: {line!r}")

    obj_map = dict(obj_pairs)
    variables = [
        Variable(name, "binary" if name in binaries else "continuous",
                 lb, ub, obj_map.get(name, 0.0))
        for name, lb, ub in bounds
    ]
    index = {v.name: i for i, v in enumerate(variables)}
    rows, cols, vals = [], [], []
    con_names, senses, rhs = [], [], []
    for r, (name, pairs, sense, b) in enumerate(constraints):
        con_names.append(name)
        senses.append(sense)
        rhs.append(b)
        for var_name, coef in pairs:
            if var_name not in index:
                raise FileFormatError(f"constraint references unknown {var_name!r}")
            rows.append(r)
            cols.append(index[var_name])
            vals.append(coef)
    matrix = csr_matrix((vals, (rows, cols)),
                        shape=(len(con_names), len(variables)))
    xs = [v.name for v in variables if v.name.startswith("x_")]
    n = max((int(s.split("_")[1]) for s in xs), default=0)
    m = max((int(s.split("_")[2]) for s in xs), default=0)
    alpha = obj_map.get("g_1", None)
    return MipInstance(variables, con_names, matrix, senses, rhs,
                       n=n, m=m, alpha=alpha, weights=None)


def structurally_equal(a: MipInstance, b: MipInstance) -> bool:
    """Exact equality of names, kinds, bounds, objective, rows and senses."""
    if a.variables != b.variables:
        return False
    if a.con_names != b.con_names or not np.array_equal(a.senses, b.senses):
        return False
    if not np.array_equal(a.rhs, b.rhs):
        return False
    am, bm = a.matrix, b.matrix
    return (am.shape == bm.shape
            and np.array_equal(am.indptr, bm.indptr)
            and np.array_equal(am.indices, bm.indices)
            and np.array_equal(am.data, bm.data))
