"""MPS and LP-text emission, plus an MPS reader.

Three output formats:

``mps``       fixed-column MPS. Names longer than 8 characters are replaced by
              ``R0000000``/``C0000000`` style names and the originals written
              to a ``<path>.names.json`` sidecar. Numbers are limited to 12
              characters, so the file is a close but not bit-exact copy.
``free-mps``  whitespace-separated MPS with full names and shortest
              round-trip decimal numbers (lossless).
``lp``        CPLEX-style LP text for reading by eye or by other tools.

:func:`read_mps` accepts both MPS flavours and applies a sidecar when present.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .problem import EQ, GE, LE, LinearProgram

FORMATS = ("mps", "free-mps", "lp")
OBJ_ROW = "COST"
FIXED_NAME_WIDTH = 8
FIXED_NUM_WIDTH = 12
LP_LINE_WIDTH = 200


class MPSError(ValueError):
    pass


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".names.json")


def _names(lp: LinearProgram, catalogs):
    if catalogs is not None:
        variables, constraints = catalogs
        cols, rows = variables.names(), constraints.names()
    else:
        cols, rows = lp.col_names, lp.row_names
    if cols is None:
        cols = [f"C{j}" for j in range(lp.n)]
    if rows is None:
        rows = [f"R{i}" for i in range(lp.m)]
    if len(cols) != lp.n or len(rows) != lp.m:
        raise ValueError("catalog sizes do not match the LP")
    if len(set(cols)) != len(cols) or len(set(rows) | {OBJ_ROW}) != len(rows) + 1:
        raise ValueError("row and column names must be unique and distinct from the objective row")
    return list(cols), list(rows)


def _fixed_num(v: float) -> str:
    v = float(v)
    if v == int(v) and abs(v) < 1e11:
        return str(int(v))
    for p in range(FIXED_NUM_WIDTH, 0, -1):
        s = f"{v:.{p}g}"
        if len(s) <= FIXED_NUM_WIDTH:
            return s
    raise MPSError(f"cannot encode {v!r} in {FIXED_NUM_WIDTH} characters")


def _free_num(v: float) -> str:
    return repr(float(v))


def _bound_records(lp: LinearProgram, cols):
    out = []
    for j, (lo, up) in enumerate(zip(lp.lower, lp.upper)):
        name = cols[j]
        if lo == up:
            out.append(("FX", name, lo))
            continue
        if lo == -np.inf:
            if up == np.inf:
                out.append(("FR", name, None))
            else:
                out.append(("MI", name, None))
                out.append(("UP", name, up))
            continue
        if lo != 0.0:
            out.append(("LO", name, lo))
        if up != np.inf:
            out.append(("UP", name, up))
        elif lo != 0.0:
            out.append(("PL", name, None))
    return out


def _mps_lines(lp: LinearProgram, cols, rows, fixed: bool):
    num = _fixed_num if fixed else _free_num

    def rec(f1, f2, f3="", f4="", f5="", f6=""):
        if fixed:
            line = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}   {f5:<8}  {f6:>12}"
            return line.rstrip()
        return " " + " ".join(x for x in (f1, f2, f3, f4, f5, f6) if x)

    yield f"NAME          {lp.name.replace(' ', '_')}" if fixed else f"NAME {lp.name.replace(' ', '_')}"
    yield "ROWS"
    yield rec("N", OBJ_ROW)
    for i, name in enumerate(rows):
        yield rec(lp.senses[i], name)
    yield "COLUMNS"
    A = lp.A
    for j, name in enumerate(cols):
        c = lp.objective[j]
        s, e = A.indptr[j], A.indptr[j + 1]
        if c != 0.0 or s == e:
            yield rec("", name, OBJ_ROW, num(c))
        for k in range(s, e):
            yield rec("", name, rows[A.indices[k]], num(A.data[k]))
    yield "RHS"
    if lp.offset != 0.0:
        yield rec("", "RHS", OBJ_ROW, num(-lp.offset))
    for i in np.flatnonzero(lp.rhs):
        yield rec("", "RHS", rows[i], num(lp.rhs[i]))
    bounds = _bound_records(lp, cols)
    if bounds:
        yield "BOUNDS"
        for kind, name, v in bounds:
            yield rec(kind, "BND", name, "" if v is None else num(v))
    yield "ENDATA"


def _lp_terms(coefs, names):
    parts = []
    for a, name in zip(coefs, names):
        sign = "-" if a < 0 else "+"
        mag = abs(float(a))
        parts.append(f"{sign} {name}" if mag == 1.0 else f"{sign} {_free_num(mag)} {name}")
    return parts


def _wrap(head: str, parts, tail: str = ""):
    line = head
    for p in parts + ([tail] if tail else []):
        if len(line) + 1 + len(p) > LP_LINE_WIDTH:
            yield line
            line = "   " + p
        else:
            line = f"{line} {p}"
    yield line


def _lp_lines(lp: LinearProgram, cols, rows):
    yield f"\\ Problem: {lp.name}"
    yield "Minimize"
    nz = np.flatnonzero(lp.objective)
    terms = _lp_terms(lp.objective[nz], [cols[j] for j in nz])
    if lp.offset != 0.0:
        terms.append(("- " if lp.offset < 0 else "+ ") + _free_num(abs(lp.offset)))
    if not terms:
        terms = ["0 " + cols[0]] if cols else []
    yield from _wrap(" obj:", terms)
    yield "Subject To"
    AR = lp.A.tocsr()
    ops = {EQ: "=", LE: "<=", GE: ">="}
    for i, name in enumerate(rows):
        s, e = AR.indptr[i], AR.indptr[i + 1]
        terms = _lp_terms(AR.data[s:e], [cols[j] for j in AR.indices[s:e]]) or ["0 " + cols[0]]
        yield from _wrap(f" {name}:", terms, f"{ops[lp.senses[i]]} {_free_num(lp.rhs[i])}")
    yield "Bounds"
    for j, name in enumerate(cols):
        lo, up = lp.lower[j], lp.upper[j]
        if lo == up:
            yield f" {name} = {_free_num(lo)}"
        elif lo == -np.inf and up == np.inf:
            yield f" {name} free"
        elif lo == -np.inf:
            yield f" -inf <= {name} <= {_free_num(up)}"
        elif up == np.inf:
            if lo != 0.0:
                yield f" {name} >= {_free_num(lo)}"
        else:
            yield f" {_free_num(lo)} <= {name} <= {_free_num(up)}"
    yield "End"


def export_lp(lp: LinearProgram, catalogs=None, fmt: str = "mps", path=None) -> Path:
    """Write ``lp`` to ``path`` in ``fmt`` (``mps``, ``free-mps`` or ``lp``).

    ``catalogs`` is an optional ``(VariableCatalog, ConstraintCatalog)`` pair
    supplying human-readable names; without it the LP's own names are used.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown LP format {fmt!r}; expected one of {', '.join(FORMATS)}")
    path = Path(path)
    cols, rows = _names(lp, catalogs)
    if fmt == "mps":
        long_names = [n for n in cols + rows if len(n) > FIXED_NAME_WIDTH or " " in n]
        if long_names:
            short_cols = [f"C{j:07d}" for j in range(lp.n)]
            short_rows = [f"R{i:07d}" for i in range(lp.m)]
            if lp.n > 10**7 or lp.m > 10**7:
                raise MPSError("too many rows or columns for fixed-format names")
            mapping = {"rows": dict(zip(short_rows, rows)), "columns": dict(zip(short_cols, cols))}
            sidecar_path(path).write_text(json.dumps(mapping, indent=0, sort_keys=False) + "\n",
                                          encoding="utf-8")
            cols, rows = short_cols, short_rows
        lines = _mps_lines(lp, cols, rows, fixed=True)
    elif fmt == "free-mps":
        bad = [n for n in cols + rows if not n or any(ch.isspace() for ch in n)]
        if bad:
            raise MPSError(f"name {bad[0]!r} cannot be written to free-format MPS")
        lines = _mps_lines(lp, cols, rows, fixed=False)
    else:
        lines = _lp_lines(lp, cols, rows)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
    return path


def read_mps(path, sidecar: bool = True) -> LinearProgram:
    """Parse a fixed or free MPS file into a :class:`LinearProgram`."""
    path = Path(path)
    name = path.stem
    row_sense = {}
    row_order = []
    obj_row = None
    cols = {}
    col_order = []
    entries = []  # (row, col, value)
    rhs = {}
    bounds = []
    section = None
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                head = line.split()
                section = head[0].upper()
                if section == "NAME":
                    name = head[1] if len(head) > 1 else name
                elif section == "ENDATA":
                    break
                elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS"):
                    raise MPSError(f"line {lineno}: unsupported section {section!r}")
                continue
            f = line.split()
            try:
                if section == "ROWS":
                    sense, rname = f[0].upper(), f[1]
                    if sense == "N":
                        if obj_row is None:
                            obj_row = rname
                        continue
                    if sense not in (EQ, LE, GE):
                        raise MPSError(f"line {lineno}: unknown row type {sense!r}")
                    if rname in row_sense:
                        raise MPSError(f"line {lineno}: duplicate row {rname!r}")
                    row_sense[rname] = sense
                    row_order.append(rname)
                elif section == "COLUMNS":
                    if "'MARKER'" in f:
                        raise MPSError(f"line {lineno}: integer markers are not supported")
                    cname = f[0]
                    if cname not in cols:
                        cols[cname] = len(col_order)
                        col_order.append(cname)
                    for k in range(1, len(f) - 1, 2):
                        entries.append((f[k], cname, float(f[k + 1])))
                elif section == "RHS":
                    pairs = f[1:] if len(f) % 2 == 1 else f
                    for k in range(0, len(pairs) - 1, 2):
                        rhs[pairs[k]] = float(pairs[k + 1])
                elif section == "BOUNDS":
                    kind = f[0].upper()
                    if kind in ("FR", "MI", "PL"):
                        cname = f[-1] if len(f) in (2, 3) else None
                        bounds.append((kind, cname, None, lineno))
                    else:
                        bounds.append((kind, f[-2], float(f[-1]), lineno))
                else:
                    raise MPSError(f"line {lineno}: data outside a section")
            except (IndexError, ValueError) as exc:
                if isinstance(exc, MPSError):
                    raise
                raise MPSError(f"line {lineno}: malformed record {line.strip()!r}") from None
    if section != "ENDATA":
        raise MPSError("missing ENDATA")
    rindex = {r: i for i, r in enumerate(row_order)}
    m, n = len(row_order), len(col_order)
    obj = np.zeros(n)
    ri, ci, vals = [], [], []
    for r, c, v in entries:
        if r == obj_row:
            obj[cols[c]] += v
        elif r in rindex:
            ri.append(rindex[r])
            ci.append(cols[c])
            vals.append(v)
        else:
            raise MPSError(f"column {c!r} references unknown row {r!r}")
    b = np.zeros(m)
    offset = 0.0
    for r, v in rhs.items():
        if r == obj_row:
            offset = -v
        elif r in rindex:
            b[rindex[r]] = v
        else:
            raise MPSError(f"RHS references unknown row {r!r}")
    lower, upper = np.zeros(n), np.full(n, np.inf)
    for kind, c, v, lineno in bounds:
        if c not in cols:
            raise MPSError(f"line {lineno}: bound on unknown column {c!r}")
        j = cols[c]
        if kind == "UP":
            upper[j] = v
            if v < 0 and lower[j] == 0.0:
                lower[j] = -np.inf
        elif kind == "LO":
            lower[j] = v
        elif kind == "FX":
            lower[j] = upper[j] = v
        elif kind == "FR":
            lower[j], upper[j] = -np.inf, np.inf
        elif kind == "MI":
            lower[j] = -np.inf
        elif kind == "PL":
            upper[j] = np.inf
        else:
            raise MPSError(f"line {lineno}: unsupported bound type {kind!r}")
    A = sp.csc_matrix((vals, (ri, ci)), shape=(m, n))
    col_names, row_names = list(col_order), list(row_order)
    side = sidecar_path(path)
    if sidecar and side.exists():
        mapping = json.loads(side.read_text(encoding="utf-8"))
        col_names = [mapping["columns"].get(c, c) for c in col_names]
        row_names = [mapping["rows"].get(r, r) for r in row_names]
    return LinearProgram(A, b, obj, lower, upper, [row_sense[r] for r in row_order], offset,
                         col_names, row_names, name)
