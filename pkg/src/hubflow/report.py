"""Named schedules, horizon totals, costs and post-solve audit.

A :class:`ScheduleReport` is everything needed to render results and rerun
the audit; it can be written as a CSV bundle and read back without the
scenario or the LP.

Bundle layout (all numbers written with shortest round-trip precision)::

    <hub>__<KIND>.csv   step, then one column per series of that kind
    LOAD.csv            step, one column per <hub>/<carrier> load
    curtailment.csv     step, one column per <hub>/<process>/<carrier>
    totals.csv          hub, port, carrier, total_kwh, total_kg
    costs.csv           hub, port, carrier, cost_eur
    meta.json           run context plus a sha256 of every CSV above

Column headers are ``carrier`` for port flows, ``carrier@element`` for
process and storage flows and ``@element`` for process totals. Material
carriers get an extra ``<header>[kg/s]`` column next to the kW one.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .builder import PHYSICAL
from .lp.problem import OPTIMAL
from .model import KWH, Scenario

TOTAL_PORTS = ("import", "return", "network", "export")
PORT_KINDS = {"import": "IMP", "return": "RET", "export": "EXP"}
BUNDLE_VERSION = 1
CLOSURE_TOL = 1e-6

INFO = "info"
FATAL = "fatal"


class ReportError(RuntimeError):
    pass


class BundleError(ReportError):
    pass


@dataclass
class TotalRow:
    hub: str
    port: str
    carrier: str
    kwh: float
    kg: float | None = None


@dataclass
class ScheduleReport:
    """Solved schedules in kW (exergy kW for materials) and SOC in kWh."""

    name: str
    status: str
    objective: float
    hours: np.ndarray
    series: dict  # (hub, kind, carrier, element) -> array
    loads: dict  # (hub, carrier) -> array in kW
    totals: list  # TotalRow, scenario port order
    costs: dict  # (hub, port, carrier) -> EUR
    curtailment: dict  # (hub, process, carrier) -> array in kW
    carriers: dict  # id -> chemical exergy in J/kg or None
    storages: list = field(default_factory=list)  # dicts: hub, id, carrier, capacity, terminal_policy
    networks: list = field(default_factory=list)  # dicts: carrier, hubs, loss_fraction
    loss_orientation: str = PHYSICAL
    forced_imports: list = field(default_factory=list)  # dicts: hub, carrier, flow_kw, consumers

    def get(self, hub, kind, carrier=None, element=None) -> np.ndarray:
        return self.series[(hub, kind, carrier, element)]

    def kg_per_s(self, carrier: str, values) -> np.ndarray:
        e = self.carriers.get(carrier)
        if e is None:
            raise ValueError(f"carrier {carrier!r} is not a material")
        return np.asarray(values) * 1000.0 / e

    def total(self, hub, port, carrier) -> TotalRow:
        for row in self.totals:
            if (row.hub, row.port, row.carrier) == (hub, port, carrier):
                return row
        raise KeyError((hub, port, carrier))

    def soc(self, storage_id: str) -> np.ndarray:
        for st in self.storages:
            if st["id"] == storage_id:
                return self.get(st["hub"], "SOC", st["carrier"], storage_id)
        raise KeyError(storage_id)


def _integral(values, hours) -> float:
    return float(np.sum(np.asarray(values) * hours))


def _kg(kwh, exergy):
    return None if exergy is None else kwh * KWH / exergy


def _limit_kw(scenario: Scenario, carrier, values):
    c = scenario.carrier(carrier)
    v = np.asarray(values, dtype=float)
    return v * (c.chemical_exergy / 1000.0) if c.is_material else v


def extract_schedules(solution, catalogs, scenario: Scenario, loss_orientation: str = PHYSICAL) -> ScheduleReport:
    """Map an optimal solution back to named series, totals and costs."""
    if solution.status != OPTIMAL:
        raise ReportError(f"cannot report a solution with status {solution.status!r}")
    variables = catalogs[0]
    x = np.asarray(solution.x, dtype=float)
    hours = np.asarray(scenario.time_grid.steps, dtype=float)
    series = {}
    for (kind, carrier, hub, element), idx in variables.series().items():
        series[(hub, kind, carrier, element)] = x[idx]
    exergy = {c.id: c.chemical_exergy if c.is_material else None for c in scenario.carriers}

    loads = {}
    totals = []
    costs = {}
    zeros = np.zeros(scenario.T)
    for port in scenario.ports:
        h, c = port.hub, port.carrier
        if port.kind == "load":
            loads[(h, c)] = _limit_kw(scenario, c, port.load)
            continue
        if port.kind == "network":
            flow = series.get((h, "NET_IN", c, None), zeros) - series.get((h, "NET_OUT", c, None), zeros)
        else:
            flow = series.get((h, PORT_KINDS[port.kind], c, None), zeros)
        kwh = _integral(flow, hours)
        totals.append(TotalRow(h, port.kind, c, kwh, _kg(kwh, exergy[c])))
        if port.kind in ("import", "export"):
            price = np.asarray(port.price, dtype=float)
            sign = 1.0 if port.kind == "import" else -1.0
            costs[(h, port.kind, c)] = sign * float(np.sum(price * hours * flow)) + 0.0

    curtailment = {}
    for p in scenario.processes:
        for lim in p.limits:
            if lim.renewable is None:
                continue
            kind = "IN_PROC" if lim.side == "inlet" else "OUT_PROC"
            used = series[(p.hub, kind, lim.carrier, p.id)]
            curtailment[(p.hub, p.id, lim.carrier)] = _limit_kw(scenario, lim.carrier, lim.max_flow) - used

    storages = [{"hub": s.hub, "id": s.id, "carrier": s.carrier, "capacity": s.capacity,
                 "terminal_policy": s.terminal_policy} for s in scenario.storages]
    networks = [{"carrier": n.carrier, "hubs": list(n.hubs), "loss_fraction": n.loss_fraction}
                for n in scenario.networks]
    forced = []
    for port in scenario.ports:
        if port.kind == "import" and port.forced:
            consumers = [p.id for p in scenario.hub_processes(port.hub) if port.carrier in p.inlet_carriers()]
            forced.append({"hub": port.hub, "carrier": port.carrier,
                           "flow_kw": _limit_kw(scenario, port.carrier, port.min_flow).tolist(),
                           "consumers": consumers})
    return ScheduleReport(scenario.name, solution.status, float(solution.objective), hours, series, loads,
                          totals, costs, curtailment, exergy, storages, networks, loss_orientation, forced)


# ---------------------------------------------------------------------------
# audit


@dataclass
class Finding:
    check: str
    severity: str
    subject: str
    value: float
    message: str

    def __str__(self):
        return f"{self.severity.upper():5s} {self.check:<17s} {self.subject:<32s} {self.message}"


@dataclass
class AuditResult:
    findings: list

    @property
    def fatal(self) -> bool:
        return any(f.severity == FATAL for f in self.findings)

    def by_check(self, check: str) -> list:
        return [f for f in self.findings if f.check == check]

    def lines(self):
        return [str(f) for f in self.findings]


def _hub_closure(report: ScheduleReport):
    """Per (hub, carrier) array of sources minus sinks at each step."""
    T = report.hours.size
    out = {}

    def acc(hub, carrier, values, sign):
        key = (hub, carrier)
        out.setdefault(key, np.zeros(T))
        out[key] = out[key] + sign * values

    sources = ("IMP", "OUT_PROC", "NET_OUT", "STO_DIS")
    sinks = ("IN_PROC", "NET_IN", "STO_CHA", "EXP")
    for (hub, kind, carrier, _), values in report.series.items():
        if kind in sources:
            acc(hub, carrier, values, 1.0)
        elif kind in sinks:
            acc(hub, carrier, values, -1.0)
    for (hub, carrier), values in report.loads.items():
        acc(hub, carrier, values, -1.0)
    return out


def audit(report: ScheduleReport, scenario: Scenario | None = None, closure_tol: float = CLOSURE_TOL) -> AuditResult:
    """Post-solve checks; only the hub closure can produce a fatal finding.

    ``scenario`` is accepted for symmetry with :func:`extract_schedules`;
    the report already carries the context the checks need.
    """
    findings = []
    hours = report.hours

    for (hub, proc, carrier), cut in report.curtailment.items():
        total = _integral(cut, hours)
        worst = float(cut.min()) if cut.size else 0.0
        msg = f"curtailed {total:.6g} kWh"
        if worst < -closure_tol:
            msg += f"; schedule exceeds limit by {-worst:.3g} kW"
        findings.append(Finding("curtailment", INFO, f"{hub}/{proc}/{carrier}", total, msg))

    for st in report.storages:
        soc = report.get(st["hub"], "SOC", st["carrier"], st["id"])
        end = float(soc[-1]) if soc.size else 0.0
        findings.append(Finding("terminal_soc", INFO, f"{st['hub']}/{st['id']}", end,
                                f"{end:.6g} kWh at horizon end ({st['terminal_policy']})"))

    worst_key, worst_t, worst_val = None, -1, 0.0
    for key, gap in sorted(_hub_closure(report).items()):
        if gap.size:
            t = int(np.argmax(np.abs(gap)))
            if abs(gap[t]) > abs(worst_val) or worst_key is None:
                worst_key, worst_t, worst_val = key, t, float(gap[t])
    if worst_key is not None:
        bad = abs(worst_val) > closure_tol
        subject = f"{worst_key[0]}/{worst_key[1]}/t={worst_t}"
        findings.append(Finding("closure", FATAL if bad else INFO, subject, abs(worst_val),
                                f"max |sources - sinks| = {abs(worst_val):.3g} kW"
                                + (f" exceeds {closure_tol:g}" if bad else "")))

    for nw in report.networks:
        c, f = nw["carrier"], nw["loss_fraction"]
        inj = sum(report.get(h, "NET_IN", c) for h in nw["hubs"])
        ext = sum(report.get(h, "NET_OUT", c) for h in nw["hubs"])
        if report.loss_orientation == PHYSICAL:
            gap = inj - (1.0 + f) * ext
        else:
            gap = ext - (1.0 + f) * inj
        ti, te = _integral(inj, hours), _integral(ext, hours)
        findings.append(Finding("network_loss", INFO, c, float(np.max(np.abs(gap))),
                                f"injected {ti:.6g} kWh, extracted {te:.6g} kWh, "
                                f"max gap {float(np.max(np.abs(gap))):.3g} ({report.loss_orientation})"))

    for fi in report.forced_imports:
        hub, c = fi["hub"], fi["carrier"]
        imp = report.get(hub, "IMP", c)
        target = np.asarray(fi["flow_kw"])
        dev = float(np.max(np.abs(imp - target))) if imp.size else 0.0
        for proc in fi["consumers"]:
            inlet = report.get(hub, "IN_PROC", c, proc)
            spread = float(inlet.max() - inlet.min()) if inlet.size else 0.0
            findings.append(Finding("forced_import", INFO, f"{hub}/{c}/{proc}", spread,
                                    f"inlet range {float(inlet.min()):.6g}..{float(inlet.max()):.6g} kW, "
                                    f"import deviation {dev:.3g} kW"))
    return AuditResult(findings)


# ---------------------------------------------------------------------------
# rendering


def _num(v) -> str:
    return repr(float(v))


def _header(carrier, element):
    if element is None:
        return carrier
    return f"{carrier or ''}@{element}"


def _parse_header(h):
    if "@" not in h:
        return h, None
    c, e = h.split("@", 1)
    return (c or None), e


def _csv_text(header, columns, T) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for t in range(T):
        w.writerow([t] + [_num(col[t]) for col in columns])
    return buf.getvalue()


def bundle_files(report: ScheduleReport) -> dict:
    """File name -> text content of the CSV bundle (meta.json excluded)."""
    T = report.hours.size
    files = {}
    groups = {}
    for (hub, kind, carrier, element), values in report.series.items():
        groups.setdefault((hub, kind), []).append((carrier, element, values))
    for (hub, kind), cols in groups.items():
        header, data = ["step"], []
        for carrier, element, values in cols:
            h = _header(carrier, element)
            header.append(h)
            data.append(values)
            if carrier is not None and report.carriers.get(carrier) is not None and kind != "SOC":
                header.append(f"{h}[kg/s]")
                data.append(report.kg_per_s(carrier, values))
        files[f"{hub}__{kind}.csv"] = _csv_text(header, data, T)
    load_keys = list(report.loads)
    files["LOAD.csv"] = _csv_text(["step"] + [f"{h}/{c}" for h, c in load_keys],
                                  [report.loads[k] for k in load_keys], T)
    cut_keys = list(report.curtailment)
    files["curtailment.csv"] = _csv_text(["step"] + ["/".join(k) for k in cut_keys],
                                         [report.curtailment[k] for k in cut_keys], T)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["hub", "port", "carrier", "total_kwh", "total_kg"])
    for r in report.totals:
        w.writerow([r.hub, r.port, r.carrier, _num(r.kwh), "" if r.kg is None else _num(r.kg)])
    files["totals.csv"] = buf.getvalue()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["hub", "port", "carrier", "cost_eur"])
    for (h, port, c), v in report.costs.items():
        w.writerow([h, port, c, _num(v)])
    files["costs.csv"] = buf.getvalue()
    return files


def _meta(report: ScheduleReport, files: dict) -> dict:
    return {
        "bundle_version": BUNDLE_VERSION,
        "name": report.name,
        "status": report.status,
        "objective": report.objective,
        "hours": [float(h) for h in report.hours],
        "carriers": report.carriers,
        "storages": report.storages,
        "networks": report.networks,
        "loss_orientation": report.loss_orientation,
        "forced_imports": report.forced_imports,
        "series_order": [list(k) for k in report.series],
        "files": {name: hashlib.sha256(text.encode()).hexdigest() for name, text in sorted(files.items())},
    }


def render_table(report: ScheduleReport, findings: AuditResult | None = None) -> str:
    """Aligned plain-text totals (and audit findings when given)."""
    lines = [f"{report.name}: status {report.status}, objective {report.objective:.6f} EUR", ""]
    lines.append(f"{'hub':<8s} {'port':<8s} {'carrier':<16s} {'total kWh':>18s} {'total kg':>18s}")
    for r in report.totals:
        kg = "" if r.kg is None else f"{r.kg:18.3f}"
        lines.append(f"{r.hub:<8s} {r.port:<8s} {r.carrier:<16s} {r.kwh:18.3f} {kg:>18s}")
    lines.append("")
    lines.append(f"{'hub':<8s} {'port':<8s} {'carrier':<16s} {'cost EUR':>18s}")
    for (h, port, c), v in report.costs.items():
        lines.append(f"{h:<8s} {port:<8s} {c:<16s} {v:18.3f}")
    if findings is not None:
        lines.append("")
        lines.append("audit:")
        lines.extend("  " + s for s in findings.lines())
    return "\n".join(lines) + "\n"


def emit_report(report: ScheduleReport, fmt: str = "csv", path=None, findings: AuditResult | None = None):
    """Write the report as ``csv`` (bundle directory) or ``table`` (text file).

    Returns the mapping of written file names to sha256 digests.
    """
    if fmt in ("table", "table-text"):
        text = render_table(report, findings)
        Path(path).write_text(text, encoding="utf-8")
        return {Path(path).name: hashlib.sha256(text.encode()).hexdigest()}
    if fmt not in ("csv", "csv-bundle"):
        raise ValueError(f"unknown report format {fmt!r}")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    files = bundle_files(report)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8", newline="")
    meta = _meta(report, files)
    (out / "meta.json").write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")
    return dict(meta["files"])


# ---------------------------------------------------------------------------
# reading a bundle back


def _read_csv(path: Path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh))


def _columns(rows, T, name):
    if not rows or rows[0][0] != "step":
        raise BundleError(f"{name}: missing header")
    body = rows[1:]
    if len(body) != T:
        raise BundleError(f"{name}: expected {T} rows, found {len(body)}")
    try:
        data = np.array([[float(v) for v in r[1:]] for r in body], dtype=float).reshape(T, len(rows[0]) - 1)
    except ValueError:
        raise BundleError(f"{name}: malformed number") from None
    return rows[0][1:], data


def read_bundle(directory) -> ScheduleReport:
    """Rebuild a :class:`ScheduleReport` from a CSV bundle, verifying checksums."""
    d = Path(directory)
    meta_path = d / "meta.json"
    if not meta_path.is_file():
        raise BundleError(f"{d}: no meta.json, not a result bundle")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        expected = meta["files"]
    except (ValueError, KeyError, TypeError):
        raise BundleError(f"{meta_path}: corrupt metadata") from None
    for name, digest in expected.items():
        p = d / name
        if not p.is_file():
            raise BundleError(f"{name}: missing from bundle")
        if hashlib.sha256(p.read_bytes()).hexdigest() != digest:
            raise BundleError(f"{name}: checksum mismatch")
    hours = np.asarray(meta["hours"], dtype=float)
    T = hours.size
    series = {}
    for name in expected:
        if "__" not in name:
            continue
        hub, kind = name[:-4].split("__", 1)
        headers, data = _columns(_read_csv(d / name), T, name)
        for k, h in enumerate(headers):
            if h.endswith("[kg/s]"):
                continue
            carrier, element = _parse_header(h)
            series[(hub, kind, carrier, element)] = data[:, k].copy()
    order = [tuple(k) for k in meta.get("series_order", [])]
    if set(order) == set(series):
        series = {k: series[k] for k in order}
    headers, data = _columns(_read_csv(d / "LOAD.csv"), T, "LOAD.csv")
    loads = {tuple(h.split("/", 1)): data[:, k].copy() for k, h in enumerate(headers)}
    headers, data = _columns(_read_csv(d / "curtailment.csv"), T, "curtailment.csv")
    curtailment = {tuple(h.split("/", 2)): data[:, k].copy() for k, h in enumerate(headers)}
    totals = []
    for r in _read_csv(d / "totals.csv")[1:]:
        totals.append(TotalRow(r[0], r[1], r[2], float(r[3]), float(r[4]) if r[4] else None))
    costs = {(r[0], r[1], r[2]): float(r[3]) for r in _read_csv(d / "costs.csv")[1:]}
    return ScheduleReport(meta["name"], meta["status"], float(meta["objective"]), hours, series, loads, totals,
                          costs, curtailment, meta["carriers"], meta["storages"], meta["networks"],
                          meta["loss_orientation"], meta["forced_imports"])
