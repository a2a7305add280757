"""Reading and writing scenario documents.

A scenario document is JSON (schema documented in ``docs/formats.md``).
Series fields accept a number (broadcast), an inline list, ``{"repeat": v}``
or ``{"file": "relative/path.csv"}``. Series files are two-column CSV with a
``step,value`` header and one row per time step; a single ``repeat,<v>`` row
broadcasts ``v`` to every step.

Unknown keys are errors: a misspelled price must never vanish silently.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from .model import (
    Carrier,
    Network,
    Port,
    Process,
    ProcessLimit,
    RenewableModel,
    Scenario,
    StorageUnit,
    TimeGrid,
    validate,
)

SCHEMA_VERSION = 1


class ScenarioError(Exception):
    """Base class for ingestion errors; ``code`` is machine readable."""

    code = "SCENARIO_ERROR"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class ScenarioFormatError(ScenarioError):
    code = "PARSE_ERROR"


class SeriesError(ScenarioError):
    code = "SERIES_VALUE"


# ---------------------------------------------------------------------------
# series


def load_series(path, grid: TimeGrid | int, nonnegative: bool = True) -> tuple:
    """Read a ``step,value`` CSV file into a tuple of exactly T floats."""
    T = grid if isinstance(grid, int) else grid.count
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SeriesError(f"{path}: cannot read series file ({exc.strerror})", "SERIES_FILE") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows or [c.strip() for c in rows[0]] != ["step", "value"]:
        raise SeriesError(f"{path}: row 1: expected header 'step,value'", "SERIES_FORMAT")
    body = [(i + 2, r) for i, r in enumerate(rows[1:]) if r and any(c.strip() for c in r)]
    if len(body) == 1 and body[0][1][0].strip() == "repeat":
        lineno, row = body[0]
        value = _parse_value(path, lineno, row, nonnegative)
        return tuple(value for _ in range(T))
    values = []
    for k, (lineno, row) in enumerate(body):
        if len(row) != 2:
            raise SeriesError(f"{path}: row {lineno}: expected 2 columns, got {len(row)}", "SERIES_FORMAT")
        try:
            step = int(row[0])
        except ValueError:
            raise SeriesError(f"{path}: row {lineno}: malformed step {row[0]!r}", "SERIES_FORMAT") from None
        if step != k:
            raise SeriesError(f"{path}: row {lineno}: step {step} out of order, expected {k}", "SERIES_FORMAT")
        values.append(_parse_value(path, lineno, row, nonnegative))
    if len(values) != T:
        raise SeriesError(f"{path}: {len(values)} rows for a time grid of {T} steps", "SERIES_LENGTH")
    return tuple(values)


def _parse_value(path, lineno, row, nonnegative):
    raw = row[1].strip() if len(row) > 1 else ""
    try:
        v = float(raw)
    except ValueError:
        raise SeriesError(f"{path}: row {lineno}: malformed value {raw!r}", "SERIES_FORMAT") from None
    if not math.isfinite(v):
        raise SeriesError(f"{path}: row {lineno}: non-finite value {raw!r}")
    if nonnegative and v < 0:
        raise SeriesError(f"{path}: row {lineno}: negative value {raw!r}")
    return v


def write_series(path, values) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("step,value\n")
        for i, v in enumerate(values):
            fh.write(f"{i},{float(v)!r}\n")


# ---------------------------------------------------------------------------
# loading


class _Reader:
    def __init__(self, base: Path, T: int):
        self.base = base
        self.T = T

    def series(self, raw, where, nonnegative=True):
        if isinstance(raw, bool):
            raise ScenarioFormatError(f"{where}: expected a series, got a boolean")
        if isinstance(raw, (int, float)):
            return tuple(self.number(raw, where, nonnegative) for _ in range(self.T))
        if isinstance(raw, list):
            if len(raw) != self.T:
                raise SeriesError(f"{where}: {len(raw)} values for a time grid of {self.T} steps", "SERIES_LENGTH")
            return tuple(self.number(v, f"{where}[{i}]", nonnegative) for i, v in enumerate(raw))
        if isinstance(raw, dict):
            keys = set(raw)
            if keys == {"repeat"}:
                return self.series(raw["repeat"], where, nonnegative)
            if keys == {"file"}:
                return load_series(self.base / raw["file"], self.T, nonnegative)
            raise ScenarioFormatError(f"{where}: series object needs exactly one of 'repeat' or 'file'", "UNKNOWN_KEY")
        raise ScenarioFormatError(f"{where}: expected a series")

    @staticmethod
    def number(raw, where, nonnegative=True):
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ScenarioFormatError(f"{where}: expected a number, got {raw!r}")
        v = float(raw)
        if not math.isfinite(v):
            raise SeriesError(f"{where}: non-finite value")
        if nonnegative and v < 0:
            raise SeriesError(f"{where}: negative value {v!r}")
        return v


def _fraction(raw, where):
    if isinstance(raw, str):
        try:
            return float(Fraction(raw))
        except (ValueError, ZeroDivisionError):
            raise ScenarioFormatError(f"{where}: malformed fraction {raw!r}") from None
    return _Reader.number(raw, where)


def _keys(obj, where, required=(), optional=()):
    if not isinstance(obj, dict):
        raise ScenarioFormatError(f"{where}: expected an object")
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise ScenarioFormatError(f"{where}: unknown key {unknown[0]!r}", "UNKNOWN_KEY")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ScenarioFormatError(f"{where}: missing key {missing[0]!r}", "MISSING_KEY")


def _list(obj, key, where):
    v = obj.get(key, [])
    if not isinstance(v, list):
        raise ScenarioFormatError(f"{where}.{key}: expected a list")
    return v


def parse_document(doc: dict, base: Path = Path(".")) -> Scenario:
    """Turn a decoded scenario document into a :class:`Scenario`."""
    _keys(doc, "document", required=("schema_version", "time_grid"),
          optional=("name", "carriers", "hubs", "networks"))
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ScenarioFormatError(f"unsupported schema_version {doc['schema_version']!r}", "SCHEMA_VERSION")

    tg = doc["time_grid"]
    _keys(tg, "time_grid", optional=("steps", "count", "hours"))
    if "steps" in tg:
        if "count" in tg or "hours" in tg:
            raise ScenarioFormatError("time_grid: give either 'steps' or 'count'/'hours'")
        steps = tg["steps"]
        if not isinstance(steps, list):
            raise ScenarioFormatError("time_grid.steps: expected a list")
        grid = TimeGrid(tuple(_Reader.number(v, f"time_grid.steps[{i}]") for i, v in enumerate(steps)))
    else:
        _keys(tg, "time_grid", required=("count",), optional=("hours",))
        count = tg["count"]
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise ScenarioFormatError("time_grid.count: expected a positive integer")
        grid = TimeGrid.uniform(count, _Reader.number(tg.get("hours", 1.0), "time_grid.hours"))
    rd = _Reader(base, grid.count)

    carriers = []
    for i, c in enumerate(_list(doc, "carriers", "document")):
        w = f"carriers[{i}]"
        _keys(c, w, required=("id",), optional=("kind", "chemical_exergy"))
        ex = c.get("chemical_exergy")
        carriers.append(Carrier(str(c["id"]), c.get("kind", "energy"),
                                None if ex is None else rd.number(ex, f"{w}.chemical_exergy")))

    hubs, processes, storages, ports = [], [], [], []
    for i, h in enumerate(_list(doc, "hubs", "document")):
        w = f"hubs[{i}]"
        _keys(h, w, required=("id",), optional=("processes", "storages", "ports"))
        hid = str(h["id"])
        hubs.append(hid)
        for j, p in enumerate(_list(h, "processes", w)):
            processes.append(_parse_process(p, hid, f"{w}.processes[{j}]", rd))
        for j, s in enumerate(_list(h, "storages", w)):
            ws = f"{w}.storages[{j}]"
            _keys(s, ws, required=("id", "carrier", "round_trip_efficiency", "capacity",
                                   "max_charge_rate", "max_discharge_rate"),
                  optional=("initial_soc", "terminal_policy"))
            storages.append(StorageUnit(
                id=str(s["id"]), hub=hid, carrier=str(s["carrier"]),
                round_trip_efficiency=rd.number(s["round_trip_efficiency"], f"{ws}.round_trip_efficiency"),
                capacity=rd.number(s["capacity"], f"{ws}.capacity"),
                max_charge_rate=rd.number(s["max_charge_rate"], f"{ws}.max_charge_rate"),
                max_discharge_rate=rd.number(s["max_discharge_rate"], f"{ws}.max_discharge_rate"),
                initial_soc=rd.number(s.get("initial_soc", 0.0), f"{ws}.initial_soc"),
                terminal_policy=s.get("terminal_policy", "free"),
            ))
        for j, p in enumerate(_list(h, "ports", w)):
            wp = f"{w}.ports[{j}]"
            _keys(p, wp, required=("carrier", "kind"), optional=("price", "max_flow", "min_flow", "load"))
            ports.append(Port(
                hub=hid, carrier=str(p["carrier"]), kind=str(p["kind"]),
                price=rd.series(p["price"], f"{wp}.price", nonnegative=False) if "price" in p else None,
                max_flow=rd.series(p["max_flow"], f"{wp}.max_flow") if "max_flow" in p else None,
                min_flow=rd.series(p["min_flow"], f"{wp}.min_flow") if "min_flow" in p else None,
                load=rd.series(p["load"], f"{wp}.load") if "load" in p else None,
            ))

    networks = []
    for i, n in enumerate(_list(doc, "networks", "document")):
        w = f"networks[{i}]"
        _keys(n, w, required=("carrier", "hubs"), optional=("loss_fraction",))
        if not isinstance(n["hubs"], list):
            raise ScenarioFormatError(f"{w}.hubs: expected a list")
        networks.append(Network(str(n["carrier"]), tuple(str(x) for x in n["hubs"]),
                                rd.number(n.get("loss_fraction", 0.0), f"{w}.loss_fraction")))

    return Scenario(
        carriers=tuple(carriers), hubs=tuple(hubs), processes=tuple(processes),
        storages=tuple(storages), ports=tuple(ports), networks=tuple(networks),
        time_grid=grid, name=str(doc.get("name", "")),
    )


def _parse_process(p, hub, where, rd: _Reader) -> Process:
    _keys(p, where, required=("id", "inlets", "outlets"),
          optional=("efficiency", "coefficient", "limits"))
    if ("efficiency" in p) == ("coefficient" in p):
        raise ScenarioFormatError(f"{where}: give exactly one of 'efficiency' or 'coefficient'")
    if "efficiency" in p:
        eff, unit = rd.number(p["efficiency"], f"{where}.efficiency"), None
    else:
        _keys(p["coefficient"], f"{where}.coefficient", required=("value", "unit"))
        eff = rd.number(p["coefficient"]["value"], f"{where}.coefficient.value")
        unit = str(p["coefficient"]["unit"])

    def shares(key):
        raw = p[key]
        if not isinstance(raw, dict):
            raise ScenarioFormatError(f"{where}.{key}: expected an object of carrier: fraction")
        return tuple((str(c), _fraction(f, f"{where}.{key}.{c}")) for c, f in raw.items())

    limits = []
    for k, lim in enumerate(_list(p, "limits", where)):
        wl = f"{where}.limits[{k}]"
        _keys(lim, wl, required=("carrier", "side"), optional=("max_flow", "wind", "solar"))
        given = [key for key in ("max_flow", "wind", "solar") if key in lim]
        if len(given) != 1:
            raise ScenarioFormatError(f"{wl}: give exactly one of 'max_flow', 'wind' or 'solar'")
        renewable = None
        if "max_flow" in lim:
            max_flow = rd.series(lim["max_flow"], f"{wl}.max_flow")
        else:
            kind = given[0]
            spec = lim[kind]
            if kind == "wind":
                _keys(spec, f"{wl}.wind", required=("coefficient", "cut_in", "cut_off", "speed"))
                renewable = RenewableModel(
                    "wind", rd.series(spec["speed"], f"{wl}.wind.speed", nonnegative=False),
                    coefficient=rd.number(spec["coefficient"], f"{wl}.wind.coefficient"),
                    cut_in=rd.number(spec["cut_in"], f"{wl}.wind.cut_in"),
                    cut_off=rd.number(spec["cut_off"], f"{wl}.wind.cut_off"),
                )
            else:
                _keys(spec, f"{wl}.solar", required=("area", "irradiance"))
                renewable = RenewableModel(
                    "solar", rd.series(spec["irradiance"], f"{wl}.solar.irradiance", nonnegative=False),
                    area=rd.number(spec["area"], f"{wl}.solar.area"),
                )
            try:
                max_flow = tuple(float(v) for v in renewable.limit())
            except ValueError:
                # reported as NEGATIVE_WEATHER by validation
                max_flow = tuple(0.0 for _ in range(rd.T))
        limits.append(ProcessLimit(str(lim["carrier"]), str(lim["side"]), max_flow, renewable))

    return Process(id=str(p["id"]), hub=hub, efficiency=eff, inlets=shares("inlets"),
                   outlets=shares("outlets"), limits=tuple(limits), efficiency_unit=unit)


def load_scenario(path) -> Scenario:
    """Parse, resolve and validate a scenario document.

    Validation diagnostics are attached to ``scenario.diagnostics``; they are
    not raised here so callers can report all of them at once.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario ({exc.strerror})", "UNREADABLE") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    scenario = parse_document(doc, path.parent)
    return replace(scenario, diagnostics=tuple(validate(scenario)))


# ---------------------------------------------------------------------------
# saving


def _series_out(values):
    return [float(v) for v in values]


def scenario_to_document(s: Scenario) -> dict:
    steps = s.time_grid.steps
    if steps and all(v == steps[0] for v in steps):
        grid = {"count": len(steps), "hours": float(steps[0])}
    else:
        grid = {"steps": _series_out(steps)}
    doc = {"schema_version": SCHEMA_VERSION, "name": s.name, "time_grid": grid, "carriers": []}
    for c in s.carriers:
        entry = {"id": c.id, "kind": c.kind}
        if c.chemical_exergy is not None:
            entry["chemical_exergy"] = float(c.chemical_exergy)
        doc["carriers"].append(entry)
    doc["hubs"] = []
    for h in s.hubs:
        hub = {"id": h, "processes": [], "storages": [], "ports": []}
        for p in s.hub_processes(h):
            entry = {"id": p.id}
            if p.efficiency_unit is None:
                entry["efficiency"] = float(p.efficiency)
            else:
                entry["coefficient"] = {"value": float(p.efficiency), "unit": p.efficiency_unit}
            entry["inlets"] = {c: float(f) for c, f in p.inlets}
            entry["outlets"] = {c: float(f) for c, f in p.outlets}
            limits = []
            for lim in p.limits:
                le = {"carrier": lim.carrier, "side": lim.side}
                r = lim.renewable
                if r is None:
                    le["max_flow"] = _series_out(lim.max_flow)
                elif r.kind == "wind":
                    le["wind"] = {"coefficient": r.coefficient, "cut_in": r.cut_in,
                                  "cut_off": r.cut_off, "speed": _series_out(r.weather)}
                else:
                    le["solar"] = {"area": r.area, "irradiance": _series_out(r.weather)}
                limits.append(le)
            if limits:
                entry["limits"] = limits
            hub["processes"].append(entry)
        for st in s.hub_storages(h):
            hub["storages"].append({
                "id": st.id, "carrier": st.carrier,
                "round_trip_efficiency": float(st.round_trip_efficiency),
                "capacity": float(st.capacity), "max_charge_rate": float(st.max_charge_rate),
                "max_discharge_rate": float(st.max_discharge_rate),
                "initial_soc": float(st.initial_soc), "terminal_policy": st.terminal_policy,
            })
        for port in s.hub_ports(h):
            entry = {"carrier": port.carrier, "kind": port.kind}
            for name in ("price", "max_flow", "min_flow", "load"):
                v = getattr(port, name)
                if v is not None:
                    entry[name] = _series_out(v)
            hub["ports"].append(entry)
        doc["hubs"].append(hub)
    doc["networks"] = [
        {"carrier": n.carrier, "hubs": list(n.hubs), "loss_fraction": float(n.loss_fraction)}
        for n in s.networks
    ]
    return doc


def save_scenario(scenario: Scenario, path) -> None:
    """Write ``scenario`` as a single self-contained document (all series inline)."""
    doc = scenario_to_document(scenario)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
