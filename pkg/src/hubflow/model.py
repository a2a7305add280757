"""Domain types for networks of multi-carrier hubs.

A scenario is a set of hubs exchanging carriers (energy or material flows)
through networks. Each hub owns conversion processes, storage units and
typed ports. Everything here is immutable; series are stored as tuples in
the units they were declared in (kW for energy, kg/s for materials) and
normalised to exergy power only when the linear program is assembled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

ENERGY = "energy"
MATERIAL = "material"

PORT_KINDS = ("import", "export", "network", "return", "load")
PRICED_PORTS = ("import", "export")

FATAL = "fatal"
WARNING = "warning"
INFO = "info"

FRACTION_TOL = 1e-9

# kWh -> J
KWH = 3.6e6

# dimensional process coefficients accepted on ingestion
COEFFICIENT_UNITS = ("kg/kWh", "kWh/kg")

Series = tuple  # tuple[float, ...]


@dataclass(frozen=True)
class Carrier:
    id: str
    kind: str = ENERGY
    chemical_exergy: Optional[float] = None  # J/kg, materials only

    @property
    def is_material(self) -> bool:
        return self.kind == MATERIAL

    def to_exergy_kw(self, values):
        """Mass flow in kg/s to exergy power in kW; identity for energy carriers."""
        if not self.is_material:
            return values
        return np.asarray(values, dtype=float) * (self.chemical_exergy / 1000.0)


@dataclass(frozen=True)
class TimeGrid:
    steps: Series  # durations in hours

    @property
    def count(self) -> int:
        return len(self.steps)

    @classmethod
    def uniform(cls, count: int, hours: float = 1.0) -> "TimeGrid":
        return cls(tuple(float(hours) for _ in range(count)))


@dataclass(frozen=True)
class RenewableModel:
    """Availability model turning a weather series into a flow limit.

    ``kind="wind"`` uses ``coefficient`` (kW s^3/m^3), ``cut_in`` and
    ``cut_off`` (m/s) with ``weather`` holding wind speeds in m/s.
    ``kind="solar"`` uses ``area`` (m^2) with ``weather`` holding irradiance
    in W/m^2.
    """

    kind: str
    weather: Series
    coefficient: Optional[float] = None
    cut_in: Optional[float] = None
    cut_off: Optional[float] = None
    area: Optional[float] = None

    def limit(self) -> np.ndarray:
        if self.kind == "wind":
            params = {"coefficient": self.coefficient, "cut_in": self.cut_in, "cut_off": self.cut_off}
        else:
            params = {"area": self.area}
        return renewable_limit_series(self.kind, params, self.weather)


@dataclass(frozen=True)
class ProcessLimit:
    carrier: str
    side: str  # "inlet" | "outlet"
    max_flow: Series
    renewable: Optional[RenewableModel] = None


@dataclass(frozen=True)
class Process:
    id: str
    hub: str
    efficiency: float
    inlets: tuple  # ((carrier, fraction), ...)
    outlets: tuple
    limits: tuple = ()
    efficiency_unit: Optional[str] = None  # None means dimensionless

    def inlet_carriers(self) -> tuple:
        return tuple(c for c, _ in self.inlets)

    def outlet_carriers(self) -> tuple:
        return tuple(c for c, _ in self.outlets)


@dataclass(frozen=True)
class StorageUnit:
    id: str
    hub: str
    carrier: str
    round_trip_efficiency: float
    capacity: float  # kWh (exergy kWh for materials)
    max_charge_rate: float  # kW
    max_discharge_rate: float
    initial_soc: float = 0.0
    terminal_policy: str = "free"  # "free" | "cyclic"

    @property
    def leg_efficiency(self) -> float:
        return math.sqrt(self.round_trip_efficiency)


@dataclass(frozen=True)
class Port:
    hub: str
    carrier: str
    kind: str
    price: Optional[Series] = None  # EUR/kWh
    max_flow: Optional[Series] = None
    min_flow: Optional[Series] = None
    load: Optional[Series] = None

    @property
    def forced(self) -> bool:
        return self.min_flow is not None and self.max_flow is not None and self.min_flow == self.max_flow


@dataclass(frozen=True)
class Network:
    carrier: str
    hubs: tuple
    loss_fraction: float = 0.0


@dataclass(frozen=True)
class Scenario:
    carriers: tuple
    hubs: tuple  # hub ids, declaration order
    processes: tuple
    storages: tuple
    ports: tuple
    networks: tuple
    time_grid: TimeGrid
    name: str = ""
    diagnostics: tuple = field(default=(), compare=False, repr=False)

    @property
    def T(self) -> int:
        return self.time_grid.count

    def carrier(self, carrier_id: str) -> Carrier:
        for c in self.carriers:
            if c.id == carrier_id:
                return c
        raise KeyError(carrier_id)

    def port(self, hub: str, carrier: str, kind: str) -> Optional[Port]:
        for p in self.ports:
            if p.hub == hub and p.carrier == carrier and p.kind == kind:
                return p
        return None

    def hub_processes(self, hub: str) -> tuple:
        return tuple(p for p in self.processes if p.hub == hub)

    def hub_storages(self, hub: str) -> tuple:
        return tuple(s for s in self.storages if s.hub == hub)

    def hub_ports(self, hub: str) -> tuple:
        return tuple(p for p in self.ports if p.hub == hub)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str
    element: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.upper():7s} {self.code} [{self.element}] {self.message}"


def has_fatal(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.severity == FATAL for d in diagnostics)


class ScenarioInvalid(ValueError):
    """Raised when a scenario with fatal diagnostics is used downstream."""

    def __init__(self, diagnostics):
        self.diagnostics = [d for d in diagnostics if d.severity == FATAL]
        super().__init__("; ".join(str(d) for d in self.diagnostics[:5]))


# ---------------------------------------------------------------------------
# flow normalisation and renewable limits


def exergy_flow(mass_flow, carrier: Carrier):
    """Exergy flow in W of a material stream of ``mass_flow`` kg/s."""
    if not carrier.is_material or carrier.chemical_exergy is None:
        raise ValueError(f"carrier {carrier.id!r} is not a material with a chemical exergy")
    return np.multiply(mass_flow, carrier.chemical_exergy)


def renewable_limit_series(kind: str, params: dict, weather: Sequence[float]) -> np.ndarray:
    """Maximum-flow series in kW for a wind turbine or a solar collector.

    Wind: ``coefficient * v**3`` inside ``[cut_in, cut_off]`` and zero outside.
    Solar: ``area * irradiance`` converted from W to kW; this bounds the
    collector inlet, the collector efficiency applies downstream.
    """
    w = np.asarray(weather, dtype=float)
    if w.size and (not np.all(np.isfinite(w)) or np.any(w < 0)):
        raise ValueError(f"{kind} weather series contains negative or non-finite values")
    if kind == "wind":
        coef, lo, hi = params["coefficient"], params["cut_in"], params["cut_off"]
        inside = (w >= lo) & (w <= hi)
        return np.where(inside, coef * w**3, 0.0)
    if kind == "solar":
        return params["area"] * w / 1000.0
    raise ValueError(f"unknown renewable kind {kind!r}")


def conversion_factor(process: Process, carriers: dict) -> float:
    """Factor turning a process coefficient into an exergy-convention efficiency."""
    unit = process.efficiency_unit
    if unit is None:
        return 1.0
    if unit == "kg/kWh":
        # kg of material out per kWh in -> kW exergy out per kW in
        (mat,) = process.outlet_carriers()
        return carriers[mat].chemical_exergy / KWH
    if unit == "kWh/kg":
        (mat,) = process.inlet_carriers()
        return KWH / carriers[mat].chemical_exergy
    raise ValueError(f"unsupported coefficient unit {unit!r}")


def effective_efficiency(process: Process, carriers: dict) -> float:
    return process.efficiency * conversion_factor(process, carriers)


# ---------------------------------------------------------------------------
# index sets


@dataclass(frozen=True)
class IndexSets:
    """Carrier/process/hub sets used to decide which rows and columns exist.

    All mappings are keyed by hub id (or ``(carrier, hub)`` / process id)
    and hold tuples in scenario declaration order.
    """

    hubs: tuple
    inlet_carriers: dict  # N_h^in
    outlet_carriers: dict  # N_h^out
    network_carriers: dict  # N_h^net
    import_carriers: dict  # N_h^imp
    export_carriers: dict  # N_h^exp
    return_carriers: dict
    hub_processes: dict  # N_h^pro
    consumers: dict  # (c, h) -> N_{c,h}^in
    producers: dict  # (c, h) -> N_{c,h}^out
    process_inlets: dict  # p -> N_{h,p}^in
    process_outlets: dict  # p -> N_{h,p}^out
    network_hubs: dict  # c -> N_c^net
    networked: tuple  # N^net

    def balance_carriers(self, hub: str) -> tuple:
        """Carriers with a hub balance row: produced here or networked here."""
        keep = set(self.outlet_carriers[hub]) | set(self.network_carriers[hub])
        return tuple(c for c in self._carrier_order if c in keep)

    _carrier_order: tuple = ()


def derive_index_sets(scenario: Scenario) -> IndexSets:
    order = tuple(c.id for c in scenario.carriers)
    known = set(order)
    hubs = tuple(scenario.hubs)

    def ordered(items):
        s = set(items)
        return tuple(c for c in order if c in s)

    for p in scenario.processes:
        if p.hub not in hubs:
            raise ValueError(f"process {p.id!r} references unknown hub {p.hub!r}")
        for c in p.inlet_carriers() + p.outlet_carriers():
            if c not in known:
                raise ValueError(f"process {p.id!r} references unknown carrier {c!r}")
    for port in scenario.ports:
        if port.hub not in hubs or port.carrier not in known:
            raise ValueError(f"port {port.kind}:{port.carrier}@{port.hub} has an unresolved reference")

    inlet, outlet, net, imp, exp, ret, procs = {}, {}, {}, {}, {}, {}, {}
    consumers, producers = {}, {}
    for h in hubs:
        hp = scenario.hub_processes(h)
        procs[h] = tuple(p.id for p in hp)
        inlet[h] = ordered(c for p in hp for c in p.inlet_carriers())
        outlet[h] = ordered(c for p in hp for c in p.outlet_carriers())
        ports = scenario.hub_ports(h)
        net[h] = ordered(p.carrier for p in ports if p.kind == "network")
        imp[h] = ordered(p.carrier for p in ports if p.kind == "import")
        exp[h] = ordered(p.carrier for p in ports if p.kind == "export")
        ret[h] = ordered(p.carrier for p in ports if p.kind == "return")
        for c in inlet[h]:
            consumers[(c, h)] = tuple(p.id for p in hp if c in p.inlet_carriers())
        for c in outlet[h]:
            producers[(c, h)] = tuple(p.id for p in hp if c in p.outlet_carriers())

    network_hubs = {}
    for nw in scenario.networks:
        network_hubs[nw.carrier] = tuple(h for h in hubs if h in nw.hubs)
    networked = ordered(network_hubs)

    return IndexSets(
        hubs=hubs,
        inlet_carriers=inlet,
        outlet_carriers=outlet,
        network_carriers=net,
        import_carriers=imp,
        export_carriers=exp,
        return_carriers=ret,
        hub_processes=procs,
        consumers=consumers,
        producers=producers,
        process_inlets={p.id: p.inlet_carriers() for p in scenario.processes},
        process_outlets={p.id: p.outlet_carriers() for p in scenario.processes},
        network_hubs={c: network_hubs[c] for c in networked},
        networked=networked,
        _carrier_order=order,
    )


# ---------------------------------------------------------------------------
# validation


def validate(scenario: Scenario) -> list:
    """Check every structural invariant; returns a list of :class:`Diagnostic`.

    Fatal diagnostics block LP assembly. Warnings flag legal but suspicious
    structure. Info entries record unit conversions applied to dimensional
    process coefficients.
    """
    out = []

    def diag(code, severity, element, message):
        out.append(Diagnostic(code, severity, element, message))

    T = scenario.T
    if T < 1:
        diag("TIME_GRID", FATAL, "time_grid", "time grid needs at least one step")
    for i, dt in enumerate(scenario.time_grid.steps):
        if not (math.isfinite(dt) and dt > 0):
            diag("TIME_GRID", FATAL, "time_grid", f"step {i} has non-positive duration {dt}")

    carriers = {}
    for c in scenario.carriers:
        if c.id in carriers:
            diag("DUPLICATE_ID", FATAL, f"carrier:{c.id}", "carrier id declared twice")
        carriers[c.id] = c
        if c.kind not in (ENERGY, MATERIAL):
            diag("CARRIER_KIND", FATAL, f"carrier:{c.id}", f"unknown kind {c.kind!r}")
        elif c.kind == MATERIAL:
            if c.chemical_exergy is None or not (c.chemical_exergy > 0 and math.isfinite(c.chemical_exergy)):
                diag("CHEMICAL_EXERGY", FATAL, f"carrier:{c.id}", "material carrier needs a positive chemical exergy")
        elif c.chemical_exergy is not None:
            diag("CHEMICAL_EXERGY", FATAL, f"carrier:{c.id}", "energy carrier must not declare a chemical exergy")

    hubs = set()
    for h in scenario.hubs:
        if h in hubs:
            diag("DUPLICATE_ID", FATAL, f"hub:{h}", "hub id declared twice")
        hubs.add(h)

    def check_series(element, name, values, nonneg=True):
        if values is None:
            return
        if len(values) != T:
            diag("SERIES_LENGTH", FATAL, element, f"{name} has {len(values)} values, time grid has {T}")
        for v in values:
            if not math.isfinite(v) or (nonneg and v < 0):
                diag("SERIES_VALUE", FATAL, element, f"{name} contains invalid value {v!r}")
                break

    refs_ok = True
    ids = set()
    for p in scenario.processes:
        el = f"process:{p.id}"
        if p.id in ids:
            diag("DUPLICATE_ID", FATAL, el, "process/storage id declared twice")
        ids.add(p.id)
        if p.hub not in hubs:
            diag("UNRESOLVED_REFERENCE", FATAL, el, f"unknown hub {p.hub!r}")
            refs_ok = False
        if not p.inlets or not p.outlets:
            diag("PROCESS_PORTS", FATAL, el, "process needs at least one inlet and one outlet")
        for side, shares in (("inlet", p.inlets), ("outlet", p.outlets)):
            seen = set()
            for c, f in shares:
                if c not in carriers:
                    diag("UNRESOLVED_REFERENCE", FATAL, el, f"unknown {side} carrier {c!r}")
                    refs_ok = False
                if c in seen:
                    diag("DUPLICATE_ID", FATAL, el, f"{side} carrier {c!r} listed twice")
                seen.add(c)
                if not (0 < f <= 1):
                    diag("FRACTION_RANGE", FATAL, el, f"{side} fraction of {c!r} is {f}, outside (0, 1]")
            if shares and abs(sum(f for _, f in shares) - 1.0) > FRACTION_TOL:
                total = sum(f for _, f in shares)
                diag("FRACTION_SUM", FATAL, el, f"{side} fractions sum to {total!r}, expected 1")
        if not (math.isfinite(p.efficiency) and p.efficiency > 0):
            diag("EFFICIENCY", FATAL, el, f"coefficient must be positive, got {p.efficiency}")
        elif p.efficiency_unit is None:
            pass  # coefficients above one are legitimate (heat pump COP)
        elif p.efficiency_unit not in COEFFICIENT_UNITS:
            diag("COEFFICIENT_UNIT", FATAL, el, f"unsupported unit {p.efficiency_unit!r}")
        else:
            side = p.outlets if p.efficiency_unit == "kg/kWh" else p.inlets
            mats = [c for c, _ in side if c in carriers and carriers[c].is_material]
            if len(side) != 1 or len(mats) != 1 or carriers[mats[0]].chemical_exergy is None:
                diag("COEFFICIENT_UNIT", FATAL, el,
                     f"unit {p.efficiency_unit} needs exactly one material carrier on the "
                     f"{'outlet' if p.efficiency_unit == 'kg/kWh' else 'inlet'} side")
            else:
                factor = conversion_factor(p, carriers)
                diag("COEFFICIENT_CONVERTED", INFO, el,
                     f"{p.efficiency} {p.efficiency_unit} x {factor!r} = {p.efficiency * factor!r} (exergy basis)")
        for lim in p.limits:
            names = p.inlet_carriers() if lim.side == "inlet" else p.outlet_carriers()
            if lim.side not in ("inlet", "outlet"):
                diag("LIMIT_SIDE", FATAL, el, f"limit side must be inlet or outlet, got {lim.side!r}")
            elif lim.carrier not in names:
                diag("LIMIT_CARRIER", FATAL, el, f"limit on {lim.carrier!r} which is not a process {lim.side}")
            if lim.renewable is not None:
                w = lim.renewable.weather
                if any((not math.isfinite(v)) or v < 0 for v in w):
                    diag("NEGATIVE_WEATHER", FATAL, el, f"{lim.renewable.kind} weather series has negative values")
                check_series(el, f"{lim.renewable.kind} weather", w, nonneg=False)
            check_series(el, f"limit {lim.carrier}", lim.max_flow)

    for s in scenario.storages:
        el = f"storage:{s.id}"
        if s.id in ids:
            diag("DUPLICATE_ID", FATAL, el, "process/storage id declared twice")
        ids.add(s.id)
        if s.hub not in hubs or s.carrier not in carriers:
            diag("UNRESOLVED_REFERENCE", FATAL, el, "storage references an unknown hub or carrier")
            refs_ok = False
        if not (0 < s.round_trip_efficiency <= 1):
            diag("EFFICIENCY", FATAL, el, f"round-trip efficiency {s.round_trip_efficiency} outside (0, 1]")
        for name in ("capacity", "max_charge_rate", "max_discharge_rate", "initial_soc"):
            v = getattr(s, name)
            if not (math.isfinite(v) and v >= 0):
                diag("STORAGE_VALUE", FATAL, el, f"{name} must be finite and >= 0, got {v}")
        if s.initial_soc > s.capacity:
            diag("STORAGE_VALUE", FATAL, el, "initial_soc exceeds capacity")
        if s.terminal_policy not in ("free", "cyclic"):
            diag("STORAGE_VALUE", FATAL, el, f"unknown terminal policy {s.terminal_policy!r}")

    seen_ports = set()
    for port in scenario.ports:
        el = f"port:{port.kind}:{port.carrier}@{port.hub}"
        if port.hub not in hubs or port.carrier not in carriers:
            diag("UNRESOLVED_REFERENCE", FATAL, el, "port references an unknown hub or carrier")
            refs_ok = False
        key = (port.hub, port.carrier, port.kind)
        if key in seen_ports:
            diag("DUPLICATE_PORT", FATAL, el, "more than one port for this hub, carrier and kind")
        seen_ports.add(key)
        if port.kind not in PORT_KINDS:
            diag("PORT_KIND", FATAL, el, f"unknown port kind {port.kind!r}")
            continue
        if port.kind in PRICED_PORTS:
            if port.price is None:
                diag("PORT_PRICE", FATAL, el, f"{port.kind} port needs a price series")
            check_series(el, "price", port.price, nonneg=False)
        elif port.price is not None:
            diag("PORT_PRICE", FATAL, el, f"{port.kind} port cannot carry a price")
        if port.kind == "load":
            if port.load is None:
                diag("LOAD_SERIES", FATAL, el, "load port needs a load series")
            if port.max_flow is not None or port.min_flow is not None:
                diag("LOAD_SERIES", FATAL, el, "load port carries a load series and nothing else")
        elif port.load is not None:
            diag("LOAD_SERIES", FATAL, el, "only load ports carry a load series")
        if port.kind == "network" and port.max_flow is None:
            diag("NETWORK_CAPACITY", FATAL, el, "network port needs a max-flow series")
        if port.kind in ("return",) and (port.max_flow is not None or port.min_flow is not None):
            diag("PORT_LIMIT", FATAL, el, "return ports take no flow limits")
        if port.kind != "import" and port.min_flow is not None:
            diag("PORT_LIMIT", FATAL, el, "min-flow only applies to import ports")
        check_series(el, "load", port.load)
        check_series(el, "max_flow", port.max_flow)
        check_series(el, "min_flow", port.min_flow)
        if port.min_flow is not None and port.max_flow is not None:
            if any(lo > hi for lo, hi in zip(port.min_flow, port.max_flow)):
                diag("PORT_LIMIT", FATAL, el, "min-flow exceeds max-flow")

    nets = set()
    for nw in scenario.networks:
        el = f"network:{nw.carrier}"
        if nw.carrier in nets:
            diag("DUPLICATE_ID", FATAL, el, "two networks for one carrier")
        nets.add(nw.carrier)
        if nw.carrier not in carriers:
            diag("UNRESOLVED_REFERENCE", FATAL, el, "unknown carrier")
            refs_ok = False
        if len(set(nw.hubs)) < 2:
            diag("NETWORK_MEMBERS", FATAL, el, "a network needs at least two member hubs")
        if not (math.isfinite(nw.loss_fraction) and nw.loss_fraction >= 0):
            diag("NETWORK_LOSS", FATAL, el, f"loss fraction must be >= 0, got {nw.loss_fraction}")
        for h in nw.hubs:
            if h not in hubs:
                diag("UNRESOLVED_REFERENCE", FATAL, el, f"unknown member hub {h!r}")
                refs_ok = False
            elif (h, nw.carrier, "network") not in seen_ports:
                diag("NETWORK_PORT", FATAL, el, f"member hub {h!r} has no network port for {nw.carrier!r}")
    for (h, c, kind) in seen_ports:
        if kind == "network" and c not in nets:
            diag("NETWORK_PORT", FATAL, f"port:network:{c}@{h}", "network port without a network")
        elif kind == "network":
            nw = next(n for n in scenario.networks if n.carrier == c)
            if h not in nw.hubs:
                diag("NETWORK_PORT", FATAL, f"port:network:{c}@{h}", "hub is not a member of the network")

    if not refs_ok:
        return out

    sets = derive_index_sets(scenario)
    for h in scenario.hubs:
        balance = set(sets.balance_carriers(h))
        ins = set(sets.inlet_carriers[h])
        for port in scenario.hub_ports(h):
            el = f"port:{port.kind}:{port.carrier}@{h}"
            if port.kind == "load" and port.carrier not in balance:
                diag("LOAD_UNSATISFIABLE", FATAL, el,
                     "load carrier is neither produced in the hub nor reachable by a network")
            elif port.kind == "export" and port.carrier not in balance:
                diag("EXPORT_WITHOUT_SOURCE", FATAL, el, "exported carrier is never produced or received here")
            elif port.kind == "import" and port.carrier not in ins:
                diag("IMPORT_WITHOUT_CONSUMER", FATAL, el, "imported carrier is consumed by no process")
            elif port.kind == "return":
                if port.carrier not in ins:
                    diag("RETURN_WITHOUT_CONSUMER", FATAL, el, "returned carrier is consumed by no process")
                if port.carrier not in balance:
                    diag("RETURN_WITHOUT_SOURCE", FATAL, el, "returned carrier has no hub balance to draw from")
        for s in scenario.hub_storages(h):
            if s.carrier not in balance:
                diag("STORAGE_UNCONNECTED", FATAL, f"storage:{s.id}", "stored carrier has no hub balance")
        for c in sets.inlet_carriers[h]:
            if c not in sets.import_carriers[h] and c not in sets.return_carriers[h]:
                diag("UNSOURCED_INLET", WARNING, f"hub:{h}:{c}",
                     "carrier consumed by a process has neither import nor return port; its consumers stay idle")
    return out

