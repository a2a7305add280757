"""Assembly of the hub-network linear program.

Every column is one flow symbol at one time step and every row one balance
equation instance; both are recorded in catalogs so that solutions and
residuals can be read back by name (``IMP.natural_gas.hub2.t017``).

Row tags:

==========  ==============================================================
EQ3         total inlet of a carrier = import + return
EQ4         total inlet of a carrier = sum of process inlets
EQ5         total outlet of a carrier = sum of process outlets
EQ6         hub balance of a produced or networked carrier
EQ7, EQ8    process total inlet / outlet = sum over its carriers
EQ9         process total outlet = coefficient * total inlet
EQ10, EQ11  fixed inlet / outlet fractions
EQ12        network balance with transmission loss
STO_DYN     storage state of charge update
STO_CYC     cyclic terminal state of charge
==========  ==============================================================
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .lp.problem import LinearProgram
from .model import (
    FATAL,
    Scenario,
    ScenarioInvalid,
    derive_index_sets,
    effective_efficiency,
    validate,
)

VAR_KINDS = ("IMP", "EXP", "RET", "IN_TOTAL", "IN_PROC", "OUT_TOTAL", "OUT_PROC", "PROC_IN_SUM",
             "PROC_OUT_SUM", "NET_IN", "NET_OUT", "STO_CHA", "STO_DIS", "SOC")
ROW_TAGS = ("EQ3", "EQ4", "EQ5", "EQ6", "EQ7", "EQ8", "EQ9", "EQ10", "EQ11", "EQ12", "STO_DYN", "STO_CYC")

PHYSICAL = "physical"
PAPER = "paper"


@dataclass(frozen=True)
class VarKey:
    kind: str
    carrier: Optional[str]
    hub: Optional[str]
    element: Optional[str]  # process or storage id
    t: int

    @property
    def name(self) -> str:
        parts = [self.kind] + [p for p in (self.carrier, self.hub, self.element) if p is not None]
        return ".".join(parts) + f".t{self.t:03d}"

    @property
    def series_key(self):
        return (self.kind, self.carrier, self.hub, self.element)


@dataclass(frozen=True)
class RowKey:
    tag: str
    carrier: Optional[str]
    hub: Optional[str]
    element: Optional[str]
    t: int

    @property
    def name(self) -> str:
        parts = [self.tag] + [p for p in (self.carrier, self.hub, self.element) if p is not None]
        return ".".join(parts) + f".t{self.t:03d}"


class _Catalog:
    def __init__(self):
        self.keys = []
        self.index = {}

    def add(self, key) -> int:
        if key in self.index:
            raise KeyError(f"duplicate catalog entry {key}")
        self.index[key] = len(self.keys)
        self.keys.append(key)
        return self.index[key]

    def __len__(self):
        return len(self.keys)

    def __getitem__(self, key) -> int:
        return self.index[key]

    def __contains__(self, key):
        return key in self.index

    def names(self):
        return [k.name for k in self.keys]

    def select(self, **match):
        return [i for i, k in enumerate(self.keys) if all(getattr(k, a) == v for a, v in match.items())]


class VariableCatalog(_Catalog):
    """Bijection between flow symbols and LP column indices."""

    def series(self):
        """Map ``(kind, carrier, hub, element)`` to the column indices over time."""
        out = {}
        for i, k in enumerate(self.keys):
            out.setdefault(k.series_key, []).append(i)
        return {k: np.array(v) for k, v in out.items()}


class ConstraintCatalog(_Catalog):
    """Bijection between tagged equation instances and LP row indices."""

    def describe(self, i: int) -> str:
        k = self.keys[i]
        parts = [k.tag] + [p for p in (k.hub, k.carrier, k.element) if p is not None]
        return ", ".join(parts) + f", t={k.t}"

    def count(self, tag: str) -> int:
        return sum(1 for k in self.keys if k.tag == tag)


class _Builder:
    def __init__(self, scenario: Scenario, loss_orientation: str):
        if loss_orientation not in (PHYSICAL, PAPER):
            raise ValueError(f"loss orientation must be 'physical' or 'paper', got {loss_orientation!r}")
        self.s = scenario
        self.orientation = loss_orientation
        self.sets = derive_index_sets(scenario)
        self.carriers = {c.id: c for c in scenario.carriers}
        self.vars = VariableCatalog()
        self.rows = ConstraintCatalog()
        self.lower, self.upper, self.cost = [], [], []
        self.rhs = []
        self.tri_r, self.tri_c, self.tri_v = [], [], []
        self.ports = {(p.hub, p.carrier, p.kind): p for p in scenario.ports}
        self.processes = {p.id: p for p in scenario.processes}
        self.eff = {p.id: effective_efficiency(p, self.carriers) for p in scenario.processes}

    # -- primitives -------------------------------------------------------------
    def col(self, kind, carrier, hub, element, t, lower=0.0, upper=np.inf, cost=0.0) -> int:
        j = self.vars.add(VarKey(kind, carrier, hub, element, t))
        self.lower.append(lower)
        self.upper.append(upper)
        self.cost.append(cost)
        return j

    def v(self, kind, carrier, hub, element, t):
        return self.vars.index.get(VarKey(kind, carrier, hub, element, t))

    def row(self, tag, carrier, hub, element, t, terms, rhs=0.0) -> int:
        i = self.rows.add(RowKey(tag, carrier, hub, element, t))
        for j, a in terms:
            if j is not None and a != 0.0:
                self.tri_r.append(i)
                self.tri_c.append(j)
                self.tri_v.append(a)
        self.rhs.append(rhs)
        return i

    def kw(self, carrier, value):
        """Declared units (kg/s for materials) to exergy kW."""
        c = self.carriers[carrier]
        return value * (c.chemical_exergy / 1000.0) if c.is_material else value

    def limit(self, process, carrier, side, t):
        for lim in self.processes[process].limits:
            if lim.carrier == carrier and lim.side == side:
                return self.kw(carrier, lim.max_flow[t])
        return np.inf

    # -- equations --------------------------------------------------------------
    def emit_balance_eq3_4(self, hub, carrier, t):
        imp = self.ports.get((hub, carrier, "import"))
        ret = self.ports.get((hub, carrier, "return"))
        terms = []
        if imp is not None:
            lo = self.kw(carrier, imp.min_flow[t]) if imp.min_flow is not None else 0.0
            hi = self.kw(carrier, imp.max_flow[t]) if imp.max_flow is not None else np.inf
            j = self.col("IMP", carrier, hub, None, t, lo, hi, self.s.time_grid.steps[t] * imp.price[t])
            terms.append((j, -1.0))
        if ret is not None:
            terms.append((self.col("RET", carrier, hub, None, t), -1.0))
        total = self.col("IN_TOTAL", carrier, hub, None, t)
        self.row("EQ3", carrier, hub, None, t, [(total, 1.0)] + terms)
        procs = []
        for p in self.sets.consumers[(carrier, hub)]:
            procs.append((self.col("IN_PROC", carrier, hub, p, t, 0.0, self.limit(p, carrier, "inlet", t)), -1.0))
        self.row("EQ4", carrier, hub, None, t, [(total, 1.0)] + procs)

    def emit_balance_eq5(self, hub, carrier, t):
        total = self.col("OUT_TOTAL", carrier, hub, None, t)
        procs = []
        for p in self.sets.producers[(carrier, hub)]:
            procs.append((self.col("OUT_PROC", carrier, hub, p, t, 0.0, self.limit(p, carrier, "outlet", t)), -1.0))
        self.row("EQ5", carrier, hub, None, t, [(total, 1.0)] + procs)

    def emit_balance_eq6(self, hub, carrier, t):
        dt = self.s.time_grid.steps[t]
        terms = [(self.v("OUT_TOTAL", carrier, hub, None, t), 1.0)]
        net = self.ports.get((hub, carrier, "network"))
        if net is not None:
            cap = self.kw(carrier, net.max_flow[t])
            terms.append((self.col("NET_IN", carrier, hub, None, t, 0.0, cap), -1.0))
            terms.append((self.col("NET_OUT", carrier, hub, None, t, 0.0, cap), 1.0))
        exp = self.ports.get((hub, carrier, "export"))
        if exp is not None:
            hi = self.kw(carrier, exp.max_flow[t]) if exp.max_flow is not None else np.inf
            terms.append((self.col("EXP", carrier, hub, None, t, 0.0, hi, -dt * exp.price[t]), -1.0))
        terms.append((self.v("RET", carrier, hub, None, t), -1.0))
        for st in self.s.hub_storages(hub):
            if st.carrier == carrier:
                terms.append((self.col("STO_CHA", carrier, hub, st.id, t, 0.0, st.max_charge_rate), -1.0))
                terms.append((self.col("STO_DIS", carrier, hub, st.id, t, 0.0, st.max_discharge_rate), 1.0))
        load = self.ports.get((hub, carrier, "load"))
        rhs = self.kw(carrier, load.load[t]) if load is not None else 0.0
        self.row("EQ6", carrier, hub, None, t, terms, rhs)

    def emit_process_eqs(self, process, t):
        p, h = process, process.hub
        tot_in = self.col("PROC_IN_SUM", None, h, p.id, t)
        tot_out = self.col("PROC_OUT_SUM", None, h, p.id, t)
        ins = [self.v("IN_PROC", c, h, p.id, t) for c, _ in p.inlets]
        outs = [self.v("OUT_PROC", c, h, p.id, t) for c, _ in p.outlets]
        self.row("EQ7", None, h, p.id, t, [(tot_in, 1.0)] + [(j, -1.0) for j in ins])
        self.row("EQ8", None, h, p.id, t, [(tot_out, 1.0)] + [(j, -1.0) for j in outs])
        self.row("EQ9", None, h, p.id, t, [(tot_out, 1.0), (tot_in, -self.eff[p.id])])
        for (c, f), j in zip(p.inlets, ins):
            self.row("EQ10", c, h, p.id, t, [(j, 1.0), (tot_in, -f)])
        for (c, f), j in zip(p.outlets, outs):
            self.row("EQ11", c, h, p.id, t, [(j, 1.0), (tot_out, -f)])

    def emit_storage_dynamics(self, storage, t):
        st = storage
        dt = self.s.time_grid.steps[t]
        eta = st.leg_efficiency
        soc = self.col("SOC", st.carrier, st.hub, st.id, t, 0.0, st.capacity)
        cha = self.v("STO_CHA", st.carrier, st.hub, st.id, t)
        dis = self.v("STO_DIS", st.carrier, st.hub, st.id, t)
        terms = [(soc, 1.0), (cha, -dt * eta), (dis, dt / eta)]
        if t == 0:
            rhs = st.initial_soc
        else:
            terms.append((self.v("SOC", st.carrier, st.hub, st.id, t - 1), -1.0))
            rhs = 0.0
        self.row("STO_DYN", st.carrier, st.hub, st.id, t, terms, rhs)
        if st.terminal_policy == "cyclic" and t == self.s.T - 1:
            self.row("STO_CYC", st.carrier, st.hub, st.id, t, [(soc, 1.0)], st.initial_soc)

    def emit_network_eq12(self, network, t):
        c = network.carrier
        hubs = self.sets.network_hubs[c]
        inj = [self.v("NET_IN", c, h, None, t) for h in hubs]
        ext = [self.v("NET_OUT", c, h, None, t) for h in hubs]
        k = 1.0 + network.loss_fraction
        if self.orientation == PHYSICAL:
            # injections cover extractions plus transmission losses
            terms = [(j, 1.0) for j in inj] + [(j, -k) for j in ext]
        else:
            terms = [(j, 1.0) for j in ext] + [(j, -k) for j in inj]
        self.row("EQ12", c, None, None, t, terms)

    def emit_objective(self):
        return np.array(self.cost, dtype=float)

    # -- driver -----------------------------------------------------------------
    def build(self):
        sets = self.sets
        networks = {n.carrier: n for n in self.s.networks}
        for t in range(self.s.T):
            for h in sets.hubs:
                for c in sets.inlet_carriers[h]:
                    self.emit_balance_eq3_4(h, c, t)
                for c in sets.outlet_carriers[h]:
                    self.emit_balance_eq5(h, c, t)
                for c in sets.balance_carriers(h):
                    self.emit_balance_eq6(h, c, t)
                for p in self.s.hub_processes(h):
                    self.emit_process_eqs(p, t)
                for st in self.s.hub_storages(h):
                    self.emit_storage_dynamics(st, t)
            for c in sets.networked:
                self.emit_network_eq12(networks[c], t)
        m, n = len(self.rows), len(self.vars)
        A = sp.csc_matrix((self.tri_v, (self.tri_r, self.tri_c)), shape=(m, n))
        lp = LinearProgram(A, self.rhs, self.emit_objective(), self.lower, self.upper,
                           col_names=self.vars.names(), row_names=self.rows.names(),
                           name=self.s.name or "hubflow")
        return lp, self.vars, self.rows


def build(scenario: Scenario, loss_orientation: str = PHYSICAL):
    """Assemble ``(LinearProgram, VariableCatalog, ConstraintCatalog)`` for a valid scenario."""
    diags = list(scenario.diagnostics) or validate(scenario)
    if any(d.severity == FATAL for d in diags):
        raise ScenarioInvalid(diags)
    return _Builder(scenario, loss_orientation).build()
