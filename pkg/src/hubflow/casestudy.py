"""Bundled three-hub case study: a renewable supply hub feeding a residential
hub and an industrial hub.

Topology, process coefficients, fractions, limits, storage efficiencies and
port prices are fixed constants below. The hourly load and weather series are
synthetic: :func:`generate_series` produces deterministic series for a week
starting on Monday, with weekday office-hour structure, a wind lull between
60 h and 100 h and daytime-only irradiance. Sizes were chosen so every load is
coverable and renewable output is always useful somewhere in the network.

Regenerate the shipped files with ``python -m hubflow.casestudy <dir>``.
"""
from __future__ import annotations

import json
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from .model import Scenario, TimeGrid
from .scenario_io import load_scenario, write_series

HOURS = 168
SEED = 20210901
WATER_EXERGY = 50_000.0  # J/kg, chemical exergy of potable water (seawater reference)

RESIDENTS = 5000
OFFICE_STAFF = 2500
WATER_PER_CAPITA = 352.0  # kg/day
OFFICE_WATER_SHARE = 0.59


def _hour_of_day(T):
    return np.arange(T) % 24


def _weekday(T):
    return (np.arange(T) // 24) % 7 < 5


def generate_series(T: int = HOURS, seed: int = SEED) -> dict:
    """Deterministic weather and load series, keyed by file stem."""
    rng = np.random.default_rng(seed)
    t = np.arange(T, dtype=float)
    hod = _hour_of_day(T)
    weekday = _weekday(T)
    office_hours = weekday & (hod >= 7) & (hod < 19)

    # weather
    outdoor = 3.0 + 4.0 * np.sin(2 * np.pi * (hod - 9) / 24) + rng.normal(0.0, 0.8, T)
    wind = 5.2 + 1.6 * np.sin(2 * np.pi * t / 37.0) + rng.normal(0.0, 0.5, T)
    wind = np.clip(wind, 3.2, 8.0)
    lull = (t >= 60) & (t < 100)
    wind[lull] = rng.uniform(1.0, 2.8, lull.sum())
    tail = t >= 158
    wind[tail] = rng.uniform(2.0, 3.6, tail.sum())
    cloud = np.repeat(rng.uniform(0.5, 1.0, T // 24 + 1), 24)[:T]
    day = (hod >= 8) & (hod <= 16)
    irradiance = np.where(day, 400.0 * np.sin(np.pi * (hod - 7) / 10.0) * cloud, 0.0)

    # residential hub
    res_shape = 0.55 + 0.25 * np.exp(-((hod - 8) ** 2) / 3.0) + 0.45 * np.exp(-((hod - 20) ** 2) / 5.0)
    res_elec = np.clip(1000.0 + 1500.0 * (res_shape - 0.55) / 0.45 + rng.normal(0, 40, T), 1000.0, 2500.0)
    setpoint = np.where((hod >= 8) & (hod < 22), 20.0, 19.0)
    res_heat = np.clip(2500.0 + 190.0 * (setpoint - outdoor - 10.0) + rng.normal(0, 60, T), 2500.0, 5000.0)
    water_frac = 0.2 + np.exp(-((hod - 7.5) ** 2) / 2.0) + 0.8 * np.exp(-((hod - 19.5) ** 2) / 3.0)
    water_frac = water_frac / water_frac[:24].sum()
    res_water = RESIDENTS * WATER_PER_CAPITA * water_frac / 3600.0

    # industrial hub (offices + industries)
    ind_elec = np.where(office_hours, 2800.0, np.where(weekday, 1800.0, 1550.0)) + rng.normal(0, 60, T)
    ind_elec = np.clip(ind_elec, 1500.0, 3000.0)
    ind_ht = np.where(weekday & (hod >= 6) & (hod < 22), 2700.0, 1950.0) + rng.normal(0, 80, T)
    ind_ht = np.clip(ind_ht, 1800.0, 3000.0)
    office_set = np.where(office_hours, 20.0, 15.0)
    ind_mt = np.clip(500.0 + 70.0 * (office_set - outdoor - 2.0), 500.0, 1500.0)
    office_frac = np.where((hod >= 7) & (hod < 19), 1.0, 0.05)
    office_frac = office_frac / office_frac[:24].sum()
    ind_water = np.where(weekday, OFFICE_STAFF * WATER_PER_CAPITA * OFFICE_WATER_SHARE * office_frac / 3600.0,
                         0.1 * OFFICE_STAFF * WATER_PER_CAPITA * OFFICE_WATER_SHARE * office_frac / 3600.0)

    out = {
        "wind_speed": wind, "irradiance": irradiance,
        "hub2_electricity": res_elec, "hub2_mt_heat": res_heat, "hub2_water": res_water,
        "hub3_electricity": ind_elec, "hub3_ht_heat": ind_ht, "hub3_mt_heat": ind_mt, "hub3_water": ind_water,
    }
    return {k: np.round(v, 6) for k, v in out.items()}


def _file(stem):
    return {"file": f"series/{stem}.csv"}


def build_document(T: int = HOURS) -> dict:
    """Scenario document referencing ``series/<stem>.csv`` files."""
    def port(carrier, kind, **kw):
        return {"carrier": carrier, "kind": kind, **kw}

    def storage(id, carrier, eff, cap, rate):
        return {"id": id, "carrier": carrier, "round_trip_efficiency": eff, "capacity": cap,
                "max_charge_rate": rate, "max_discharge_rate": rate, "initial_soc": 0.0,
                "terminal_policy": "free"}

    hub1 = {
        "id": "hub1",
        "processes": [
            {"id": "fuel_cell", "efficiency": 0.75, "inlets": {"h2_hp": 1},
             "outlets": {"electricity": "2/3", "ht_heat": "1/3"},
             "limits": [{"carrier": "electricity", "side": "outlet", "max_flow": 200.0}]},
            {"id": "electrolyzer", "efficiency": 0.9, "inlets": {"electricity": 1}, "outlets": {"h2_lp": 1},
             "limits": [{"carrier": "h2_lp", "side": "outlet", "max_flow": 400.0}]},
            {"id": "h2_compressor", "efficiency": 0.9, "inlets": {"electricity": 0.1, "h2_lp": 0.9},
             "outlets": {"h2_hp": 1},
             "limits": [{"carrier": "h2_hp", "side": "outlet", "max_flow": 400.0}]},
            {"id": "desalination", "coefficient": {"value": 650.0, "unit": "kg/kWh"},
             "inlets": {"ht_heat": 1}, "outlets": {"potable_water": 1},
             "limits": [{"carrier": "potable_water", "side": "outlet", "max_flow": 1.0e5}]},
            {"id": "pvt", "efficiency": 0.5, "inlets": {"solar": 1},
             "outlets": {"electricity": "1/5", "mt_heat": "4/5"},
             "limits": [{"carrier": "solar", "side": "inlet",
                         "solar": {"area": 20.0, "irradiance": _file("irradiance")}}]},
            {"id": "wt", "efficiency": 1.0, "inlets": {"wind": 1}, "outlets": {"electricity": 1},
             "limits": [{"carrier": "electricity", "side": "outlet",
                         "wind": {"coefficient": 5.0, "cut_in": 3.0, "cut_off": 25.0,
                                  "speed": _file("wind_speed")}}]},
        ],
        "storages": [
            storage("water_tank", "potable_water", 1.0, 20000.0, 3000.0),
            storage("h2_tank", "h2_hp", 0.97, 4000.0, 400.0),
            storage("caes", "electricity", 0.65, 10000.0, 1000.0),
        ],
        "ports": [
            port("solar", "import", price=0.0),
            port("wind", "import", price=0.0),
            port("electricity", "return"),
            port("ht_heat", "return"),
            port("h2_lp", "return"),
            port("h2_hp", "return"),
            port("electricity", "network", max_flow=3000.0),
            port("ht_heat", "network", max_flow=200.0),
            port("mt_heat", "network", max_flow=2500.0),
            port("potable_water", "network", max_flow=1.4e5),
            port("mt_heat", "export", price=0.0),
        ],
    }
    hub2 = {
        "id": "hub2",
        "processes": [
            {"id": "gas_boiler", "efficiency": 0.9, "inlets": {"natural_gas": 1}, "outlets": {"mt_heat": 1},
             "limits": [{"carrier": "mt_heat", "side": "outlet", "max_flow": 2000.0}]},
            {"id": "mt_hp", "efficiency": 4.0, "inlets": {"electricity": 1}, "outlets": {"mt_heat": 1},
             "limits": [{"carrier": "electricity", "side": "inlet", "max_flow": 500.0}]},
        ],
        "storages": [
            storage("thermal_storage", "mt_heat", 0.8, 8000.0, 2000.0),
            storage("battery", "electricity", 0.85, 2000.0, 500.0),
        ],
        "ports": [
            port("natural_gas", "import", price=10.0),
            port("electricity", "return"),
            port("electricity", "network", max_flow=5500.0),
            port("mt_heat", "network", max_flow=5000.0),
            port("potable_water", "network", max_flow=1.2e5),
            port("mt_heat", "export", price=0.0),
            port("electricity", "load", load=_file("hub2_electricity")),
            port("mt_heat", "load", load=_file("hub2_mt_heat")),
            port("potable_water", "load", load=_file("hub2_water")),
        ],
    }
    hub3 = {
        "id": "hub3",
        "processes": [
            {"id": "waste_furnace", "efficiency": 0.85, "inlets": {"waste": 1}, "outlets": {"ht_heat": 1},
             "limits": [{"carrier": "ht_heat", "side": "outlet", "max_flow": 5000.0}]},
            {"id": "ht_hp", "efficiency": 1.0, "inlets": {"electricity": 0.25, "mt_heat": 0.75},
             "outlets": {"ht_heat": 1},
             "limits": [{"carrier": "electricity", "side": "inlet", "max_flow": 700.0}]},
            {"id": "chp", "efficiency": 0.6, "inlets": {"natural_gas": 1},
             "outlets": {"electricity": "7/12", "mt_heat": "5/12"},
             "limits": [{"carrier": "electricity", "side": "outlet", "max_flow": 7200.0}]},
            {"id": "heat_exchanger", "efficiency": 0.9, "inlets": {"ht_heat": 1}, "outlets": {"mt_heat": 1},
             "limits": [{"carrier": "mt_heat", "side": "outlet", "max_flow": 1500.0}]},
        ],
        "storages": [],
        "ports": [
            port("natural_gas", "import", price=10.0),
            port("waste", "import", price=0.0, min_flow=2000.0, max_flow=2000.0),
            port("electricity", "return"),
            port("ht_heat", "return"),
            port("mt_heat", "return"),
            port("electricity", "network", max_flow=6300.0),
            port("ht_heat", "network", max_flow=600.0),
            port("mt_heat", "network", max_flow=5000.0),
            port("potable_water", "network", max_flow=2.2e4),
            port("mt_heat", "export", price=0.0),
            port("electricity", "load", load=_file("hub3_electricity")),
            port("ht_heat", "load", load=_file("hub3_ht_heat")),
            port("mt_heat", "load", load=_file("hub3_mt_heat")),
            port("potable_water", "load", load=_file("hub3_water")),
        ],
    }
    carriers = [{"id": c, "kind": "energy"} for c in
                ("electricity", "ht_heat", "mt_heat", "h2_lp", "h2_hp", "natural_gas", "waste", "solar", "wind")]
    carriers.insert(5, {"id": "potable_water", "kind": "material", "chemical_exergy": WATER_EXERGY})
    return {
        "schema_version": 1,
        "name": "three-hub case study",
        "time_grid": {"count": T, "hours": 1.0},
        "carriers": carriers,
        "networks": [
            {"carrier": "electricity", "hubs": ["hub1", "hub2", "hub3"], "loss_fraction": 0.02},
            {"carrier": "ht_heat", "hubs": ["hub1", "hub3"], "loss_fraction": 0.05},
            {"carrier": "mt_heat", "hubs": ["hub1", "hub2", "hub3"], "loss_fraction": 0.05},
            {"carrier": "potable_water", "hubs": ["hub1", "hub2", "hub3"], "loss_fraction": 0.01},
        ],
        "hubs": [hub1, hub2, hub3],
    }


def write_case_study(directory, T: int = HOURS, seed: int = SEED) -> Path:
    """Write ``scenario.json`` and ``series/*.csv`` into ``directory``."""
    directory = Path(directory)
    (directory / "series").mkdir(parents=True, exist_ok=True)
    for stem, values in generate_series(T, seed).items():
        write_series(directory / "series" / f"{stem}.csv", values)
    path = directory / "scenario.json"
    path.write_text(json.dumps(build_document(T), indent=2) + "\n", encoding="utf-8")
    return path


def case_study_path() -> Path:
    """Location of the shipped scenario document."""
    return Path(str(resources.files("hubflow") / "data" / "case_study" / "scenario.json"))


def _cut(series, T):
    return None if series is None else tuple(series[:T])


def truncate(scenario: Scenario, T: int) -> Scenario:
    """The first ``T`` steps of ``scenario`` (storage and port data unchanged)."""
    if not 1 <= T <= scenario.T:
        raise ValueError(f"cannot truncate a {scenario.T}-step scenario to {T} steps")
    procs = []
    for p in scenario.processes:
        limits = []
        for lim in p.limits:
            ren = lim.renewable
            if ren is not None:
                ren = replace(ren, weather=_cut(ren.weather, T))
            limits.append(replace(lim, max_flow=_cut(lim.max_flow, T), renewable=ren))
        procs.append(replace(p, limits=tuple(limits)))
    ports = [replace(pt, price=_cut(pt.price, T), max_flow=_cut(pt.max_flow, T),
                     min_flow=_cut(pt.min_flow, T), load=_cut(pt.load, T)) for pt in scenario.ports]
    return replace(scenario, processes=tuple(procs), ports=tuple(ports),
                   time_grid=TimeGrid(tuple(scenario.time_grid.steps[:T])))


def load_case_study(T: int | None = None) -> Scenario:
    """Load the shipped case study, optionally truncated to the first ``T`` hours."""
    s = load_scenario(case_study_path())
    return s if T is None or T == s.T else truncate(s, T)


if __name__ == "__main__":  # pragma: no cover
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "data" / "case_study"
    print(write_case_study(target))
