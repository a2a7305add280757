import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import boiler, ser, two_hubs
from hubflow.casestudy import load_case_study
from hubflow.model import (
    FATAL,
    INFO,
    WARNING,
    Carrier,
    Network,
    Port,
    Process,
    ProcessLimit,
    StorageUnit,
    TimeGrid,
    conversion_factor,
    derive_index_sets,
    exergy_flow,
    renewable_limit_series,
    validate,
)


def codes(diags, severity=None):
    return {d.code for d in diags if severity is None or d.severity == severity}


def with_process(scenario, process):
    return replace(scenario, processes=scenario.processes + (process,))


# -- validation -------------------------------------------------------------------


def test_fuel_cell_fractions_are_valid():
    s = boiler()
    s = replace(s, carriers=s.carriers + (Carrier("h2"), Carrier("el")))
    fc = Process("fc", "h", 0.75, (("h2", 1.0),), (("el", 2 / 3), ("heat", 1 / 3)))
    diags = validate(with_process(s, fc))
    assert "FRACTION_SUM" not in codes(diags)
    assert "FRACTION_RANGE" not in codes(diags)


def test_single_inlet_fraction_one_is_valid():
    assert codes(validate(boiler()), FATAL) == set()


def test_fraction_sum_violation_is_fatal():
    s = boiler()
    s = replace(s, carriers=s.carriers + (Carrier("el"),))
    bad = Process("bad", "h", 0.9, (("gas", 0.5), ("el", 0.6)), (("heat", 1.0),))
    diags = validate(with_process(s, bad))
    hits = [d for d in diags if d.code == "FRACTION_SUM"]
    assert hits and hits[0].severity == FATAL and "process:bad" in hits[0].element


@pytest.mark.parametrize("mutate, code", [
    (lambda s: replace(s, time_grid=TimeGrid((0.0,))), "TIME_GRID"),
    (lambda s: replace(s, carriers=s.carriers + (Carrier("gas"),)), "DUPLICATE_ID"),
    (lambda s: replace(s, carriers=s.carriers + (Carrier("w", "material"),)), "CHEMICAL_EXERGY"),
    (lambda s: replace(s, carriers=s.carriers + (Carrier("e", "energy", 5.0),)), "CHEMICAL_EXERGY"),
    (lambda s: replace(s, carriers=s.carriers + (Carrier("x", "plasma"),)), "CARRIER_KIND"),
    (lambda s: with_process(s, Process("p", "nowhere", 1.0, (("gas", 1.0),), (("heat", 1.0),))),
     "UNRESOLVED_REFERENCE"),
    (lambda s: with_process(s, Process("p", "h", 1.0, (("gas", 1.0),), ())), "PROCESS_PORTS"),
    (lambda s: with_process(s, Process("p", "h", 1.0, (("gas", 1.5),), (("heat", 1.0),))), "FRACTION_RANGE"),
    (lambda s: with_process(s, Process("p", "h", -1.0, (("gas", 1.0),), (("heat", 1.0),))), "EFFICIENCY"),
    (lambda s: with_process(s, Process("p", "h", 1.0, (("gas", 1.0),), (("heat", 1.0),),
                                       (ProcessLimit("heat", "inlet", (1.0,)),))), "LIMIT_CARRIER"),
    (lambda s: with_process(s, Process("p", "h", 1.0, (("gas", 1.0),), (("heat", 1.0),),
                                       efficiency_unit="kg/kWh")), "COEFFICIENT_UNIT"),
    (lambda s: replace(s, ports=s.ports + (Port("h", "gas", "import", price=(1.0,)),)), "DUPLICATE_PORT"),
    (lambda s: replace(s, ports=s.ports + (Port("h", "heat", "import", price=(1.0,)),)),
     "IMPORT_WITHOUT_CONSUMER"),
    (lambda s: replace(s, ports=s.ports + (Port("h", "gas", "load", load=(1.0,)),)), "LOAD_UNSATISFIABLE"),
    (lambda s: replace(s, ports=s.ports + (Port("h", "gas", "export", price=(1.0,)),)),
     "EXPORT_WITHOUT_SOURCE"),
    (lambda s: replace(s, ports=s.ports + (Port("h", "heat", "network", max_flow=(1.0,)),)), "NETWORK_PORT"),
    (lambda s: replace(s, ports=(Port("h", "gas", "import", price=(1.0,), min_flow=(5.0,), max_flow=(2.0,)),
                                 s.ports[1])), "PORT_LIMIT"),
    (lambda s: replace(s, ports=(s.ports[0], Port("h", "heat", "load", load=(-1.0,)))), "SERIES_VALUE"),
    (lambda s: replace(s, ports=(s.ports[0], Port("h", "heat", "load", load=(1.0, 2.0)))), "SERIES_LENGTH"),
    (lambda s: replace(s, storages=(StorageUnit("st", "h", "heat", 0.9, 10.0, 1.0, 1.0, 20.0),)),
     "STORAGE_VALUE"),
    (lambda s: replace(s, storages=(StorageUnit("st", "h", "gas", 0.9, 10.0, 1.0, 1.0),)), "STORAGE_UNCONNECTED"),
    (lambda s: replace(s, networks=(Network("heat", ("h",), 0.0),)), "NETWORK_MEMBERS"),
])
def test_fatal_diagnostics(mutate, code):
    diags = validate(mutate(boiler()))
    assert code in codes(diags, FATAL), [str(d) for d in diags]


def test_unsourced_inlet_is_a_warning():
    s = boiler()
    s = replace(s, carriers=s.carriers + (Carrier("el"),),
                processes=s.processes + (Process("hp", "h", 3.0, (("el", 1.0),), (("heat", 1.0),)),))
    diags = validate(s)
    assert "UNSOURCED_INLET" in codes(diags, WARNING)
    assert codes(diags, FATAL) == set()


def test_heat_pump_cop_above_one_is_accepted():
    s = boiler(eff=4.0)
    assert validate(s) == []


def test_dimensional_coefficient_is_converted_and_recorded():
    s = load_case_study(2)
    info = [d for d in s.diagnostics if d.severity == INFO]
    assert [d.code for d in info] == ["COEFFICIENT_CONVERTED"]
    desal = next(p for p in s.processes if p.id == "desalination")
    carriers = {c.id: c for c in s.carriers}
    # 650 kg per kWh of heat, 50 kJ/kg -> 650 * 5e4 J per 3.6e6 J
    assert conversion_factor(desal, carriers) * 650.0 == pytest.approx(650 * 5e4 / 3.6e6, rel=1e-15)


def test_case_study_is_valid():
    s = load_case_study(4)
    assert codes(s.diagnostics, FATAL) == set()
    assert codes(s.diagnostics, WARNING) == set()


# -- index sets -------------------------------------------------------------------


def test_index_sets_of_case_study():
    sets = derive_index_sets(load_case_study(2))
    assert "electricity" in sets.outlet_carriers["hub1"]
    assert set(sets.producers[("electricity", "hub1")]) == {"fuel_cell", "pvt", "wt"}
    assert set(sets.network_carriers["hub2"]) == {"electricity", "mt_heat", "potable_water"}
    assert set(sets.networked) == {"electricity", "ht_heat", "mt_heat", "potable_water"}
    assert sets.network_hubs["ht_heat"] == ("hub1", "hub3")
    assert sum(len(v) for v in sets.hub_processes.values()) == 12


def test_empty_hub_has_empty_sets():
    s = two_hubs()
    sets = derive_index_sets(s)
    assert sets.inlet_carriers["b"] == () and sets.outlet_carriers["b"] == ()
    assert sets.balance_carriers("b") == ("el",)


def test_index_sets_idempotent_and_order_independent():
    s = load_case_study(2)
    a = derive_index_sets(s)
    assert derive_index_sets(s) == a
    shuffled = replace(s, processes=tuple(reversed(s.processes)), ports=tuple(reversed(s.ports)),
                       carriers=tuple(reversed(s.carriers)))
    b = derive_index_sets(shuffled)
    for h in s.hubs:
        assert set(a.inlet_carriers[h]) == set(b.inlet_carriers[h])
        assert set(a.outlet_carriers[h]) == set(b.outlet_carriers[h])
        assert set(a.network_carriers[h]) == set(b.network_carriers[h])
        assert set(a.import_carriers[h]) == set(b.import_carriers[h])
    assert {k: set(v) for k, v in a.consumers.items()} == {k: set(v) for k, v in b.consumers.items()}
    assert set(a.networked) == set(b.networked)


# -- exergy and renewable limits --------------------------------------------------

WATER = Carrier("w", "material", 50.0)


def test_exergy_flow_examples():
    assert exergy_flow(0.0, WATER) == 0.0
    assert exergy_flow(2.0, WATER) == 100.0
    assert exergy_flow(3.0, WATER) == exergy_flow(2.0, WATER) + exergy_flow(1.0, WATER) == 150.0


def test_exergy_flow_rejects_energy_carrier():
    with pytest.raises(ValueError):
        exergy_flow(1.0, Carrier("el"))


@given(st.floats(0, 1e6), st.floats(0, 1e3), st.floats(1e-3, 1e6))
def test_exergy_flow_is_linear(m, a, e):
    c = Carrier("x", "material", e)
    assert math.isclose(exergy_flow(a * m, c), a * exergy_flow(m, c), rel_tol=1e-12, abs_tol=1e-300)


def test_wind_and_solar_examples():
    wind = {"coefficient": 5.0, "cut_in": 3.0, "cut_off": 25.0}
    assert renewable_limit_series("wind", wind, [10.0])[0] == 5000.0
    assert renewable_limit_series("wind", wind, [2.0])[0] == 0.0
    assert renewable_limit_series("wind", wind, [26.0])[0] == 0.0
    assert renewable_limit_series("solar", {"area": 20.0}, [500.0])[0] == 10.0


def test_negative_weather_rejected():
    with pytest.raises(ValueError):
        renewable_limit_series("wind", {"coefficient": 5.0, "cut_in": 3.0, "cut_off": 25.0}, [-1.0])


@given(st.lists(st.floats(0, 40, allow_nan=False), min_size=1, max_size=30))
def test_wind_limit_piecewise(speeds):
    lim = renewable_limit_series("wind", {"coefficient": 5.0, "cut_in": 3.0, "cut_off": 25.0}, speeds)
    for v, p in zip(speeds, lim):
        if v < 3.0 or v > 25.0:
            assert p == 0.0
        else:
            assert math.isclose(p, 5.0 * v ** 3, rel_tol=1e-14)


@given(st.lists(st.floats(0, 1500, allow_nan=False), min_size=1, max_size=30), st.floats(0, 500))
def test_solar_limit_monotone(irr, bump):
    base = renewable_limit_series("solar", {"area": 20.0}, irr)
    more = renewable_limit_series("solar", {"area": 20.0}, [v + bump for v in irr])
    assert np.all(more >= base)


# -- storage ----------------------------------------------------------------------


@given(st.floats(1e-6, 1.0))
def test_storage_legs_multiply_to_round_trip(eta):
    s = StorageUnit("s", "h", "el", eta, 1.0, 1.0, 1.0)
    assert math.isclose(s.leg_efficiency ** 2, eta, rel_tol=1e-14)


@settings(max_examples=50)
@given(st.lists(st.integers(1, 12), min_size=1, max_size=4))
def test_valid_fractions_sum_to_one(weights):
    total = sum(weights)
    s = boiler()
    extra = tuple(Carrier(f"c{i}") for i in range(len(weights)))
    inlets = tuple((f"c{i}", w / total) for i, w in enumerate(weights))
    p = Process("mix", "h", 1.0, inlets, (("heat", 1.0),))
    ports = s.ports + tuple(Port("h", f"c{i}", "import", price=ser(1.0, 1)) for i in range(len(weights)))
    diags = validate(replace(s, carriers=s.carriers + extra, processes=s.processes + (p,), ports=ports))
    assert "FRACTION_SUM" not in codes(diags)
    assert abs(sum(f for _, f in p.inlets) - 1.0) <= 1e-9
