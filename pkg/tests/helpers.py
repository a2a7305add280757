"""Small scenario and LP factories shared by the tests."""
from __future__ import annotations

import numpy as np

from hubflow.lp import LinearProgram
from hubflow.model import (
    Carrier,
    Network,
    Port,
    Process,
    ProcessLimit,
    RenewableModel,
    Scenario,
    StorageUnit,
    TimeGrid,
)


def ser(value, T):
    if np.ndim(value) == 0:
        return tuple(float(value) for _ in range(T))
    out = tuple(float(v) for v in value)
    assert len(out) == T
    return out


def boiler(load=9.0, eff=0.9, price=10.0, T=1, hours=1.0, name="boiler toy"):
    """Gas import -> boiler -> heat load, single hub."""
    return Scenario(
        carriers=(Carrier("gas"), Carrier("heat")),
        hubs=("h",),
        processes=(Process("boiler", "h", eff, (("gas", 1.0),), (("heat", 1.0),)),),
        storages=(),
        ports=(Port("h", "gas", "import", price=ser(price, T)), Port("h", "heat", "load", load=ser(load, T))),
        networks=(),
        time_grid=TimeGrid(ser(hours, T)),
        name=name,
    )


def two_hubs(loss=0.05, load=100.0, price=1.0, capacity=1000.0, T=1):
    """Hub ``a`` generates electricity from gas and ships it to hub ``b``'s load."""
    return Scenario(
        carriers=(Carrier("gas"), Carrier("el")),
        hubs=("a", "b"),
        processes=(Process("gen", "a", 1.0, (("gas", 1.0),), (("el", 1.0),)),),
        storages=(),
        ports=(
            Port("a", "gas", "import", price=ser(price, T)),
            Port("a", "el", "network", max_flow=ser(capacity, T)),
            Port("b", "el", "network", max_flow=ser(capacity, T)),
            Port("b", "el", "load", load=ser(load, T)),
        ),
        networks=(Network("el", ("a", "b"), loss),),
        time_grid=TimeGrid(ser(1.0, T)),
        name="two hubs",
    )


def storage_hub(load, price, eta=0.65, capacity=100.0, rate=50.0, policy="free", initial=0.0, gen_cap=None):
    """Gas -> generator -> electricity with a storage unit; time-varying price."""
    T = len(load)
    limits = () if gen_cap is None else (ProcessLimit("el", "outlet", ser(gen_cap, T)),)
    return Scenario(
        carriers=(Carrier("gas"), Carrier("el")),
        hubs=("h",),
        processes=(Process("gen", "h", 1.0, (("gas", 1.0),), (("el", 1.0),), limits),),
        storages=(StorageUnit("bat", "h", "el", eta, capacity, rate, rate, initial, policy),),
        ports=(Port("h", "gas", "import", price=ser(price, T)), Port("h", "el", "load", load=ser(load, T))),
        networks=(),
        time_grid=TimeGrid(ser(1.0, T)),
        name="storage toy",
    )


def wind_hub(speeds, load, coefficient=5.0):
    """Free wind through a turbine plus priced gas backup."""
    T = len(speeds)
    ren = RenewableModel("wind", ser(speeds, T), coefficient=coefficient, cut_in=3.0, cut_off=25.0)
    wt = Process("wt", "h", 1.0, (("wind", 1.0),), (("el", 1.0),),
                 (ProcessLimit("el", "outlet", tuple(float(v) for v in ren.limit()), ren),))
    gen = Process("gen", "h", 0.5, (("gas", 1.0),), (("el", 1.0),))
    return Scenario(
        carriers=(Carrier("wind"), Carrier("gas"), Carrier("el")),
        hubs=("h",),
        processes=(wt, gen),
        storages=(),
        ports=(Port("h", "wind", "import", price=ser(0.0, T)), Port("h", "gas", "import", price=ser(3.0, T)),
               Port("h", "el", "export", price=ser(0.0, T)), Port("h", "el", "load", load=ser(load, T))),
        networks=(),
        time_grid=TimeGrid(ser(1.0, T)),
        name="wind toy",
    )


def random_lp(rng, max_n=8, max_m=8) -> LinearProgram:
    """Small integer LP with mixed row senses and bound types."""
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(0, max_m + 1))
    A = rng.integers(-5, 6, size=(m, n)).astype(float)
    A[rng.random((m, n)) < 0.3] = 0.0
    b = rng.integers(-5, 10, size=m).astype(float)
    c = rng.integers(-5, 6, size=n).astype(float)
    senses = rng.choice(list("ELG"), size=m, p=[0.3, 0.4, 0.3])
    lo = rng.integers(-3, 2, size=n).astype(float)
    up = np.where(rng.random(n) < 0.5, lo + rng.integers(0, 6, size=n), np.inf)
    return LinearProgram(A, b, c, lo, up, senses)


def scale_prices(scenario: Scenario, lam: float) -> Scenario:
    from dataclasses import replace

    ports = tuple(replace(p, price=tuple(lam * v for v in p.price)) if p.price is not None else p
                  for p in scenario.ports)
    return replace(scenario, ports=ports)
