import math

import pytest

from adiab.models import SchwingerParams
from adiab.runner import run_scenario
from adiab.scenario import Scenario

SLOW = SchwingerParams(1.0, 0.1, math.pi / 2)
FAST = SchwingerParams(1.0, 10.0, 0.1)
STATIC = SchwingerParams(1.0, 0.0, math.pi / 3)


def make_scenario(name, params, t_end, steps, model_kind="schwinger", **kwargs):
    return Scenario(
        name=name,
        model_kind=model_kind,
        params=params,
        t_start=0.0,
        t_end=t_end,
        steps=steps,
        level=1,
        **kwargs,
    )


@pytest.fixture(scope="session")
def slow_run():
    """Slow drive (omega/omega0 = 0.1) at theta = pi/2, fixed-phase gauge."""
    return run_scenario(make_scenario("slow", SLOW, 40.0, 4000, gauge="analytic-reference"))


@pytest.fixture(scope="session")
def fast_run():
    """Fast drive (omega/omega0 = 10) at small angle theta = 0.1.

    Step count sized so the finite-difference eigenvector derivatives stay
    within the 1e-6 coupling-identity gate at omega = 10.
    """
    return run_scenario(make_scenario("fast", FAST, 4.0, 8000, gauge="analytic-reference"))


@pytest.fixture(scope="session")
def static_run():
    """omega = 0: the Hamiltonian never moves, everything should be exact."""
    return run_scenario(make_scenario("static", STATIC, 10.0, 1000))


@pytest.fixture(scope="session")
def ms_run():
    """Transformed pair: system B driven by -U_a† H_a U_a of the slow drive."""
    return run_scenario(make_scenario("ms", SLOW, 12.0, 12000, model_kind="marzlin_sanders"))


@pytest.fixture(scope="session")
def panel_runs(slow_run, fast_run):
    """The six regime panels: omega/omega0 in {0.1, 10} x theta in {0.1, pi/4, pi/2}."""
    runs = {
        ("slow", "pi2"): slow_run,
        ("fast", "0.1"): fast_run,
    }
    specs = [
        ("slow", "0.1", SchwingerParams(1.0, 0.1, 0.1), 25.0, 2500),
        ("slow", "pi4", SchwingerParams(1.0, 0.1, math.pi / 4), 25.0, 2500),
        ("fast", "pi4", SchwingerParams(1.0, 10.0, math.pi / 4), 4.0, 24000),
        ("fast", "pi2", SchwingerParams(1.0, 10.0, math.pi / 2), 4.0, 24000),
    ]
    for speed, tag, params, t_end, steps in specs:
        name = f"{speed}-{tag}"
        runs[(speed, tag)] = run_scenario(
            make_scenario(name, params, t_end, steps, gauge="analytic-reference")
        )
    return runs
