import json
from pathlib import Path

import numpy as np
import pytest

from tddi import reference_scenarios, read_case, run_scenario
from tddi.scenarios import build_network

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def case9():
    return read_case("case9")


@pytest.fixture(scope="session")
def net_fc1():
    return build_network(reference_scenarios()["fc1"])[0]


@pytest.fixture(scope="session")
def net_fc2():
    return build_network(reference_scenarios()["fc2"])[0]


@pytest.fixture(scope="session")
def scenario_results():
    """The three reference scenarios with default options, run once per session."""
    return {name: run_scenario(cfg) for name, cfg in reference_scenarios().items()}


@pytest.fixture(scope="session")
def pf_reference():
    return json.loads((FIXTURES / "case9_pf_reference.json").read_text())


def two_bus_case(p_load=0.5, q_load=0.0, r=0.0, x=0.1, b=0.0):
    return json.dumps({
        "mva_base": 100,
        "buses": [
            {"id": 1, "kind": "slack", "v_setpoint": 1.0, "p_load": 0, "q_load": 0},
            {"id": 2, "kind": "pq", "v_setpoint": None, "p_load": p_load, "q_load": q_load},
        ],
        "branches": [{"from": 1, "to": 2, "r": r, "x": x, "b": b}],
        "generators": [{"bus": 1, "p": 0.0, "v_setpoint": 1.0}],
    })


def circuit_snapshot(e_th, z_t, z_d, z_l, instant=0):
    """Voltage-divider evaluation of the source / Z_T / Z_D / Z_L chain."""
    from tddi import PhasorSnapshot
    i = e_th / (z_t + z_d + z_l)
    v_sub = e_th - i * z_t
    v_dist = i * z_l
    return PhasorSnapshot(instant, 0.0, complex(v_sub), complex(v_dist), complex(i))


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
