import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tddi.netmodel import (Branch, Bus, CaseFormatError, FeederSpec, Network,
                           NetworkValidationError, attach_feeders, load_case, read_case,
                           read_feeder, serialize, ybus)
from conftest import two_bus_case


def test_case9_contents(case9):
    assert case9.n_bus == 9
    assert len(case9.branches) == 9
    assert len(case9.generators) == 3
    assert case9.total_load == pytest.approx(3.15 + 1.15j)
    # summed independently of Network.total_load
    assert sum(b.p_load for b in case9.buses) * case9.mva_base == pytest.approx(315.0)
    assert case9.bus(5).load == pytest.approx(0.90 + 0.30j)


def test_two_bus_minimal():
    net = load_case(two_bus_case())
    assert net.n_bus == 2
    assert net.buses[net.slack].id == 1


def _case9_doc():
    return json.loads(serialize(read_case("case9")))


def test_two_slacks_rejected():
    doc = _case9_doc()
    doc["buses"][1]["kind"] = "slack"
    with pytest.raises(NetworkValidationError, match="slack"):
        load_case(json.dumps(doc))


def test_duplicate_ids_rejected():
    doc = _case9_doc()
    doc["buses"][3]["id"] = 5
    with pytest.raises(NetworkValidationError, match="duplicate"):
        load_case(json.dumps(doc))


def test_dangling_branch_rejected():
    doc = _case9_doc()
    doc["branches"][0]["to"] = 99
    with pytest.raises(NetworkValidationError, match="unknown bus"):
        load_case(json.dumps(doc))


def test_disconnected_rejected():
    doc = _case9_doc()
    doc["buses"].append({"id": 10, "kind": "pq", "v_setpoint": None, "p_load": 0, "q_load": 0})
    with pytest.raises(NetworkValidationError, match="connected"):
        load_case(json.dumps(doc))


def test_pq_with_setpoint_rejected():
    doc = _case9_doc()
    doc["buses"][4]["v_setpoint"] = 1.0
    with pytest.raises(NetworkValidationError, match="pq bus"):
        load_case(json.dumps(doc))


def test_parse_error_has_location():
    with pytest.raises(CaseFormatError, match=r"line 2, column"):
        load_case('{"buses": [],\n  oops}')


def test_field_error_has_location():
    doc = _case9_doc()
    doc["branches"][2]["x"] = "abc"
    with pytest.raises(CaseFormatError, match=r"branches\[2\]\.x"):
        load_case(json.dumps(doc))
    doc = _case9_doc()
    del doc["buses"][0]["kind"]
    with pytest.raises(CaseFormatError, match=r"buses\[0\].*kind"):
        load_case(json.dumps(doc))


def test_roundtrip(case9, net_fc1):
    for net in (case9, net_fc1):
        assert load_case(serialize(net)) == net


def test_attach_fc1_counts(case9):
    spec = read_feeder("fc1")
    net = attach_feeders(case9, spec)
    assert net.n_bus == 39
    assert len(net.branches) == 39
    assert sum(b.name.startswith("D") for b in net.buses) == 30
    assert net.total_load == pytest.approx(case9.total_load, abs=1e-12)
    assert net.bus(5).load == 0
    assert net.bus_by_name("D3-feeder7").load == pytest.approx(0.045 + 0.015j)
    assert case9.bus(5).load != 0  # input untouched


def test_attach_wiring(case9):
    net = attach_feeders(case9, read_feeder("fc1"))
    d1 = net.bus_by_name("D1-feeder4").id
    d2 = net.bus_by_name("D2-feeder4").id
    d3 = net.bus_by_name("D3-feeder4").id
    pairs = {(br.from_bus, br.to_bus): br for br in net.branches}
    assert pairs[(5, d1)].z == pytest.approx(0.33 + 0.78j)
    assert pairs[(d1, d2)].z == pytest.approx(0.25 + 0.59j)
    assert pairs[(d1, d3)].z == pytest.approx(0.41 + 0.98j)
    assert all(pairs[p].b == 0 for p in [(5, d1), (d1, d2), (d1, d3)])


def test_attach_degenerate(case9):
    spec = FeederSpec(5, 0.1j, 0.1j, 0.1j, 0j, 0j, replicas=1)
    with pytest.warns(UserWarning, match="differs"):
        net = attach_feeders(case9, spec)
    assert net.n_bus == 12
    assert net.bus(5).load == 0


def test_attach_printed_fc2_stored_verbatim(case9):
    spec = read_feeder("fc2_printed")
    net = attach_feeders(case9, spec)
    d1 = net.bus_by_name("D1-feeder1").id
    zs = [br.z for br in net.branches if br.from_bus in (5, d1) and br.to_bus > 9][:3]
    assert zs == [0.132 + 1.95j, 0.10 + 0.089j, 0.164 + 0.294j]


def test_attach_errors(case9):
    spec = read_feeder("fc1")
    with pytest.raises(ValueError, match="unknown attach bus"):
        attach_feeders(case9, FeederSpec(42, 1j, 1j, 1j, 0j, 0j))
    with pytest.raises(ValueError, match="replicas"):
        attach_feeders(case9, FeederSpec(5, 1j, 1j, 1j, 0j, 0j, replicas=0))


def test_ybus_two_bus():
    Y = ybus(load_case(two_bus_case()))
    np.testing.assert_allclose(Y, [[-10j, 10j], [10j, -10j]], atol=1e-12)


def test_ybus_line_charging():
    Y0 = ybus(load_case(two_bus_case()))
    Y1 = ybus(load_case(two_bus_case(b=0.2)))
    np.testing.assert_allclose(np.diag(Y1 - Y0), [0.1j, 0.1j], atol=1e-15)
    np.testing.assert_allclose(Y1 - Y0 - np.diag(np.diag(Y1 - Y0)), 0)


def test_ybus_row_sums_equal_shunts(case9):
    Y = ybus(case9)
    shunt = np.zeros(case9.n_bus, dtype=complex)
    for br in case9.branches:
        shunt[case9.index(br.from_bus)] += 0.5j * br.b
        shunt[case9.index(br.to_bus)] += 0.5j * br.b
    np.testing.assert_allclose(Y.sum(axis=1), shunt, atol=1e-12)
    for br in case9.branches:
        assert Y[case9.index(br.from_bus), case9.index(br.to_bus)] == pytest.approx(-1 / br.z)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0.01, 1), st.floats(0, 0.5)),
                min_size=1, max_size=8))
def test_ybus_symmetric(params):
    # random radial chain
    buses = [Bus(1, "slack", 1.0)] + [Bus(k + 2, "pq") for k in range(len(params))]
    branches = [Branch(k + 1, k + 2, r, x, b) for k, (r, x, b) in enumerate(params)]
    Y = ybus(Network(buses, branches))
    np.testing.assert_array_equal(Y, Y.T)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.complex_numbers(max_magnitude=0.05, allow_nan=False))
def test_attach_preserves_total_load(replicas, s):
    net = read_case("case9")
    load = net.bus(5).load
    spec = FeederSpec(5, 0.3 + 0.7j, 0.2 + 0.5j, 0.4 + 0.9j, s, load / replicas - s, replicas)
    out = attach_feeders(net, spec)
    assert out.total_load == pytest.approx(net.total_load, abs=1e-12)
