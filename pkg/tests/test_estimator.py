from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from tddi import ConditioningError, estimate_lsq, estimate_two_point
from tddi.estimator import residuals
from tddi.measurements import add_noise
from conftest import circuit_snapshot, rel_err

E_TH, Z_T, Z_D = 1.05 + 0j, 0.08j, 0.02 + 0.04j


def _pair():
    return (circuit_snapshot(E_TH, Z_T, Z_D, 0.5 + 0.2j, 0),
            circuit_snapshot(E_TH, Z_T, Z_D, 0.4 + 0.16j, 1))


@pytest.fixture
def pair():
    return _pair()


def test_two_point_exact(pair):
    eq = estimate_two_point(*pair)
    assert rel_err(eq.e_th, E_TH) < 1e-10
    assert rel_err(eq.z_t, Z_T) < 1e-10
    assert rel_err(eq.z_d, Z_D) < 1e-10
    assert eq.z_l == pytest.approx(0.45 + 0.18j, rel=1e-12)
    assert np.max(np.abs(residuals(eq, pair))) < 1e-12
    assert eq.condition > 1


def test_z_t_positive_real_part():
    pair = (circuit_snapshot(1.0, 0.01 + 0.1j, 0.05 + 0.05j, 1.0 + 0.3j, 0),
            circuit_snapshot(1.0, 0.01 + 0.1j, 0.05 + 0.05j, 0.8 + 0.24j, 1))
    assert estimate_two_point(*pair).z_t.real > 0


def test_identical_snapshots_rejected(pair):
    with pytest.raises(ConditioningError):
        estimate_two_point(pair[0], pair[0])
    with pytest.raises(ConditioningError):
        estimate_lsq([pair[0]] * 4)


def test_lsq_needs_two():
    with pytest.raises(ValueError):
        estimate_lsq([circuit_snapshot(1.0, 0.1j, 0.1j, 1.0)])


def test_lsq_two_matches_two_point(pair):
    a, b = estimate_two_point(*pair), estimate_lsq(pair)
    for f in ("e_th", "z_t", "z_d", "z_l"):
        assert rel_err(getattr(b, f), getattr(a, f)) < 1e-9


def _five():
    loads = [0.5 + 0.2j, 0.45 + 0.18j, 0.4 + 0.16j, 0.35 + 0.14j, 0.3 + 0.12j]
    return [circuit_snapshot(E_TH, Z_T, Z_D, z, k) for k, z in enumerate(loads)]


def test_lsq_five_exact():
    eq = estimate_lsq(_five())
    for got, want in [(eq.e_th, E_TH), (eq.z_t, Z_T), (eq.z_d, Z_D)]:
        assert rel_err(got, want) < 1e-10


def test_lsq_noise_regression():
    eq = estimate_lsq(add_noise(_five(), 1e-4, seed=3))
    for got, want in [(eq.e_th, E_TH), (eq.z_t, Z_T), (eq.z_d, Z_D)]:
        assert rel_err(got, want) < 0.05


def test_literal_variant_differs(pair):
    lit = estimate_two_point(*pair, literal_eq8=True)
    want = ((pair[0].v_sub - pair[1].v_sub) / pair[0].i_dist
            + (pair[1].v_sub - pair[0].v_sub) / pair[1].i_dist) / 2
    assert lit.z_d == pytest.approx(want)
    assert abs(lit.z_d - Z_D) > 0.01
    assert lit.z_t == estimate_two_point(*pair).z_t


z_st = st.builds(complex, st.floats(0.0, 0.2), st.floats(0.01, 0.5))


@settings(max_examples=200, deadline=None)
@given(z_t=z_st, z_d=z_st, mag=st.floats(0.9, 1.1), ang=st.floats(-0.5, 0.5),
       zl1=st.builds(complex, st.floats(0.3, 3.0), st.floats(0.0, 1.0)),
       k=st.floats(0.5, 0.95))
def test_property_recovery(z_t, z_d, mag, ang, zl1, k):
    e = mag * np.exp(1j * ang)
    zl2 = zl1 * k
    s1, s2 = circuit_snapshot(e, z_t, z_d, zl1), circuit_snapshot(e, z_t, z_d, zl2)
    assume(abs(s1.i_dist - s2.i_dist) > 1e-3)
    for eq in (estimate_two_point(s1, s2), estimate_lsq([s1, s2])):
        assert rel_err(eq.e_th, e) < 1e-9
        assert rel_err(eq.z_t, z_t) < 1e-9
        assert rel_err(eq.z_d, z_d) < 1e-9
        assert np.max(np.abs(residuals(eq, [s1, s2]))) < 1e-8


@settings(max_examples=50, deadline=None)
@given(c=st.builds(complex, st.floats(0.2, 3), st.floats(-3, 3)))
def test_scale_covariance(c):
    pair = _pair()
    scaled = [replace(s, v_sub=c * s.v_sub, v_dist=c * s.v_dist, i_dist=c * s.i_dist)
              for s in pair]
    a, b = estimate_two_point(*pair), estimate_two_point(*scaled)
    assert rel_err(b.e_th, c * a.e_th) < 1e-9
    assert rel_err(b.z_t, a.z_t) < 1e-9
    assert rel_err(b.z_d, a.z_d) < 1e-9
