"""Newton-Raphson AC power flow in polar coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import Network, ybus

TOLERANCE = 1e-8
MAX_ITER = 30


class ConvergenceError(RuntimeError):
    """Newton iterations did not reach the mismatch tolerance."""

    def __init__(self, msg, iterations=None, max_mismatch=None):
        super().__init__(msg)
        self.iterations = iterations
        self.max_mismatch = max_mismatch


@dataclass(frozen=True)
class InjectionSet:
    """Specified complex injection (generation minus load) at every bus.

    The slack entry is ignored; for pv buses only the real part is used.
    ``v_set`` holds voltage magnitude setpoints for slack and pv buses.
    """

    s: np.ndarray
    v_set: np.ndarray

    @classmethod
    def from_network(cls, net: Network, scale: float = 1.0) -> "InjectionSet":
        s = scale * (net.gen_p - net.loads)
        return cls(np.asarray(s, dtype=complex), net.v_setpoints)


@dataclass(frozen=True)
class PFSolution:
    v: np.ndarray
    iterations: int
    max_mismatch: float

    @property
    def vm(self) -> np.ndarray:
        return np.abs(self.v)

    @property
    def va(self) -> np.ndarray:
        return np.angle(self.v)


def power_injections(Y: np.ndarray, v: np.ndarray) -> np.ndarray:
    return v * np.conj(Y @ v)


def _mismatch(Y, net, s_spec, v):
    pvpq = np.r_[net.pv, net.pq]
    ds = s_spec - power_injections(Y, v)
    return np.r_[ds.real[pvpq], ds.imag[net.pq]]


def mismatch(net: Network, inj: InjectionSet, v: np.ndarray) -> np.ndarray:
    """Specified minus computed injections: P at pv+pq buses, then Q at pq buses."""
    return _mismatch(ybus(net), net, inj.s, np.asarray(v, dtype=complex))


def _jacobian(Y, net, v):
    pvpq = np.r_[net.pv, net.pq]
    pq = net.pq
    i_bus = Y @ v
    vnorm = v / np.abs(v)
    dS_dVm = v[:, None] * np.conj(Y * vnorm[None, :])
    dS_dVm[np.diag_indices_from(dS_dVm)] += np.conj(i_bus) * vnorm
    dS_dVa = -1j * v[:, None] * np.conj(Y * v[None, :])
    dS_dVa[np.diag_indices_from(dS_dVa)] += 1j * v * np.conj(i_bus)
    return np.block([
        [dS_dVa[np.ix_(pvpq, pvpq)].real, dS_dVm[np.ix_(pvpq, pq)].real],
        [dS_dVa[np.ix_(pq, pvpq)].imag, dS_dVm[np.ix_(pq, pq)].imag],
    ])


def jacobian(net: Network, v: np.ndarray) -> np.ndarray:
    """Derivative of computed injections w.r.t. ``[Va(pv+pq), Vm(pq)]``.

    The derivative of :func:`mismatch` is the negative of this matrix.
    """
    return _jacobian(ybus(net), net, np.asarray(v, dtype=complex))


def state_vector(net: Network, v: np.ndarray) -> np.ndarray:
    """Newton unknowns ``[Va(pv+pq), Vm(pq)]`` extracted from complex voltages."""
    return np.r_[np.angle(v)[np.r_[net.pv, net.pq]], np.abs(v)[net.pq]]


def apply_state(net: Network, v: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Complex voltages with the unknowns of ``v`` replaced by ``x``."""
    pvpq = np.r_[net.pv, net.pq]
    va = np.angle(v)
    vm = np.abs(v)
    va[pvpq] = x[: len(pvpq)]
    vm[net.pq] = x[len(pvpq):]
    return vm * np.exp(1j * va)


def initial_voltage(net: Network, inj: InjectionSet, start: PFSolution | None = None) -> np.ndarray:
    if start is None:
        v = np.ones(net.n_bus, dtype=complex)
    else:
        v = np.array(start.v, dtype=complex)
        if v.shape != (net.n_bus,):
            raise ValueError(f"warm start has {v.shape} entries, network has {net.n_bus} buses")
    fixed = np.r_[net.slack, net.pv].astype(int)
    v[fixed] = inj.v_set[fixed] * np.exp(1j * np.angle(v[fixed]))
    v[net.slack] = inj.v_set[net.slack]
    return v


def solve_pf(net: Network, inj: InjectionSet, start: PFSolution | None = None, *,
             tol: float = TOLERANCE, max_iter: int = MAX_ITER) -> PFSolution:
    """Newton-Raphson power flow; flat start unless ``start`` is given.

    Raises :class:`ConvergenceError` if the max absolute mismatch is still
    above ``tol`` after ``max_iter`` iterations, which for a continuation
    corrector usually means the operating point lies beyond the nose.
    """
    if inj.s.shape != (net.n_bus,):
        raise ValueError("injection vector does not match the network")
    Y = ybus(net)
    v = initial_voltage(net, inj, start)
    f = _mismatch(Y, net, inj.s, v)
    err = np.max(np.abs(f), initial=0.0)
    it = 0
    while err > tol:
        if it >= max_iter:
            raise ConvergenceError(
                f"no convergence after {it} iterations (mismatch {err:.3e})", it, err)
        J = _jacobian(Y, net, v)
        try:
            dx = np.linalg.solve(J, f)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Jacobian", it, err) from None
        v = apply_state(net, v, state_vector(net, v) + dx)
        f = _mismatch(Y, net, inj.s, v)
        err = np.max(np.abs(f), initial=0.0)
        it += 1
        if not np.isfinite(err):
            raise ConvergenceError("diverged", it, err)
    return PFSolution(v, it, float(err))


def slack_power(net: Network, v: np.ndarray) -> complex:
    """Complex power delivered into the network at the slack bus."""
    return complex(power_injections(ybus(net), v)[net.slack])


def losses(net: Network, v: np.ndarray) -> complex:
    """Series I^2 Z losses plus line-charging reactive terms over all branches."""
    total = 0j
    for br in net.branches:
        vi, vj = v[net.index(br.from_bus)], v[net.index(br.to_bus)]
        i_ser = (vi - vj) / br.z
        total += abs(i_ser) ** 2 * br.z
        total += -0.5j * br.b * (abs(vi) ** 2 + abs(vj) ** 2)
    return total
