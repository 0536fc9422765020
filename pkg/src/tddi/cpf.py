"""Continuation power flow along a proportional load/generation increase.

The predictor is the tangent of the solution curve. The continuation
parameter is whichever of lambda or the pq voltage magnitudes has the largest
tangent component, so the curve is parameterized by load far from the nose
and by a local voltage near it, which lets the trace turn around the nose.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np
from scipy.optimize import brentq

from ._format import fmt
from .netmodel import Network, ybus
from .powerflow import (ConvergenceError, InjectionSet, PFSolution, _jacobian, _mismatch,
                        apply_state, solve_pf, state_vector)


class CPFError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScalingDirection:
    """Injection change per unit lambda.

    ``load`` is the complex load increment at each bus and ``gen`` the active
    generation increment (zero at the slack, which picks up the residual).
    """

    load: np.ndarray
    gen: np.ndarray

    @property
    def injection(self) -> np.ndarray:
        return self.gen - self.load

    def is_zero(self) -> bool:
        return not (np.any(self.load) or np.any(self.gen))


def direction(net: Network) -> ScalingDirection:
    """Proportional increase of every load (constant power factor) and every non-slack generator."""
    gen = net.gen_p.copy()
    gen[net.slack] = 0.0
    return ScalingDirection(net.loads.copy(), gen)


def injections(net: Network, d: ScalingDirection, lam: float) -> InjectionSet:
    """Specified injections at loading ``lam``: base case plus ``lam`` times the direction."""
    base = InjectionSet.from_network(net)
    return InjectionSet(base.s + lam * d.injection, base.v_set)


@dataclass(frozen=True)
class OperatingPoint:
    lam: float
    solution: PFSolution
    total_load_mw: float


@dataclass
class PVTrace:
    network: Network
    direction: ScalingDirection
    points: list[OperatingPoint] = field(default_factory=list)
    nose_index: int = 0

    @property
    def upper(self) -> list[OperatingPoint]:
        return self.points[: self.nose_index + 1]

    @property
    def nose(self) -> OperatingPoint:
        return self.points[self.nose_index]

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    @property
    def total_load_mw(self) -> np.ndarray:
        return np.array([p.total_load_mw for p in self.points])

    def voltage(self, bus_id: int) -> np.ndarray:
        """Complex voltage at ``bus_id`` along the whole trace."""
        k = self.network.index(bus_id)
        return np.array([p.solution.v[k] for p in self.points])


@dataclass(frozen=True)
class CPFOptions:
    step: float = 0.02
    min_step: float = 1e-4
    tol: float = 1e-8
    max_iter: int = 20
    max_dv: float = 0.05  # bound on per-bus |dV| between consecutive points
    lower_points: int = 3  # points traced past the nose
    nose_tol: float = 1e-6  # relative step tolerance when locating the nose
    max_points: int = 2000


def _tangent(J_aug_top: np.ndarray, prev: np.ndarray | None) -> np.ndarray:
    """Unit tangent of the solution curve, oriented along ``prev``."""
    n = J_aug_top.shape[1]
    row = np.zeros(n)
    if prev is None:
        row[-1] = 1.0
    else:
        row = prev
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    t = np.linalg.solve(np.vstack([J_aug_top, row]), rhs)
    return t / np.linalg.norm(t)


def run_cpf(net: Network, d: ScalingDirection | None = None,
            opts: CPFOptions = CPFOptions()) -> PVTrace:
    """Trace the PV curve from the base case past the nose.

    Each step predicts along the tangent by ``step`` in the current
    continuation parameter and corrects with Newton on the power-flow
    equations augmented by fixing that parameter. A failed or too-large step
    is halved; once below ``min_step`` the trace ends. A step that turns the
    nose is shortened (Brent's method on the tangent's lambda component) so
    that the nose itself becomes a trace point. Tracing stops
    ``lower_points`` points after lambda starts to decrease.
    """
    if d is None:
        d = direction(net)
    base_mw = net.total_load.real * net.mva_base
    try:
        sol = solve_pf(net, injections(net, d, 0.0), tol=opts.tol)
    except ConvergenceError as exc:
        raise CPFError(f"base case does not solve: {exc}") from exc
    trace = PVTrace(net, d, [OperatingPoint(0.0, sol, base_mw)], 0)
    if d.is_zero():
        return trace

    Y = ybus(net)
    pvpq = np.r_[net.pv, net.pq]
    n_ang = len(pvpq)
    n_x = n_ang + len(net.pq)
    s0 = injections(net, d, 0.0).s
    ds = d.injection
    df_dlam = np.r_[ds.real[pvpq], ds.imag[net.pq]]
    # candidates for the continuation parameter: Vm of pq buses, then lambda
    param_idx = np.r_[np.arange(n_ang, n_x), n_x]

    def aug_jac(v):
        return np.hstack([_jacobian(Y, net, v), -df_dlam[:, None]])

    v = sol.v
    lam = 0.0
    z = np.r_[state_vector(net, v), lam]
    t = _tangent(aug_jac(v), None)
    scale = 1.0
    past_nose = 0
    lam_max = 0.0

    def accept(z_new, iters):
        v_new = apply_state(net, v, z_new[:-1])
        lam_new = float(z_new[-1])
        err = np.max(np.abs(_mismatch(Y, net, s0 + lam_new * ds, v_new)), initial=0.0)
        trace.points.append(
            OperatingPoint(lam_new, PFSolution(v_new, iters, float(err)), (1 + lam_new) * base_mw))
        return v_new, lam_new

    while len(trace.points) < opts.max_points:
        k = param_idx[np.argmax(np.abs(t[param_idx]))]
        sigma = opts.step * scale
        if sigma < opts.min_step:
            break

        def step_to(s):
            z_pred = z + t * (s / abs(t[k]))
            return _correct(Y, net, s0, ds, v, z_pred, k, z_pred[k], opts)

        z_new, iters = step_to(sigma)
        if z_new is None or _max_dv(net, v, z_new) > opts.max_dv:
            scale /= 2
            continue
        if z_new[-1] < 0:
            break
        t_new = _tangent(aug_jac(apply_state(net, v, z_new[:-1])), t)
        if past_nose == 0 and t[-1] > 0 and t_new[-1] <= 0:
            # the step turned the nose: locate the point where dlam/ds = 0
            nose = _locate_nose(step_to, aug_jac, net, v, t, sigma, opts)
            if nose is not None:
                z_new, iters, t_new = nose
        v, lam_new = accept(z_new, iters)
        if lam_new < lam:
            past_nose += 1
        lam, z, t = lam_new, z_new, t_new
        if lam > lam_max:
            lam_max = lam
            trace.nose_index = len(trace.points) - 1
        scale = min(1.0, 2 * scale)
        if past_nose >= max(opts.lower_points, 1):
            break
    return trace


def _max_dv(net, v, z_new):
    return np.max(np.abs(np.abs(apply_state(net, v, z_new[:-1])) - np.abs(v)))


def _locate_nose(step_to, aug_jac, net, v, t, sigma, opts):
    """Step length in (0, sigma] at which the tangent's lambda component vanishes."""
    cache = {}

    def dlam(s):
        z_s, iters = step_to(s)
        if z_s is None:
            raise CPFError("corrector failed while locating the nose")
        t_s = _tangent(aug_jac(apply_state(net, v, z_s[:-1])), t)
        cache[s] = (z_s, iters, t_s)
        return t_s[-1]

    try:
        s_star = brentq(dlam, 0.0, sigma, xtol=opts.nose_tol * sigma, rtol=4 * np.finfo(float).eps)
    except (CPFError, ValueError):
        return None
    if s_star not in cache:
        dlam(s_star)
    if s_star <= opts.nose_tol * sigma:
        return None
    return cache[s_star]


def _correct(Y, net, s0, ds, v_ref, z, k, target, opts):
    """Newton corrector on F(x, lam) = 0 with ``z[k]`` pinned at ``target``."""
    pvpq = np.r_[net.pv, net.pq]
    df_dlam = np.r_[ds.real[pvpq], ds.imag[net.pq]]
    z = z.copy()
    n = len(z)
    for it in range(opts.max_iter + 1):
        v = apply_state(net, v_ref, z[:-1])
        f = np.r_[_mismatch(Y, net, s0 + z[-1] * ds, v), target - z[k]]
        if not np.all(np.isfinite(f)):
            return None, it
        if np.max(np.abs(f)) <= opts.tol:
            return z, it
        if it == opts.max_iter:
            break
        e_k = np.zeros(n)
        e_k[k] = 1.0
        J = np.vstack([np.hstack([_jacobian(Y, net, v), -df_dlam[:, None]]), e_k])
        try:
            z = z + np.linalg.solve(J, f)
        except np.linalg.LinAlgError:
            return None, it
    return None, opts.max_iter


def margin(trace: PVTrace) -> float:
    """MW of total active load added between the base case and the nose."""
    return trace.nose.total_load_mw - trace.points[0].total_load_mw


def write_trace_csv(trace: PVTrace, out: TextIO) -> None:
    """One row per bus per operating point: ``lambda,total_load_mw,bus,v_mag,v_ang_deg``."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["lambda", "total_load_mw", "bus", "v_mag", "v_ang_deg"])
    for p in trace.points:
        for b, vk in zip(trace.network.buses, p.solution.v):
            w.writerow([fmt(p.lam), fmt(p.total_load_mw), b.name,
                        fmt(abs(vk)), fmt(np.degrees(np.angle(vk)))])


def trace_csv(trace: PVTrace) -> str:
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    return buf.getvalue()
