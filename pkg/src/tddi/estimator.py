"""Split Thevenin equivalent from substation and load phasors.

For one load the circuit is ``E_th -- Z_T -- V_sub -- Z_D -- V_dist -- Z_L``,
so every snapshot gives two linear equations in ``(E_th, Z_T, Z_D)``::

    E_th - I_dist * Z_T = V_sub
    I_dist * Z_D        = V_sub - V_dist

A single snapshot cannot separate ``E_th`` from ``Z_T``; two or more
snapshots with different currents can.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .measurements import PhasorSnapshot

MIN_CURRENT_CHANGE = 1e-6


class ConditioningError(ValueError):
    """The snapshots do not change enough to identify the equivalent."""


@dataclass(frozen=True)
class TDEquivalent:
    e_th: complex
    z_t: complex
    z_d: complex
    z_l: complex
    condition: float


def design_matrix(snapshots: Sequence[PhasorSnapshot]) -> tuple[np.ndarray, np.ndarray]:
    """Stacked complex system ``A @ [E_th, Z_T, Z_D] = b``, two rows per snapshot."""
    rows, rhs = [], []
    for s in snapshots:
        rows.append([-1.0, s.i_dist, 0.0])
        rhs.append(-s.v_sub)
        rows.append([0.0, 0.0, s.i_dist])
        rhs.append(s.v_sub - s.v_dist)
    return np.array(rows, dtype=complex), np.array(rhs, dtype=complex)


def _condition(A: np.ndarray) -> float:
    real = np.block([[A.real, -A.imag], [A.imag, A.real]])
    sv = np.linalg.svd(real, compute_uv=False)
    return float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")


def _check_spread(snapshots: Sequence[PhasorSnapshot], threshold: float) -> None:
    i = np.array([s.i_dist for s in snapshots])
    if np.max(np.abs(i[:, None] - i[None, :])) < threshold:
        raise ConditioningError(
            f"load current changes by less than {threshold:g} p.u. between instants; "
            "insufficient load change to separate E_th and Z_T")


def mean_load_impedance(snapshots: Sequence[PhasorSnapshot]) -> complex:
    return complex(np.mean([s.v_dist / s.i_dist for s in snapshots]))


def estimate_two_point(s1: PhasorSnapshot, s2: PhasorSnapshot, *,
                       literal_eq8: bool = False,
                       threshold: float = MIN_CURRENT_CHANGE) -> TDEquivalent:
    """Closed-form equivalent from two instants.

    ``Z_D`` is the average of the per-instant feeder drop quotients
    ``(V_sub - V_dist) / I_dist``. ``literal_eq8=True`` instead evaluates
    ``((V_sub1 - V_sub2)/I_1 + (V_sub2 - V_sub1)/I_2) / 2``, the variant that
    uses substation voltages only; it is kept for comparison and is not a
    consistent estimate.
    """
    _check_spread((s1, s2), threshold)
    di = s1.i_dist - s2.i_dist
    z_t = -(s1.v_sub - s2.v_sub) / di
    e_th = (s2.v_sub * s1.i_dist - s1.v_sub * s2.i_dist) / di
    if literal_eq8:
        z_d = ((s1.v_sub - s2.v_sub) / s1.i_dist + (s2.v_sub - s1.v_sub) / s2.i_dist) / 2
    else:
        z_d = ((s1.v_sub - s1.v_dist) / s1.i_dist + (s2.v_sub - s2.v_dist) / s2.i_dist) / 2
    z_l = (s1.v_dist / s1.i_dist + s2.v_dist / s2.i_dist) / 2
    A, _ = design_matrix((s1, s2))
    return TDEquivalent(complex(e_th), complex(z_t), complex(z_d), complex(z_l), _condition(A))


def estimate_lsq(snapshots: Sequence[PhasorSnapshot], *,
                 threshold: float = MIN_CURRENT_CHANGE) -> TDEquivalent:
    """Complex least-squares equivalent over two or more instants."""
    if len(snapshots) < 2:
        raise ValueError("least-squares estimation needs at least 2 snapshots")
    _check_spread(snapshots, threshold)
    A, b = design_matrix(snapshots)
    x, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < 3:
        raise ConditioningError("stacked system is rank deficient")
    e_th, z_t, z_d = (complex(c) for c in x)
    return TDEquivalent(e_th, z_t, z_d, mean_load_impedance(snapshots), _condition(A))


def residuals(eq: TDEquivalent, snapshots: Sequence[PhasorSnapshot]) -> np.ndarray:
    """Per-snapshot residuals of the source-side and feeder-side equations."""
    A, b = design_matrix(snapshots)
    return A @ np.array([eq.e_th, eq.z_t, eq.z_d]) - b
