"""Recover a split Thevenin equivalent from two phasor snapshots.

The circuit is a source e_th behind a transmission impedance z_t, then a
distribution impedance z_d, feeding a load z_l that steps down between the
two snapshots.
"""
import numpy as np

from tddi import PhasorSnapshot, estimate_lsq, estimate_two_point, tddi, vsi
from tddi.measurements import add_noise

e_th, z_t, z_d = 1.02 * np.exp(0.1j), 0.01 + 0.09j, 0.03 + 0.05j


def snapshot(z_l, k):
    i = e_th / (z_t + z_d + z_l)
    v_sub = e_th - z_t * i
    return PhasorSnapshot(k, 0.0, v_sub, v_sub - z_d * i, i)


snaps = [snapshot(z, k) for k, z in enumerate([0.8 + 0.25j, 0.7 + 0.22j, 0.6 + 0.19j])]

eq = estimate_two_point(snaps[0], snaps[1])
print("two-point:", np.round([eq.e_th, eq.z_t, eq.z_d], 6))
print(f"  VSI = {vsi(eq):.4f}, TDDI = {tddi(eq):+.4f}, ln|z_t|/|z_d| = {np.log(abs(z_t) / abs(z_d)):+.4f}")

# noisy measurements, least squares over all three
noisy = add_noise(snaps, sigma=1e-4, seed=1)
eq = estimate_lsq(noisy)
print("least squares, noisy:", np.round([eq.e_th, eq.z_t, eq.z_d], 4))
print(f"  condition number {eq.condition:.1f}, TDDI = {tddi(eq):+.4f}")
