"""Synthetic substation/feeder phasor snapshots taken from a PV trace."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import Sequence, TextIO

import numpy as np

from ._format import fmt
from .cpf import PVTrace


@dataclass(frozen=True)
class MonitoredLoad:
    load_bus: int
    substation_bus: int


@dataclass(frozen=True)
class PhasorSnapshot:
    instant: int
    total_load_mw: float
    v_sub: complex
    v_dist: complex
    i_dist: complex


def extract_snapshots(trace: PVTrace, m: MonitoredLoad, *,
                      include_lower: bool = False) -> list[PhasorSnapshot]:
    """One snapshot per operating point (upper branch only by default).

    The load current is that of the constant-power load scaled to the point's
    loading, ``conj((1 + lam) * S_base / V_dist)``.
    """
    net = trace.network
    k_load = net.index(m.load_bus)
    k_sub = net.index(m.substation_bus)
    s_base = net.loads[k_load]
    if s_base == 0:
        raise ValueError(f"bus {m.load_bus} carries no load")
    points = trace.points if include_lower else trace.upper
    out = []
    for i, p in enumerate(points):
        v = p.solution.v
        v_dist = complex(v[k_load])
        i_dist = np.conj((1 + p.lam) * s_base / v_dist)
        out.append(PhasorSnapshot(i, p.total_load_mw, complex(v[k_sub]), v_dist, complex(i_dist)))
    return out


def add_noise(snapshots: Sequence[PhasorSnapshot], sigma: float,
              seed: int | None = None) -> list[PhasorSnapshot]:
    """Add independent complex Gaussian noise (``sigma`` on re and im) to every phasor."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return list(snapshots)
    rng = np.random.default_rng(seed)
    out = []
    for s in snapshots:
        e = rng.normal(0.0, sigma, size=6)
        out.append(replace(
            s,
            v_sub=s.v_sub + complex(e[0], e[1]),
            v_dist=s.v_dist + complex(e[2], e[3]),
            i_dist=s.i_dist + complex(e[4], e[5]),
        ))
    return out


SNAPSHOT_COLUMNS = ["instant", "total_load_mw", "v_sub_re", "v_sub_im",
                    "v_dist_re", "v_dist_im", "i_dist_re", "i_dist_im"]


def write_snapshots_csv(snapshots: Sequence[PhasorSnapshot], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SNAPSHOT_COLUMNS)
    for s in snapshots:
        w.writerow([s.instant, fmt(s.total_load_mw),
                    fmt(s.v_sub.real), fmt(s.v_sub.imag),
                    fmt(s.v_dist.real), fmt(s.v_dist.imag),
                    fmt(s.i_dist.real), fmt(s.i_dist.imag)])


def snapshots_csv(snapshots: Sequence[PhasorSnapshot]) -> str:
    buf = io.StringIO()
    write_snapshots_csv(snapshots, buf)
    return buf.getvalue()


def read_snapshots_csv(text: str) -> list[PhasorSnapshot]:
    rows = csv.DictReader(io.StringIO(text))
    return [
        PhasorSnapshot(
            int(r["instant"]), float(r["total_load_mw"]),
            complex(float(r["v_sub_re"]), float(r["v_sub_im"])),
            complex(float(r["v_dist_re"]), float(r["v_dist_im"])),
            complex(float(r["i_dist_re"]), float(r["i_dist_im"])),
        )
        for r in rows
    ]
