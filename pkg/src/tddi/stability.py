"""Voltage stability index, T-D distinguishing index and classification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .estimator import TDEquivalent

DEFAULT_DEADBAND = 0.05


class UndefinedIndexError(ValueError):
    pass


class Classification(str, Enum):
    TRANSMISSION_LIMITED = "transmission_limited"
    DISTRIBUTION_LIMITED = "distribution_limited"
    BALANCED = "balanced"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class StabilityRecord:
    bus: int
    total_load_mw: float
    vsi: float
    tddi: float
    classification: Classification
    equivalent: TDEquivalent | None = None


def vsi(eq: TDEquivalent) -> float:
    """``|Z_T + Z_D| / |Z_L|``; reaches 1 at maximum power transfer."""
    if abs(eq.z_l) == 0:
        raise UndefinedIndexError("zero load impedance")
    return abs(eq.z_t + eq.z_d) / abs(eq.z_l)


def tddi(eq: TDEquivalent) -> float:
    """Natural log of ``|Z_T| / |Z_D|``: positive when the transmission side dominates."""
    zt, zd = abs(eq.z_t), abs(eq.z_d)
    if zt == 0 or zd == 0:
        raise UndefinedIndexError(f"TDDI undefined for |Z_T|={zt}, |Z_D|={zd}")
    return math.log(zt) - math.log(zd)


def classify(tddi_value: float, deadband: float = DEFAULT_DEADBAND) -> Classification:
    if deadband < 0:
        raise ValueError("deadband must be >= 0")
    if tddi_value > deadband:
        return Classification.TRANSMISSION_LIMITED
    if tddi_value < -deadband:
        return Classification.DISTRIBUTION_LIMITED
    return Classification.BALANCED


def record(bus: int, total_load_mw: float, eq: TDEquivalent,
           deadband: float = DEFAULT_DEADBAND) -> StabilityRecord:
    t = tddi(eq)
    return StabilityRecord(bus, total_load_mw, vsi(eq), t, classify(t, deadband), eq)


def critical_bus(records: Sequence[StabilityRecord]) -> int:
    """Bus with the highest VSI; ties go to the lowest bus id."""
    if not records:
        raise ValueError("no records")
    return min(records, key=lambda r: (-r.vsi, r.bus)).bus
