"""End-to-end pipeline: network, CPF, snapshots, equivalents, indices."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

from .cpf import CPFOptions, PVTrace, margin, run_cpf
from .estimator import ConditioningError, estimate_lsq, estimate_two_point
from .measurements import MonitoredLoad, add_noise, extract_snapshots
from .netmodel import FeederSpec, Network, attach_feeders, read_case, read_feeder
from .stability import (DEFAULT_DEADBAND, Classification, StabilityRecord, classify,
                        critical_bus, record)


class ScenarioError(RuntimeError):
    """A pipeline stage failed; the message names the scenario and stage."""


class ScenarioConfigError(ScenarioError):
    """Bad inputs: unreadable case/feeder data or unknown buses."""


class ScenarioNumericError(ScenarioError):
    """The base case or the continuation failed to solve."""


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    case: str = "case9"
    feeder: str | FeederSpec | None = None
    replicas: int | None = None  # overrides the feeder file
    attach_bus: int | None = None  # overrides the feeder file
    cpf: CPFOptions = field(default_factory=CPFOptions)
    monitored: tuple[MonitoredLoad, ...] | None = None
    monitor_all_replicas: bool = False
    noise_sigma: float = 0.0
    seed: int | None = 0
    estimator: Literal["two_point", "lsq"] = "two_point"
    window: int = 2
    deadband: float = DEFAULT_DEADBAND
    literal_eq8: bool = False

    def __post_init__(self):
        if self.estimator not in ("two_point", "lsq"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    network: Network
    trace: PVTrace
    records: dict[int, list[StabilityRecord]]
    margin_mw: float
    critical_bus: int | None
    nose_tddi: float | None
    classification: Classification | None

    def bus_name(self, bus_id: int) -> str:
        return self.network.bus(bus_id).name


def reference_scenarios() -> dict[str, ScenarioConfig]:
    return {
        "standard": ScenarioConfig(name="standard"),
        "fc1": ScenarioConfig(name="fc1", feeder="fc1"),
        "fc2": ScenarioConfig(name="fc2", feeder="fc2"),
    }


def build_network(cfg: ScenarioConfig) -> tuple[Network, FeederSpec | None]:
    net = read_case(cfg.case)
    if cfg.feeder is None:
        return net, None
    spec = cfg.feeder if isinstance(cfg.feeder, FeederSpec) else read_feeder(cfg.feeder)
    if cfg.replicas is not None:
        spec = replace(spec, replicas=cfg.replicas)
    if cfg.attach_bus is not None:
        spec = replace(spec, attach_bus=cfg.attach_bus)
    return attach_feeders(net, spec), spec


def default_monitored(net: Network, spec: FeederSpec | None,
                      all_replicas: bool = False) -> tuple[MonitoredLoad, ...]:
    """D2 and D3 of feeder replica 1 (or of every replica)."""
    if spec is None:
        return ()
    replicas = range(1, spec.replicas + 1) if all_replicas else (1,)
    out = []
    for n in replicas:
        for level in (2, 3):
            bus = net.bus_by_name(f"D{level}-feeder{n}")
            if bus.load != 0:
                out.append(MonitoredLoad(bus.id, spec.attach_bus))
    return tuple(out)


def _estimate_series(cfg: ScenarioConfig, snaps) -> list[tuple[float, object]]:
    out = []
    if cfg.estimator == "two_point":
        for a, b in zip(snaps[:-1], snaps[1:]):
            try:
                eq = estimate_two_point(a, b, literal_eq8=cfg.literal_eq8)
            except ConditioningError:
                continue
            out.append((b.total_load_mw, eq))
    else:
        for k in range(cfg.window, len(snaps) + 1):
            win = snaps[k - cfg.window: k]
            try:
                eq = estimate_lsq(win)
            except ConditioningError:
                continue
            out.append((win[-1].total_load_mw, eq))
    return out


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    """Run the full pipeline; deterministic for a given config and seed."""
    try:
        net, spec = build_network(cfg)
    except (ValueError, OSError, KeyError) as exc:
        raise ScenarioConfigError(f"{cfg.name}: building network failed: {exc}") from exc
    try:
        trace = run_cpf(net, opts=cfg.cpf)
    except RuntimeError as exc:
        raise ScenarioNumericError(f"{cfg.name}: continuation failed: {exc}") from exc

    monitored = cfg.monitored
    if monitored is None:
        monitored = default_monitored(net, spec, cfg.monitor_all_replicas)

    records: dict[int, list[StabilityRecord]] = {}
    for k, m in enumerate(monitored):
        try:
            snaps = extract_snapshots(trace, m)
        except (KeyError, ValueError) as exc:
            raise ScenarioConfigError(f"{cfg.name}: monitored load {m}: {exc}") from exc
        if cfg.noise_sigma > 0:
            seed = None if cfg.seed is None else (cfg.seed, k)
            snaps = add_noise(snaps, cfg.noise_sigma, seed)
        records[m.load_bus] = [record(m.load_bus, mw, eq, cfg.deadband)
                               for mw, eq in _estimate_series(cfg, snaps)]

    crit = nose_tddi = cls = None
    last = _last_common_level(records)
    if last:
        crit = critical_bus(last)
        nose_tddi = next(r.tddi for r in last if r.bus == crit)
        cls = classify(nose_tddi, cfg.deadband)
    return ScenarioResult(cfg, net, trace, records, margin(trace), crit, nose_tddi, cls)


def _last_common_level(records: dict[int, list[StabilityRecord]]) -> list[StabilityRecord]:
    """Records of every monitored bus at the highest load level they all share."""
    series = [r for r in records.values() if r]
    if not series:
        return []
    common = set.intersection(*({r.total_load_mw for r in s} for s in series))
    if not common:
        return [s[-1] for s in series]
    level = max(common)
    return [next(r for r in s if r.total_load_mw == level) for s in series]


def series(result: ScenarioResult, bus: int, field: Literal["vsi", "tddi"]) -> list[tuple[float, float]]:
    """Plot-ready ``(total_load_mw, value)`` pairs for one monitored bus."""
    if field not in ("vsi", "tddi"):
        raise ValueError(f"unknown field {field!r}")
    if bus not in result.records:
        raise KeyError(f"bus {bus} is not monitored")
    return [(r.total_load_mw, getattr(r, field)) for r in result.records[bus]]
