"""Per-unit network data model, case files and feeder attachment.

Networks are immutable. ``load_case`` parses the JSON case format, and
``attach_feeders`` builds the integrated transmission-distribution system by
replacing a transmission bus load with identical parallel radial feeders.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

KINDS = ("slack", "pv", "pq")


class CaseFormatError(ValueError):
    """Malformed case or feeder document."""


class NetworkValidationError(ValueError):
    """A structurally invalid network (duplicate ids, dangling branches, ...)."""


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str
    v_setpoint: float | None = None
    p_load: float = 0.0
    q_load: float = 0.0
    name: str = ""

    @property
    def load(self) -> complex:
        return complex(self.p_load, self.q_load)


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float
    x: float
    b: float = 0.0
    tap: float = 1.0

    @property
    def z(self) -> complex:
        return complex(self.r, self.x)


@dataclass(frozen=True)
class Generator:
    bus: int
    p: float
    v_setpoint: float = 1.0


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    generators: tuple[Generator, ...] = ()
    mva_base: float = 100.0
    name: str = ""
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "generators", tuple(self.generators))
        validate(self)
        object.__setattr__(self, "_index", {b.id: i for i, b in enumerate(self.buses)})

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    def index(self, bus_id: int) -> int:
        """Position of ``bus_id`` in the bus ordering used by all arrays."""
        try:
            return self._index[bus_id]
        except KeyError:
            raise KeyError(f"unknown bus id {bus_id}") from None

    def bus(self, bus_id: int) -> Bus:
        return self.buses[self.index(bus_id)]

    def bus_by_name(self, name: str) -> Bus:
        for b in self.buses:
            if b.name == name:
                return b
        raise KeyError(f"no bus named {name!r}")

    @property
    def slack(self) -> int:
        return next(i for i, b in enumerate(self.buses) if b.kind == "slack")

    @property
    def pv(self) -> np.ndarray:
        return np.array([i for i, b in enumerate(self.buses) if b.kind == "pv"], dtype=int)

    @property
    def pq(self) -> np.ndarray:
        return np.array([i for i, b in enumerate(self.buses) if b.kind == "pq"], dtype=int)

    @property
    def loads(self) -> np.ndarray:
        """Complex per-unit load at each bus."""
        return np.array([b.load for b in self.buses], dtype=complex)

    @property
    def gen_p(self) -> np.ndarray:
        """Scheduled active generation at each bus (summed over machines)."""
        p = np.zeros(self.n_bus)
        for g in self.generators:
            p[self.index(g.bus)] += g.p
        return p

    @property
    def v_setpoints(self) -> np.ndarray:
        return np.array([b.v_setpoint if b.v_setpoint is not None else 1.0 for b in self.buses])

    @property
    def total_load(self) -> complex:
        return complex(self.loads.sum())


def validate(net: Network) -> None:
    ids = [b.id for b in net.buses]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise NetworkValidationError(f"duplicate bus ids: {dup}")
    if not ids:
        raise NetworkValidationError("network has no buses")
    n_slack = sum(b.kind == "slack" for b in net.buses)
    if n_slack != 1:
        raise NetworkValidationError(f"exactly one slack bus required, found {n_slack}")
    for b in net.buses:
        if b.kind not in KINDS:
            raise NetworkValidationError(f"bus {b.id}: unknown kind {b.kind!r}")
        if b.kind == "pq" and b.v_setpoint is not None:
            raise NetworkValidationError(f"bus {b.id}: pq bus must not carry a v_setpoint")
        if b.kind != "pq" and not (b.v_setpoint is not None and b.v_setpoint > 0):
            raise NetworkValidationError(f"bus {b.id}: {b.kind} bus needs v_setpoint > 0")
    known = set(ids)
    for k, br in enumerate(net.branches):
        if br.from_bus not in known or br.to_bus not in known:
            raise NetworkValidationError(
                f"branch {k} ({br.from_bus}-{br.to_bus}) references an unknown bus")
        if br.from_bus == br.to_bus:
            raise NetworkValidationError(f"branch {k} is a self loop at bus {br.from_bus}")
        if br.r < 0:
            raise NetworkValidationError(f"branch {k}: negative resistance")
        if br.r == 0 and br.x == 0:
            raise NetworkValidationError(f"branch {k}: zero impedance")
        if br.tap != 1.0:
            raise NetworkValidationError(f"branch {k}: off-nominal taps are not supported")
    kind = {b.id: b for b in net.buses}
    for g in net.generators:
        if g.bus not in known:
            raise NetworkValidationError(f"generator at unknown bus {g.bus}")
        bus = kind[g.bus]
        if bus.kind == "pq":
            raise NetworkValidationError(f"generator at pq bus {g.bus}")
        if g.p < 0:
            raise NetworkValidationError(f"generator at bus {g.bus}: negative output")
        if abs(g.v_setpoint - bus.v_setpoint) > 1e-12:
            raise NetworkValidationError(
                f"generator at bus {g.bus}: v_setpoint {g.v_setpoint} disagrees with bus")
    _check_connected(ids, net.branches)


def _check_connected(ids: list[int], branches: Iterable[Branch]) -> None:
    adj: dict[int, set[int]] = {i: set() for i in ids}
    for br in branches:
        adj[br.from_bus].add(br.to_bus)
        adj[br.to_bus].add(br.from_bus)
    seen = {ids[0]}
    stack = [ids[0]]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    if len(seen) != len(ids):
        raise NetworkValidationError(
            f"network is not connected; isolated buses: {sorted(set(ids) - seen)}")


# ---------------------------------------------------------------------------
# case files

def _field(obj: dict, key: str, where: str, kind=float, optional=False):
    if key not in obj:
        if optional:
            return None
        raise CaseFormatError(f"{where}: missing field {key!r}")
    val = obj[key]
    if val is None and optional:
        return None
    try:
        if kind is int:
            if isinstance(val, bool) or float(val) != int(val):
                raise ValueError
            return int(val)
        if kind is float:
            if isinstance(val, bool):
                raise ValueError
            return float(val)
        return kind(val)
    except (TypeError, ValueError):
        raise CaseFormatError(f"{where}.{key}: expected {kind.__name__}, got {val!r}") from None


def _parse_json(source: str) -> dict:
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise CaseFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise CaseFormatError("top level must be an object")
    return doc


def load_case(source: str) -> Network:
    """Parse case-file content (JSON) into a validated :class:`Network`."""
    doc = _parse_json(source)
    for key in ("buses", "branches"):
        if not isinstance(doc.get(key), list):
            raise CaseFormatError(f"missing or non-list top-level field {key!r}")
    mva = _field(doc, "mva_base", "case", optional=True)
    buses = []
    for k, b in enumerate(doc["buses"]):
        w = f"buses[{k}]"
        kind = _field(b, "kind", w, str)
        if kind not in KINDS:
            raise CaseFormatError(f"{w}.kind: expected one of {KINDS}, got {kind!r}")
        buses.append(Bus(
            id=_field(b, "id", w, int),
            kind=kind,
            v_setpoint=_field(b, "v_setpoint", w, optional=True),
            p_load=_field(b, "p_load", w, optional=True) or 0.0,
            q_load=_field(b, "q_load", w, optional=True) or 0.0,
            name=str(b.get("name", _field(b, "id", w, int))),
        ))
    branches = []
    for k, br in enumerate(doc["branches"]):
        w = f"branches[{k}]"
        branches.append(Branch(
            from_bus=_field(br, "from", w, int),
            to_bus=_field(br, "to", w, int),
            r=_field(br, "r", w),
            x=_field(br, "x", w),
            b=_field(br, "b", w, optional=True) or 0.0,
        ))
    gens = []
    for k, g in enumerate(doc.get("generators", [])):
        w = f"generators[{k}]"
        gens.append(Generator(
            bus=_field(g, "bus", w, int),
            p=_field(g, "p", w),
            v_setpoint=_field(g, "v_setpoint", w, optional=True) or 1.0,
        ))
    return Network(buses, branches, gens, mva_base=100.0 if mva is None else mva,
                   name=str(doc.get("name", "")))


def serialize(net: Network) -> str:
    """Reference JSON encoding; ``load_case(serialize(net)) == net``."""
    doc = {
        "name": net.name,
        "mva_base": net.mva_base,
        "buses": [
            {"id": b.id, "kind": b.kind, "v_setpoint": b.v_setpoint,
             "p_load": b.p_load, "q_load": b.q_load, "name": b.name}
            for b in net.buses
        ],
        "branches": [
            {"from": br.from_bus, "to": br.to_bus, "r": br.r, "x": br.x, "b": br.b}
            for br in net.branches
        ],
        "generators": [
            {"bus": g.bus, "p": g.p, "v_setpoint": g.v_setpoint} for g in net.generators
        ],
    }
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# feeders

@dataclass(frozen=True)
class FeederSpec:
    """A radial D0-D1-{D2, D3} feeder replicated in parallel at ``attach_bus``."""

    attach_bus: int
    z_d0_d1: complex
    z_d1_d2: complex
    z_d1_d3: complex
    load_d2: complex
    load_d3: complex
    replicas: int = 1
    name: str = ""


def _complex(doc: dict, key: str) -> complex:
    val = doc.get(key)
    if isinstance(val, (list, tuple)) and len(val) == 2:
        try:
            return complex(float(val[0]), float(val[1]))
        except (TypeError, ValueError):
            pass
    raise CaseFormatError(f"feeder.{key}: expected [re, im] pair, got {val!r}")


def load_feeder(source: str) -> FeederSpec:
    doc = _parse_json(source)
    return FeederSpec(
        attach_bus=_field(doc, "attach_bus", "feeder", int),
        z_d0_d1=_complex(doc, "z_d0_d1"),
        z_d1_d2=_complex(doc, "z_d1_d2"),
        z_d1_d3=_complex(doc, "z_d1_d3"),
        load_d2=_complex(doc, "load_d2"),
        load_d3=_complex(doc, "load_d3"),
        replicas=_field(doc, "replicas", "feeder", int, optional=True) or 1,
        name=str(doc.get("name", "")),
    )


def feeder_bus_name(level: int, replica: int) -> str:
    return f"D{level}-feeder{replica}"


def attach_feeders(net: Network, spec: FeederSpec) -> Network:
    """Replace the load at ``spec.attach_bus`` by ``spec.replicas`` parallel feeders.

    Each replica n adds buses ``D1-feeder{n}``, ``D2-feeder{n}``, ``D3-feeder{n}``
    (ids allocated after the current maximum, in that order) and branches
    D0-D1, D1-D2, D1-D3, where D0 is the attach bus itself. Distribution
    branches carry no line charging.
    """
    if spec.replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {spec.replicas}")
    try:
        host = net.bus(spec.attach_bus)
    except KeyError:
        raise ValueError(f"unknown attach bus {spec.attach_bus}") from None

    added = spec.replicas * (spec.load_d2 + spec.load_d3)
    if abs(added - host.load) > 1e-9:
        warnings.warn(
            f"feeder load {added} differs from replaced load {host.load} at bus {host.id}",
            stacklevel=2)

    buses = [replace(b, p_load=0.0, q_load=0.0) if b.id == host.id else b for b in net.buses]
    branches = list(net.branches)
    next_id = max(b.id for b in net.buses) + 1
    for n in range(1, spec.replicas + 1):
        d1, d2, d3 = next_id, next_id + 1, next_id + 2
        next_id += 3
        buses += [
            Bus(d1, "pq", name=feeder_bus_name(1, n)),
            Bus(d2, "pq", p_load=spec.load_d2.real, q_load=spec.load_d2.imag,
                name=feeder_bus_name(2, n)),
            Bus(d3, "pq", p_load=spec.load_d3.real, q_load=spec.load_d3.imag,
                name=feeder_bus_name(3, n)),
        ]
        branches += [
            Branch(host.id, d1, spec.z_d0_d1.real, spec.z_d0_d1.imag),
            Branch(d1, d2, spec.z_d1_d2.real, spec.z_d1_d2.imag),
            Branch(d1, d3, spec.z_d1_d3.real, spec.z_d1_d3.imag),
        ]
    name = f"{net.name}+{spec.name or 'feeder'}x{spec.replicas}"
    return Network(buses, branches, net.generators, net.mva_base, name=name)


def ybus(net: Network) -> np.ndarray:
    """Dense nodal admittance matrix in ``net.buses`` order."""
    n = net.n_bus
    Y = np.zeros((n, n), dtype=complex)
    for br in net.branches:
        i, j = net.index(br.from_bus), net.index(br.to_bus)
        y = 1.0 / br.z
        ysh = 0.5j * br.b
        Y[i, i] += y + ysh
        Y[j, j] += y + ysh
        Y[i, j] -= y
        Y[j, i] -= y
    return Y


# ---------------------------------------------------------------------------
# bundled data

def data_dir() -> Path:
    """Bundled data location, overridable with ``TDDI_DATA_DIR``."""
    env = os.environ.get("TDDI_DATA_DIR")
    if env:
        return Path(env)
    return Path(str(resources.files("tddi") / "data"))


def _resolve(name_or_path: str | os.PathLike, suffixes: tuple[str, ...]) -> Path:
    p = Path(name_or_path)
    if p.is_file():
        return p
    base = data_dir()
    for suffix in ("",) + suffixes:
        cand = base / f"{name_or_path}{suffix}"
        if cand.is_file():
            return cand
    raise FileNotFoundError(f"no case/feeder file or bundled entry named {str(name_or_path)!r}")


def read_case(name_or_path: str | os.PathLike) -> Network:
    """Load a case by path or bundled name (e.g. ``"case9"``)."""
    return load_case(_resolve(name_or_path, (".json",)).read_text())


def read_feeder(name_or_path: str | os.PathLike) -> FeederSpec:
    """Load a feeder spec by path or bundled name (``"fc1"``, ``"fc2"``)."""
    return load_feeder(_resolve(name_or_path, (".feeder", ".json")).read_text())
