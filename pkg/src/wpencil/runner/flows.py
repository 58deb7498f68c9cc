"""Fixed-step RK4 integration of Hamiltonian flows on the invariants."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..brackets import BRACKET1, BracketId, hamiltonian_field
from ..errors import BranchUnavailable, SingularSystem
from ..functionals import (
    Functional,
    boussinesq_hamiltonian,
    hierarchy_hamiltonian,
    polynomial_functional,
)
from ..periodic import co_prime
from ..state import GL, SL, InvariantState

F_S = "F_s"
BOUSSINESQ = "boussinesq"
CUSTOM = "custom"


@dataclass(frozen=True)
class HamiltonianSpec:
    """Serializable description of a functional.

    ``kind='F_s'`` with ``s``; ``kind='boussinesq'``; or ``kind='custom'`` with
    ``monomials`` as ``[[coef, [[r, offset], ...]], ...]``.
    """

    kind: str = F_S
    s: int | None = 1
    monomials: tuple = ()

    def __post_init__(self):
        if self.kind not in (F_S, BOUSSINESQ, CUSTOM):
            raise ValueError(f"unknown hamiltonian kind {self.kind!r}")
        if self.kind == F_S and (self.s is None or int(self.s) < 1):
            raise ValueError("F_s needs a positive integer s")

    @property
    def uses_roots(self) -> bool:
        return self.kind == F_S

    @property
    def name(self) -> str:
        if self.kind == F_S:
            return f"F_{self.s}"
        return "H" if self.kind == BOUSSINESQ else "custom"

    def build(self, margin: int = 0) -> Functional:
        if self.kind == F_S:
            return hierarchy_hamiltonian(int(self.s), margin=margin)
        if self.kind == BOUSSINESQ:
            return boussinesq_hamiltonian()
        mons = [(float(c), [(int(r), int(o)) for r, o in factors]) for c, factors in self.monomials]
        return polynomial_functional(mons, "custom")

    def to_json(self) -> dict:
        if self.kind == F_S:
            return {"kind": F_S, "s": int(self.s)}
        if self.kind == BOUSSINESQ:
            return {"kind": BOUSSINESQ}
        return {"kind": CUSTOM, "monomials": [[c, [list(f) for f in fs]] for c, fs in self.monomials]}

    @classmethod
    def from_json(cls, obj) -> "HamiltonianSpec":
        if isinstance(obj, str):
            return cls.parse(obj)
        kind = obj.get("kind", F_S)
        if kind == CUSTOM:
            mons = tuple((float(c), tuple(tuple(int(v) for v in f) for f in fs)) for c, fs in obj["monomials"])
            return cls(CUSTOM, None, mons)
        return cls(kind, int(obj["s"]) if kind == F_S else None)

    @classmethod
    def parse(cls, text: str) -> "HamiltonianSpec":
        """``'F_2'``, ``'F2'`` or ``'boussinesq'``."""
        t = text.strip()
        if t.lower() in ("boussinesq", "h"):
            return cls(BOUSSINESQ, None)
        if t.startswith("F"):
            return cls(F_S, int(t.lstrip("F_")))
        raise ValueError(f"cannot parse hamiltonian {text!r}")


@dataclass(frozen=True)
class FlowConfig:
    m: int
    N: int
    normalization: str = SL
    initial: np.ndarray | None = None
    seed: int = 0
    low: float = -1.0
    high: float = 1.0
    a1_range: tuple[float, float] | None = None
    hamiltonian: HamiltonianSpec = field(default_factory=HamiltonianSpec)
    bracket: BracketId = BRACKET1
    dt: float = 1e-3
    steps: int = 1000
    monitor: tuple[HamiltonianSpec, ...] = ()
    depth_margin: int = 0

    def __post_init__(self):
        if self.steps < 0 or not math.isfinite(self.dt * self.steps):
            raise ValueError("dt * steps must be finite and steps non-negative")
        if self.depth_margin < 0:
            raise ValueError("depth margin must be non-negative")
        specs = (self.hamiltonian, *self.monitor)
        if any(s.uses_roots for s in specs) and not co_prime(self.N, self.m):
            raise SingularSystem(f"root-based functionals need gcd(N, m) = 1, got N={self.N}, m={self.m}")

    def initial_state(self) -> InvariantState:
        if self.initial is not None:
            return InvariantState(self.m, np.asarray(self.initial, dtype=float), self.normalization)
        rng = np.random.default_rng(self.seed)
        return InvariantState.random(self.m, self.N, rng, self.normalization, self.low, self.high,
                                     a1_range=self.a1_range)

    def to_json(self) -> dict:
        out = {
            "m": self.m, "N": self.N, "normalization": self.normalization, "seed": self.seed,
            "low": self.low, "high": self.high,
            "hamiltonian": self.hamiltonian.to_json(), "bracket": str(self.bracket),
            "dt": self.dt, "steps": self.steps,
            "monitor": [s.to_json() for s in self.monitor], "depth_margin": self.depth_margin,
        }
        if self.a1_range is not None:
            out["a1_range"] = list(self.a1_range)
        if self.initial is not None:
            out["initial"] = np.asarray(self.initial).tolist()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "FlowConfig":
        initial = obj.get("initial")
        if isinstance(initial, dict):
            # {"a": {"1": [...], "2": [...]}} as written by InvariantState.to_json
            state = InvariantState.from_json({"m": obj["m"], "normalization": obj.get("normalization", SL), **initial})
            initial = state.coords
        return cls(
            m=int(obj["m"]), N=int(obj["N"]),
            normalization=obj.get("normalization", SL),
            initial=None if initial is None else np.asarray(initial, dtype=float),
            seed=int(obj.get("seed", 0)),
            low=float(obj.get("low", -1.0)), high=float(obj.get("high", 1.0)),
            a1_range=tuple(obj["a1_range"]) if obj.get("a1_range") is not None else None,
            hamiltonian=HamiltonianSpec.from_json(obj.get("hamiltonian", {"kind": F_S, "s": 1})),
            bracket=BracketId.parse(str(obj.get("bracket", "1"))),
            dt=float(obj.get("dt", 1e-3)), steps=int(obj.get("steps", 1000)),
            monitor=tuple(HamiltonianSpec.from_json(s) for s in obj.get("monitor", [])),
            depth_margin=int(obj.get("depth_margin", 0)),
        )


@dataclass(frozen=True)
class Trajectory:
    m: int
    normalization: str
    times: np.ndarray
    coords: np.ndarray  # (steps + 1, rows, N)

    def state(self, k: int) -> InvariantState:
        return InvariantState(self.m, self.coords[k], self.normalization)

    def states(self):
        return [self.state(k) for k in range(len(self.times))]

    @property
    def final(self) -> InvariantState:
        return self.state(len(self.times) - 1)

    def header(self) -> list[str]:
        start = 0 if self.normalization == GL else 1
        N = self.coords.shape[2]
        return ["t"] + [f"a{r}_{n}" for r in range(start, self.m) for n in range(N)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for t, c in zip(self.times, self.coords):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in c.ravel()])
        return buf.getvalue()


def _real_field(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    if np.iscomplexobj(v):
        scale = max(1.0, float(np.abs(v).max()))
        if np.abs(v.imag).max() > 1e-8 * scale:
            raise BranchUnavailable("the field is not real; even m has no real root branch")
        v = v.real
    return v


def rk4_step(F: Functional, state: InvariantState, which: BracketId, dt: float) -> InvariantState:
    x = state.coords

    def rhs(y):
        return _real_field(hamiltonian_field(F, state.with_coords(y), which))

    k1 = rhs(x)
    k2 = rhs(x + 0.5 * dt * k1)
    k3 = rhs(x + 0.5 * dt * k2)
    k4 = rhs(x + dt * k3)
    return state.with_coords(x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))


def integrate_flow(cfg: FlowConfig, state: InvariantState | None = None) -> Trajectory:
    """Classical RK4 on ``da/dt = hamiltonian_field(F, a, bracket)``.

    Depth is certified at every field evaluation: root-based gradients are
    computed with explicit floors and refuse to read uncertified orders.
    """
    F = cfg.hamiltonian.build(cfg.depth_margin)
    state = cfg.initial_state() if state is None else state
    coords = np.empty((cfg.steps + 1, *state.coords.shape))
    coords[0] = state.coords
    for k in range(cfg.steps):
        state = rk4_step(F, state, cfg.bracket, cfg.dt)
        coords[k + 1] = state.coords
    times = cfg.dt * np.arange(cfg.steps + 1)
    return Trajectory(cfg.m, state.normalization, times, coords)


def conservation_report(traj: Trajectory, monitors: Sequence[tuple[str, Functional]]) -> dict[str, dict]:
    """Max and final absolute drift of each monitored functional."""
    states = traj.states()
    out = {}
    for name, F in monitors:
        vals = np.array([np.real_if_close(F(s)) for s in states])
        drift = np.abs(vals - vals[0])
        out[name] = {"initial": float(np.real(vals[0])), "max_drift": float(drift.max()),
                     "final_drift": float(drift[-1])}
    return out


def monitors_for(cfg: FlowConfig) -> list[tuple[str, Functional]]:
    return [(s.name, s.build(cfg.depth_margin)) for s in cfg.monitor]


def convergence_order(cfg: FlowConfig, monitor: Functional, dts: Sequence[float] = (1e-2, 5e-3, 2.5e-3),
                      total_time: float | None = None) -> tuple[float, list[float]]:
    """Slope of ``log(final drift)`` against ``log(dt)`` at fixed total time."""
    T = cfg.dt * cfg.steps if total_time is None else total_time
    drifts = []
    for dt in dts:
        steps = int(round(T / dt))
        traj = integrate_flow(replace(cfg, dt=dt, steps=steps))
        vals = [monitor(traj.state(0)), monitor(traj.final)]
        drifts.append(float(abs(np.real(vals[1] - vals[0]))))
    slope = np.polyfit(np.log(dts), np.log(drifts), 1)[0]
    return float(slope), drifts
