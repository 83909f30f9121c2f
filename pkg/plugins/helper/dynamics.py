"""
dynamics.py: probability current between components.

Each edge of a CurrentGraph moves square modulus from its source component to
its target at a rate given by a FlowProfile. ``step`` integrates all edge
rates over one time step with classical four-stage Runge–Kutta and applies
the resulting transfers antisymmetrically: whatever leaves a source arrives
at the target, so the total weight only changes by rounding.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from plugins.config import Config
from plugins.helper.errors import NegativeWeight, UnknownComponent
from plugins.helper.state import (
    ComponentId, Phase, Status, SystemState, carry_consciousness, total_weight,
)


# ── Flow profiles ─────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Constant:
    """Fixed rate J, active for all t."""
    J: float

    def rate(self, t: float) -> float:
        return self.J

    def transferred(self, t0: float, t1: float) -> float:
        return self.J * (t1 - t0)

    def shifted(self, offset: float) -> "Constant":
        return self

    @property
    def end(self) -> float:
        return math.inf


@dataclass(frozen=True)
class Ramp:
    """Rate rising linearly from 0 at t_start to J_max at t_end, then held."""
    J_max: float
    t_start: float
    t_end: float

    def rate(self, t: float) -> float:
        if t <= self.t_start:
            return 0.0
        if t >= self.t_end:
            return self.J_max
        return self.J_max * (t - self.t_start) / (self.t_end - self.t_start)

    def _cumulative(self, t: float) -> float:
        if t <= self.t_start:
            return 0.0
        span = self.t_end - self.t_start
        if t <= self.t_end:
            return 0.5 * self.J_max * (t - self.t_start) ** 2 / span
        return 0.5 * self.J_max * span + self.J_max * (t - self.t_end)

    def transferred(self, t0: float, t1: float) -> float:
        return self._cumulative(t1) - self._cumulative(t0)

    def shifted(self, offset: float) -> "Ramp":
        return Ramp(self.J_max, self.t_start + offset, self.t_end + offset)

    @property
    def end(self) -> float:
        return math.inf


@dataclass(frozen=True)
class RaisedCosine:
    """
    Smooth pulse of current on [t_start, t_start + duration]:
    rate = total·(2/duration)·sin²(π(t − t_start)/duration), zero elsewhere.
    Integrates to ``total`` exactly; peak rate 2·total/duration at mid-pulse.
    """
    t_start: float
    duration: float
    total: float

    def rate(self, t: float) -> float:
        s = t - self.t_start
        if s <= 0.0 or s >= self.duration:
            return 0.0
        return self.total * 2.0 / self.duration * math.sin(math.pi * s / self.duration) ** 2

    def _cumulative(self, t: float) -> float:
        x = min(max(t - self.t_start, 0.0), self.duration) / self.duration
        return self.total * (x - math.sin(2.0 * math.pi * x) / (2.0 * math.pi))

    def transferred(self, t0: float, t1: float) -> float:
        return self._cumulative(t1) - self._cumulative(t0)

    def shifted(self, offset: float) -> "RaisedCosine":
        return RaisedCosine(self.t_start + offset, self.duration, self.total)

    @property
    def end(self) -> float:
        return self.t_start + self.duration


FlowProfile = Constant | Ramp | RaisedCosine


# ── Graph ─────────────────────────────────────────────────────────────────────

class EdgeKind(str, enum.Enum):
    CONTINUOUS = "continuous"
    BRANCHING = "branching"


@dataclass(frozen=True)
class CurrentEdge:
    source: ComponentId
    target: ComponentId
    profile: FlowProfile
    kind: EdgeKind = EdgeKind.CONTINUOUS

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError(f"edge {self.source} -> {self.target} loops onto itself")


@dataclass
class CurrentGraph:
    edges: list[CurrentEdge] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for edge in self.edges:
            pair = (edge.source, edge.target)
            if pair in seen:
                raise ValueError(f"duplicate edge {edge.source} -> {edge.target}")
            seen.add(pair)

    def edge(self, source: ComponentId, target: ComponentId) -> CurrentEdge | None:
        for e in self.edges:
            if e.source == source and e.target == target:
                return e
        return None

    def continuous_neighbors(self, cid: ComponentId):
        for e in self.edges:
            if e.kind is not EdgeKind.CONTINUOUS:
                continue
            if e.source == cid:
                yield e.target
            elif e.target == cid:
                yield e.source


# ── Rates ─────────────────────────────────────────────────────────────────────

def _on_cascade(edge: CurrentEdge, state: SystemState) -> bool:
    chain = state.cascade_chain
    return any(chain[i] == edge.source and chain[i + 1] == edge.target for i in range(len(chain) - 1))


def _gated(edge: CurrentEdge, state: SystemState) -> bool:
    if state.phase is Phase.COLLAPSED and not _on_cascade(edge, state):
        return True
    # a ready component passes no current onward
    return state.components[edge.source].status is Status.READY


def effective_current(edge: CurrentEdge, state: SystemState, t: float, dt: float | None = None) -> float:
    """
    Gated instantaneous rate of ``edge`` at ``t``. With ``dt`` the rate is
    also clamped so the source cannot be overdrawn within one step.
    """
    n = len(state.components)
    if not (0 <= edge.source < n and 0 <= edge.target < n):
        raise UnknownComponent(
            f"edge {edge.source} -> {edge.target} references a missing component", t=t
        )
    if _gated(edge, state):
        return 0.0
    rate = edge.profile.rate(t)
    if dt is not None:
        rate = min(rate, max(state.components[edge.source].weight, 0.0) / dt)
    return rate


@dataclass
class StepReport:
    transfers: np.ndarray                      # per-edge amount moved this step
    inbound_ready: dict[ComponentId, float]    # amount delivered into each Ready component
    clamped: int = 0
    drift: float = 0.0                         # change of total weight over the step


def _rates_at(graph: CurrentGraph, open_edges: np.ndarray, t: float) -> np.ndarray:
    return np.array([
        e.profile.rate(t) if open_edges[j] else 0.0 for j, e in enumerate(graph.edges)
    ], dtype=float)


def step_with_report(state: SystemState, graph: CurrentGraph, dt: float,
                     t_end: float | None = None) -> tuple[SystemState, StepReport]:
    """
    One RK4 step from ``state.time``. ``t_end`` pins the clock after the step
    (callers counting steps pass ``start + k*dt``); it defaults to ``t + dt``.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")

    new = state.copy()
    n = len(new.components)
    t = new.time
    for edge in graph.edges:
        if not (0 <= edge.source < n and 0 <= edge.target < n):
            raise UnknownComponent(
                f"edge {edge.source} -> {edge.target} references a missing component", t=t
            )

    w = np.array(new.weights(), dtype=float)
    before = math.fsum(w)
    transfers = np.zeros(len(graph.edges))
    report = StepReport(transfers=transfers, inbound_ready={})

    # Gating is fixed for the whole step and overdraw is settled by truncation
    # below, so stage rates depend on time only: k2 == k3.
    open_edges = np.array([not _gated(e, new) for e in graph.edges], dtype=bool)
    if open_edges.any():
        k1 = _rates_at(graph, open_edges, t)
        k2 = _rates_at(graph, open_edges, t + dt / 2)
        k4 = _rates_at(graph, open_edges, t + dt)
        amounts = dt / 6.0 * (k1 + 4.0 * k2 + k4)

        # antisymmetric application, in edge-list order
        for j, edge in enumerate(graph.edges):
            amt = float(amounts[j])
            if amt <= 0.0:
                continue
            available = float(w[edge.source])
            if available <= 0.0:
                continue    # an empty source passes nothing
            if amt > available:
                amt = max(available, 0.0)
                report.clamped += 1
            w[edge.source] -= amt
            w[edge.target] += amt
            transfers[j] = amt

    for j, edge in enumerate(graph.edges):
        if transfers[j] > 0.0 and new.components[edge.target].status is Status.READY:
            report.inbound_ready[edge.target] = report.inbound_ready.get(edge.target, 0.0) + float(transfers[j])

    for comp, weight in zip(new.components, w):
        if weight < -Config.NEGATIVE_WEIGHT_TOL:
            raise NegativeWeight(
                f"component {comp.id} driven to {weight:.3e}; dt={dt} is too large for its profile",
                t=t,
            )
        comp.weight = float(weight)

    report.drift = math.fsum(w) - before
    if report.clamped:
        Config.LOGGER.debug(f"step at t={t:.6g}: {report.clamped} transfer(s) truncated to source weight")

    new.time = t + dt if t_end is None else t_end
    carry_consciousness(new, graph.continuous_neighbors)
    return new, report


def step(state: SystemState, graph: CurrentGraph, dt: float, t_end: float | None = None) -> SystemState:
    """Advance ``state`` by ``dt`` along ``graph``; returns a new state."""
    return step_with_report(state, graph, dt, t_end)[0]


def check_conservation(state: SystemState, tol: float) -> bool:
    return abs(total_weight(state) - state.total_weight_reference) <= tol
