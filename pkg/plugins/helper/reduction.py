"""
reduction.py: the rule engine.

Rule 2: a newly emerging, non-continuous brain state appears as a *ready*
state. Rule 4 (gating a ready component's outbound current) lives in
``dynamics``. This module classifies emergence, drives the stochastic trigger
from the current flowing into ready components, collapses the state on a hit,
and runs the classical cascade that follows it.
"""

import enum
import math
from dataclasses import dataclass, field

from plugins.config import Config
from plugins.helper.dynamics import CurrentEdge, CurrentGraph, EdgeKind, FlowProfile, step
from plugins.helper.errors import InvariantViolation, NotCollapsed, TargetNotReady
from plugins.helper.state import (
    CascadeStep, ComponentId, HitEvent, Phase, Status, SystemState, conscious_component,
)
from utils.shared import make_rng


@dataclass(frozen=True)
class EmergenceContext:
    new_component: ComponentId
    creating_edge_kind: EdgeKind
    has_brain_pulse: bool


def classify_emergence(ctx: EmergenceContext) -> Status:
    if ctx.creating_edge_kind is EdgeKind.BRANCHING and ctx.has_brain_pulse:
        return Status.READY
    return Status.PLAIN


# ── Stochastic trigger ────────────────────────────────────────────────────────

class TriggerLaw(str, enum.Enum):
    CURRENT = "current"   # hit density on c is the current into c
    HAZARD = "hazard"     # hit hazard is the inbound current over the unreduced weight


def draw_threshold(seed: int) -> float:
    """One uniform draw in the open interval (0, 1) from the pinned generator."""
    rng = make_rng(seed)
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u


@dataclass
class StochasticTrigger:
    rng_seed: int
    threshold_u: float
    law: TriggerLaw = TriggerLaw.CURRENT
    cumulative_transfer: dict[ComponentId, float] = field(default_factory=dict)
    level: float = 0.0      # position on the [0, 1] probability axis
    hazard: float = 0.0     # integrated hazard (HAZARD law only)

    @classmethod
    def from_seed(cls, seed: int, law: TriggerLaw | str | None = None) -> "StochasticTrigger":
        law = TriggerLaw(law or Config.TRIGGER_LAW)
        return cls(rng_seed=seed, threshold_u=draw_threshold(seed), law=law)

    @classmethod
    def silent(cls, law: TriggerLaw | str | None = None) -> "StochasticTrigger":
        """A trigger that never fires; used to record the seed-independent schedule."""
        return cls(rng_seed=-1, threshold_u=math.inf, law=TriggerLaw(law or Config.TRIGGER_LAW))

    @property
    def total_transfer(self) -> float:
        return sum(self.cumulative_transfer[c] for c in sorted(self.cumulative_transfer))


def axis_increments(trigger: StochasticTrigger, inbound: dict[ComponentId, float], dt: float) -> list[tuple[ComponentId, float]]:
    """
    Advance the trigger by one step of ``inbound`` rates and return the step's
    per-component increments on the probability axis, in ComponentId order.
    """
    amounts = [(c, inbound[c] * dt) for c in sorted(inbound) if inbound[c] > 0.0]
    for c, amt in amounts:
        trigger.cumulative_transfer[c] = trigger.cumulative_transfer.get(c, 0.0) + amt
    if not amounts:
        return []

    if trigger.law is TriggerLaw.CURRENT:
        return amounts

    step_total = sum(amt for _, amt in amounts)
    unreduced = 1.0 - (trigger.total_transfer - step_total)
    if unreduced <= 0.0:
        trigger.hazard = math.inf
    else:
        trigger.hazard += step_total / unreduced
    rise = max(-math.expm1(-trigger.hazard) - trigger.level, 0.0)
    return [(c, rise * amt / step_total) for c, amt in amounts]


def locate_hit(level: float, increments: list[tuple[ComponentId, float]], u: float) -> tuple[ComponentId | None, float]:
    """
    Walk the step's sub-intervals [level, level + d_c) in id order. Returns the
    component whose sub-interval holds ``u`` (or None) and the new level.
    """
    target = None
    for c, d in increments:
        level += d
        if target is None and u < level:
            target = c
    return target, level


def accumulate_and_test(trigger: StochasticTrigger, inbound: dict[ComponentId, float],
                        dt: float, t: float) -> HitEvent | None:
    increments = axis_increments(trigger, inbound, dt)
    target, trigger.level = locate_hit(trigger.level, increments, trigger.threshold_u)
    if target is None:
        return None
    return HitEvent(t + dt, target)


# ── Collapse ──────────────────────────────────────────────────────────────────

def collapse(state: SystemState, hit: HitEvent) -> SystemState:
    if state.phase is not Phase.PRE_COLLAPSE:
        raise InvariantViolation("collapse on a state that has already collapsed", t=hit.t)
    target = state.component(hit.target)
    if target.status is not Status.READY:
        raise TargetNotReady(
            f"hit on component {hit.target} whose status is {target.status.value}", t=hit.t
        )

    new = state.copy()
    new.time = max(new.time, hit.t)
    new.log.append(hit)
    previous = conscious_component(new)
    if previous is not None:
        new.set_status(previous, Status.PLAIN)
    for comp in new.components:
        comp.weight = 1.0 if comp.id == hit.target else 0.0
    new.set_status(hit.target, Status.CONSCIOUS)
    new.phase = Phase.COLLAPSED
    new.collapsed_on = hit.target
    Config.LOGGER.debug(f"collapse at t={hit.t:.6g} onto component {hit.target}")
    return new


# ── Cascade ───────────────────────────────────────────────────────────────────

def cascade_graph(chain: list[ComponentId], profiles: list[FlowProfile], t_sc: float) -> CurrentGraph:
    """Continuous edges along ``chain``, their profiles measured from the hit time."""
    if len(profiles) != max(len(chain) - 1, 0):
        raise ValueError(f"cascade of {len(chain)} components needs {len(chain) - 1} profiles, got {len(profiles)}")
    return CurrentGraph([
        CurrentEdge(a, b, p.shifted(t_sc), EdgeKind.CONTINUOUS)
        for a, b, p in zip(chain, chain[1:], profiles)
    ])


def iter_cascade(state: SystemState, chain: list[ComponentId], profiles: list[FlowProfile],
                 dt: float, until: float | None = None):
    """
    Yield the post-hit states step by step. Stops when the last profile has
    finished, or at ``until`` when given (which may run past the cascade).
    """
    if state.phase is not Phase.COLLAPSED or not chain or state.collapsed_on != chain[0]:
        raise NotCollapsed(
            f"cascade from {chain[0] if chain else None} needs a state collapsed onto it", t=state.time
        )
    if len(chain) == 1:
        return

    t_sc = state.log.hit.t if state.log.hit else state.time
    graph = cascade_graph(chain, profiles, t_sc)
    end = until if until is not None else max(e.profile.end for e in graph.edges)
    if math.isinf(end):
        raise ValueError("cascade profiles never finish; pass ``until``")

    current = state.copy()
    current.cascade_chain = tuple(chain)
    position = chain.index(conscious_component(current))
    start, k = current.time, 0
    while current.time < end - dt / 2:
        k += 1
        current = step(current, graph, dt, t_end=start + k * dt)
        holder = conscious_component(current)
        while holder in chain and chain.index(holder) > position:
            current.log.append(CascadeStep(current.time, chain[position], chain[position + 1]))
            position += 1
        yield current
    Config.LOGGER.debug(f"cascade {chain} finished at t={current.time:.6g} on component {chain[position]}")


def cascade(state: SystemState, chain: list[ComponentId], profiles: list[FlowProfile],
            dt: float | None = None, until: float | None = None) -> list[SystemState]:
    """The post-hit classical progression along ``chain``; returns the whole trajectory."""
    trajectory = [state]
    trajectory.extend(iter_cascade(state, chain, profiles, dt or Config.DT, until))
    return trajectory
