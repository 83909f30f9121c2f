"""
state.py: the superposition model.

A run's total state is a list of components, each carrying a square-modulus
weight, a detector configuration, a brain pulse label and a status. Everything
else in the package reads and writes these types.
"""

import enum
import math
from dataclasses import dataclass, field, replace

from plugins.config import Config
from plugins.helper.errors import InvariantViolation, MultipleConscious, UnknownComponent

ComponentId = int


class Status(str, enum.Enum):
    PLAIN = "plain"
    READY = "ready"
    CONSCIOUS = "conscious"


class Phase(str, enum.Enum):
    PRE_COLLAPSE = "pre_collapse"
    COLLAPSED = "collapsed"


@dataclass
class Component:
    id: ComponentId
    weight: float
    detector_config: tuple[str, ...] = ()
    pulse_label: str | None = None
    status: Status = Status.PLAIN

    @property
    def has_brain_pulse(self) -> bool:
        return self.pulse_label is not None


# ── Events ────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class HitEvent:
    t: float
    target: ComponentId
    kind = "hit"


@dataclass(frozen=True)
class StatusChange:
    t: float
    component: ComponentId
    old: Status
    new: Status
    kind = "status_change"


@dataclass(frozen=True)
class CascadeStep:
    t: float
    source: ComponentId
    target: ComponentId
    kind = "cascade_step"


@dataclass(frozen=True)
class PulseRelabel:
    t: float
    component: ComponentId
    old: str | None
    new: str | None
    kind = "relabel"


Event = HitEvent | StatusChange | CascadeStep | PulseRelabel


class EventLog:
    """Append-only, time-ordered, at most one hit."""

    def __init__(self, events: list[Event] | None = None):
        self._events: list[Event] = []
        for ev in events or []:
            self.append(ev)

    def append(self, event: Event) -> None:
        if self._events and event.t < self._events[-1].t:
            raise InvariantViolation(
                f"event log out of order: {event.kind} at {event.t} after {self._events[-1].t}",
                t=event.t,
            )
        if isinstance(event, HitEvent) and self.hit is not None:
            raise InvariantViolation("second hit in one run", t=event.t)
        self._events.append(event)

    @property
    def hit(self) -> HitEvent | None:
        for ev in self._events:
            if isinstance(ev, HitEvent):
                return ev
        return None

    def of_kind(self, kind: type) -> list:
        return [ev for ev in self._events if isinstance(ev, kind)]

    def copy(self) -> "EventLog":
        log = EventLog()
        log._events = list(self._events)
        return log

    def __iter__(self):
        return iter(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def __eq__(self, other) -> bool:
        return isinstance(other, EventLog) and self._events == other._events


# ── System state ──────────────────────────────────────────────────────────────

@dataclass
class SystemState:
    components: list[Component]
    time: float = 0.0
    phase: Phase = Phase.PRE_COLLAPSE
    collapsed_on: ComponentId | None = None
    cascade_chain: tuple[ComponentId, ...] = ()
    log: EventLog = field(default_factory=EventLog)
    total_weight_reference: float = 1.0

    def component(self, cid: ComponentId) -> Component:
        if 0 <= cid < len(self.components) and self.components[cid].id == cid:
            return self.components[cid]
        for comp in self.components:
            if comp.id == cid:
                return comp
        raise UnknownComponent(f"no component with id {cid}", t=self.time)

    def weights(self) -> list[float]:
        return [c.weight for c in self.components]

    def statuses(self) -> list[Status]:
        return [c.status for c in self.components]

    def set_status(self, cid: ComponentId, new: Status) -> None:
        comp = self.component(cid)
        if comp.status is new:
            return
        self.log.append(StatusChange(self.time, cid, comp.status, new))
        comp.status = new

    def copy(self) -> "SystemState":
        return replace(
            self,
            components=[replace(c) for c in self.components],
            log=self.log.copy(),
        )


def total_weight(state: SystemState) -> float:
    """Sum of all component weights (exactly rounded)."""
    return math.fsum(c.weight for c in state.components)


def conscious_component(state: SystemState) -> ComponentId | None:
    conscious = [c.id for c in state.components if c.status is Status.CONSCIOUS]
    if len(conscious) > 1:
        raise MultipleConscious(
            f"components {conscious} are all conscious", t=state.time
        )
    return conscious[0] if conscious else None


def carry_consciousness(state: SystemState, neighbors) -> ComponentId | None:
    """
    Hand Conscious status to the heaviest member of the conscious component's
    continuous group. ``neighbors(cid)`` yields ids joined to ``cid`` by a
    Continuous edge. Ready components never join the group: they only become
    conscious through a hit.
    """
    current = conscious_component(state)
    if current is None:
        return None

    group = {current}
    frontier = [current]
    while frontier:
        cid = frontier.pop()
        for nid in neighbors(cid):
            if nid in group or state.component(nid).status is Status.READY:
                continue
            group.add(nid)
            frontier.append(nid)
    if len(group) == 1:
        return current

    heaviest = max(state.component(cid).weight for cid in group)
    winner = min(
        cid for cid in group
        if state.component(cid).weight >= heaviest - Config.WEIGHT_TIE_TOL
    )
    if winner != current:
        state.set_status(current, Status.PLAIN)
        state.set_status(winner, Status.CONSCIOUS)
    return winner
