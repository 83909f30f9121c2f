"""
field.py: the classical picture.

A PulseField is a grid of brain states: columns run along time, rows along
the space of states, and every point carries a state vector (the scene it
represents). Neighbouring points differ by at most the continuity bound ε.
A ConsciousPulse is a finite-resolution window drifting over the field; it
never branches and never triggers anything.
"""

from dataclasses import dataclass, field

import numpy as np

from plugins.helper.errors import OutOfField
from utils.shared import fmt


@dataclass(frozen=True)
class FieldPoint:
    x: int
    y: int
    state_vector: tuple[float, ...]
    label: str = ""


@dataclass(frozen=True, eq=False)
class PulseField:
    values: np.ndarray            # (height, width, k)
    continuity_bound: float
    labels: np.ndarray | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 3 or values.shape[2] < 1:
            raise ValueError(f"field values must be (height, width, k) with k >= 1, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        labels = self.labels
        if labels is None:
            labels = np.full(values.shape[:2], "", dtype=object)
        else:
            labels = np.array(labels, dtype=object)
            if labels.shape != values.shape[:2]:
                raise ValueError(f"labels shape {labels.shape} does not match grid {values.shape[:2]}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def point(self, x: int, y: int) -> FieldPoint:
        return FieldPoint(x, y, tuple(float(v) for v in self.values[y, x]), str(self.labels[y, x]))

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width - 1 and 0.0 <= y <= self.height - 1


@dataclass(frozen=True)
class ConsciousPulse:
    center: tuple[float, float]
    width: float
    trajectory: tuple[tuple[float, tuple[float, float]], ...] = ()

    def __post_init__(self):
        if not self.width > 0.0:
            raise ValueError(f"pulse width must be positive, got {self.width}")
        if not self.trajectory:
            object.__setattr__(self, "trajectory", ((0.0, tuple(self.center)),))

    @property
    def t(self) -> float:
        return self.trajectory[-1][0]


# ── Constructors ──────────────────────────────────────────────────────────────

def hue_ramp_field(width: int, height: int) -> PulseField:
    """A red field turning green along x: one hue coordinate, 0 at x=0 to 1 at the last column."""
    hue = np.linspace(0.0, 1.0, width) if width > 1 else np.zeros(1)
    values = np.broadcast_to(hue[None, :, None], (height, width, 1))
    return PulseField(values, continuity_bound=2.0 / width)


def uniform_field(width: int, height: int, value: float = 0.5) -> PulseField:
    return PulseField(np.full((height, width, 1), value), continuity_bound=2.0 / width)


def inject_step(pulse_field: PulseField, column: int, jump: float) -> PulseField:
    """Copy of the field with ``jump`` added to every point from ``column`` on."""
    values = pulse_field.values.copy()
    values[:, column:, :] += jump
    return PulseField(values, pulse_field.continuity_bound, pulse_field.labels.copy())


# ── Operations ────────────────────────────────────────────────────────────────

def drift(pulse_field: PulseField, pulse: ConsciousPulse, velocity: tuple[float, float], dt: float) -> ConsciousPulse:
    x = pulse.center[0] + velocity[0] * dt
    y = pulse.center[1] + velocity[1] * dt
    t = pulse.t + dt
    if not pulse_field.contains(x, y):
        raise OutOfField(
            f"pulse would drift to ({x:.6g}, {y:.6g}) outside the "
            f"{pulse_field.width}x{pulse_field.height} field",
            t=t,
        )
    return ConsciousPulse((x, y), pulse.width, pulse.trajectory + ((t, (x, y)),))


def window(pulse_field: PulseField, pulse: ConsciousPulse) -> list[tuple[FieldPoint, float]]:
    """Points within 3σ of the pulse center with normalized Gaussian weights, row-major order."""
    cx, cy = pulse.center
    ys, xs = np.mgrid[0:pulse_field.height, 0:pulse_field.width]
    d2 = (xs - cx) ** 2 + (ys - cy) ** 2
    radius = 3.0 * pulse.width
    inside = d2 <= radius * radius
    if not inside.any():
        y, x = np.unravel_index(np.argmin(d2), d2.shape)
        return [(pulse_field.point(int(x), int(y)), 1.0)]

    weights = np.exp(-d2[inside] / (2.0 * pulse.width ** 2))
    weights = weights / weights.sum()
    return [
        (pulse_field.point(int(x), int(y)), float(w))
        for x, y, w in zip(xs[inside], ys[inside], weights)
    ]


def continuity_check(pulse_field: PulseField) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Every horizontally or vertically adjacent pair whose states differ by more than ε (∞-norm)."""
    eps = pulse_field.continuity_bound
    v = pulse_field.values
    violations = []
    horizontal = np.abs(np.diff(v, axis=1)).max(axis=2) if pulse_field.width > 1 else np.zeros((0, 0))
    for y, x in np.argwhere(horizontal > eps):
        violations.append(((int(x), int(y)), (int(x) + 1, int(y))))
    vertical = np.abs(np.diff(v, axis=0)).max(axis=2) if pulse_field.height > 1 else np.zeros((0, 0))
    for y, x in np.argwhere(vertical > eps):
        violations.append(((int(x), int(y)), (int(x), int(y) + 1)))
    return violations


def branch_field(pulse_field: PulseField, column: int, left_label: str, right_label: str) -> tuple[PulseField, PulseField]:
    """
    Split the field at ``column`` into the two post-observation ready regions.
    Both successors keep the branch column itself; the left one extends
    towards column 0 and the right one towards the last column.
    """
    if not 0 <= column < pulse_field.width:
        raise ValueError(f"branch column {column} outside 0..{pulse_field.width - 1}")

    left_labels = pulse_field.labels[:, :column + 1].copy()
    left_labels[:, :column] = left_label
    right_labels = pulse_field.labels[:, column:].copy()
    right_labels[:, 1:] = right_label

    eps = pulse_field.continuity_bound
    left = PulseField(pulse_field.values[:, :column + 1].copy(), eps, left_labels)
    right = PulseField(pulse_field.values[:, column:].copy(), eps, right_labels)
    return left, right


def edge_states(pulse_field: PulseField, pulse: ConsciousPulse, direction: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    """Weighted state of the window's leading and trailing edges along ``direction``."""
    dx, dy = direction
    if dx == 0.0 and dy == 0.0:
        raise ValueError("edge states need a nonzero direction")
    cx, cy = pulse.center
    pts = window(pulse_field, pulse)
    proj = np.array([(p.x - cx) * dx + (p.y - cy) * dy for p, _ in pts])
    states = np.array([p.state_vector for p, _ in pts])
    weights = np.array([w for _, w in pts])

    def _mean(mask):
        return np.average(states[mask], axis=0, weights=weights[mask])

    return _mean(np.isclose(proj, proj.max())), _mean(np.isclose(proj, proj.min()))


@dataclass
class DriftSample:
    t: float
    center: tuple[float, float]
    leading: np.ndarray
    trailing: np.ndarray
    weight_sum: float


def traverse(pulse_field: PulseField, pulse: ConsciousPulse, velocity: tuple[float, float],
             dt: float, steps: int) -> tuple[ConsciousPulse, list[DriftSample]]:
    """Drift ``steps`` times, sampling the window after every move (and before the first)."""
    samples = []
    moving = velocity[0] != 0.0 or velocity[1] != 0.0

    def _sample(p: ConsciousPulse):
        total = float(np.sum([w for _, w in window(pulse_field, p)]))
        if moving:
            lead, trail = edge_states(pulse_field, p, velocity)
        else:
            lead = trail = np.full(pulse_field.values.shape[2], np.nan)
        samples.append(DriftSample(p.t, p.center, lead, trail, total))

    _sample(pulse)
    for _ in range(steps):
        pulse = drift(pulse_field, pulse, velocity, dt)
        _sample(pulse)
    return pulse, samples


def dump_field(pulse_field: PulseField) -> str:
    """Plain-text grid: one row per line, points space-separated, vector components comma-separated."""
    rows = []
    for y in range(pulse_field.height):
        rows.append(" ".join(
            ",".join(fmt(v) for v in pulse_field.values[y, x]) for x in range(pulse_field.width)
        ))
    return "\n".join(rows) + "\n"
