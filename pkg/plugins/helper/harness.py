"""
harness.py: single runs and seeded Monte Carlo ensembles.

``run_once`` executes a scenario end to end: the pre-hit evolution, the
trigger test after every step, collapse on a hit and the cascade that
follows. ``run_monte_carlo`` aggregates many seeds into a RunStats.

Everything before the hit is independent of the seed; the seed only fixes
the threshold. The Monte Carlo fast path therefore records the pre-hit
evolution once (a HitSchedule) and, per seed, only locates the step where
the trigger level first passes the threshold. It performs the same float
operations as ``run_once`` and gives bit-identical outcomes.
"""

import asyncio
import time
from bisect import insort
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.stats

from plugins.config import Config
from plugins.helper.dynamics import StepReport, step, step_with_report
from plugins.helper.errors import ReduceSimError
from plugins.helper.reduction import (
    StochasticTrigger, TriggerLaw, accumulate_and_test, axis_increments,
    collapse, draw_threshold, iter_cascade, locate_hit,
)
from plugins.helper.scenarios import RelabelDecl, ScenarioSpec
from plugins.helper.state import (
    ComponentId, EventLog, HitEvent, Phase, PulseRelabel, Status, SystemState,
    conscious_component, total_weight,
)
from utils.shared import update_progress, worker_count


# ── Results ───────────────────────────────────────────────────────────────────

@dataclass
class Trajectory:
    seed: int
    times: list[float]
    weights: list[tuple[float, ...]]
    statuses: list[tuple[Status, ...]]
    final_state: SystemState
    max_conservation_error: float = 0.0   # whole run
    pre_collapse_error: float = 0.0       # pre-hit samples only
    max_step_drift: float = 0.0
    clamp_count: int = 0

    @property
    def log(self) -> EventLog:
        return self.final_state.log

    @property
    def hit(self) -> HitEvent | None:
        return self.final_state.log.hit


@dataclass
class RunStats:
    t_max: float
    bins: int = field(default_factory=lambda: Config.HIST_BINS)
    n_trials: int = 0
    branch_counts: Counter = field(default_factory=Counter)
    hit_time_histogram: np.ndarray | None = None
    no_hit_count: int = 0
    hit_times: list[float] = field(default_factory=list)
    conservation_error_sum: Fraction = Fraction(0)

    def __post_init__(self):
        if self.hit_time_histogram is None:
            self.hit_time_histogram = np.zeros(self.bins, dtype=np.int64)

    @property
    def mean_conservation_error(self) -> float:
        return float(self.conservation_error_sum / self.n_trials) if self.n_trials else 0.0

    @property
    def bin_edges(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.bins + 1)

    def record(self, target: ComponentId | None, hit_t: float | None, error: float) -> None:
        self.n_trials += 1
        self.conservation_error_sum += Fraction(error)
        if target is None:
            self.no_hit_count += 1
            return
        self.branch_counts[target] += 1
        b = min(max(int(hit_t / self.t_max * self.bins), 0), self.bins - 1)
        self.hit_time_histogram[b] += 1
        insort(self.hit_times, hit_t)

    def merge(self, other: "RunStats") -> "RunStats":
        if (self.t_max, self.bins) != (other.t_max, other.bins):
            raise ValueError(
                f"cannot merge stats over [0, {self.t_max}]/{self.bins} bins "
                f"with [0, {other.t_max}]/{other.bins} bins"
            )
        return RunStats(
            t_max=self.t_max,
            bins=self.bins,
            n_trials=self.n_trials + other.n_trials,
            branch_counts=self.branch_counts + other.branch_counts,
            hit_time_histogram=self.hit_time_histogram + other.hit_time_histogram,
            no_hit_count=self.no_hit_count + other.no_hit_count,
            hit_times=sorted(self.hit_times + other.hit_times),
            conservation_error_sum=self.conservation_error_sum + other.conservation_error_sum,
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RunStats)
            and (self.t_max, self.bins, self.n_trials, self.no_hit_count)
            == (other.t_max, other.bins, other.n_trials, other.no_hit_count)
            and +self.branch_counts == +other.branch_counts
            and np.array_equal(self.hit_time_histogram, other.hit_time_histogram)
            and self.hit_times == other.hit_times
            and self.conservation_error_sum == other.conservation_error_sum
        )


# ── Pre-hit evolution ─────────────────────────────────────────────────────────

def _apply_relabels(state: SystemState, pending: list[RelabelDecl], dt: float) -> None:
    while pending and state.time >= pending[0].at - dt / 2:
        r = pending.pop(0)
        comp = state.component(r.component)
        if comp.pulse_label != r.pulse:
            state.log.append(PulseRelabel(state.time, r.component, comp.pulse_label, r.pulse))
            comp.pulse_label = r.pulse
        if r.status is Status.CONSCIOUS:
            holder = conscious_component(state)
            if holder is not None and holder != r.component:
                state.set_status(holder, Status.PLAIN)
        if r.status is not None:
            state.set_status(r.component, r.status)


def _conservation_error(state: SystemState) -> float:
    return abs(total_weight(state) - state.total_weight_reference)


def _inbound_rates(report: StepReport, dt: float) -> dict[ComponentId, float]:
    return {c: amt / dt for c, amt in report.inbound_ready.items()}


def iter_pre_collapse(spec: ScenarioSpec):
    """
    The deterministic evolution with no trigger attached. Yields
    ``(t, state, report)``: first the initial state (``report`` None), then
    the state after each step that started at ``t``.
    """
    dt = spec.schedule.dt
    graph = spec.graph()
    pending = sorted(spec.relabels, key=lambda r: (r.at, r.component))
    state = spec.initial_state()
    _apply_relabels(state, pending, dt)
    yield state.time, state, None
    start = state.time
    for k in range(spec.schedule.n_steps):
        _apply_relabels(state, pending, dt)
        t = state.time
        state, report = step_with_report(state, graph, dt, t_end=start + (k + 1) * dt)
        yield t, state, report


@dataclass
class HitSchedule:
    """
    Seed-independent record of the trigger level. Only steps that move the
    level are kept: their end time, level before and after, the per-component
    increments, and the largest pre-hit conservation error seen so far.
    """
    t_end: np.ndarray
    level_before: list[float]
    level_after: np.ndarray
    increments: list[list[tuple[ComponentId, float]]]
    error_at: list[float]
    final_error: float

    @classmethod
    def record(cls, spec: ScenarioSpec, law: TriggerLaw | str | None = None) -> "HitSchedule":
        dt = spec.schedule.dt
        trigger = StochasticTrigger.silent(law)
        t_end, before, after, increments, error_at = [], [], [], [], []
        worst = 0.0
        for t, state, report in iter_pre_collapse(spec):
            worst = max(worst, _conservation_error(state))
            if report is None:
                continue
            level = trigger.level
            incs = axis_increments(trigger, _inbound_rates(report, dt), dt)
            _, trigger.level = locate_hit(level, incs, trigger.threshold_u)
            if incs:
                t_end.append(t + dt)
                before.append(level)
                after.append(trigger.level)
                increments.append(incs)
                error_at.append(worst)
        Config.LOGGER.debug(
            f"hit schedule for {spec.name}: {len(t_end)} active steps, final level {trigger.level:.12g}"
        )
        return cls(np.array(t_end), before, np.array(after), increments, error_at, worst)

    def locate(self, seed: int) -> tuple[ComponentId | None, float | None, float]:
        """(target, hit time, pre-hit conservation error) for ``seed``."""
        u = draw_threshold(seed)
        j = int(np.searchsorted(self.level_after, u, side="right"))
        if j == len(self.level_after):
            return None, None, self.final_error
        target, _ = locate_hit(self.level_before[j], self.increments[j], u)
        return target, float(self.t_end[j]), self.error_at[j]


# ── Single run ────────────────────────────────────────────────────────────────

class _Recorder:
    def __init__(self, seed: int, stride: int):
        self.seed = seed
        self.stride = max(int(stride), 1)
        self.times, self.weights, self.statuses = [], [], []
        self.max_error = self.pre_error = self.max_drift = 0.0
        self.clamps = 0

    def track(self, state: SystemState, report: StepReport | None) -> None:
        err = _conservation_error(state)
        self.max_error = max(self.max_error, err)
        if state.phase is Phase.PRE_COLLAPSE:
            self.pre_error = max(self.pre_error, err)
        if report is not None:
            self.max_drift = max(self.max_drift, abs(report.drift))
            self.clamps += report.clamped

    def sample(self, k: int, state: SystemState, force: bool = False) -> None:
        if (k % self.stride == 0 or force) and (not self.times or state.time > self.times[-1]):
            self.times.append(state.time)
            self.weights.append(tuple(state.weights()))
            self.statuses.append(tuple(state.statuses()))

    def finish(self, state: SystemState) -> Trajectory:
        return Trajectory(
            self.seed, self.times, self.weights, self.statuses, state,
            self.max_error, self.pre_error, self.max_drift, self.clamps,
        )


def _post_collapse(spec: ScenarioSpec, state: SystemState, hit: HitEvent):
    """States after the hit up to t_max: the cascade if the hit opened one, else idle steps."""
    dt, t_max = spec.schedule.dt, spec.schedule.t_max
    chain = list(spec.cascade_chain)
    if len(chain) > 1 and chain[0] == hit.target:
        yield from iter_cascade(state, chain, spec.cascade_profiles(), dt, until=t_max)
        return
    graph = spec.graph()
    start, k = state.time, 0
    while state.time < t_max - dt / 2:
        k += 1
        state = step(state, graph, dt, t_end=start + k * dt)
        yield state


def run_once(spec: ScenarioSpec, seed: int, stride: int | None = None,
             law: TriggerLaw | str | None = None) -> Trajectory:
    """One seeded trajectory from t=0 to t_max; deterministic for fixed (spec, seed, law)."""
    dt = spec.schedule.dt
    trigger = StochasticTrigger.from_seed(seed, law)
    rec = _Recorder(seed, stride or Config.STRIDE)
    now = 0.0
    state = None
    hit = None
    k = 0
    try:
        for k, (t, state, report) in enumerate(iter_pre_collapse(spec)):
            now = state.time
            rec.track(state, report)
            if report is not None:
                hit = accumulate_and_test(trigger, _inbound_rates(report, dt), dt, t)
            if hit is not None:
                state = collapse(state, hit)
                rec.track(state, None)
                rec.sample(k, state, force=True)
                break
            rec.sample(k, state)

        if hit is not None:
            for state in _post_collapse(spec, state, hit):
                k += 1
                now = state.time
                rec.track(state, None)
                rec.sample(k, state)
    except ReduceSimError as e:
        raise e.annotate(t=now, seed=seed)

    rec.sample(k, state, force=True)
    return rec.finish(state)


# ── Monte Carlo ───────────────────────────────────────────────────────────────

def _run_chunk(spec: ScenarioSpec, seeds: range, law, bins: int,
               schedule: HitSchedule | None) -> RunStats:
    stats = RunStats(t_max=spec.schedule.t_max, bins=bins)
    for seed in seeds:
        try:
            if schedule is not None:
                target, hit_t, err = schedule.locate(seed)
            else:
                traj = run_once(spec, seed, law=law)
                hit = traj.hit
                target, hit_t = (hit.target, hit.t) if hit else (None, None)
                err = traj.pre_collapse_error
        except ReduceSimError as e:
            raise e.annotate(seed=seed)
        stats.record(target, hit_t, err)
    return stats


def _chunks(base_seed: int, n: int, size: int) -> list[range]:
    size = max(size, 1)
    return [range(s, min(s + size, base_seed + n)) for s in range(base_seed, base_seed + n, size)]


async def run_monte_carlo(spec: ScenarioSpec, n: int, base_seed: int, *, exact: bool = False,
                          law: TriggerLaw | str | None = None, bins: int | None = None,
                          label: str | None = None) -> RunStats:
    """
    Trials with seeds base_seed … base_seed+n−1 on a worker pool. With
    ``exact`` every trial goes through ``run_once``; otherwise the shared
    pre-hit schedule is recorded once and reused.
    """
    if n < 1:
        raise ValueError(f"need at least one trial, got {n}")
    bins = bins or Config.HIST_BINS
    label = label or spec.name
    loop = asyncio.get_running_loop()
    started = time.time()

    schedule = None
    if not exact:
        schedule = await loop.run_in_executor(None, HitSchedule.record, spec, law)

    chunks = _chunks(base_seed, n, Config.CHUNK_SIZE)
    workers = min(worker_count(), len(chunks))
    Config.LOGGER.info(
        f"🎲 {label}: {n} trials in {len(chunks)} chunk(s) on {workers} worker(s)"
        f"{' (exact)' if exact else ''}"
    )

    stats = RunStats(t_max=spec.schedule.t_max, bins=bins)
    update_progress(label, 0, n, started)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        tasks = [
            loop.run_in_executor(pool, _run_chunk, spec, seeds, law, bins, schedule)
            for seeds in chunks
        ]
        for fut in asyncio.as_completed(tasks):
            part = await fut
            stats = stats.merge(part)
            update_progress(label, stats.n_trials, n, started)
            Config.LOGGER.debug(f"{label}: chunk of {part.n_trials} done ({stats.n_trials}/{n})")
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return stats


def ks_uniform(hit_times, lo: float, hi: float):
    """Kolmogorov–Smirnov test of ``hit_times`` against the uniform law on [lo, hi]."""
    return scipy.stats.kstest(np.asarray(hit_times, dtype=float), "uniform", args=(lo, hi - lo))
