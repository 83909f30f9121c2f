"""
export.py: artifact writers.

Every number is written at 12 significant digits so identical inputs give
byte-identical files on any platform.
"""

import os

import aiofiles

from plugins.config import Config
from plugins.helper.field import DriftSample, PulseField, dump_field
from plugins.helper.harness import RunStats, Trajectory
from plugins.helper.state import CascadeStep, EventLog, HitEvent, PulseRelabel, StatusChange
from utils.shared import fmt

FORMATS = ("timeseries", "events", "stats", "histogram", "field", "drift")


def render_timeseries(traj: Trajectory) -> str:
    n = len(traj.final_state.components)
    header = ["t"] + [f"w_{i}" for i in range(n)] + [f"status_{i}" for i in range(n)]
    lines = [",".join(header)]
    for t, weights, statuses in zip(traj.times, traj.weights, traj.statuses):
        lines.append(",".join([fmt(t), *(fmt(w) for w in weights), *(s.value for s in statuses)]))
    return "\n".join(lines) + "\n"


def _event_row(ev) -> tuple[float, str, int, str]:
    if isinstance(ev, HitEvent):
        return ev.t, ev.kind, ev.target, ""
    if isinstance(ev, StatusChange):
        return ev.t, ev.kind, ev.component, f"{ev.old.value}->{ev.new.value}"
    if isinstance(ev, CascadeStep):
        return ev.t, ev.kind, ev.source, f"to={ev.target}"
    if isinstance(ev, PulseRelabel):
        return ev.t, ev.kind, ev.component, f"{ev.old or 'none'}->{ev.new or 'none'}"
    raise TypeError(f"unknown event {ev!r}")


def render_events(log: EventLog) -> str:
    lines = ["t,event_kind,component,detail"]
    for ev in log:
        t, kind, component, detail = _event_row(ev)
        lines.append(f"{fmt(t)},{kind},{component},{detail}")
    return "\n".join(lines) + "\n"


def render_stats(stats: RunStats) -> str:
    lines = ["component,count,fraction"]
    n = stats.n_trials or 1
    for cid in sorted(stats.branch_counts):
        count = stats.branch_counts[cid]
        lines.append(f"{cid},{count},{fmt(count / n)}")
    lines.append(f"none,{stats.no_hit_count},{fmt(stats.no_hit_count / n)}")
    return "\n".join(lines) + "\n"


def render_histogram(stats: RunStats) -> str:
    edges = stats.bin_edges
    lines = ["bin_lo,bin_hi,count"]
    for lo, hi, count in zip(edges[:-1], edges[1:], stats.hit_time_histogram):
        lines.append(f"{fmt(lo)},{fmt(hi)},{int(count)}")
    return "\n".join(lines) + "\n"


def render_drift(samples: list[DriftSample]) -> str:
    k = len(samples[0].leading) if samples else 0
    header = ["t", "x", "y", "weight_sum"] + [f"leading_{i}" for i in range(k)] + [f"trailing_{i}" for i in range(k)]
    lines = [",".join(header)]
    for s in samples:
        row = [fmt(s.t), fmt(s.center[0]), fmt(s.center[1]), fmt(s.weight_sum)]
        row += [fmt(v) for v in s.leading] + [fmt(v) for v in s.trailing]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def render(obj, format: str) -> str:
    if format == "timeseries" and isinstance(obj, Trajectory):
        return render_timeseries(obj)
    if format == "events" and isinstance(obj, (Trajectory, EventLog)):
        return render_events(obj.log if isinstance(obj, Trajectory) else obj)
    if format == "stats" and isinstance(obj, RunStats):
        return render_stats(obj)
    if format == "histogram" and isinstance(obj, RunStats):
        return render_histogram(obj)
    if format == "field" and isinstance(obj, PulseField):
        return dump_field(obj)
    if format == "drift" and isinstance(obj, list):
        return render_drift(obj)
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {', '.join(FORMATS)}")
    raise ValueError(f"cannot emit {type(obj).__name__} as {format}")


async def emit(obj, format: str, path: str) -> None:
    """Write ``obj`` to ``path`` in ``format``. OSError propagates."""
    text = render(obj, format)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    async with aiofiles.open(path, "w", encoding="utf-8", newline="\n") as fh:
        await fh.write(text)
    Config.LOGGER.info(f"wrote {format} to {path}")
