import argparse
import asyncio
import functools
import sys
import time
from dataclasses import replace

from plugins.config import Config
from plugins.helper.errors import InvariantViolation, ScenarioError, ScenarioValidationError, UsageError
from plugins.helper.export import emit
from plugins.helper.field import ConsciousPulse, traverse
from plugins.helper.harness import run_monte_carlo, run_once
from plugins.helper.reduction import TriggerLaw
from plugins.helper.scenarios import ScenarioSpec, load_scenario, validate
from utils.shared import MC_PROGRESS, time_formatter


HELP_TEXT = """
📋 reducesim commands

➤ run    – one seeded trajectory, written as a timeseries or event log
➤ mc     – seeded Monte Carlo ensemble, written as branch stats or hit-time histogram
➤ check  – parse and validate a scenario file
➤ drift  – drift a conscious pulse over the scenario's field

Scenarios: a file path, or builtin:classical | builtin:quantum[:TOTAL] |
builtin:quantum_constant:J | builtin:quantum_ddd | builtin:terminal:w0,w1
"""


def reports_errors(func):
    """Decorator: map the error families onto exit codes 1 (input) and 2 (runtime)."""
    @functools.wraps(func)
    async def wrapper(args: argparse.Namespace) -> int:
        try:
            return await func(args)
        except ScenarioError as e:
            print(f"❌ Invalid scenario: {e}", file=sys.stderr)
            return e.exit_code
        except InvariantViolation as e:
            print(f"❌ Invariant violated: {e}", file=sys.stderr)
            return e.exit_code
        except OSError as e:
            print(f"❌ I/O error: {e}", file=sys.stderr)
            return 2
    return wrapper


async def _scenario(args: argparse.Namespace) -> ScenarioSpec:
    spec = await load_scenario(args.scenario)
    if getattr(args, "dt", None) is not None:
        spec = validate(replace(spec, schedule=replace(spec.schedule, dt=args.dt)))
    return spec


def _pair(text: str) -> tuple[float, float]:
    try:
        x, y = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected vx,vy, got {text!r}") from None
    return x, y


async def _report_progress(label: str, every: float = 2.0):
    while True:
        await asyncio.sleep(every)
        p = MC_PROGRESS.get(label)
        if p:
            print(f"🎲 {label} {p['bar']} {p['done']}/{p['total']} · {p['elapsed']}")


# ── run ───────────────────────────────────────────────────────────────────────

@reports_errors
async def cmd_run(args: argparse.Namespace) -> int:
    spec = await _scenario(args)
    loop = asyncio.get_running_loop()
    traj = await loop.run_in_executor(None, run_once, spec, args.seed, args.stride, args.trigger_law)
    await emit(traj, args.emit, args.out)

    hit = traj.hit
    outcome = f"hit on {hit.target} at t={hit.t:.6g}" if hit else "no hit"
    print(f"✅ {spec.name} seed={args.seed}: {outcome}; {len(traj.times)} samples → {args.out}")
    if traj.clamp_count:
        Config.LOGGER.warning(f"{traj.clamp_count} transfer(s) were truncated to the source weight")
    return 0


# ── mc ────────────────────────────────────────────────────────────────────────

@reports_errors
async def cmd_mc(args: argparse.Namespace) -> int:
    spec = await _scenario(args)
    label = f"{spec.name}#{args.seed}"
    started = time.time()
    printer = asyncio.create_task(_report_progress(label))
    try:
        stats = await run_monte_carlo(
            spec, args.trials, args.seed, exact=args.exact, law=args.trigger_law,
            bins=args.bins, label=label,
        )
    finally:
        printer.cancel()
        MC_PROGRESS.pop(label, None)
    await emit(stats, args.emit, args.out)

    fractions = ", ".join(
        f"{cid}: {stats.branch_counts[cid] / stats.n_trials:.4f}" for cid in sorted(stats.branch_counts)
    )
    print(f"📊 {spec.name}: {stats.n_trials} trials in {time_formatter(time.time() - started)}")
    print(f"   branches {{{fractions}}}, no hit {stats.no_hit_count}")
    print(f"✅ {args.emit} → {args.out}")
    return 0


# ── check ─────────────────────────────────────────────────────────────────────

@reports_errors
async def cmd_check(args: argparse.Namespace) -> int:
    spec = await load_scenario(args.scenario)
    print(
        f"✅ {spec.name}: {len(spec.components)} components, {len(spec.edges)} edges, "
        f"dt={spec.schedule.dt:g}, t_max={spec.schedule.t_max:g}"
    )
    return 0


# ── drift ─────────────────────────────────────────────────────────────────────

@reports_errors
async def cmd_drift(args: argparse.Namespace) -> int:
    spec = await load_scenario(args.scenario)
    pulse_field = spec.build_field()
    if pulse_field is None:
        raise ScenarioValidationError("scenario declares no field", spec.name)
    if args.emit == "field":
        await emit(pulse_field, "field", args.out)
        print(f"✅ {pulse_field.width}x{pulse_field.height} field → {args.out}")
        return 0

    start = (0.0, (pulse_field.height - 1) / 2.0)
    pulse = ConsciousPulse(start, args.sigma)
    pulse, samples = traverse(pulse_field, pulse, args.velocity, args.dt, args.steps)
    await emit(samples, "drift", args.out)
    print(f"✅ pulse drifted to ({pulse.center[0]:.4g}, {pulse.center[1]:.4g}) in {args.steps} steps → {args.out}")
    return 0


COMMANDS = {"run": cmd_run, "mc": cmd_mc, "check": cmd_check, "drift": cmd_drift}


class _Parser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting with argparse's status 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="reducesim", description=HELP_TEXT, formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    laws = [law.value for law in TriggerLaw]

    run = sub.add_parser("run", help="one seeded trajectory")
    run.add_argument("--scenario", required=True)
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--dt", type=float)
    run.add_argument("--stride", type=int, default=Config.STRIDE)
    run.add_argument("--emit", choices=["timeseries", "events"], default="timeseries")
    run.add_argument("--out", required=True)
    run.add_argument("--trigger-law", choices=laws, default=Config.TRIGGER_LAW)

    mc = sub.add_parser("mc", help="seeded Monte Carlo ensemble")
    mc.add_argument("--scenario", required=True)
    mc.add_argument("--trials", type=int, required=True)
    mc.add_argument("--seed", type=int, required=True)
    mc.add_argument("--dt", type=float)
    mc.add_argument("--bins", type=int, default=Config.HIST_BINS)
    mc.add_argument("--emit", choices=["stats", "histogram"], default="stats")
    mc.add_argument("--out", required=True)
    mc.add_argument("--trigger-law", choices=laws, default=Config.TRIGGER_LAW)
    mc.add_argument("--exact", action="store_true", help="run every trial through the full integrator")

    check = sub.add_parser("check", help="parse and validate a scenario")
    check.add_argument("--scenario", required=True)

    drift = sub.add_parser("drift", help="drift a conscious pulse over the scenario's field")
    drift.add_argument("--scenario", required=True)
    drift.add_argument("--velocity", type=_pair, default=(1.0, 0.0))
    drift.add_argument("--dt", type=float, default=0.1)
    drift.add_argument("--steps", type=int, default=10)
    drift.add_argument("--sigma", type=float, default=1.0)
    drift.add_argument("--emit", choices=["drift", "field"], default="drift")
    drift.add_argument("--out", required=True)
    return parser


async def dispatch(argv: list[str]) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code
    if getattr(args, "trials", 1) < 1:
        print("❌ --trials must be at least 1", file=sys.stderr)
        return 1
    return await COMMANDS[args.command](args)
