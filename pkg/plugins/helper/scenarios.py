"""
scenarios.py: declarative scenarios.

A ScenarioSpec is an immutable description of one experiment: the initial
components, the current graph, the post-hit cascade chain, scheduled pulse
relabels and the time marks. Specs come from the built-in constructors or
from the line-oriented scenario file format handled by ``parse_scenario`` /
``serialize_scenario``.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import aiofiles

from plugins.config import Config
from plugins.helper.dynamics import (
    Constant, CurrentEdge, CurrentGraph, EdgeKind, FlowProfile, RaisedCosine, Ramp,
)
from plugins.helper.errors import (
    InvalidWeights, ScenarioSyntaxError, ScenarioValidationError,
)
from plugins.helper.field import PulseField, hue_ramp_field, uniform_field
from plugins.helper.reduction import EmergenceContext, classify_emergence
from plugins.helper.state import Component, ComponentId, Status, SystemState

FIELD_KINDS = ("hue_ramp", "uniform")


# ── Types ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ScheduleMarks:
    t_i: float = 0.0
    t_0: float | None = None
    t_f: float | None = None
    t_ob: float | None = None
    t_max: float = field(default_factory=lambda: Config.T_MAX)
    dt: float = field(default_factory=lambda: Config.DT)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass(frozen=True)
class ComponentDecl:
    id: ComponentId
    weight: float
    config: tuple[str, ...] = ()
    pulse: str | None = None
    status: Status = Status.PLAIN


@dataclass(frozen=True)
class EdgeDecl:
    source: ComponentId
    target: ComponentId
    kind: EdgeKind
    profile: FlowProfile


@dataclass(frozen=True)
class RelabelDecl:
    """Classical pulse relabel of an existing component at time ``at``."""
    component: ComponentId
    at: float
    pulse: str | None
    status: Status | None = None


@dataclass(frozen=True)
class FieldDecl:
    width: int
    height: int
    epsilon: float | None = None
    kind: str = "hue_ramp"


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    components: tuple[ComponentDecl, ...]
    edges: tuple[EdgeDecl, ...] = ()
    cascade_chain: tuple[ComponentId, ...] = ()
    schedule: ScheduleMarks = field(default_factory=ScheduleMarks)
    relabels: tuple[RelabelDecl, ...] = ()
    field: FieldDecl | None = None
    normalize: bool = False

    def initial_state(self) -> SystemState:
        total = math.fsum(c.weight for c in self.components)
        scale = 1.0 / total if self.normalize and total > 0 else 1.0
        return SystemState([
            Component(c.id, c.weight * scale, c.config, c.pulse, c.status) for c in self.components
        ])

    def graph(self) -> CurrentGraph:
        """
        The pre-hit current graph, cascade links included. A cascade starts at
        a ready component, so rule 4 keeps its first link shut and the rest of
        the chain stays empty until the hit. The cascade itself re-bases the
        link profiles at the hit time.
        """
        return CurrentGraph([CurrentEdge(e.source, e.target, e.profile, e.kind) for e in self.edges])

    def cascade_profiles(self) -> list[FlowProfile]:
        """Profiles of the cascade links in chain order, measured from the hit time."""
        by_pair = {(e.source, e.target): e.profile for e in self.edges}
        return [by_pair[pair] for pair in zip(self.cascade_chain, self.cascade_chain[1:])]

    def build_field(self) -> PulseField | None:
        if self.field is None:
            return None
        if self.field.kind == "uniform":
            built = uniform_field(self.field.width, self.field.height)
        else:
            built = hue_ramp_field(self.field.width, self.field.height)
        if self.field.epsilon is not None:
            built = PulseField(built.values, self.field.epsilon, built.labels)
        return built


# ── Validation ────────────────────────────────────────────────────────────────

def _fail(invariant: str, detail: str = ""):
    raise ScenarioValidationError(invariant, detail)


def _validate_profile(edge: EdgeDecl) -> None:
    p = edge.profile
    where = f"edge {edge.source} -> {edge.target}"
    values = [v for v in vars(p).values()]
    if not all(math.isfinite(v) for v in values):
        _fail("profile parameters must be finite", where)
    if isinstance(p, Constant) and p.J < 0:
        _fail("currents must be nonnegative", where)
    if isinstance(p, Ramp) and (p.J_max < 0 or p.t_end <= p.t_start):
        _fail("ramp needs J_max >= 0 and t_end > t_start", where)
    if isinstance(p, RaisedCosine) and (p.duration <= 0 or p.total < 0):
        _fail("raised cosine needs duration > 0 and total >= 0", where)


def validate(spec: ScenarioSpec) -> ScenarioSpec:
    """Check every scenario invariant; returns ``spec`` or raises ScenarioValidationError."""
    ids = [c.id for c in spec.components]
    if not ids:
        _fail("scenario needs at least one component")
    if ids != list(range(len(ids))):
        _fail("component ids must be 0..n-1 in order", f"got {ids}")
    known = set(ids)

    for c in spec.components:
        if not math.isfinite(c.weight) or c.weight < 0:
            _fail("weights must be nonnegative", f"component {c.id} has {c.weight}")
    total = math.fsum(c.weight for c in spec.components)
    if spec.normalize:
        if total <= 0:
            _fail("weights must sum to 1", "nothing to normalize")
    elif abs(total - 1.0) > Config.NORMALIZATION_TOL:
        _fail("weights must sum to 1", f"sum is {total!r}")

    conscious = [c.id for c in spec.components if c.status is Status.CONSCIOUS]
    if len(conscious) > 1:
        _fail("at most one conscious component", f"components {conscious}")

    seen = set()
    branching_targets = set()
    for e in spec.edges:
        if e.source not in known or e.target not in known:
            _fail("unknown component", f"edge {e.source} -> {e.target}")
        if e.source == e.target:
            _fail("edge loops onto itself", f"component {e.source}")
        if (e.source, e.target) in seen:
            _fail("duplicate edge", f"{e.source} -> {e.target}")
        seen.add((e.source, e.target))
        _validate_profile(e)
        if e.kind is EdgeKind.BRANCHING:
            branching_targets.add(e.target)

    for c in spec.components:
        if c.id in branching_targets and c.status is not Status.READY:
            emerges_as = classify_emergence(EmergenceContext(c.id, EdgeKind.BRANCHING, c.pulse is not None))
            if emerges_as is Status.READY:
                _fail("branching target with a brain pulse must be ready", f"component {c.id} is {c.status.value}")
        if c.status is not Status.READY:
            continue
        if c.pulse is None:
            _fail("rule-2 target must carry a brain pulse", f"component {c.id}")
        kind = EdgeKind.BRANCHING if c.id in branching_targets else EdgeKind.CONTINUOUS
        if classify_emergence(EmergenceContext(c.id, kind, True)) is not Status.READY:
            _fail("ready component must be created by a branching edge", f"component {c.id}")

    chain = spec.cascade_chain
    if chain:
        if any(cid not in known for cid in chain):
            _fail("unknown component", f"cascade chain {list(chain)}")
        if len(set(chain)) != len(chain):
            _fail("cascade chain repeats a component", f"{list(chain)}")
        if spec.components[chain[0]].status is not Status.READY:
            _fail("cascade must start at a ready component", f"component {chain[0]}")
        kinds = {(e.source, e.target): e.kind for e in spec.edges}
        for a, b in zip(chain, chain[1:]):
            if kinds.get((a, b)) is not EdgeKind.CONTINUOUS:
                _fail("cascade links must be continuous edges", f"{a} -> {b}")
        for e, p in zip(zip(chain, chain[1:]), spec.cascade_profiles()):
            if math.isinf(p.end):
                _fail("cascade profiles must finish", f"{e[0]} -> {e[1]}")

    s = spec.schedule
    if not (0 < s.dt <= s.t_max) or not math.isfinite(s.t_max):
        _fail("schedule ordering", f"need 0 < dt <= t_max, got dt={s.dt}, t_max={s.t_max}")
    if s.t_i < 0:
        _fail("schedule ordering", f"t_i={s.t_i} is negative")
    if s.t_0 is not None and s.t_i > s.t_0:
        _fail("schedule ordering", f"t_i={s.t_i} after t_0={s.t_0}")
    if s.t_f is not None and s.t_ob is not None and s.t_f > s.t_ob:
        _fail("schedule ordering", f"t_f={s.t_f} after t_ob={s.t_ob}")

    for r in spec.relabels:
        if r.component not in known:
            _fail("unknown component", f"relabel of {r.component}")
        if r.status is Status.READY:
            _fail("relabels cannot create ready components", f"component {r.component}")
        if not 0 <= r.at <= s.t_max:
            _fail("relabel time outside the run", f"at={r.at}")
    relabel_conscious = {r.at for r in spec.relabels if r.status is Status.CONSCIOUS}
    if len(relabel_conscious) != len([r for r in spec.relabels if r.status is Status.CONSCIOUS]):
        _fail("at most one conscious component", "two relabels confer consciousness at the same time")

    f = spec.field
    if f is not None:
        if f.width < 1 or f.height < 1:
            _fail("field needs positive width and height", f"{f.width}x{f.height}")
        if f.kind not in FIELD_KINDS:
            _fail("unknown field kind", f.kind)
        if f.epsilon is not None and not f.epsilon > 0:
            _fail("field epsilon must be positive", f"{f.epsilon}")
    return spec


# ── Built-in scenarios ────────────────────────────────────────────────────────

def build_classical() -> ScenarioSpec:
    """Detector and observer drifting {X} -> {B} along a continuous chain; nothing stochastic."""
    pulses = ["X", "X1", "X2", "B"]
    components = tuple(
        ComponentDecl(i, 1.0 if i == 0 else 0.0, ("D",), label,
                      Status.CONSCIOUS if i == 0 else Status.PLAIN)
        for i, label in enumerate(pulses)
    )
    edges = tuple(
        EdgeDecl(k, k + 1, EdgeKind.CONTINUOUS, RaisedCosine(float(k), 1.0, 1.0))
        for k in range(3)
    )
    return validate(ScenarioSpec("classical", components, edges, schedule=ScheduleMarks(t_i=0.0)))


def build_quantum(transfer_total: float = 1.0, constant_rate: float | None = None) -> ScenarioSpec:
    """
    Observer {B0} watching a particle interaction at t_0: current flows into a
    ready {B1} component. With ``constant_rate`` the current is a Constant(J)
    switched on at t=0 instead, so the hit time is uniform on [0, 1/J].
    """
    if constant_rate is None and not 0.0 < transfer_total <= 1.0:
        _fail("transfer total must lie in (0, 1]", f"got {transfer_total}")
    if constant_rate is not None and not constant_rate > 0.0:
        _fail("currents must be nonnegative", f"constant rate {constant_rate}")

    components = (
        ComponentDecl(0, 1.0, ("D0",), "B0", Status.CONSCIOUS),
        ComponentDecl(1, 0.0, ("D1",), "B1", Status.READY),
    )
    if constant_rate is None:
        name, t_0, profile = "quantum", 1.0, RaisedCosine(1.0, 2.0, float(transfer_total))
    else:
        name, t_0, profile = "quantum_constant", 0.0, Constant(float(constant_rate))
    edges = (EdgeDecl(0, 1, EdgeKind.BRANCHING, profile),)
    return validate(ScenarioSpec(name, components, edges, schedule=ScheduleMarks(t_i=0.0, t_0=t_0)))


def build_quantum_ddd() -> ScenarioSpec:
    """
    The four-component detector picture. Only component 1 is ready; 2 and 3
    are its classical continuation, reached by the cascade after the hit.
    """
    components = (
        ComponentDecl(0, 1.0, ("D0", "D0", "D0"), "B0", Status.CONSCIOUS),
        ComponentDecl(1, 0.0, ("D1", "D0", "D0"), "B0", Status.READY),
        ComponentDecl(2, 0.0, ("D1", "D1", "D0"), "B0", Status.PLAIN),
        ComponentDecl(3, 0.0, ("D1", "D1", "D1"), "B1", Status.PLAIN),
    )
    edges = (
        EdgeDecl(0, 1, EdgeKind.BRANCHING, RaisedCosine(1.0, 2.0, 1.0)),
        EdgeDecl(1, 2, EdgeKind.CONTINUOUS, RaisedCosine(0.0, 0.75, 1.0)),
        EdgeDecl(2, 3, EdgeKind.CONTINUOUS, RaisedCosine(0.75, 0.75, 1.0)),
    )
    return validate(ScenarioSpec(
        "quantum_ddd", components, edges, cascade_chain=(1, 2, 3),
        schedule=ScheduleMarks(t_i=0.0, t_0=1.0),
    ))


def build_terminal(w0: float, w1: float) -> ScenarioSpec:
    """
    Detector superposition w0·D0 + w1·D1 entangled with an unspecified pulse
    {X}. At t_ob the pulse turns classically into {B} (the heavier row becomes
    conscious) and two ready components {B0}, {B1} start to draw current.
    """
    if w0 <= 0 or w1 <= 0 or abs(w0 + w1 - 1.0) > 1e-12:
        raise InvalidWeights(f"terminal weights must be positive and sum to 1, got {w0!r} + {w1!r}")

    t_ob = 1.0
    components = (
        ComponentDecl(0, float(w0), ("D0",), "X", Status.PLAIN),
        ComponentDecl(1, float(w1), ("D1",), "X", Status.PLAIN),
        ComponentDecl(2, 0.0, ("D0",), "B0", Status.READY),
        ComponentDecl(3, 0.0, ("D1",), "B1", Status.READY),
    )
    edges = (
        EdgeDecl(0, 2, EdgeKind.BRANCHING, RaisedCosine(t_ob, 2.0, float(w0))),
        EdgeDecl(1, 3, EdgeKind.BRANCHING, RaisedCosine(t_ob, 2.0, float(w1))),
    )
    heavier = 0 if w0 >= w1 else 1
    relabels = tuple(
        RelabelDecl(cid, t_ob, "B", Status.CONSCIOUS if cid == heavier else None) for cid in (0, 1)
    )
    return validate(ScenarioSpec(
        "terminal", components, edges, relabels=relabels,
        schedule=ScheduleMarks(t_i=0.0, t_f=0.0, t_ob=t_ob),
    ))


# ── Scenario file format ──────────────────────────────────────────────────────

SECTIONS = ("scenario", "components", "edges", "cascade", "schedule", "relabel", "field")
SECTION_KEYS = {
    "scenario": ("name", "normalize"),
    "cascade": ("chain",),
    "schedule": ("t_i", "t_0", "t_f", "t_ob", "t_max", "dt"),
    "field": ("width", "height", "epsilon", "kind"),
}
COMPONENT_KEYS = ("weight", "config", "pulse", "status")
EDGE_KEYS = ("kind", "profile")
RELABEL_KEYS = ("at", "pulse", "status")
PROFILE_ARITY = {"constant": 1, "ramp": 3, "rcos": 3}


def _real(text: str, line: int, col: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ScenarioSyntaxError(line, col, "a real number") from None
    if not math.isfinite(value):
        raise ScenarioSyntaxError(line, col, "a finite real number")
    return value


def _int(text: str, line: int, col: int, noun: str = "component id") -> int:
    try:
        return int(text)
    except ValueError:
        raise ScenarioSyntaxError(line, col, f"an integer {noun}") from None


def _enum(cls, text: str, line: int, col: int):
    try:
        return cls(text)
    except ValueError:
        raise ScenarioSyntaxError(line, col, "one of " + "|".join(m.value for m in cls)) from None


def _profile(text: str, line: int, col: int) -> FlowProfile:
    name, _, args = text.partition(":")
    if name not in PROFILE_ARITY:
        raise ScenarioSyntaxError(line, col, "constant:J | ramp:Jmax,t0,t1 | rcos:t0,dur,total")
    parts = args.split(",") if args else []
    if len(parts) != PROFILE_ARITY[name]:
        raise ScenarioSyntaxError(line, col + len(name) + 1, f"{PROFILE_ARITY[name]} comma-separated values")
    values = [_real(p, line, col + len(name) + 1) for p in parts]
    if name == "constant":
        return Constant(*values)
    if name == "ramp":
        return Ramp(*values)
    return RaisedCosine(*values)


def _pairs(tokens: list[tuple[int, str]], allowed: tuple[str, ...], line: int) -> dict[str, tuple[int, str]]:
    """``key=value`` tokens into {key: (col, value)}; unknown or repeated keys are errors."""
    out = {}
    for col, tok in tokens:
        key, eq, value = tok.partition("=")
        if not eq or key not in allowed or key in out:
            raise ScenarioSyntaxError(line, col, "one of " + ", ".join(f"{k}=" for k in allowed if k not in out))
        out[key] = (col + len(key) + 1, value)
    return out


def _tokens(raw: str) -> list[tuple[int, str]]:
    """Whitespace-separated tokens with their 1-based columns."""
    out, col = [], 0
    for tok in raw.split():
        col = raw.index(tok, col)
        out.append((col + 1, tok))
        col += len(tok)
    return out


def _assignment(raw: str, line: int, allowed: tuple[str, ...]) -> tuple[str, int, str]:
    key, eq, value = raw.partition("=")
    key = key.strip()
    col = len(raw) - len(raw.lstrip()) + 1
    if not eq:
        raise ScenarioSyntaxError(line, col, "key = value")
    if key not in allowed:
        raise ScenarioSyntaxError(line, col, "one of " + ", ".join(allowed))
    value_col = raw.index("=") + 2 + (len(value) - len(value.lstrip()))
    return key, value_col, value.strip()


def parse_scenario(text: str) -> ScenarioSpec:
    """Parse and validate the scenario file format."""
    section = None
    scalars: dict[str, dict[str, tuple[int, int, str]]] = {k: {} for k in SECTION_KEYS}
    components, edges, relabels = [], [], []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.split("#", 1)[0].rstrip()
        if not raw.strip():
            continue
        stripped = raw.strip()
        col0 = len(raw) - len(raw.lstrip()) + 1

        if stripped.startswith("["):
            name = stripped[1:-1].strip() if stripped.endswith("]") else None
            if name not in SECTIONS:
                raise ScenarioSyntaxError(lineno, col0, "a section header [" + "|".join(SECTIONS) + "]")
            section = name
            continue
        if section is None:
            raise ScenarioSyntaxError(lineno, col0, "a section header")

        if section in SECTION_KEYS:
            key, col, value = _assignment(raw, lineno, SECTION_KEYS[section])
            if key in scalars[section]:
                raise ScenarioSyntaxError(lineno, col0, f"{key} only once")
            scalars[section][key] = (lineno, col, value)
            continue

        tokens = _tokens(raw)
        if section == "components":
            cid = _int(tokens[0][1], lineno, tokens[0][0])
            kv = _pairs(tokens[1:], COMPONENT_KEYS, lineno)
            for required in ("weight", "status"):
                if required not in kv:
                    raise ScenarioSyntaxError(lineno, len(raw) + 1, f"{required}=")
            col, w = kv["weight"]
            weight = _real(w, lineno, col)
            config = tuple(p for p in kv.get("config", (0, ""))[1].split(",") if p)
            pulse = kv.get("pulse", (0, "none"))[1]
            col, st = kv["status"]
            components.append(ComponentDecl(
                cid, weight, config, None if pulse in ("none", "") else pulse, _enum(Status, st, lineno, col),
            ))
        elif section == "edges":
            if len(tokens) < 3 or tokens[1][1] != "->":
                col = tokens[1][0] if len(tokens) > 1 else len(raw) + 1
                raise ScenarioSyntaxError(lineno, col, "<from> -> <to>")
            source = _int(tokens[0][1], lineno, tokens[0][0])
            target = _int(tokens[2][1], lineno, tokens[2][0])
            kv = _pairs(tokens[3:], EDGE_KEYS, lineno)
            for required in EDGE_KEYS:
                if required not in kv:
                    raise ScenarioSyntaxError(lineno, len(raw) + 1, f"{required}=")
            kind = _enum(EdgeKind, kv["kind"][1], lineno, kv["kind"][0])
            edges.append(EdgeDecl(source, target, kind, _profile(kv["profile"][1], lineno, kv["profile"][0])))
        elif section == "relabel":
            cid = _int(tokens[0][1], lineno, tokens[0][0])
            kv = _pairs(tokens[1:], RELABEL_KEYS, lineno)
            for required in ("at", "pulse"):
                if required not in kv:
                    raise ScenarioSyntaxError(lineno, len(raw) + 1, f"{required}=")
            pulse = kv["pulse"][1]
            status = _enum(Status, kv["status"][1], lineno, kv["status"][0]) if "status" in kv else None
            relabels.append(RelabelDecl(
                cid, _real(kv["at"][1], lineno, kv["at"][0]), None if pulse == "none" else pulse, status,
            ))

    meta = scalars["scenario"]
    name = meta["name"][2] if "name" in meta else "unnamed"
    normalize = False
    if "normalize" in meta:
        line, col, value = meta["normalize"]
        if value not in ("true", "false"):
            raise ScenarioSyntaxError(line, col, "true|false")
        normalize = value == "true"

    chain = ()
    if "chain" in scalars["cascade"]:
        line, col, value = scalars["cascade"]["chain"]
        chain = tuple(_int(p.strip(), line, col) for p in value.split(",") if p.strip())

    marks = {k: _real(v, line, col) for k, (line, col, v) in scalars["schedule"].items()}
    schedule = ScheduleMarks(**marks)

    field_decl = None
    if scalars["field"]:
        f = scalars["field"]
        for required in ("width", "height"):
            if required not in f:
                raise ScenarioSyntaxError(max(v[0] for v in f.values()), 1, f"{required} =")
        field_decl = FieldDecl(
            width=_int(f["width"][2], f["width"][0], f["width"][1], "field width"),
            height=_int(f["height"][2], f["height"][0], f["height"][1], "field height"),
            epsilon=_real(f["epsilon"][2], f["epsilon"][0], f["epsilon"][1]) if "epsilon" in f else None,
            kind=f["kind"][2] if "kind" in f else "hue_ramp",
        )

    return validate(ScenarioSpec(
        name, tuple(components), tuple(edges), chain, schedule, tuple(relabels), field_decl, normalize,
    ))


def _profile_text(p: FlowProfile) -> str:
    if isinstance(p, Constant):
        return f"constant:{p.J!r}"
    if isinstance(p, Ramp):
        return f"ramp:{p.J_max!r},{p.t_start!r},{p.t_end!r}"
    return f"rcos:{p.t_start!r},{p.duration!r},{p.total!r}"


def serialize_scenario(spec: ScenarioSpec) -> str:
    """Inverse of ``parse_scenario``; floats are written with repr so they survive bit-exactly."""
    lines = ["[scenario]", f"name = {spec.name}"]
    if spec.normalize:
        lines.append("normalize = true")

    lines += ["", "[components]"]
    for c in spec.components:
        lines.append(
            f"{c.id} weight={c.weight!r} config={','.join(c.config)} "
            f"pulse={c.pulse or 'none'} status={c.status.value}"
        )

    if spec.edges:
        lines += ["", "[edges]"]
        for e in spec.edges:
            lines.append(f"{e.source} -> {e.target} kind={e.kind.value} profile={_profile_text(e.profile)}")

    if spec.cascade_chain:
        lines += ["", "[cascade]", "chain = " + ",".join(str(c) for c in spec.cascade_chain)]

    if spec.relabels:
        lines += ["", "[relabel]"]
        for r in spec.relabels:
            status = f" status={r.status.value}" if r.status is not None else ""
            lines.append(f"{r.component} at={r.at!r} pulse={r.pulse or 'none'}{status}")

    s = spec.schedule
    lines += ["", "[schedule]"]
    for key in SECTION_KEYS["schedule"]:
        value = getattr(s, key)
        if value is not None:
            lines.append(f"{key} = {value!r}")

    if spec.field is not None:
        f = spec.field
        lines += ["", "[field]", f"width = {f.width}", f"height = {f.height}", f"kind = {f.kind}"]
        if f.epsilon is not None:
            lines.append(f"epsilon = {f.epsilon!r}")
    return "\n".join(lines) + "\n"


# ── Resolution ────────────────────────────────────────────────────────────────

def _builtin_args(name: str, args: str, arity: int) -> list[float]:
    parts = [p for p in args.split(",") if p] if args else []
    if len(parts) != arity:
        _fail("builtin arguments", f"{name} takes {arity} value(s), got {args!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        _fail("builtin arguments", f"{name}:{args} is not numeric")


def builtin_scenario(ref: str) -> ScenarioSpec:
    """``classical``, ``quantum[:TOTAL]``, ``quantum_constant:J``, ``quantum_ddd`` or ``terminal:w0,w1``."""
    name, _, args = ref.partition(":")
    if name == "classical" and not args:
        return build_classical()
    if name == "quantum":
        return build_quantum(*_builtin_args(name, args, 1)) if args else build_quantum()
    if name == "quantum_constant":
        return build_quantum(constant_rate=_builtin_args(name, args, 1)[0])
    if name == "quantum_ddd" and not args:
        return build_quantum_ddd()
    if name == "terminal":
        return build_terminal(*_builtin_args(name, args, 2))
    _fail("unknown builtin scenario", ref)


async def load_scenario(ref: str) -> ScenarioSpec:
    """Resolve ``builtin:NAME`` or read and parse a scenario file."""
    if ref.startswith("builtin:"):
        return builtin_scenario(ref[len("builtin:"):])
    async with aiofiles.open(Path(ref), "r", encoding="utf-8") as fh:
        text = await fh.read()
    return parse_scenario(text)
