import asyncio
import math
from pathlib import Path

import pytest

from plugins.helper.dynamics import Constant, EdgeKind, effective_current
from plugins.helper.errors import InvalidWeights, ScenarioSyntaxError, ScenarioValidationError
from plugins.helper.scenarios import (
    FieldDecl, builtin_scenario, build_classical, build_quantum, build_quantum_ddd,
    build_terminal, load_scenario, parse_scenario, serialize_scenario,
)
from plugins.helper.state import Status

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

WEIGHTS_OFF = """
[scenario]
name = short

[components]
0 weight=0.6 config=D0 pulse=B0 status=conscious
1 weight=0.3 config=D1 pulse=B1 status=ready

[edges]
0 -> 1 kind=branching profile=rcos:1.0,2.0,0.3
"""

PULSELESS_READY = """
[scenario]
name = ancilla

[components]
0 weight=1.0 config=D0 pulse=B0 status=conscious
1 weight=0.0 config=A pulse=none status=ready

[edges]
0 -> 1 kind=branching profile=constant:0.5
"""


@pytest.mark.parametrize("spec", [
    build_classical(),
    build_quantum(),
    build_quantum(0.25),
    build_quantum(constant_rate=0.5),
    build_quantum_ddd(),
    build_terminal(0.3, 0.7),
    build_terminal(0.5, 0.5),
], ids=lambda s: s.name)
def test_builtins_round_trip(spec):
    text = serialize_scenario(spec)
    assert parse_scenario(text) == spec
    assert serialize_scenario(parse_scenario(text)) == text


def test_weights_must_sum_to_one():
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(WEIGHTS_OFF)
    assert exc.value.invariant == "weights must sum to 1"


def test_normalize_flag_rescales():
    spec = parse_scenario(WEIGHTS_OFF.replace("name = short", "name = short\nnormalize = true"))
    assert spec.normalize
    assert math.fsum(spec.initial_state().weights()) == pytest.approx(1.0, abs=1e-15)


def test_ready_target_needs_a_brain_pulse():
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(PULSELESS_READY)
    assert exc.value.invariant == "rule-2 target must carry a brain pulse"


def test_brainless_branch_target_is_plain():
    spec = parse_scenario(PULSELESS_READY.replace("status=ready", "status=plain"))
    assert spec.components[1].status is Status.PLAIN


def test_ready_component_needs_a_branching_edge():
    text = PULSELESS_READY.replace("pulse=none", "pulse=B1").replace("kind=branching", "kind=continuous")
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(text)
    assert exc.value.invariant == "ready component must be created by a branching edge"


@pytest.mark.parametrize("edit, invariant", [
    (("0 -> 1 kind=branching profile=constant:0.5", "0 -> 1 kind=branching profile=constant:0.5\n0 -> 1 kind=continuous profile=constant:0.1"), "duplicate edge"),
    (("0 -> 1", "0 -> 4"), "unknown component"),
    (("status=conscious", "status=conscious\n2 weight=0.0 config=D pulse=B status=conscious"), "at most one conscious component"),
    (("constant:0.5", "constant:-0.5"), "currents must be nonnegative"),
])
def test_named_invariants(edit, invariant):
    text = PULSELESS_READY.replace("pulse=none", "pulse=B1").replace(*edit)
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(text)
    assert exc.value.invariant == invariant


def test_schedule_ordering():
    text = serialize_scenario(build_terminal(0.5, 0.5)).replace("t_f = 0.0", "t_f = 2.0")
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(text)
    assert exc.value.invariant == "schedule ordering"


def test_cascade_links_must_be_continuous():
    text = serialize_scenario(build_quantum_ddd()).replace(
        "2 -> 3 kind=continuous", "2 -> 3 kind=branching"
    )
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(text)
    assert exc.value.invariant == "cascade links must be continuous edges"


def test_unknown_key_reports_line_and_column():
    text = "[scenario]\nname = x\n\n[components]\n0 weight=1.0 colour=red status=plain\n"
    with pytest.raises(ScenarioSyntaxError) as exc:
        parse_scenario(text)
    assert (exc.value.line, exc.value.col) == (5, 14)


def test_bad_number_and_section():
    with pytest.raises(ScenarioSyntaxError) as exc:
        parse_scenario("[components]\n0 weight=lots status=plain\n")
    assert exc.value.line == 2
    assert exc.value.expected == "a real number"
    with pytest.raises(ScenarioSyntaxError):
        parse_scenario("[nonsense]\n")
    with pytest.raises(ScenarioSyntaxError):
        parse_scenario("name = orphan\n")


def test_comments_and_blank_lines_are_ignored():
    text = "# header\n" + serialize_scenario(build_quantum()).replace("[edges]", "[edges]  # the only edge\n\n")
    assert parse_scenario(text) == build_quantum()


def test_terminal_needs_born_weights():
    with pytest.raises(InvalidWeights):
        build_terminal(0.3, 0.6)
    with pytest.raises(InvalidWeights):
        build_terminal(1.0, 0.0)


def test_terminal_relabels_the_heavier_row():
    spec = build_terminal(0.3, 0.7)
    assert [(r.component, r.pulse, r.status) for r in spec.relabels] == [
        (0, "B", None), (1, "B", Status.CONSCIOUS),
    ]
    assert not any(c.status is Status.CONSCIOUS for c in spec.components)


def test_ddd_cascade_links_are_part_of_the_pre_hit_graph():
    spec = build_quantum_ddd()
    assert [(e.source, e.target) for e in spec.graph().edges] == [(0, 1), (1, 2), (2, 3)]
    assert len(spec.cascade_profiles()) == 2


def test_ready_detector_blocks_its_cascade_link():
    spec = build_quantum_ddd()
    state = spec.initial_state()
    state.components[1].weight = 0.5
    link = spec.graph().edge(1, 2)
    assert link.profile.rate(0.3) > 0.0
    assert effective_current(link, state, 0.3) == 0.0


def test_branching_target_with_a_brain_pulse_must_be_ready():
    text = PULSELESS_READY.replace("pulse=none status=ready", "pulse=B1 status=plain")
    with pytest.raises(ScenarioValidationError) as exc:
        parse_scenario(text)
    assert exc.value.invariant == "branching target with a brain pulse must be ready"


def test_field_size_errors_name_the_field():
    text = serialize_scenario(build_quantum()) + "\n[field]\nwidth = wide\nheight = 4\n"
    with pytest.raises(ScenarioSyntaxError) as exc:
        parse_scenario(text)
    assert exc.value.expected == "an integer field width"


def test_component_id_errors_name_the_id():
    with pytest.raises(ScenarioSyntaxError) as exc:
        parse_scenario("[components]\nzero weight=1.0 status=plain\n")
    assert exc.value.expected == "an integer component id"


def test_constant_rate_variant():
    spec = build_quantum(constant_rate=0.5)
    assert spec.edges[0].profile == Constant(0.5)
    assert spec.edges[0].kind is EdgeKind.BRANCHING


def test_builtin_references():
    assert builtin_scenario("terminal:0.3,0.7") == build_terminal(0.3, 0.7)
    assert builtin_scenario("quantum:0.25") == build_quantum(0.25)
    with pytest.raises(ScenarioValidationError):
        builtin_scenario("quantum_ddd:3")
    with pytest.raises(ScenarioValidationError):
        builtin_scenario("wormhole")


def test_load_scenario_files():
    quantum = asyncio.run(load_scenario(str(SCENARIO_DIR / "quantum.scn")))
    assert quantum.components == build_quantum().components
    assert quantum.edges == build_quantum().edges

    ddd = asyncio.run(load_scenario(str(SCENARIO_DIR / "quantum_ddd.scn")))
    assert ddd.cascade_chain == (1, 2, 3)

    terminal = asyncio.run(load_scenario(str(SCENARIO_DIR / "terminal.scn")))
    assert terminal.components == build_terminal(0.3, 0.7).components

    ramp = asyncio.run(load_scenario(str(SCENARIO_DIR / "hue_ramp.scn")))
    assert ramp.field == FieldDecl(32, 9)
    assert ramp.build_field().width == 32


def test_load_builtin():
    assert asyncio.run(load_scenario("builtin:classical")) == build_classical()


def test_missing_file_is_an_os_error(tmp_path):
    with pytest.raises(OSError):
        asyncio.run(load_scenario(str(tmp_path / "absent.scn")))
