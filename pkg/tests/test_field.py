import numpy as np
import pytest

from plugins.helper.errors import OutOfField
from plugins.helper.field import (
    ConsciousPulse, PulseField, branch_field, continuity_check, drift, dump_field,
    edge_states, hue_ramp_field, inject_step, traverse, uniform_field, window,
)


def test_hue_ramp_is_continuous():
    field = hue_ramp_field(16, 5)
    assert field.continuity_bound == pytest.approx(2 / 16)
    assert continuity_check(field) == []
    assert field.point(0, 0).state_vector == (0.0,)
    assert field.point(15, 4).state_vector == (1.0,)


def test_injected_step_is_found_on_every_row():
    field = hue_ramp_field(16, 5)
    broken = inject_step(field, 4, 10 * field.continuity_bound)
    assert continuity_check(broken) == [((3, y), (4, y)) for y in range(5)]


def test_vertical_jumps_are_found():
    values = np.zeros((3, 2, 1))
    values[2, :, 0] = 1.0
    assert continuity_check(PulseField(values, 0.5)) == [((0, 1), (0, 2)), ((1, 1), (1, 2))]


def test_field_values_are_read_only():
    field = uniform_field(3, 3)
    with pytest.raises(ValueError):
        field.values[0, 0, 0] = 1.0


def test_window_weights_are_normalized():
    field = hue_ramp_field(20, 9)
    pts = window(field, ConsciousPulse((10.0, 4.0), 1.5))
    assert sum(w for _, w in pts) == pytest.approx(1.0, abs=1e-12)
    heaviest = max(pts, key=lambda pw: pw[1])[0]
    assert (heaviest.x, heaviest.y) == (10, 4)


def test_narrow_window_falls_back_to_the_nearest_point():
    field = uniform_field(5, 5)
    pts = window(field, ConsciousPulse((2.5, 2.5), 0.01))
    assert [(p.x, p.y, w) for p, w in pts] == [(2, 2, 1.0)]


def test_drift_moves_the_pulse_and_records_its_path():
    field = uniform_field(10, 5)
    pulse = drift(field, ConsciousPulse((1.0, 2.0), 1.0), (2.0, 0.0), 0.5)
    assert pulse.center == (2.0, 2.0)
    assert pulse.trajectory == ((0.0, (1.0, 2.0)), (0.5, (2.0, 2.0)))


def test_drift_off_the_field():
    field = uniform_field(10, 5)
    with pytest.raises(OutOfField):
        drift(field, ConsciousPulse((9.0, 2.0), 1.0), (1.0, 0.0), 0.5)


def test_pulse_width_must_be_positive():
    with pytest.raises(ValueError):
        ConsciousPulse((0.0, 0.0), 0.0)


def test_traverse_sees_green_ahead():
    field = hue_ramp_field(32, 9)
    pulse, samples = traverse(field, ConsciousPulse((3.0, 4.0), 1.0), (1.0, 0.0), 0.5, 50)
    assert pulse.center == (28.0, 4.0)
    assert len(samples) == 51
    for s in samples:
        assert s.weight_sum == pytest.approx(1.0, abs=1e-12)
        assert s.leading[0] > s.trailing[0]


def test_edge_states_need_a_direction():
    with pytest.raises(ValueError):
        edge_states(uniform_field(4, 4), ConsciousPulse((1.0, 1.0), 1.0), (0.0, 0.0))


def test_branch_field_labels_the_two_sides():
    left, right = branch_field(hue_ramp_field(9, 3), 4, "D0", "D1")
    assert (left.width, right.width) == (5, 5)
    assert set(left.labels[:, :4].ravel()) == {"D0"}
    assert set(right.labels[:, 1:].ravel()) == {"D1"}
    assert left.labels[0, 4] == right.labels[0, 0] == ""
    assert left.point(4, 0).state_vector == right.point(0, 0).state_vector
    assert continuity_check(left) == continuity_check(right) == []


def test_branch_column_out_of_range():
    with pytest.raises(ValueError):
        branch_field(hue_ramp_field(9, 3), 9, "D0", "D1")


def test_dump_field():
    assert dump_field(uniform_field(2, 2, 0.5)) == "0.5 0.5\n0.5 0.5\n"


def test_window_columns_share_one_state():
    field = hue_ramp_field(20, 9)
    columns = {}
    for point, _ in window(field, ConsciousPulse((10.0, 4.0), 1.5)):
        columns.setdefault(point.x, set()).add(point.state_vector)
    assert len(columns) > 1
    assert all(len(states) == 1 for states in columns.values())


def test_midway_center_weighs_both_points_equally():
    pts = window(uniform_field(2, 1), ConsciousPulse((0.5, 0.0), 1.0))
    assert [(p.x, p.y) for p, _ in pts] == [(0, 0), (1, 0)]
    assert pts[0][1] == pts[1][1] == 0.5


def test_vanishing_width_is_a_delta_on_the_center():
    pts = window(hue_ramp_field(8, 5), ConsciousPulse((3.0, 2.0), 1e-6))
    assert [(p.x, p.y, w) for p, w in pts] == [(3, 2, 1.0)]


def _window_mean(field, pulse):
    return sum(w * p.state_vector[0] for p, w in window(field, pulse))


def test_window_contents_change_in_proportion_to_the_step():
    field = hue_ramp_field(40, 9)
    pulse = ConsciousPulse((10.5, 4.0), 1.0)
    start = _window_mean(field, pulse)
    full = _window_mean(field, drift(field, pulse, (1.0, 0.0), 0.2)) - start
    half = _window_mean(field, drift(field, pulse, (1.0, 0.0), 0.1)) - start
    assert full > 0.0
    assert half / full == pytest.approx(0.5, abs=0.02)
