import math

import pytest

from plugins.helper.dynamics import (
    Constant, CurrentEdge, CurrentGraph, EdgeKind, RaisedCosine, Ramp,
    check_conservation, effective_current, step, step_with_report,
)
from plugins.helper.errors import NegativeWeight, UnknownComponent
from plugins.helper.state import Component, Phase, Status, SystemState, total_weight


def _plain_pair(w0=1.0, w1=0.0):
    return SystemState([Component(0, w0, ("D",), "X"), Component(1, w1, ("D",), "Y")])


def _edge(profile, kind=EdgeKind.CONTINUOUS, source=0, target=1):
    return CurrentEdge(source, target, profile, kind)


# ── Profiles ──────────────────────────────────────────────────────────────────

def test_raised_cosine_closed_forms():
    p = RaisedCosine(1.0, 2.0, 0.25)
    assert p.transferred(0.0, 10.0) == pytest.approx(0.25, abs=1e-15)
    assert p.transferred(1.0, 2.0) == pytest.approx(0.125, abs=1e-15)
    assert p.rate(2.0) == pytest.approx(0.25)
    assert p.rate(0.5) == 0.0
    assert p.end == 3.0


def test_constant_and_ramp():
    assert Constant(0.5).transferred(0.0, 2.0) == 1.0
    ramp = Ramp(1.0, 0.0, 2.0)
    assert ramp.rate(1.0) == 0.5
    assert ramp.rate(5.0) == 1.0
    assert ramp.transferred(0.0, 2.0) == pytest.approx(1.0)
    assert ramp.transferred(2.0, 3.0) == pytest.approx(1.0)


def test_shifted_profiles():
    assert RaisedCosine(0.0, 1.0, 1.0).shifted(2.5) == RaisedCosine(2.5, 1.0, 1.0)
    assert Constant(0.3).shifted(4.0) == Constant(0.3)


# ── Graph ─────────────────────────────────────────────────────────────────────

def test_self_loop_is_rejected():
    with pytest.raises(ValueError):
        CurrentEdge(1, 1, Constant(1.0))


def test_duplicate_edge_is_rejected():
    with pytest.raises(ValueError):
        CurrentGraph([_edge(Constant(1.0)), _edge(Constant(2.0))])


# ── Effective current ─────────────────────────────────────────────────────────

def test_ready_source_passes_no_current():
    state = _plain_pair(0.0, 1.0)
    state.components[0].status = Status.READY
    state.components[0].pulse_label = "B"
    assert effective_current(_edge(Constant(1.0)), state, 0.0) == 0.0


def test_collapsed_phase_gates_edges_off_the_chain():
    state = _plain_pair()
    state.phase = Phase.COLLAPSED
    assert effective_current(_edge(Constant(1.0)), state, 0.0) == 0.0
    state.cascade_chain = (0, 1)
    assert effective_current(_edge(Constant(1.0)), state, 0.0) == 1.0


def test_rate_clamped_to_source_weight():
    state = _plain_pair(0.1, 0.9)
    assert effective_current(_edge(Constant(1.0)), state, 0.0, dt=1.0) == pytest.approx(0.1)


def test_edge_to_missing_component():
    with pytest.raises(UnknownComponent):
        effective_current(_edge(Constant(1.0), target=5), _plain_pair(), 0.0)


# ── Step ──────────────────────────────────────────────────────────────────────

def test_step_moves_weight_and_conserves():
    graph = CurrentGraph([_edge(Constant(0.5))])
    new = step(_plain_pair(), graph, 0.01)
    assert new.weights() == pytest.approx([0.995, 0.005])
    assert new.time == 0.01
    assert check_conservation(new, 1e-15)


def test_step_returns_a_new_state():
    state = _plain_pair()
    step(state, CurrentGraph([_edge(Constant(0.5))]), 0.01)
    assert state.weights() == [1.0, 0.0]
    assert state.time == 0.0


def test_overdraw_is_truncated():
    new, report = step_with_report(_plain_pair(0.001, 0.999), CurrentGraph([_edge(Constant(1.0))]), 0.01)
    assert report.clamped == 1
    assert new.weights()[0] == 0.0
    assert report.transfers[0] == 0.001


def test_inbound_into_ready_components_is_reported(two_component_state, branching_graph):
    new, report = step_with_report(two_component_state, branching_graph, 0.5)
    assert set(report.inbound_ready) == {1}
    assert report.inbound_ready[1] == new.weights()[1]


def test_step_rejects_nonpositive_dt():
    with pytest.raises(ValueError):
        step(_plain_pair(), CurrentGraph(), 0.0)


def test_negative_weight_is_an_invariant_violation():
    with pytest.raises(NegativeWeight):
        step(_plain_pair(1.000001, -1e-6), CurrentGraph(), 0.01)


def test_long_run_conserves_weight():
    graph = CurrentGraph([
        _edge(RaisedCosine(0.0, 1.0, 0.6)),
        _edge(RaisedCosine(0.5, 1.0, 0.3), source=1, target=2),
    ])
    state = SystemState([Component(i, 1.0 if i == 0 else 0.0) for i in range(3)])
    worst_drift = 0.0
    for _ in range(2000):
        state, report = step_with_report(state, graph, 1e-3)
        worst_drift = max(worst_drift, abs(report.drift))
        assert abs(total_weight(state) - 1.0) <= 1e-9
    assert worst_drift <= 1e-12
    assert state.weights() == pytest.approx([0.4, 0.3, 0.3], abs=1e-9)


def _error_at(dt: float, t_end: float) -> float:
    profile = RaisedCosine(0.0, 0.1, 1.0)
    graph = CurrentGraph([_edge(profile)])
    state = _plain_pair()
    for _ in range(int(round(t_end / dt))):
        state = step(state, graph, dt)
    return abs(state.weights()[1] - profile.transferred(0.0, state.time))


def test_integrator_is_fourth_order():
    coarse = _error_at(2e-3, 0.03)
    fine = _error_at(1e-3, 0.03)
    assert coarse > 0.0
    assert coarse / fine >= 8.0


def test_consciousness_follows_the_weight():
    state = _plain_pair()
    state.components[0].status = Status.CONSCIOUS
    graph = CurrentGraph([_edge(RaisedCosine(0.0, 1.0, 1.0))])
    for _ in range(1000):
        state = step(state, graph, 1e-3)
    assert state.statuses() == [Status.PLAIN, Status.CONSCIOUS]
    assert math.isclose(state.weights()[1], 1.0, abs_tol=1e-9)


def test_raised_cosine_peak_keeps_the_exact_total():
    # peak 2·total/duration (not π/4 for this profile) so the pulse integrates to ``total``
    p = RaisedCosine(0.0, 2.0, 1.0)
    assert p.rate(1.0) == pytest.approx(1.0)
    assert p.transferred(0.0, 2.0) == pytest.approx(1.0, abs=1e-15)


def test_sources_only_drain_and_sinks_only_fill():
    graph = CurrentGraph([
        _edge(RaisedCosine(0.0, 1.0, 0.7)),
        _edge(RaisedCosine(0.3, 1.0, 0.5), source=1, target=2),
    ])
    state = SystemState([Component(i, 1.0 if i == 0 else 0.0) for i in range(3)])
    previous = state.weights()
    for _ in range(1500):
        state = step(state, graph, 1e-3)
        w = state.weights()
        assert w[0] <= previous[0]
        assert w[2] >= previous[2]
        previous = w


def test_empty_source_moves_nothing_and_is_not_clamped():
    new, report = step_with_report(_plain_pair(0.0, 1.0), CurrentGraph([_edge(Constant(1.0))]), 0.01)
    assert new.weights() == [0.0, 1.0]
    assert report.clamped == 0
    assert report.transfers[0] == 0.0


def test_pinned_step_clock():
    new = step(_plain_pair(), CurrentGraph([_edge(Constant(0.5))]), 0.1, t_end=0.3)
    assert new.time == 0.3
