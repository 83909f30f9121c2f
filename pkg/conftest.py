import pytest

from plugins.config import Config
from plugins.helper.dynamics import CurrentEdge, CurrentGraph, EdgeKind, RaisedCosine
from plugins.helper.scenarios import build_quantum, build_quantum_ddd, build_terminal
from plugins.helper.state import Component, Status, SystemState


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    """Monte Carlo runs in-process unless a test asks for a pool."""
    monkeypatch.setattr(Config, "THREADS", 1)


@pytest.fixture
def quantum_spec():
    return build_quantum()


@pytest.fixture
def ddd_spec():
    return build_quantum_ddd()


@pytest.fixture
def terminal_spec():
    return build_terminal(0.3, 0.7)


@pytest.fixture
def two_component_state():
    """Observer {B0} conscious with all the weight, ready {B1} empty."""
    return SystemState([
        Component(0, 1.0, ("D0",), "B0", Status.CONSCIOUS),
        Component(1, 0.0, ("D1",), "B1", Status.READY),
    ])


@pytest.fixture
def branching_graph():
    return CurrentGraph([CurrentEdge(0, 1, RaisedCosine(0.0, 2.0, 1.0), EdgeKind.BRANCHING)])
