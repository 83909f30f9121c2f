"""Exception hierarchy.

Bad input (``ScenarioError``, ``UsageError``) exits the CLI with code 1;
``InvariantViolation`` marks states the dynamics must never reach (exit code 2).
"""


class ReduceSimError(Exception):
    """Base class. ``t`` and ``seed`` are filled in by whoever knows them."""

    def __init__(self, message: str, t: float | None = None, seed: int | None = None):
        super().__init__(message)
        self.message = message
        self.t = t
        self.seed = seed

    def annotate(self, t: float | None = None, seed: int | None = None) -> "ReduceSimError":
        if t is not None and self.t is None:
            self.t = t
        if seed is not None and self.seed is None:
            self.seed = seed
        return self

    def __str__(self) -> str:
        parts = [self.message]
        if self.t is not None:
            parts.append(f"t={self.t:.6g}")
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        return " | ".join(parts)


# ── Input errors ──────────────────────────────────────────────────────────────

class ScenarioError(ReduceSimError):
    exit_code = 1


class ScenarioSyntaxError(ScenarioError):
    def __init__(self, line: int, col: int, expected: str):
        super().__init__(f"line {line}, col {col}: expected {expected}")
        self.line = line
        self.col = col
        self.expected = expected


class ScenarioValidationError(ScenarioError):
    def __init__(self, invariant: str, detail: str = ""):
        super().__init__(f"{invariant}: {detail}" if detail else invariant)
        self.invariant = invariant


class InvalidWeights(ScenarioError):
    pass


class UsageError(ReduceSimError):
    """Bad command-line arguments."""
    exit_code = 1


# ── Runtime invariant violations ──────────────────────────────────────────────

class InvariantViolation(ReduceSimError):
    exit_code = 2


class MultipleConscious(InvariantViolation):
    pass


class UnknownComponent(InvariantViolation):
    pass


class NegativeWeight(InvariantViolation):
    pass


class TargetNotReady(InvariantViolation):
    pass


class NotCollapsed(InvariantViolation):
    pass


class OutOfField(InvariantViolation):
    pass
