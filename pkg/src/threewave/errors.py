"""Exception hierarchy shared by all threewave modules."""


class ThreeWaveError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ThreeWaveError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class PoleError(DomainError):
    """Evaluation requested at (or numerically on) a pole of an elliptic function."""


class DegenerateLatticeError(ThreeWaveError):
    """Weierstrass invariants with vanishing (or wrong-sign) discriminant."""


class DegenerateMotionError(ThreeWaveError):
    """Equilibrium/separatrix motion with no oscillatory elliptic solution."""


class NoPhysicalBracketError(ThreeWaveError):
    """The energy cubic is negative at the initial action, so no motion exists there."""


class SingularityError(DomainError):
    """A reduced coordinate formula was evaluated on its singular set."""


class NonConvergenceError(ThreeWaveError, ArithmeticError):
    """A quadrature or iteration exhausted its budget before meeting tolerance."""


class StepUnderflowError(ThreeWaveError, ArithmeticError):
    """The ODE step-size controller drove the step below its floor."""


class CapabilityError(ThreeWaveError):
    """The requested method cannot handle this input (e.g. explicit roots with L > 8)."""


class TruncationError(ThreeWaveError):
    """A Fock-space truncation too small for the requested invariant block."""


class OrderError(ThreeWaveError, ValueError):
    """An operator word is not in normal order."""
