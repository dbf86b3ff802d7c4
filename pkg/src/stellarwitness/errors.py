"""Exception types shared across the package."""


class TailBoundError(ValueError):
    """A Fock-space truncation leaves too much probability mass unaccounted for.

    Carries the measured defect so callers can pick a larger cutoff.
    """

    def __init__(self, message: str, defect: float):
        super().__init__(f"{message} (measured defect {defect:.3e})")
        self.defect = defect


class DegenerateWitnessError(ValueError):
    """The requested witness is degenerate (e.g. identical projectors)."""


class HermiticityError(ValueError):
    """An expectation value carries an imaginary residue above tolerance."""


class OptimizerError(RuntimeError):
    """No optimizer start converged; carries the per-start trace."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace or []
