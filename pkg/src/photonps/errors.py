"""Exception types shared across the package."""


class NonUnitaryError(ValueError):
    """A matrix that was required to be unitary is not, within tolerance."""

    def __init__(self, defect, tol, what="matrix"):
        super().__init__(f"{what} is not unitary: defect {defect:.3e} exceeds {tol:.1e}")
        self.defect = defect
        self.tol = tol


class StructureError(ValueError):
    """A mesh, circuit or graph description violates its structural invariants."""


class CycleError(ValueError):
    """A graph that must be acyclic contains a directed cycle."""

    def __init__(self, cycle):
        super().__init__(f"graph contains a cycle: {' -> '.join(map(str, cycle))}")
        self.cycle = tuple(cycle)


class DegeneratePolicyError(ValueError):
    """No amplitude reaches any action mode; the post-selected policy is undefined."""


class DegenerateRowError(ValueError):
    """A row collapsed to zero norm during re-orthonormalization."""
