"""Exception hierarchy.

Every failure mode raised by this package derives from :class:`PocError`,
grouped by the layer that detects it (data validation, query handling, bound
evaluation, LP oracle, instance generation).  Errors carry the offending
coordinates so callers can report *which* invariant failed, not just that one
did.  All indices in error payloads are 1-based, matching the public API.
"""

from __future__ import annotations


class PocError(Exception):
    """Base class for all package errors."""


# --- dataset validation -----------------------------------------------------


class DatasetError(PocError):
    pass


class ShapeMismatch(DatasetError):
    """Matrix dimensions are inconsistent or below the 2x2 minimum."""


class EntryRangeViolation(DatasetError):
    """An entry lies outside [0, 1] by more than the tolerance."""

    def __init__(self, matrix: str, cell: tuple[int, int], value: float):
        self.matrix = matrix
        self.cell = cell
        self.value = value
        super().__init__(f"{matrix}[{cell[0]},{cell[1]}] = {value!r} outside [0, 1]")


class RowSumViolation(DatasetError):
    """An experimental row does not sum to 1 within tolerance."""

    def __init__(self, row: int, residual: float):
        self.row = row
        self.residual = residual
        super().__init__(f"experimental row {row} sums to 1{residual:+.3e}")


class JointSumViolation(DatasetError):
    """The observational matrix does not sum to 1 within tolerance."""

    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"observational entries sum to 1{residual:+.3e}")


class CompatibilityViolation(DatasetError):
    """A cell violates P(x,y) <= P(y|do(x)) <= 1 - P(x) + P(x,y)."""

    def __init__(self, cell: tuple[int, int], residual: float, side: str):
        self.cell = cell
        self.residual = residual
        self.side = side
        super().__init__(
            f"compatibility violated at cell {cell} ({side} side, residual {residual:.3e})"
        )


class IndexOutOfRange(DatasetError):
    def __init__(self, what: str, index: int, limit: int):
        self.what = what
        self.index = index
        self.limit = limit
        super().__init__(f"{what} index {index} outside 1..{limit}")


# --- query parsing / canonicalization ---------------------------------------


class QueryError(PocError):
    pass


class QuerySyntaxError(QueryError):
    """Malformed query text; carries the character position and expectation."""

    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"at position {position}: expected {expected}")


class DuplicateTreatment(QueryError):
    def __init__(self, treatment: int):
        self.treatment = treatment
        super().__init__(f"treatment x{treatment} appears in more than one atom")


class EvidenceConflict(QueryError):
    def __init__(self, treatment: int):
        self.treatment = treatment
        super().__init__(f"x-evidence x{treatment} is also a queried treatment")


class MultipleEvidence(QueryError):
    def __init__(self, kind: str):
        self.kind = kind
        super().__init__(f"more than one {kind}-evidence term")


# --- bound evaluation --------------------------------------------------------


class BoundsError(PocError):
    pass


class FamilyMismatch(BoundsError):
    def __init__(self, expected: str, got: str):
        self.expected = expected
        self.got = got
        super().__init__(f"expected a {expected} query, got {got}")


class DimensionTooSmall(BoundsError):
    def __init__(self, k: int, n: int):
        self.k = k
        self.n = n
        super().__init__(f"conjunction size k={k} exceeds dimension n={n}")


class ZeroDenominator(BoundsError):
    """Conditional query whose evidence event has probability zero."""


# --- LP oracle ---------------------------------------------------------------


class LpError(PocError):
    pass


class DimensionCapExceeded(LpError):
    def __init__(self, side: int, cap: int):
        self.side = side
        self.cap = cap
        super().__init__(
            f"LP oracle capped at side {cap}; dataset has side {side} "
            f"(override with a larger cap if you accept the cost)"
        )


class Infeasible(LpError):
    """The constraint polytope is empty (data admit no SCM)."""


class Unbounded(LpError):
    """Internal error: this constraint family is always bounded."""


# --- instance generation / harness -------------------------------------------


class ScmError(PocError):
    pass


class RejectionBudgetExceeded(ScmError):
    def __init__(self, tries: int):
        self.tries = tries
        super().__init__(f"no compatible dataset found in {tries} rejection draws")


class SoundnessViolation(PocError):
    """A computed interval failed to contain a value it must contain."""
