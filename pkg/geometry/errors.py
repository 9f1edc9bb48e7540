"Exception hierarchy shared by the geometry modules."

from __future__ import annotations


class GeometryError(ValueError):
    """Base class for every failure raised by the geometry layer."""


class InvalidInputError(GeometryError):
    pass


class UnsupportedError(GeometryError):
    pass


class JetDomainError(GeometryError):
    """An elementary function was applied outside its domain."""

    def __init__(self, message: str, value: float) -> None:
        super().__init__(f"{message} (value={value!r})")
        self.value = value


class DegenerateFormError(GeometryError):
    pass


class LinearSolveError(GeometryError):
    def __init__(self, message: str, condition: float) -> None:
        super().__init__(f"{message} (condition={condition:.3e})")
        self.condition = condition


class ChartDomainError(GeometryError):
    pass


class InvalidFamilyError(GeometryError):
    pass


class ProjectionError(GeometryError):
    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (last residual={residual:.3e})")
        self.residual = residual


class NearFocalError(GeometryError):
    pass


class FocalSearchError(GeometryError):
    pass


class UnreliableFitError(GeometryError):
    def __init__(self, message: str, condition: float) -> None:
        super().__init__(f"{message} (condition={condition:.3e})")
        self.condition = condition


class PivotError(GeometryError):
    pass


class DegenerateFrameError(GeometryError):
    def __init__(self, message: str, rank: int) -> None:
        super().__init__(f"{message} (rank={rank})")
        self.rank = rank
