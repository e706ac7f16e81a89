"""Tolerances and constants shared by every module."""

from dataclasses import dataclass, replace

# Admissible Berry-Esseen constant for sums of independent, not necessarily
# identically distributed, summands.
C_BE_DEFAULT = 0.56


@dataclass(frozen=True)
class SolverConfig:
    """Single configuration record for the numerical routines.

    Attributes
    ----------
    abs_tol, rel_tol : float
        Bisection stops when the bracket is narrower than
        ``abs_tol + rel_tol * |x|``.
    max_iter : int
        Iteration cap for every bracketed solver.
    lambda_bracket_growth : float
        Factor by which the upper tilt bracket grows while searching.
    lambda_max : float
        Largest tilt considered; ``delta(lambda_max)`` is the soft cap on
        deviations.
    c_be : float
        Berry-Esseen constant.
    gh_nodes : int
        Starting Gauss-Hermite node count for Gaussian-output channels.
    quad_tol : float
        Required agreement between a quadrature rule and its doubled rule.
    lambda_grid : int
        Resolution of the grid used to locate the monotonicity limit of g.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 200
    lambda_bracket_growth: float = 2.0
    lambda_max: float = 64.0
    c_be: float = C_BE_DEFAULT
    gh_nodes: int = 96
    quad_tol: float = 1e-9
    lambda_grid: int = 1024

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not self.lambda_bracket_growth > 1:
            raise ValueError("lambda_bracket_growth must exceed 1")
        if not 0 < self.c_be < 1:
            raise ValueError("c_be must lie in (0, 1)")

    def with_(self, **kw):
        return replace(self, **kw)


DEFAULT = SolverConfig()
