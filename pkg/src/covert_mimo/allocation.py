"""Constellation power design for the covert BPSK scheme.

Both covertness metrics reduce, to first order, to the same program over a
diagonal design matrix ``T``::

    maximize   tr(Lambda_b^2 T) / (2 sigma_b^2)
    subject to tr(Lambda_w^4 T^2) / (4 sigma_w^4) <= bound

with ``bound = 2`` for variational distance and ``bound = 1`` for relative
entropy.  Per-symbol powers follow as ``rho = T * d / sqrt(n)`` (or
``T * sqrt(delta / n)`` for the relative-entropy scaling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capacity import covertness_d
from .errors import ConvergenceFailure, DomainError, InfeasibleBudget, ValidationError

V_BOUND = 2.0
D_BOUND = 1.0
DEFAULT_SLACK_C = 1.0


@dataclass(frozen=True)
class AllocationResult:
    T: np.ndarray
    mu: float
    objective: float
    constraint: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.constraint

    def as_dict(self) -> dict:
        return {
            "T": [float(t) for t in self.T],
            "mu": self.mu,
            "objective": self.objective,
            "constraint": self.constraint,
            "bound": self.bound,
            "margin": self.margin,
        }


@dataclass(frozen=True)
class Constellation:
    n: int
    delta: float
    rho: np.ndarray
    amplitudes: np.ndarray
    Q_n: np.ndarray | None
    metric: str = "v"

    def as_dict(self) -> dict:
        out = {
            "n": self.n,
            "delta": self.delta,
            "metric": self.metric,
            "rho": [float(r) for r in self.rho],
            "amplitudes": [float(a) for a in self.amplitudes],
        }
        if self.Q_n is not None:
            out["Q_n"] = self.Q_n.tolist()
        return out


@dataclass(frozen=True)
class FeasibilityCheck:
    feasible: bool
    budget: float
    margin: float
    shrink: float


def _gains(gsvd):
    lb = np.asarray(gsvd.lambda_b, dtype=float)
    lw = np.asarray(gsvd.lambda_w, dtype=float)
    if np.any(lw < 1e-12 * lw.max()):
        raise ValidationError("lambda_w", "warden gain degenerate; full-rank pair required")
    return lb, lw


def objective_value(gsvd, T, sigma_b2) -> float:
    return float(np.sum(np.asarray(gsvd.lambda_b) ** 2 * T)) / (2.0 * sigma_b2)


def constraint_value(gsvd, T, sigma_w2) -> float:
    """tr(Lambda_w^4 T^2) / (4 sigma_w^4)."""
    return float(np.sum(np.asarray(gsvd.lambda_w) ** 4 * np.asarray(T) ** 2)) / (4.0 * sigma_w2**2)


def _closed_form(gsvd, sigma_b2, sigma_w2, scale, bound):
    lb, lw = _gains(gsvd)
    tr4 = float(np.sum((lb / lw) ** 4))
    T = scale * sigma_w2 * lb**2 / lw**4 / math.sqrt(tr4)
    mu = sigma_w2 / (2.0 * math.sqrt(bound) * sigma_b2) * math.sqrt(tr4)
    return AllocationResult(
        T=T,
        mu=mu,
        objective=objective_value(gsvd, T, sigma_b2),
        constraint=constraint_value(gsvd, T, sigma_w2),
        bound=bound,
    )


def solve_allocation_v(gsvd, sigma_b2: float, sigma_w2: float) -> AllocationResult:
    """Optimal design under the variational-distance constraint (bound 2)."""
    return _closed_form(gsvd, sigma_b2, sigma_w2, 2.0 * math.sqrt(2.0), V_BOUND)


def solve_allocation_d(gsvd, sigma_b2: float, sigma_w2: float) -> AllocationResult:
    """Optimal design under the relative-entropy constraint (bound 1)."""
    return _closed_form(gsvd, sigma_b2, sigma_w2, 2.0, D_BOUND)


def numeric_oracle_allocation(
    gsvd, sigma_b2: float, sigma_w2: float, bound: float, tol: float = 1e-10, max_iter: int = 200
) -> AllocationResult:
    """Solve the design program by bisection on the Lagrange multiplier.

    Stationarity of the Lagrangian gives ``T_j(mu) = lambda_b^2 sigma_w^4 /
    (mu sigma_b^2 lambda_w^4)``; the constraint is decreasing in ``mu`` and is
    driven to ``bound`` within relative tolerance ``tol``.
    """
    if not bound > 0:
        raise DomainError(f"bound must be positive, got {bound}")
    lb, lw = _gains(gsvd)

    def design(mu):
        return lb**2 * sigma_w2**2 / (mu * sigma_b2 * lw**4)

    def excess(mu):
        return constraint_value(gsvd, design(mu), sigma_w2) - bound

    lo, hi = 1.0, 1.0
    while excess(lo) < 0:
        lo *= 0.5
        if lo < 1e-300:
            raise ConvergenceFailure("could not bracket the multiplier from below")
    while excess(hi) > 0:
        hi *= 2.0
        if hi > 1e300:
            raise ConvergenceFailure("could not bracket the multiplier from above")

    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        e = excess(mid)
        if abs(e) <= tol * bound:
            T = design(mid)
            return AllocationResult(
                T=T,
                mu=mid,
                objective=objective_value(gsvd, T, sigma_b2),
                constraint=constraint_value(gsvd, T, sigma_w2),
                bound=float(bound),
            )
        if e > 0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceFailure(f"bisection did not reach tolerance {tol} in {max_iter} iterations")


def perturbed_feasibility(
    alloc: AllocationResult, n: int, delta: float, C: float = DEFAULT_SLACK_C
) -> FeasibilityCheck:
    """Check the finite-n constraint ``<= 2 - C / (sqrt(n) d)`` and the shrink
    factor ``s`` such that ``s * T`` satisfies it."""
    if n < 1:
        raise DomainError(f"blocklength must be positive, got {n}")
    if C < 0:
        raise DomainError(f"C must be non-negative, got {C}")
    budget = V_BOUND - C / (math.sqrt(n) * covertness_d(delta))
    if budget <= 0:
        raise InfeasibleBudget(f"2 - C/(sqrt(n) d) = {budget:.3g} <= 0; n={n} too small")
    feasible = alloc.constraint <= budget + 1e-9
    shrink = 1.0 if feasible else math.sqrt(budget / alloc.constraint)
    return FeasibilityCheck(feasible=feasible, budget=budget, margin=budget - alloc.constraint, shrink=shrink)


def shrink_allocation(alloc: AllocationResult, s: float, gsvd, sigma_b2, sigma_w2) -> AllocationResult:
    T = alloc.T * s
    return AllocationResult(
        T=T,
        mu=alloc.mu,
        objective=objective_value(gsvd, T, sigma_b2),
        constraint=constraint_value(gsvd, T, sigma_w2),
        bound=alloc.bound,
    )


def build_constellation(alloc: AllocationResult, gsvd, n: int, delta: float, metric: str = "v") -> Constellation:
    """Per-symbol BPSK powers for blocklength ``n``.

    ``metric="v"`` scales by ``d / sqrt(n)``, ``metric="d"`` by
    ``sqrt(delta / n)``.  ``Q_n = V^-T diag(rho) V^-1`` is filled in when
    ``gsvd`` carries a ``V`` factor.
    """
    if n < 1:
        raise DomainError(f"blocklength must be positive, got {n}")
    if metric == "v":
        per_symbol = covertness_d(delta) / math.sqrt(n)
    elif metric == "d":
        if not 0 < delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {delta}")
        per_symbol = math.sqrt(delta / n)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    rho = np.asarray(alloc.T, dtype=float) * per_symbol
    Q_n = None
    V = getattr(gsvd, "V", None)
    if V is not None:
        V_inv = np.linalg.inv(V)
        Q_n = (V_inv.T * rho) @ V_inv
        Q_n = 0.5 * (Q_n + Q_n.T)
    return Constellation(n=int(n), delta=float(delta), rho=rho, amplitudes=np.sqrt(rho), Q_n=Q_n, metric=metric)
