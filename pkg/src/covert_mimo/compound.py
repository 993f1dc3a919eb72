"""Covert design when the warden's gains are only known up to a spectral-norm cap.

The warden's channel is known to have gains ``0 < lambda_w[j] <= lambda_0`` in
the common sub-channel frame.  The product-form covertness metric is monotone
in those gains, so the isotropic channel ``Lambda_0 = lambda_0 I`` is the worst
case and a design for it is covert for every channel in the set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .allocation import AllocationResult, solve_allocation_v
from .channel_model import SubchannelGains
from .covertness import product_form_v
from .errors import DepthTooLarge, DomainError, ValidationError

MAX_GRID_BITS = 40


@dataclass(frozen=True)
class UncertaintySet:
    """Bob's gains (known exactly) and the cap on every warden gain."""

    lambda_0: float
    lambda_b: np.ndarray

    def __post_init__(self):
        lam0 = float(self.lambda_0)
        if not (math.isfinite(lam0) and lam0 > 0):
            raise ValidationError("lambda_0", "must be positive and finite")
        lb = np.array(np.atleast_1d(self.lambda_b), dtype=float)
        if lb.ndim != 1 or lb.size == 0 or np.any(~(lb > 0)) or not np.all(np.isfinite(lb)):
            raise ValidationError("lambda_b", "gains must be a non-empty vector of positive numbers")
        lb.flags.writeable = False
        object.__setattr__(self, "lambda_0", lam0)
        object.__setattr__(self, "lambda_b", lb)

    @property
    def m(self) -> int:
        return self.lambda_b.size

    def worst_case(self) -> SubchannelGains:
        return SubchannelGains(self.lambda_b, np.full(self.m, self.lambda_0))

    def with_warden(self, lambda_w) -> SubchannelGains:
        return SubchannelGains(self.lambda_b, lambda_w)


@dataclass(frozen=True)
class DiscretizationGrid:
    """Uniform slicing of ``(0, lambda_0]`` per axis.

    Only the per-axis points are stored; the full grid has ``total_size``
    cells and is never built.
    """

    depth: int
    lambda_0: float
    eps: float
    axis_points: np.ndarray
    m: int

    @property
    def total_size(self) -> int:
        return 2 ** (self.m * self.depth)

    def cell_index(self, lambda_tilde) -> np.ndarray:
        """1-based cell ``J`` with ``(J_j - 1) eps < lambda_tilde[j] <= J_j eps``."""
        lt = np.asarray(lambda_tilde, dtype=float)
        if lt.shape != (self.m,):
            raise DomainError(f"expected {self.m} gains, got shape {lt.shape}")
        if np.any(lt <= 0) or np.any(lt > self.lambda_0):
            raise DomainError("gains must lie in (0, lambda_0]")
        j = np.ceil(lt / self.eps).astype(np.int64)
        # The division can round across a cell boundary; nudge back.
        j = np.where(lt > j * self.eps, j + 1, j)
        j = np.where(lt <= (j - 1) * self.eps, j - 1, j)
        return np.clip(j, 1, 2**self.depth)


def compound_capacity(uset: UncertaintySet, sigma_b2: float, sigma_w2: float) -> tuple[float, float]:
    """Worst-case covert capacity and the matching total code-size rate.

    The second value does not depend on the warden's channel at all.
    """
    lb4 = float(np.sum(uset.lambda_b**4))
    c = sigma_w2 / sigma_b2 * math.sqrt(2.0 * lb4 / uset.lambda_0**4)
    log_mk_rate = math.sqrt(2.0 / lb4) * float(np.sum(uset.lambda_b**2))
    return c, log_mk_rate


def build_grid(uset: UncertaintySet, depth: int) -> DiscretizationGrid:
    if depth < 1:
        raise DomainError(f"depth must be >= 1, got {depth}")
    if uset.m * depth > MAX_GRID_BITS:
        raise DepthTooLarge(f"m*depth = {uset.m * depth} exceeds {MAX_GRID_BITS}")
    eps = math.ldexp(uset.lambda_0, -depth)
    points = eps * np.arange(1, 2**depth + 1, dtype=float)
    points[-1] = uset.lambda_0
    points.flags.writeable = False
    return DiscretizationGrid(depth=int(depth), lambda_0=uset.lambda_0, eps=eps, axis_points=points, m=uset.m)


def worst_case_design(uset: UncertaintySet, sigma_b2: float, sigma_w2: float) -> AllocationResult:
    """Variational-distance design for the isotropic worst case ``lambda_0 I``."""
    return solve_allocation_v(uset.worst_case(), sigma_b2, sigma_w2)


def _covertness_at(uset, constellation, sigma_w2, lambda_w):
    return product_form_v(uset.with_warden(lambda_w), constellation, sigma_w2)


def covertness_monotonicity_check(uset: UncertaintySet, constellation, sigma_w2: float,
                                  samples: int, seed: int, tol: float = 1e-12):
    """Sample ordered pairs ``lt <= l <= lambda_0`` and compare covertness.

    Returns ``(ok, worst)`` where ``worst`` is the largest value of
    ``V(lt) - V(l)``; a positive value means a weaker warden looked worse.
    """
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    m = uset.m
    worst = -math.inf
    for _ in range(samples):
        # 1 - U keeps the draws in (0, 1], so gains stay strictly positive.
        lam = uset.lambda_0 * (1.0 - rng.random(m))
        lam_t = lam * (1.0 - rng.random(m))
        v_big = _covertness_at(uset, constellation, sigma_w2, lam)
        v_small = _covertness_at(uset, constellation, sigma_w2, lam_t)
        worst = max(worst, v_small - v_big)
    return worst <= tol, worst


def sampled_feasibility(uset: UncertaintySet, alloc: AllocationResult, sigma_w2: float,
                        samples: int, seed: int) -> float:
    """Largest ``tr(Lambda^4 T^2) / (4 sigma_w^4)`` over sampled ``Lambda <= Lambda_0``."""
    rng = np.random.default_rng(seed)
    T2 = np.asarray(alloc.T) ** 2
    lam = uset.lambda_0 * (1.0 - rng.random((samples, uset.m)))
    return float(np.max(np.sum(lam**4 * T2, axis=1))) / (4.0 * sigma_w2**2)
