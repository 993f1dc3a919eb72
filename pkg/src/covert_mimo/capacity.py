"""Gaussian tail function and the closed-form covert throughputs.

Throughputs are in nats.  The variational-distance quantities are normalized
by ``sqrt(n) * d`` with ``d = qinv((1 - delta) / 2)``; the relative-entropy
ones by ``sqrt(n * delta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def qfunc(x):
    """Q(x) = P[N(0,1) > x]."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / _SQRT2)


def _qinv_upper(p):
    # p in (0, 0.5]; erfcinv gives the starting point, one Halley step on
    # Q(x) - p polishes it to full double precision.
    x = _SQRT2 * special.erfcinv(2.0 * p)
    t = (qfunc(x) - p) / (_INV_SQRT_2PI * np.exp(-0.5 * x * x))
    return x + t / (1.0 - 0.5 * x * t)


def qinv(p):
    """Inverse of :func:`qfunc` on the open interval (0, 1)."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(~(p_arr > 0.0) | ~(p_arr < 1.0)):
        raise DomainError(f"qinv needs p strictly inside (0, 1), got {p}")
    upper = p_arr <= 0.5
    out = np.where(upper, _qinv_upper(np.where(upper, p_arr, 0.5)),
                   -_qinv_upper(np.where(upper, 0.5, 1.0 - p_arr)))
    return float(out) if out.ndim == 0 else out


def _check_delta(delta):
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


@dataclass(frozen=True)
class CovertnessBudget:
    delta: float
    d: float

    @classmethod
    def from_delta(cls, delta: float) -> "CovertnessBudget":
        _check_delta(delta)
        return cls(delta=float(delta), d=qinv((1.0 - delta) / 2.0))


def covertness_d(delta: float) -> float:
    return CovertnessBudget.from_delta(delta).d


@dataclass(frozen=True)
class CapacitySummary:
    c_covert_v: float
    r_key_v: float
    c_covert_d: float
    f_v: float
    f_d: float

    def as_dict(self) -> dict:
        return {
            "c_covert_v": self.c_covert_v,
            "r_key_v": self.r_key_v,
            "c_covert_d": self.c_covert_d,
            "f_v": self.f_v,
            "f_d": self.f_d,
        }


def covert_capacity_v(gsvd, sigma_b2: float, sigma_w2: float) -> float:
    return sigma_w2 / sigma_b2 * math.sqrt(2.0 * gsvd.tr4)


def key_throughput_v(gsvd, sigma_b2: float, sigma_w2: float) -> float:
    tr2, tr4 = gsvd.tr2, gsvd.tr4
    return math.sqrt(2.0 / tr4) * max(tr2 - sigma_w2 / sigma_b2 * tr4, 0.0)


def covert_capacity_d(gsvd, sigma_b2: float, sigma_w2: float) -> float:
    return sigma_w2 / sigma_b2 * math.sqrt(gsvd.tr4)


def f_v(gsvd, sigma_b2, sigma_w2, delta) -> float:
    """First-order throughput per sqrt(n) under a variational-distance budget."""
    return covert_capacity_v(gsvd, sigma_b2, sigma_w2) * covertness_d(delta)


def f_d(gsvd, sigma_b2, sigma_w2, delta) -> float:
    """First-order throughput per sqrt(n) under a relative-entropy budget."""
    _check_delta(delta)
    return covert_capacity_d(gsvd, sigma_b2, sigma_w2) * math.sqrt(delta)


def metric_ratio(delta: float, gsvd=None, sigma_b2=None, sigma_w2=None) -> float:
    """f_V(sqrt(delta/2)) / f_D(delta).

    The channel traces cancel, so the channel arguments are accepted for
    interface symmetry only.
    """
    _check_delta(delta)
    return _SQRT2 * qinv((1.0 - math.sqrt(delta / 2.0)) / 2.0) / math.sqrt(delta)


def summarize(gsvd, sigma_b2: float, sigma_w2: float, delta: float) -> CapacitySummary:
    return CapacitySummary(
        c_covert_v=covert_capacity_v(gsvd, sigma_b2, sigma_w2),
        r_key_v=key_throughput_v(gsvd, sigma_b2, sigma_w2),
        c_covert_d=covert_capacity_d(gsvd, sigma_b2, sigma_w2),
        f_v=f_v(gsvd, sigma_b2, sigma_w2, delta),
        f_d=f_d(gsvd, sigma_b2, sigma_w2, delta),
    )


def throughput_curves(gsvd, sigma_b2, sigma_w2, delta_grid) -> list[dict]:
    """Rows ``{delta, f_d, f_v, ratio}`` with ``f_v`` taken at sqrt(delta/2)."""
    rows = []
    for delta in delta_grid:
        delta = float(delta)
        _check_delta(delta)
        fd = f_d(gsvd, sigma_b2, sigma_w2, delta)
        fv = f_v(gsvd, sigma_b2, sigma_w2, math.sqrt(delta / 2.0))
        rows.append({"delta": delta, "f_d": fd, "f_v": fv, "ratio": metric_ratio(delta)})
    return rows
