"""Warden's realigned power detector and its Gaussian-approximation bounds.

The detector realigns each warden observation onto Bob's sub-channels,
``z_hat = Lambda_b Lambda_w^-1 U_w^T z``, sums ``||z_hat_i||^2`` over the
block and flags a transmission when the sum exceeds ``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capacity import qfunc
from .covert_code import Codebook, received_power
from .errors import DomainError, EmptyCodebook
from .montecarlo import binomial_half_width, chunk_rngs

_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class DetectorConfig:
    realigner: np.ndarray
    tau: float
    n: int


@dataclass(frozen=True)
class DetectorReport:
    n: int
    trials: int
    alpha_mc: float
    beta_mc: float
    alpha_bound: float
    beta_bound: float
    alpha_half_width: float
    beta_half_width: float

    @property
    def half_width(self) -> float:
        hw = [h for h in (self.alpha_half_width, self.beta_half_width) if not math.isnan(h)]
        return max(hw) if hw else float("nan")

    CSV_FIELDS = ("n", "trials", "alpha_mc", "beta_mc", "alpha_bound", "beta_bound", "half_width")

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.CSV_FIELDS}


def statistic(z, realigner) -> float:
    """``||realigner @ z||^2`` for one warden observation."""
    zh = np.asarray(realigner) @ np.asarray(z, dtype=float)
    return float(zh @ zh)


def make_config(gsvd, tau: float, n: int) -> DetectorConfig:
    return DetectorConfig(realigner=gsvd.realigner, tau=float(tau), n=int(n))


def threshold_for(P_star: float, n: int, gsvd, sigma_w2: float) -> float:
    if n < 1 or P_star < 0:
        raise DomainError("need n >= 1 and P_star >= 0")
    return P_star / 2.0 + n * sigma_w2 * gsvd.tr2


def _gaussian_arg(P_star, n, gsvd, sigma_w2):
    return P_star / (2.0 * math.sqrt(2.0 * n * gsvd.tr4) * sigma_w2)


def _beta_correction(P_star, n, gsvd, sigma_w2):
    return P_star**2 * gsvd.tr2 / (4.0 * _SQRT_PI * n**1.5 * gsvd.tr4**1.5 * sigma_w2**2)


def alpha_beta_bounds(P_star: float, n: int, gsvd, sigma_w2: float,
                      slack_B0: float = 0.0, slack_B1: float = 0.0) -> tuple[float, float]:
    """False-alarm and missed-detection bounds at the threshold :func:`threshold_for`.

    ``slack_B0``/``slack_B1`` are the Berry-Esseen constants; with the
    default 0 only the Gaussian terms remain.
    """
    if n < 1 or P_star < 0:
        raise DomainError("need n >= 1 and P_star >= 0")
    g = float(qfunc(_gaussian_arg(P_star, n, gsvd, sigma_w2)))
    alpha = g + slack_B0 / math.sqrt(n)
    beta = g + _beta_correction(P_star, n, gsvd, sigma_w2) + slack_B1 / math.sqrt(n)
    return alpha, beta


def converse_covertness_lower_bound(P_star: float, n: int, gsvd, sigma_w2: float,
                                    slack_B0: float = 0.0, slack_B1: float = 0.0) -> float:
    """Lower bound on the covertness metric from the power detector, in [-1, 1]."""
    if n < 1 or P_star < 0:
        raise DomainError("need n >= 1 and P_star >= 0")
    v = (1.0 - 2.0 * float(qfunc(_gaussian_arg(P_star, n, gsvd, sigma_w2)))
         - _beta_correction(P_star, n, gsvd, sigma_w2)
         - (slack_B0 + slack_B1) / math.sqrt(n))
    return min(max(v, -1.0), 1.0)


def codeword_statistics(codeword, gsvd, sigma_w2: float) -> tuple[float, float]:
    """Mean and variance of the detector sum given one sub-channel codeword (m x n)."""
    x = np.asarray(codeword, dtype=float)
    n = x.shape[1]
    p_diag = np.sum(x * x, axis=1)
    lb2 = gsvd.lambda_b**2
    lw2 = gsvd.lambda_w**2
    mu1 = float(np.sum(lb2 * p_diag)) + n * sigma_w2 * gsvd.tr2
    var1 = 4.0 * sigma_w2 * float(np.sum(lb2**2 / lw2 * p_diag)) + 2.0 * n * sigma_w2**2 * gsvd.tr4
    return mu1, var1


def _sum_statistic(z_tilde, ratio2):
    # z_tilde: (B, m, n); numpy's pairwise summation keeps n ~ 1e6 sums accurate.
    return np.sum(ratio2[None, :] * np.sum(z_tilde * z_tilde, axis=2), axis=1)


def run_detector_mc(codebook: Codebook | None, config: DetectorConfig, gsvd, sigma_w2: float,
                    trials: int, seed: int, slack_B0: float = 0.0, slack_B1: float = 0.0) -> DetectorReport:
    """Empirical false-alarm and missed-detection rates of the power detector.

    Under H0 every trial draws pure noise; under H1 a uniformly chosen
    codeword plus noise.  ``codebook=None`` runs H0 only (beta fields NaN).
    Analytic bounds use ``P* = 2 (tau - n sigma_w^2 tr2)`` recovered from the
    threshold.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    n = config.n
    m = gsvd.m
    ratio2 = gsvd.ratio**2
    sd = math.sqrt(sigma_w2)

    false_alarms = 0
    for rng, count in chunk_rngs(seed, trials, stream=21, chunk=max(1, 2**20 // (m * n))):
        z = sd * rng.standard_normal((count, m, n))
        false_alarms += int(np.sum(_sum_statistic(z, ratio2) > config.tau))
    alpha = false_alarms / trials

    P_star = max(2.0 * (config.tau - n * sigma_w2 * gsvd.tr2), 0.0)
    alpha_b, beta_b = alpha_beta_bounds(P_star, n, gsvd, sigma_w2, slack_B0, slack_B1)

    beta = beta_hw = float("nan")
    if codebook is not None:
        if codebook.M * codebook.K == 0:
            raise EmptyCodebook("codebook has no words")
        if codebook.n != n:
            raise DomainError(f"codebook blocklength {codebook.n} != detector blocklength {n}")
        words = codebook.words.reshape(codebook.M * codebook.K, m, n)
        lw = gsvd.lambda_w[None, :, None]
        misses = 0
        for rng, count in chunk_rngs(seed, trials, stream=22, chunk=max(1, 2**20 // (m * n))):
            idx = rng.integers(0, words.shape[0], size=count)
            z = lw * words[idx] + sd * rng.standard_normal((count, m, n))
            misses += int(np.sum(_sum_statistic(z, ratio2) <= config.tau))
        beta = misses / trials
        beta_hw = binomial_half_width(beta, trials)

    return DetectorReport(
        n=n, trials=trials, alpha_mc=alpha, beta_mc=beta,
        alpha_bound=alpha_b, beta_bound=beta_b,
        alpha_half_width=binomial_half_width(alpha, trials), beta_half_width=beta_hw,
    )


def min_received_power(codebook: Codebook, gsvd) -> float:
    """``P*``: the smallest ``||H_b x||_F^2`` over the codebook."""
    return float(np.min(received_power(codebook, gsvd)))
