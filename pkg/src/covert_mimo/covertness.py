"""Covertness metrics seen by the warden.

Variational distance is estimated through the likelihood-ratio identity

    V(P, Q) = P[log(P/Q) >= 0] - Q[log(P/Q) >= 0]

with half of the samples drawn under each measure.  The closed form is the
leading Gaussian term; the relative-entropy counterpart uses Gaussian
signalling per letter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .capacity import qfunc
from .errors import BudgetExceeded, DomainError, EmptyCodebook
from .montecarlo import Z95, chunk_rngs

MAX_CODEBOOK_WORDS = 4096
_CHUNK_SCALARS = 2**21


@dataclass(frozen=True)
class CovertnessReport:
    n: int
    delta: float
    v_closed: float
    v_mc: float
    half_width: float
    kl_per_letter: float

    CSV_FIELDS = ("n", "delta", "v_closed", "v_mc", "half_width", "kl_per_letter")

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.CSV_FIELDS}


_LOGCOSH_CLAMP = 20.0


def log_cosh(x):
    """Overflow-safe log(cosh(x)), accurate to relative precision near 0."""
    ax = np.abs(x)
    clipped = np.minimum(ax, _LOGCOSH_CLAMP)
    # log cosh(c + t) = log cosh(c) + t to within exp(-2c) once c >= 20.
    return np.log1p(2.0 * np.sinh(0.5 * clipped) ** 2) + (ax - clipped)


def product_form_v(gsvd, constellation, sigma_w2: float, n: int | None = None) -> float:
    """Leading Gaussian term ``1 - 2 Q(sqrt(n/2 * sum lw^4 rho^2 / (4 sw^4))))``."""
    n = constellation.n if n is None else n
    q = float(np.sum(gsvd.lambda_w**4 * np.asarray(constellation.rho) ** 2)) / (4.0 * sigma_w2**2)
    return 1.0 - 2.0 * float(qfunc(math.sqrt(0.5 * n * q)))


def mixture_llr(observation, constellation, gsvd, sigma_w2: float):
    """log(Q_n / Q_0) of one letter, summed over sub-channels.

    ``observation`` has the sub-channel index last; leading axes broadcast.
    """
    z = np.asarray(observation, dtype=float)
    lw = gsvd.lambda_w
    a = constellation.amplitudes
    offset = -float(np.sum(lw**2 * constellation.rho)) / (2.0 * sigma_w2)
    return offset + np.sum(log_cosh(z * (lw * a / sigma_w2)), axis=-1)


def kl_per_letter(constellation, gsvd, sigma_w2: float) -> float:
    x = gsvd.lambda_w**2 * np.asarray(constellation.rho) / sigma_w2
    return 0.5 * float(np.sum(x - np.log1p(x)))


def _two_sample(exceed1, n1, exceed0, n0):
    p1, p0 = exceed1 / n1, exceed0 / n0
    hw = Z95 * math.sqrt(p1 * (1 - p1) / n1 + p0 * (1 - p0) / n0)
    return p1 - p0, hw


def _split(trials):
    if trials < 2:
        raise DomainError("need at least 2 trials (one per measure)")
    return trials - trials // 2, trials // 2


def v_product_mc(constellation, gsvd, sigma_w2: float, n: int, trials: int, seed: int):
    """Monte Carlo ``V(Q_n^n, Q_0^n)`` for the i.i.d. BPSK process.

    Returns ``(v_mc, half_width)``.
    """
    n1, n0 = _split(trials)
    m = gsvd.m
    sd = math.sqrt(sigma_w2)
    mean = gsvd.lambda_w * np.abs(constellation.amplitudes)
    chunk = max(1, _CHUNK_SCALARS // (n * m))

    # The per-letter LLR is even in every coordinate, so drawing the BPSK
    # signs would not change the law of the statistic.
    exceed1 = 0
    for rng, count in chunk_rngs(seed, n1, stream=31, chunk=chunk):
        z = mean + sd * rng.standard_normal((count, n, m))
        exceed1 += int(np.sum(mixture_llr(z, constellation, gsvd, sigma_w2).sum(axis=1) >= 0))
    exceed0 = 0
    for rng, count in chunk_rngs(seed, n0, stream=32, chunk=chunk):
        z = sd * rng.standard_normal((count, n, m))
        exceed0 += int(np.sum(mixture_llr(z, constellation, gsvd, sigma_w2).sum(axis=1) >= 0))
    return _two_sample(exceed1, n1, exceed0, n0)


def codebook_llr(z_tilde, codebook, gsvd, sigma_w2: float):
    """Exact ``log(Q_hat^n / Q_0^n)`` for observations of shape (B, m, n)."""
    words = codebook.words.reshape(codebook.M * codebook.K, -1)
    lw = np.repeat(gsvd.lambda_w, codebook.n)
    scaled = words * lw
    z = np.asarray(z_tilde, dtype=float).reshape(len(z_tilde), -1)
    exponent = (z @ scaled.T) / sigma_w2 - np.sum(scaled**2, axis=1) / (2.0 * sigma_w2)
    return logsumexp(exponent, axis=1) - math.log(words.shape[0])


def v_codebook_mc(codebook, gsvd, sigma_w2: float, trials: int, seed: int):
    """Monte Carlo ``V(Q_hat^n, Q_0^n)`` for the output law induced by a code.

    Returns ``(v_mc, half_width)``.
    """
    words_total = codebook.M * codebook.K
    if words_total == 0:
        raise EmptyCodebook("codebook has no words")
    if words_total > MAX_CODEBOOK_WORDS:
        raise BudgetExceeded(f"M*K = {words_total} exceeds {MAX_CODEBOOK_WORDS}")
    n1, n0 = _split(trials)
    m, n = codebook.m, codebook.n
    sd = math.sqrt(sigma_w2)
    words = codebook.words.reshape(words_total, m, n)
    lw = gsvd.lambda_w[None, :, None]
    chunk = max(1, _CHUNK_SCALARS // max(m * n, words_total * 8))

    exceed1 = 0
    for rng, count in chunk_rngs(seed, n1, stream=41, chunk=chunk):
        idx = rng.integers(0, words_total, size=count)
        z = lw * words[idx] + sd * rng.standard_normal((count, m, n))
        exceed1 += int(np.sum(codebook_llr(z, codebook, gsvd, sigma_w2) >= 0))
    exceed0 = 0
    for rng, count in chunk_rngs(seed, n0, stream=42, chunk=chunk):
        z = sd * rng.standard_normal((count, m, n))
        exceed0 += int(np.sum(codebook_llr(z, codebook, gsvd, sigma_w2) >= 0))
    return _two_sample(exceed1, n1, exceed0, n0)


def report(gsvd, constellation, sigma_w2: float, trials: int, seed: int) -> CovertnessReport:
    v_mc, hw = v_product_mc(constellation, gsvd, sigma_w2, constellation.n, trials, seed)
    return CovertnessReport(
        n=constellation.n,
        delta=constellation.delta,
        v_closed=product_form_v(gsvd, constellation, sigma_w2),
        v_mc=v_mc,
        half_width=hw,
        kl_per_letter=kl_per_letter(constellation, gsvd, sigma_w2),
    )
