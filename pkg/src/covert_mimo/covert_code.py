"""Random BPSK covert codes over the GSVD sub-channels.

A codebook holds ``M * K`` words (``M`` messages per key, ``K`` keys), each an
``m x n`` array whose row ``j`` takes values in ``{-a_j, +a_j}``.  Words are
stored as int8 signs; :attr:`Codebook.words` materializes amplitudes.
Message and key indices are 0-based.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .allocation import Constellation
from .capacity import covertness_d
from .errors import BudgetExceeded, DomainError, EmptyCodebook, IndexOutOfRange, KeySizeNegative, ParseError
from .montecarlo import binomial_half_width, chunk_rngs

MEMORY_BUDGET = 2**26
MAX_M = 2**12
MAX_K = 2**4


@dataclass(frozen=True)
class Codebook:
    M: int
    K: int
    n: int
    signs: np.ndarray  # int8, shape (M, K, m, n)
    constellation: Constellation

    @property
    def m(self) -> int:
        return self.signs.shape[2]

    @property
    def amplitudes(self) -> np.ndarray:
        return self.constellation.amplitudes

    @property
    def words(self) -> np.ndarray:
        """Codewords as floats, shape ``(M, K, m, n)``."""
        return self.signs * self.amplitudes[None, None, :, None]

    def word(self, message: int, key: int) -> np.ndarray:
        _check_index(self, message, key)
        return self.signs[message, key] * self.amplitudes[:, None]

    def to_text(self) -> str:
        """One codeword per line (message-major, then key), row-major entries."""
        buf = io.StringIO()
        buf.write(f"# M={self.M} K={self.K} m={self.m} n={self.n}\n")
        flat = self.words.reshape(self.M * self.K, -1)
        np.savetxt(buf, flat, fmt="%.17g", delimiter=" ")
        return buf.getvalue()


@dataclass(frozen=True)
class TransmissionTrace:
    message: int
    key: int
    y_tilde: np.ndarray
    z_tilde: np.ndarray
    decoded: int | None = None


def codebook_from_text(text: str, constellation: Constellation) -> Codebook:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ParseError("missing '# M=.. K=.. m=.. n=..' header", line=1)
    try:
        header = dict(tok.split("=") for tok in lines[0][1:].split())
        M, K, m, n = (int(header[k]) for k in ("M", "K", "m", "n"))
    except (ValueError, KeyError) as exc:
        raise ParseError(f"bad header: {exc}", line=1) from None
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        vals = line.split()
        if len(vals) != m * n:
            raise ParseError(f"expected {m * n} entries, got {len(vals)}", line=i)
        rows.append([float(v) for v in vals])
    if len(rows) != M * K:
        raise ParseError(f"expected {M * K} codewords, got {len(rows)}")
    words = np.array(rows).reshape(M, K, m, n)
    signs = np.where(words < 0, -1, 1).astype(np.int8)
    return Codebook(M=M, K=K, n=n, signs=signs, constellation=constellation)


def _check_index(codebook, message, key):
    if not (0 <= message < codebook.M and 0 <= key < codebook.K):
        raise IndexOutOfRange(
            f"(message={message}, key={key}) outside [0,{codebook.M}) x [0,{codebook.K})"
        )


def size_code(gsvd, T, n: int, delta: float, xi: float, sigma_b2: float, sigma_w2: float,
              keyless_ok: bool = False) -> tuple[float, float]:
    """Message and total code sizes ``(log M, log MK)`` in nats.

    When the resolvability size falls below the message size no key is
    needed; with ``keyless_ok`` this returns ``log MK = log M`` instead of
    raising KeySizeNegative.
    """
    if not 0 < xi < 1:
        raise DomainError(f"xi must lie in (0, 1), got {xi}")
    T = np.asarray(getattr(T, "T", T), dtype=float)
    scale = math.sqrt(n) * covertness_d(delta)
    log_m = (1 - xi) * scale / (2 * sigma_b2) * float(np.sum(gsvd.lambda_b**2 * T))
    log_mk = (1 + xi) * scale / (2 * sigma_w2) * float(np.sum(gsvd.lambda_w**2 * T))
    if log_mk < log_m:
        if not keyless_ok:
            raise KeySizeNegative(f"log MK = {log_mk:.4g} < log M = {log_m:.4g}")
        log_mk = log_m
    return log_m, log_mk


def generate(constellation: Constellation, M: int, K: int, seed: int,
             memory_budget: int = MEMORY_BUDGET, max_M: int = MAX_M, max_K: int = MAX_K) -> Codebook:
    """Draw ``M * K`` i.i.d. uniform BPSK codewords for ``constellation``."""
    m, n = constellation.rho.size, constellation.n
    if M < 1 or K < 1:
        raise EmptyCodebook(f"need M, K >= 1, got M={M}, K={K}")
    if M > max_M or K > max_K:
        raise BudgetExceeded(f"M={M}, K={K} exceed the desk-scale caps M<={max_M}, K<={max_K}")
    if M * K * m * n > memory_budget:
        raise BudgetExceeded(f"M*K*m*n = {M * K * m * n} scalars exceeds budget {memory_budget}")
    rng = np.random.default_rng(seed)
    signs = (2 * rng.integers(0, 2, size=(M, K, m, n), dtype=np.int8) - 1).astype(np.int8)
    return Codebook(M=int(M), K=int(K), n=int(n), signs=signs, constellation=constellation)


def precode(word_tilde, gsvd) -> np.ndarray:
    """Physical antenna inputs ``x = (V^T)^-1 x_tilde``."""
    return np.linalg.solve(gsvd.V.T, word_tilde)


def transmit(codebook: Codebook, message: int, key: int, gsvd, sigma_b2: float, sigma_w2: float,
             seed: int) -> TransmissionTrace:
    """Send one codeword over the parallel sub-channels of both receivers."""
    _check_index(codebook, message, key)
    if sigma_b2 < 0 or sigma_w2 < 0:
        raise DomainError("noise variances must be non-negative")
    x = codebook.word(message, key)
    rng = np.random.default_rng(seed)
    y = gsvd.lambda_b[:, None] * x + math.sqrt(sigma_b2) * rng.standard_normal(x.shape)
    z = gsvd.lambda_w[:, None] * x + math.sqrt(sigma_w2) * rng.standard_normal(x.shape)
    return TransmissionTrace(message=message, key=key, y_tilde=y, z_tilde=z)


def _scores(words_k, y, lambda_b, sigma_b2):
    # words_k: (M, m, n); y: (B, m, n) -> (B, M) log-likelihoods up to a constant.
    lb = lambda_b[:, None]
    corr = np.einsum("bjn,mjn->bm", y * lb, words_k) / sigma_b2
    energy = np.sum((lb * words_k) ** 2, axis=(1, 2)) / (2 * sigma_b2)
    return corr - energy[None, :]


def decode(codebook: Codebook, key: int, y_tilde, gsvd, sigma_b2: float) -> int:
    """Maximum-likelihood message estimate within the sub-code of ``key``.

    Ties go to the smallest index.
    """
    _check_index(codebook, 0, key)
    words_k = codebook.words[:, key]
    scores = _scores(words_k, np.asarray(y_tilde, dtype=float)[None], gsvd.lambda_b, sigma_b2)
    return int(np.argmax(scores[0]))


def simulate_reliability(codebook: Codebook, gsvd, sigma_b2: float, trials: int, seed: int):
    """Empirical ``P[W_hat != W]`` with uniform message and key.

    Returns ``(error_rate, half_width)``.
    """
    if codebook.M * codebook.K == 0:
        raise EmptyCodebook("codebook has no words")
    words = codebook.words
    lb = gsvd.lambda_b
    sd = math.sqrt(sigma_b2)
    errors = 0
    for rng, count in chunk_rngs(seed, trials, stream=11, chunk=256):
        msgs = rng.integers(0, codebook.M, size=count)
        keys = rng.integers(0, codebook.K, size=count)
        noise = rng.standard_normal((count, codebook.m, codebook.n))
        y = lb[None, :, None] * words[msgs, keys] + sd * noise
        for k in np.unique(keys):
            sel = keys == k
            decided = np.argmax(_scores(words[:, k], y[sel], lb, sigma_b2), axis=1)
            errors += int(np.sum(decided != msgs[sel]))
    rate = errors / trials
    return rate, binomial_half_width(rate, trials)


def received_power(codebook: Codebook, gsvd) -> np.ndarray:
    """``||H_b x||_F^2 = tr(Lambda_b^2 P)`` for every codeword, shape (M, K)."""
    return np.einsum("j,mkjn->mk", gsvd.lambda_b**2, codebook.words**2)


def desk_sizes(log_m: float, log_mk: float, max_M: int = 2**10, max_K: int = 4) -> tuple[int, int]:
    """Integer ``(M, K)`` nearest the requested sizes, clipped to desk scale."""
    M = int(min(max(math.floor(math.exp(min(log_m, 700.0))), 1), max_M))
    K = int(min(max(math.floor(math.exp(min(log_mk - log_m, 700.0))), 1), max_K))
    return M, K
