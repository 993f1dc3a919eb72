"""MIMO-AWGN channel pair, its GSVD coordinate system and subspace taxonomy.

The legitimate channel ``H_b`` and the warden channel ``H_w`` share the input
space of Alice's ``N_a`` antennas.  When both have full column rank the pair
factors as

    H_b = U_b diag(lambda_b) V^T,    H_w = U_w diag(lambda_w) V^T

with column-orthonormal ``U_b``, ``U_w`` and an invertible ``V``.  Precoding
with ``(V^T)^{-1}`` and post-processing with ``U^T`` turns the pair into ``m``
parallel scalar sub-channels with gains ``(lambda_b[j], lambda_w[j])``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, RankDeficient, ValidationError

DEFAULT_RANK_RTOL = 1e-10


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ChannelPair:
    H_b: np.ndarray
    H_w: np.ndarray
    sigma_b2: float
    sigma_w2: float

    def __post_init__(self):
        H_b = _frozen(self.H_b)
        H_w = _frozen(self.H_w)
        if H_b.ndim != 2 or H_w.ndim != 2:
            raise DimensionMismatch("channel matrices must be two-dimensional")
        if H_b.shape[1] != H_w.shape[1]:
            raise DimensionMismatch(
                f"H_b has {H_b.shape[1]} columns but H_w has {H_w.shape[1]}"
            )
        n_a = H_b.shape[1]
        if n_a > H_b.shape[0] or n_a > H_w.shape[0]:
            raise DimensionMismatch(
                f"receivers need at least N_a={n_a} antennas, got "
                f"N_b={H_b.shape[0]}, N_w={H_w.shape[0]}"
            )
        if not (np.all(np.isfinite(H_b)) and np.all(np.isfinite(H_w))):
            raise ValidationError("H_b/H_w", "entries must be finite")
        for name in ("sigma_b2", "sigma_w2"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v <= 0:
                raise ValidationError(name, "noise variance must be positive")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "H_b", H_b)
        object.__setattr__(self, "H_w", H_w)

    @property
    def n_a(self) -> int:
        return self.H_b.shape[1]

    @property
    def n_b(self) -> int:
        return self.H_b.shape[0]

    @property
    def n_w(self) -> int:
        return self.H_w.shape[0]


@dataclass(frozen=True)
class SubchannelGains:
    """Per-sub-channel gains without the surrounding matrix factors.

    Every closed-form quantity in this package depends on the channel only
    through these gains, so functions that do not need ``V`` or the ``U``
    factors accept any object exposing ``lambda_b`` and ``lambda_w``.
    """

    lambda_b: np.ndarray
    lambda_w: np.ndarray

    def __post_init__(self):
        lb = _frozen(np.atleast_1d(self.lambda_b))
        lw = _frozen(np.atleast_1d(self.lambda_w))
        if lb.ndim != 1 or lb.shape != lw.shape:
            raise DimensionMismatch(
                f"gain vectors must be 1-D with equal length, got {lb.shape} and {lw.shape}"
            )
        if lb.size == 0:
            raise DimensionMismatch("at least one sub-channel is required")
        if np.any(lb <= 0) or np.any(lw <= 0) or not np.all(np.isfinite(lb + lw)):
            raise ValidationError("lambda_b/lambda_w", "gains must be positive and finite")
        object.__setattr__(self, "lambda_b", lb)
        object.__setattr__(self, "lambda_w", lw)

    @property
    def m(self) -> int:
        return self.lambda_b.size

    @property
    def ratio(self) -> np.ndarray:
        return self.lambda_b / self.lambda_w

    @property
    def tr2(self) -> float:
        """tr(Lambda_b^2 Lambda_w^-2)."""
        return float(np.sum(self.ratio**2))

    @property
    def tr4(self) -> float:
        """tr(Lambda_b^4 Lambda_w^-4)."""
        return float(np.sum(self.ratio**4))


@dataclass(frozen=True, kw_only=True)
class GsvdDecomposition(SubchannelGains):
    U_b: np.ndarray
    U_w: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        super().__post_init__()
        for name in ("U_b", "U_w", "V"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @classmethod
    def from_gains(cls, lambda_b, lambda_w) -> "GsvdDecomposition":
        """Decomposition of the diagonal pair ``(diag(lambda_b), diag(lambda_w))``.

        Gains are rescaled to ``lambda_b**2 + lambda_w**2 == 1`` and the scale
        moved into ``V``, so trace quantities and ``Q_n`` are unchanged.
        """
        lb = np.asarray(lambda_b, dtype=float)
        lw = np.asarray(lambda_w, dtype=float)
        SubchannelGains(lb, lw)  # validation only
        r = np.hypot(lb, lw)
        order = np.argsort(-(lb / lw), kind="stable")
        eye = np.eye(lb.size)
        return cls(
            lambda_b=(lb / r)[order],
            lambda_w=(lw / r)[order],
            U_b=eye[:, order],
            U_w=eye[:, order],
            V=np.diag(r)[:, order],
        )

    @property
    def realigner(self) -> np.ndarray:
        """Lambda_b Lambda_w^-1 U_w^T, i.e. H_b H_w^+ seen from Bob's sub-channels."""
        return self.ratio[:, None] * self.U_w.T

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.U_b * self.lambda_b) @ self.V.T, (self.U_w * self.lambda_w) @ self.V.T


@dataclass(frozen=True)
class SubspaceReport:
    m: int
    p: int
    q: int
    dim_S_w: int
    dim_S_n: int
    square_root_law_holds: bool

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "p": self.p,
            "q": self.q,
            "dim_S_w": self.dim_S_w,
            "dim_S_n": self.dim_S_n,
            "square_root_law_holds": self.square_root_law_holds,
        }


def numerical_rank(M, rtol: float = DEFAULT_RANK_RTOL) -> int:
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def pseudo_inverse(M, rtol: float = DEFAULT_RANK_RTOL) -> np.ndarray:
    """Moore-Penrose inverse, discarding singular values below ``rtol * s_max``."""
    return np.linalg.pinv(np.asarray(M, dtype=float), rcond=rtol)


def decompose_gsvd(pair: ChannelPair, rank_rtol: float = DEFAULT_RANK_RTOL) -> GsvdDecomposition:
    """GSVD of a full-column-rank channel pair via QR and a CS decomposition.

    Sub-channels come out sorted by decreasing ``lambda_b / lambda_w`` and
    normalized to ``lambda_b**2 + lambda_w**2 == 1``.  Each column of ``V``
    has its largest-magnitude entry positive.

    Raises RankDeficient when either matrix has rank below ``N_a``; use
    :func:`classify_subspaces` for such pairs.
    """
    n_a, n_b = pair.n_a, pair.n_b
    for which, H in (("H_b", pair.H_b), ("H_w", pair.H_w)):
        r = numerical_rank(H, rank_rtol)
        if r < n_a:
            raise RankDeficient(which, r, n_a)

    Q, R = np.linalg.qr(np.vstack([pair.H_b, pair.H_w]))
    Q1, Q2 = Q[:n_b], Q[n_b:]

    # CS decomposition: Q1 = U_b C Z^T, Q2 = U_w S Z^T with C^2 + S^2 = I.
    U_b, c, Zt = np.linalg.svd(Q1, full_matrices=False)
    Z = Zt.T
    U_w, R_w = np.linalg.qr(Q2 @ Z)
    s = np.diag(R_w).copy()
    flip = np.where(s < 0, -1.0, 1.0)
    U_w = U_w * flip
    s = np.abs(s)

    r = np.hypot(c, s)
    c, s = c / r, s / r
    V = (R.T @ Z) * r

    order = np.argsort(-(c / s), kind="stable")
    c, s, U_b, U_w, V = c[order], s[order], U_b[:, order], U_w[:, order], V[:, order]

    pivot = np.argmax(np.abs(V), axis=0)
    sign = np.sign(V[pivot, np.arange(V.shape[1])])
    sign[sign == 0] = 1.0
    return GsvdDecomposition(
        lambda_b=c, lambda_w=s, U_b=U_b * sign, U_w=U_w * sign, V=V * sign
    )


def classify_subspaces(pair: ChannelPair, rank_rtol: float = DEFAULT_RANK_RTOL) -> SubspaceReport:
    """Dimensions of the input-space taxonomy of a (possibly rank-deficient) pair.

    ``p`` counts directions only Bob observes, ``q`` directions both observe,
    ``dim_S_w`` directions only the warden observes and ``dim_S_n`` directions
    nobody observes.  Counts follow the GSVD block structure, i.e. they are
    taken modulo the common null space.
    """
    r_b = numerical_rank(pair.H_b, rank_rtol)
    r_w = numerical_rank(pair.H_w, rank_rtol)
    m = numerical_rank(np.vstack([pair.H_b, pair.H_w]), rank_rtol)
    p = m - r_w
    q = r_b + r_w - m
    dim_s_w = m - r_b
    dim_s_n = pair.n_a - m
    return SubspaceReport(
        m=m,
        p=p,
        q=q,
        dim_S_w=dim_s_w,
        dim_S_n=dim_s_n,
        square_root_law_holds=(p == 0 and m == p + q and pair.n_a == m),
    )
