"""Scenario files.

A scenario is a JSON object.  The channel is given either as matrices
(``H_b``, ``H_w``; arrays of row arrays) or as explicit sub-channel gains
(``lambda_b``, ``lambda_w``).  ``sigma_b2`` and ``sigma_w2`` are required;
everything else has a default:

    delta    0.2      covertness budget
    trials   10000    Monte Carlo trials
    xi       0.5      code-size back-off
    C        1.0      finite-n slack in the feasibility check
    slack_B0 0.0      additive false-alarm slack (times 1/sqrt(n))
    slack_B1 0.0      additive missed-detection slack (times 1/sqrt(n))

``n``, ``seed``, ``lambda_0``, ``M`` and ``K`` are optional and only needed
by the subcommands that use them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .channel_model import ChannelPair, GsvdDecomposition, classify_subspaces, decompose_gsvd
from .errors import ParseError, ValidationError

DEFAULTS = {
    "delta": 0.2,
    "trials": 10_000,
    "xi": 0.5,
    "C": 1.0,
    "slack_B0": 0.0,
    "slack_B1": 0.0,
}

_KEYS = {
    "H_b", "H_w", "lambda_b", "lambda_w", "sigma_b2", "sigma_w2", "delta", "n", "seed",
    "trials", "lambda_0", "xi", "C", "slack_B0", "slack_B1", "M", "K",
}


@dataclass(frozen=True)
class ScenarioConfig:
    sigma_b2: float
    sigma_w2: float
    H_b: np.ndarray | None = None
    H_w: np.ndarray | None = None
    lambda_b: np.ndarray | None = None
    lambda_w: np.ndarray | None = None
    delta: float = DEFAULTS["delta"]
    n: int | None = None
    seed: int | None = None
    trials: int = DEFAULTS["trials"]
    lambda_0: float | None = None
    xi: float = DEFAULTS["xi"]
    C: float = DEFAULTS["C"]
    slack_B0: float = DEFAULTS["slack_B0"]
    slack_B1: float = DEFAULTS["slack_B1"]
    M: int | None = None
    K: int | None = None

    @property
    def has_matrices(self) -> bool:
        return self.H_b is not None

    def pair(self) -> ChannelPair:
        if not self.has_matrices:
            lb, lw = self._gains()
            return ChannelPair(np.diag(lb), np.diag(lw), self.sigma_b2, self.sigma_w2)
        return ChannelPair(self.H_b, self.H_w, self.sigma_b2, self.sigma_w2)

    def _gains(self):
        if self.lambda_b is None:
            raise ValidationError("lambda_b", "channel needs H_b/H_w or lambda_b/lambda_w")
        if self.lambda_w is None:
            raise ValidationError("lambda_w", "required together with lambda_b")
        return self.lambda_b, self.lambda_w

    def gsvd(self) -> GsvdDecomposition:
        if self.has_matrices:
            return decompose_gsvd(self.pair())
        return GsvdDecomposition.from_gains(*self._gains())

    def subspaces(self):
        return classify_subspaces(self.pair())

    def bob_gains(self) -> np.ndarray:
        """Bob's gains for the compound analysis: explicit, else the singular values of H_b."""
        if self.lambda_b is not None:
            return self.lambda_b
        if self.H_b is not None:
            return np.linalg.svd(self.H_b, compute_uv=False)
        raise ValidationError("lambda_b", "compound analysis needs lambda_b or H_b")

    def need(self, name: str):
        value = getattr(self, name)
        if value is None:
            raise ValidationError(name, "required by this subcommand")
        return value


def _number(data, key, *, integer=False, positive=False, nonneg=False, unit=False):
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(key, f"expected a number, got {type(v).__name__}")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise ValidationError(key, f"expected an integer, got {v}")
        v = int(v)
    else:
        v = float(v)
        if not math.isfinite(v):
            raise ValidationError(key, "must be finite")
    if positive and not v > 0:
        raise ValidationError(key, f"must be positive, got {v}")
    if nonneg and v < 0:
        raise ValidationError(key, f"must be non-negative, got {v}")
    if unit and not 0 < v < 1:
        raise ValidationError(key, f"must lie in (0, 1), got {v}")
    return v


def _matrix(data, key):
    rows = data[key]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ParseError(f"{key}: expected a non-empty array of row arrays")
    width = len(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ParseError(f"{key}: row {i} has {len(row)} entries, expected {width}")
        for j, v in enumerate(row, start=1):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"{key}: row {i}, entry {j} is not a number")
    return np.array(rows, dtype=float)


def _vector(data, key):
    v = data[key]
    if not isinstance(v, list) or not v:
        raise ValidationError(key, "expected a non-empty array of numbers")
    for j, x in enumerate(v, start=1):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not x > 0:
            raise ValidationError(key, f"entry {j} must be a positive number")
    return np.array(v, dtype=float)


def parse_scenario(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object", line=1)
    unknown = sorted(set(data) - _KEYS)
    if unknown:
        raise ValidationError(unknown[0], "unknown key")

    kw = {}
    for key in ("sigma_b2", "sigma_w2"):
        if key not in data:
            raise ValidationError(key, "required")
        kw[key] = _number(data, key, positive=True)

    if ("H_b" in data) != ("H_w" in data):
        raise ValidationError("H_w" if "H_b" in data else "H_b", "H_b and H_w must be given together")
    if "H_b" in data:
        kw["H_b"] = _matrix(data, "H_b")
        kw["H_w"] = _matrix(data, "H_w")
    for key in ("lambda_b", "lambda_w"):
        if key in data:
            kw[key] = _vector(data, key)
    if "lambda_b" in kw and "lambda_w" in kw and kw["lambda_b"].size != kw["lambda_w"].size:
        raise ValidationError("lambda_w", "must have the same length as lambda_b")
    if "H_b" not in kw and "lambda_b" not in kw:
        raise ValidationError("H_b", "channel needs H_b/H_w or lambda_b/lambda_w")

    checks = {
        "delta": dict(unit=True),
        "n": dict(integer=True, positive=True),
        "seed": dict(integer=True, nonneg=True),
        "trials": dict(integer=True, positive=True),
        "lambda_0": dict(positive=True),
        "xi": dict(unit=True),
        "C": dict(nonneg=True),
        "slack_B0": dict(nonneg=True),
        "slack_B1": dict(nonneg=True),
        "M": dict(integer=True, positive=True),
        "K": dict(integer=True, positive=True),
    }
    for key, opts in checks.items():
        if key in data:
            kw[key] = _number(data, key, **opts)
    return ScenarioConfig(**kw)


def load_scenario(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
