"""Certify that K vectors behave like the unit vector basis of l_inf^K.

The upper constant is the largest norm over sign patterns (vertices of the
cube); convexity extends it to the whole cube.  For coefficients with
``max |lambda_i| = |lambda_j| = 1``, flipping the sign of ``lambda_j`` gives
another point of the cube, so the norm is at least ``2 ||x_j|| - M``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import FiniteVector, as_vector, check_exponent, jp_norm_exact

MAX_SWEEP_K = 24
MAX_GRID_K = 4

Pattern = tuple[int, ...]


def signed_sum(xs: Sequence[FiniteVector], coeffs: Sequence[float]) -> FiniteVector:
    L = max((x.support_length for x in xs), default=0)
    acc = np.zeros(L)
    for c, x in zip(coeffs, xs):
        acc += c * x.padded(L)
    return FiniteVector(acc)


def sign_patterns(K: int) -> list[Pattern]:
    """All sign patterns with the first sign fixed to +1, in lexicographic order (+1 first)."""
    return [(1,) + rest for rest in itertools.product((1, -1), repeat=K - 1)]


def sign_sweep(xs: Sequence[FiniteVector], p: float) -> dict[Pattern, float]:
    p = check_exponent(p)
    xs = [as_vector(x) for x in xs]
    K = len(xs)
    if not 1 <= K <= MAX_SWEEP_K:
        raise ValueError(f"sign sweep needs 1 <= K <= {MAX_SWEEP_K}, got {K}")
    return {d: jp_norm_exact(signed_sum(xs, d), p).value for d in sign_patterns(K)}


@dataclass
class DistortionReport:
    K: int
    p: float
    per_pattern: dict[Pattern, float]
    M: float
    m_low: float
    norms: list[float]

    @property
    def lower(self) -> float:
        return 2.0 * self.m_low - self.M

    @property
    def certified(self) -> bool:
        return self.lower > 0.0

    @property
    def distortion(self) -> float:
        return self.M / self.lower if self.certified else math.inf


def certify_linf_embedding(xs: Sequence[FiniteVector], p: float) -> DistortionReport:
    p = check_exponent(p)
    xs = [as_vector(x) for x in xs]
    norms = [jp_norm_exact(x, p).value for x in xs]
    if any(v == 0.0 for v in norms):
        raise ValueError("cannot certify a family containing a zero vector")
    per = sign_sweep(xs, p)
    return DistortionReport(K=len(xs), p=p, per_pattern=per, M=max(per.values()),
                            m_low=min(norms), norms=norms)


def grid_check(xs: Sequence[FiniteVector], p: float, g: int) -> float:
    """Largest norm over the cube faces ``lambda_i = 1`` sampled on a g-point grid.

    By the sign symmetry of the norm the faces ``lambda_i = -1`` add nothing.
    """
    p = check_exponent(p)
    xs = [as_vector(x) for x in xs]
    K = len(xs)
    if not 1 <= K <= MAX_GRID_K:
        raise ValueError(f"grid check needs 1 <= K <= {MAX_GRID_K}, got {K}")
    if g < 2:
        raise ValueError("grid resolution must be >= 2")
    ticks = np.linspace(-1.0, 1.0, g)
    seen: set[tuple[float, ...]] = set()
    best = 0.0
    for i in range(K):
        for rest in itertools.product(ticks, repeat=K - 1):
            lam = tuple(float(v) for v in rest[:i]) + (1.0,) + tuple(float(v) for v in rest[i:])
            if lam in seen:
                continue
            seen.add(lam)
            best = max(best, jp_norm_exact(signed_sum(xs, lam), p).value)
    return best
