"""Inductive construction of K stretched spiky vectors close to the l_inf^K basis.

Stage 1 is ``x_1 = z_2`` with ``n_1 = gamma_1 = 1``.  Stage k stretches every
earlier vector by an even ``n_k`` and appends ``gamma_{k-1}^(1/p) z_{2 m_k}``
where ``m_k = n_1 ... n_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

from .core import FiniteVector, check_exponent, spike, stretch

Mode = Literal["bound", "manual"]

MAX_STAGE_N = 2 ** 40


def epsilon_schedule(K: int, eps: float) -> list[float]:
    """``[eps/3^(K-1), ..., eps/3, eps]``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if not eps > 0:
        raise ValueError("eps must be > 0")
    return [eps / 3.0 ** (K - k) for k in range(1, K + 1)]


def psi(m: int, n: int, p: float) -> float:
    p = check_exponent(p)
    if p <= 2.0:
        return n ** -(p - 2.0 + 1.0 / p)
    return (2.0 * m) ** (p - 2.0) * n ** (-1.0 / p)


def phi(m: int, n: int, p: float) -> float:
    """Error term of the main lemma; decreases to 0 as n grows with m fixed."""
    p = check_exponent(p)
    return 2.0 ** p * (psi(m, n, p) + n ** -(1.0 - 1.0 / p)) + n ** -(p - 1.0)


def gamma_update(gamma: float, n: int, p: float) -> float:
    p = check_exponent(p)
    return gamma * (1.0 + n ** (1.0 / p - 1.0)) ** p


def choose_stage_n(gamma_prev: float, eps_prev: float, m_prev: int, k: int, K: int,
                   eps: float, p: float) -> int:
    """Smallest even n >= 2 meeting both stage constraints.

    The constraints are ``gamma_update(gamma_prev, n) <= 1 + eps*k/K`` and
    ``gamma_prev * phi(m_prev, n) <= eps_prev``; both sides are monotone in n,
    so doubling brackets the answer and a binary search over even integers
    finds it.
    """
    p = check_exponent(p)
    gamma_cap = 1.0 + eps * k / K

    def ok(n: int) -> bool:
        return (gamma_update(gamma_prev, n, p) <= gamma_cap
                and gamma_prev * phi(m_prev, n, p) <= eps_prev)

    hi = 2
    while not ok(hi):
        hi *= 2
        if hi > MAX_STAGE_N:
            raise ValueError(
                f"no even n <= 2^40 satisfies stage {k} constraints "
                f"(gamma_prev={gamma_prev}, eps_prev={eps_prev}, m_prev={m_prev}, p={p})")
    lo = hi // 2  # half-steps in even units: lo fails (or is < 2)
    if lo < 2:
        return hi
    # invariant: ok(hi), not ok(lo), both even
    while hi - lo > 2:
        mid = (lo + hi) // 2
        mid -= mid % 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class StageParams:
    k: int
    n: int
    m: int
    gamma: float
    eps: float
    E: float  # accumulated slack bound, E_1 = 0

    @property
    def support(self) -> int:
        return 2 * self.m


@dataclass
class Construction:
    p: float
    K: int
    eps: float
    mode: Mode
    stages: list[StageParams]
    vectors: list[FiniteVector] = field(default_factory=list)

    @property
    def ns(self) -> list[int]:
        return [s.n for s in self.stages]

    @property
    def support(self) -> int:
        return self.stages[-1].support

    def stage_vectors(self, k: int) -> list[FiniteVector]:
        """Replay the construction up to stage k."""
        return build(k, self.eps, self.p, mode="manual", manual_ns=self.ns[1:k]).vectors


def plan(K: int, eps: float, p: float, mode: Mode = "bound",
         manual_ns: Sequence[int] | None = None) -> list[StageParams]:
    """Stage parameters alone; cheap even when the vectors would be huge."""
    p = check_exponent(p)
    eps_k = epsilon_schedule(K, eps)
    if mode == "manual":
        ns = _manual_ns(K, manual_ns)
    elif mode != "bound":
        raise ValueError(f"unknown mode {mode!r}")
    stages = [StageParams(k=1, n=1, m=1, gamma=1.0, eps=eps_k[0], E=0.0)]
    for k in range(2, K + 1):
        prev = stages[-1]
        if mode == "bound":
            n = choose_stage_n(prev.gamma, prev.eps, prev.m, k, K, eps, p)
        else:
            n = ns[k - 2]
        stages.append(StageParams(
            k=k, n=n, m=prev.m * n,
            gamma=gamma_update(prev.gamma, n, p),
            eps=eps_k[k - 1],
            E=2.0 * prev.E + prev.gamma * phi(prev.m, n, p),
        ))
    return stages


def _manual_ns(K: int, manual_ns: Sequence[int] | None) -> list[int]:
    if manual_ns is None:
        raise ValueError("manual mode needs a list of stage factors")
    ns = [int(n) for n in manual_ns]
    # a leading n_1 = 1 may be given explicitly
    if len(ns) == K and K >= 1 and ns[0] == 1:
        ns = ns[1:]
    if len(ns) != K - 1:
        raise ValueError(f"manual mode needs {K - 1} stage factors for K={K}, got {len(ns)}")
    bad = [n for n in ns if n < 2 or n % 2]
    if bad:
        raise ValueError(f"stage factors n_2..n_K must be even and >= 2, got {bad}")
    return ns


def build(K: int, eps: float, p: float, mode: Mode = "bound",
          manual_ns: Sequence[int] | None = None) -> Construction:
    p = check_exponent(p)
    stages = plan(K, eps, p, mode, manual_ns)
    vectors = [spike(1, p)]
    for st in stages[1:]:
        gamma_prev = stages[st.k - 2].gamma
        vectors = [stretch(v, st.n) for v in vectors]
        vectors.append(gamma_prev ** (1.0 / p) * spike(st.m, p))
    return Construction(p=p, K=K, eps=eps, mode=mode, stages=stages, vectors=vectors)


def guaranteed_power_bound(c: Construction) -> float:
    """``gamma_K + eps_K``, the bound-mode guarantee on every signed sum's norm^p."""
    if c.mode != "bound":
        raise ValueError("guaranteed_power_bound applies to bound-mode constructions; "
                         "use accumulated_error_bound")
    last = c.stages[-1]
    return last.gamma + last.eps


def accumulated_error_bound(c: Construction) -> float:
    """``gamma_K + E_K``, valid for any even stage factors."""
    last = c.stages[-1]
    return last.gamma + last.E
