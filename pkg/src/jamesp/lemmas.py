"""Numerical checks of the main lemma, its four proof steps and the scalar lemmas.

Everything is phrased on p-th powers of chain functionals.  Inequality checks
return a margin (``rhs - lhs``) that must be non-negative up to tolerance;
identity checks return a relative discrepancy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .construction import phi
from .core import (
    FiniteVector,
    as_chain,
    as_vector,
    chain_power,
    check_exponent,
    jp_norm_exact,
    spike,
    stretch,
)

INEQ_TOL = 1e-9  # absolute, on p-th powers
IDENTITY_TOL = 1e-10  # relative
SCALAR_TOL = 1e-12  # relative to max(1, leading power)
DEFAULT_DP_LIMIT = 20000


def rel_gap(a: float, b: float, scale: float) -> float:
    if scale <= 0.0:
        return abs(a - b)
    return abs(a - b) / scale


# ----------------------------------------------------------------- scalar lemmas

def check_ineq1(a: float, b: float, p: float) -> float:
    """Margin of ``(a+b)^p - a^p - b^p <= 2^p (a^(p-1) b + a b^(p-1))``."""
    p = check_exponent(p)
    if not (a > 0 and b > 0):
        raise ValueError("check_ineq1 needs a, b > 0")
    big, small = max(a, b), min(a, b)
    t = small / big
    # (1+t)^p - 1 via expm1/log1p keeps the small-t regime exact
    lhs = big ** p * (math.expm1(p * math.log1p(t)) - t ** p)
    return 2.0 ** p * (a ** (p - 1) * b + a * b ** (p - 1)) - lhs


def ineq1_ok(a: float, b: float, p: float) -> bool:
    return check_ineq1(a, b, p) >= -SCALAR_TOL * max(1.0, (a + b) ** p)


def best_constant_ratio(t: float, p: float) -> float:
    return (math.expm1(p * math.log1p(t)) - t ** p) / (t + t ** (p - 1))


def best_constant_scan(p: float, grid: int = 1000, t_min: float = 1e-8) -> float:
    """Largest ``((1+t)^p - 1 - t^p) / (t + t^(p-1))`` over a log grid on ``[t_min, 1]``."""
    p = check_exponent(p)
    if grid < 100:
        raise ValueError("best-constant scan needs grid >= 100")
    ts = np.logspace(math.log10(t_min), 0.0, grid)
    return max(best_constant_ratio(float(t), p) for t in ts)


def remark_constant(p: float) -> float:
    """The constant quoted for comparison: p on [2, 3], 2^(p-1) - 1 elsewhere."""
    return p if 2.0 <= p <= 3.0 else 2.0 ** (p - 1) - 1.0


def check_ineq2(t: float, p: float) -> float:
    """Margin of ``t^p - t <= (t-1)(t+1)^(p-1)`` for t >= 1."""
    p = check_exponent(p)
    if t < 1:
        raise ValueError("check_ineq2 needs t >= 1")
    return (t - 1.0) * (t + 1.0) ** (p - 1.0) - (t ** p - t)


def ineq2_ok(t: float, p: float) -> bool:
    return check_ineq2(t, p) >= -SCALAR_TOL * max(1.0, t ** p)


# ------------------------------------------------------- chain surgery lemmas

def check_fillgaps(v: FiniteVector, p: float, C: Sequence[Sequence[int]],
                   D: Sequence[Sequence[int]], E: Sequence[Sequence[int]]) -> float:
    """Relative discrepancy of the gap-filling identity.

    ``sum_j (nu(v,D_j)^p - nu(v,C_j)^p)`` against
    ``nu(v, U(D_j u E_j))^p - nu(v, U(C_j u E_j))^p`` with ``E_l = {max C_l}``
    appended here.
    """
    p = check_exponent(p)
    v = as_vector(v)
    ell = len(C)
    if ell < 1 or len(D) != ell or len(E) != ell - 1:
        raise ValueError("need l >= 1 sets C_j and D_j and l-1 sets E_j")
    C = [sorted(set(int(i) for i in c)) for c in C]
    D = [sorted(set(int(i) for i in d)) for d in D]
    E = [sorted(set(int(i) for i in e)) for e in E]
    if any(not s for s in C + D + E):
        raise ValueError("all sets must be non-empty")
    for j in range(ell):
        if C[j][0] != D[j][0] or C[j][-1] != D[j][-1]:
            raise ValueError(f"C_{j + 1} and D_{j + 1} must share min and max")
        if j + 1 < ell:
            if C[j][-1] > C[j + 1][0]:
                raise ValueError(f"need max C_{j + 1} <= min C_{j + 2}")
            if E[j][0] != C[j][-1] or E[j][-1] != C[j + 1][0]:
                raise ValueError(f"E_{j + 1} must run from max C_{j + 1} to min C_{j + 2}")
    E = E + [[C[-1][-1]]]
    parts_d = [chain_power(v, d, p) for d in D]
    parts_c = [chain_power(v, c, p) for c in C]
    lhs = math.fsum(parts_d) - math.fsum(parts_c)
    union_d = sorted(set().union(*D, *E))
    union_c = sorted(set().union(*C, *E))
    pd, pc = chain_power(v, union_d, p), chain_power(v, union_c, p)
    rhs = pd - pc
    scale = math.fsum(parts_d) + math.fsum(parts_c) + pd + pc
    return rel_gap(lhs, rhs, scale)


def _monotone_configured(vals: np.ndarray) -> bool:
    """v(c) <= v(b_1) <= v(b_j) <= v(b_l) <= v(c') for interior j, or all reversed."""
    vc, vb1, inner, vbl, vcp = vals[0], vals[1], vals[2:-2], vals[-2], vals[-1]
    up = vc <= vb1 <= vbl <= vcp and bool(np.all((inner >= vb1) & (inner <= vbl)))
    down = vc >= vb1 >= vbl >= vcp and bool(np.all((inner <= vb1) & (inner >= vbl)))
    return up or down


def check_endpoints(v: FiniteVector, p: float, c: int, cp: int, B: Sequence[int]) -> float:
    """Margin of the endpoint-replacement inequality.

    Returns ``(nu(v,{c,c'})^p - nu(v,C)^p) - (nu(v,{b_1,b_l})^p - nu(v,B)^p)``
    where C replaces the endpoints of B by c and c'.
    """
    p = check_exponent(p)
    v = as_vector(v)
    B = list(as_chain(B))
    if len(B) < 3:
        raise ValueError("B needs at least 3 points")
    if not (0 <= c <= B[0] and B[-1] <= cp):
        raise ValueError("need 0 <= c <= min B and max B <= c'")
    if not _monotone_configured(v.at([c] + B + [cp])):
        raise ValueError("v is not monotone-configured on (c, B, c')")
    Cset = [c] + B[1:-1] + [cp]
    return ((chain_power(v, [c, cp], p) - chain_power(v, Cset, p))
            - (chain_power(v, [B[0], B[-1]], p) - chain_power(v, B, p)))


def endpoints_scale(v: FiniteVector, p: float, c: int, cp: int) -> float:
    return max(1.0, chain_power(v, [c, cp], p))


# --------------------------------------------------------------- instance generators

def random_fillgaps_family(rng: np.random.Generator, ell: int, span: int = 6):
    """Random admissible (C, D, E) families with ``m'_j <= m_{j+1}``."""
    cuts = []
    pos = int(rng.integers(0, 3))
    for _ in range(ell):
        lo = pos
        hi = lo + int(rng.integers(0, span))
        cuts.append((lo, hi))
        pos = hi + int(rng.integers(0, span))

    def subset(lo: int, hi: int) -> list[int]:
        inner = [i for i in range(lo + 1, hi) if rng.random() < 0.5]
        return sorted({lo, hi, *inner})

    C = [subset(lo, hi) for lo, hi in cuts]
    D = [subset(lo, hi) for lo, hi in cuts]
    E = [subset(cuts[j][1], cuts[j + 1][0]) for j in range(ell - 1)]
    return C, D, E


def random_endpoint_instance(rng: np.random.Generator, max_len: int = 16):
    """Random ``(v, c, c', B)`` satisfying the monotone configuration."""
    ell = int(rng.integers(3, 7))
    B = sorted(rng.choice(np.arange(2, max_len), size=ell, replace=False).tolist())
    c = B[0] - int(rng.integers(0, 3))
    cp = B[-1] + int(rng.integers(0, 3))
    vals = rng.normal(size=cp + 3)
    lo_b, hi_b = sorted(rng.uniform(-1.0, 1.0, size=2))
    vals[B[0]], vals[B[-1]] = lo_b, hi_b
    for b in B[1:-1]:
        vals[b] = rng.uniform(lo_b, hi_b)
    if c != B[0]:
        vals[c] = lo_b - rng.uniform(0.0, 1.0)
    if cp != B[-1]:
        vals[cp] = hi_b + rng.uniform(0.0, 1.0)
    if rng.random() < 0.5:
        vals = -vals
    return FiniteVector(vals), c, cp, B


# ------------------------------------------------------------------ main lemma

def admissible_step(m: int, gamma: float, p: float) -> float:
    """Largest increment allowed by ``max_j |x(j) - x(j+1)|^p <= gamma / 2m``."""
    return (gamma / (2.0 * m)) ** (1.0 / p)


def make_admissible_x(m: int, gamma: float, p: float, seed: int) -> tuple[FiniteVector, float]:
    """Random x on ``[0, 2m-1]`` meeting the increment condition; returns (x, eps_actual).

    The walk is generated backwards from ``x(2m) = 0`` with increments uniform
    in ``[0, h]`` and random signs, so every increment, including the final
    return to 0, is admissible.  The slack ``||x||^p - nu_p(x, [0, 2m])^p`` is
    measured rather than targeted.
    """
    p = check_exponent(p)
    if m < 1 or not gamma > 0:
        raise ValueError("need m >= 1 and gamma > 0")
    rng = np.random.default_rng(seed)
    h = admissible_step(m, gamma, p)
    steps = rng.uniform(0.0, h, size=2 * m) * rng.choice((-1.0, 1.0), size=2 * m)
    # x(j) = x(j+1) + steps[j], x(2m) = 0
    x = FiniteVector(np.cumsum(steps[::-1])[::-1])
    return x, measured_slack(x, 2 * m, p)


def measured_slack(x: FiniteVector, top: int, p: float) -> float:
    """``||x||^p - nu_p(x, [0, top])^p``."""
    return jp_norm_exact(x, p).power - chain_power(x, range(top + 1), p)


@dataclass
class MainLemmaInstance:
    p: float
    m: int
    gamma: float
    x: FiniteVector
    n: int
    eps_actual: float = math.nan

    def __post_init__(self):
        self.p = check_exponent(self.p)
        self.x = as_vector(self.x)
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n < 2 or self.n % 2:
            raise ValueError(f"n must be even and >= 2, got {self.n}")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if self.x.support_length > 2 * self.m:
            raise ValueError(f"x must be supported on [0, {2 * self.m - 1}]")
        jumps = np.abs(np.diff(self.x.padded(2 * self.m + 1)))
        cap = self.gamma / (2.0 * self.m)
        if jumps.size and float(np.max(jumps)) ** self.p > cap * (1.0 + 1e-12):
            raise ValueError("x violates max |x(j) - x(j+1)|^p <= gamma / 2m")
        if math.isnan(self.eps_actual):
            self.eps_actual = measured_slack(self.x, 2 * self.m, self.p)
        if self.eps_actual < -1e-12:
            raise ValueError(f"negative slack {self.eps_actual}")
        if np.any(self.d >= self.c - 1e-12):
            raise ValueError("need c > d_k for every block")

    @classmethod
    def generate(cls, p: float, m: int, n: int, seed: int, gamma: float = 1.0) -> "MainLemmaInstance":
        x, eps = make_admissible_x(m, gamma, p, seed)
        return cls(p=p, m=m, gamma=gamma, x=x, n=n, eps_actual=eps)

    @property
    def top(self) -> int:
        return 2 * self.m * self.n

    @property
    def y(self) -> FiniteVector:
        return stretch(self.x, self.n)

    @property
    def z(self) -> FiniteVector:
        return self.gamma ** (1.0 / self.p) * spike(self.m * self.n, self.p)

    @property
    def w(self) -> FiniteVector:
        return self.y + self.z

    @property
    def c(self) -> float:
        return (self.gamma / self.top) ** (1.0 / self.p)

    @property
    def d(self) -> np.ndarray:
        return np.abs(np.diff(self.x.padded(2 * self.m + 1))) / self.n


@dataclass
class LemmaReport:
    margins: dict[str, float]
    tol: float = INEQ_TOL
    values: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v >= -self.tol for v in self.margins.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.margins.items() if v < -self.tol]


def _check_size(inst: MainLemmaInstance, dp_limit: int) -> None:
    if inst.top > dp_limit:
        raise ValueError(f"instance size 2mn = {inst.top} exceeds DP limit {dp_limit}")


def verify_mainlemma(inst: MainLemmaInstance, dp_limit: int = DEFAULT_DP_LIMIT) -> LemmaReport:
    """Check both conclusions of the main lemma on one instance."""
    _check_size(inst, dp_limit)
    p, n, top = inst.p, inst.n, inst.top
    w = inst.w
    support_margin = float(top - w.support_length)
    jumps = np.abs(np.diff(w.padded(top + 1)))
    jump_p = float(np.max(jumps)) ** p if jumps.size else 0.0
    jump_cap = inst.gamma / top * (1.0 + n ** -(1.0 - 1.0 / p)) ** p
    slack = measured_slack(w, top, p)
    slack_cap = 2.0 * inst.eps_actual + inst.gamma * phi(inst.m, n, p)
    return LemmaReport(
        margins={
            "support": support_margin,
            "jump": jump_cap - jump_p,
            "slack": slack_cap - slack,
        },
        values={"jump_p": jump_p, "jump_cap": jump_cap, "slack": slack, "slack_cap": slack_cap},
    )


def rho1(m: int, n: int, gamma: float, p: float) -> float:
    tail = n ** -(1.0 - 1.0 / p)
    if p <= 2.0:
        return 2.0 ** p * gamma * (n ** -(p - 2.0 + 1.0 / p) + tail)
    return 2.0 ** p * gamma * ((2.0 * m) ** (p - 2.0) * n ** (-1.0 / p) + tail)


@dataclass
class StepTrace:
    A: tuple[int, ...]
    N: tuple[int, ...]
    ell: list[int]
    rho1: float
    rho2: float
    rho3: float
    values: dict[str, float]
    chain: list[float]  # the five sides of the inequality chain, left to right
    margins: dict[str, float]
    s: list[float]
    s_closed: list[float]

    @property
    def passed(self) -> bool:
        return all(v >= -INEQ_TOL for v in self.margins.values())


def block_terms(inst: MainLemmaInstance, k: int) -> tuple[float, float]:
    """``s_k`` summed directly over block ``[kn, (k+1)n]``, and its magnitude scale."""
    p, n = inst.p, inst.n
    idx = np.arange(k * n, (k + 1) * n + 1)
    dw = np.abs(np.diff(inst.w.at(idx))) ** p
    dy = np.abs(np.diff(inst.y.at(idx))) ** p
    dz = np.abs(np.diff(inst.z.at(idx))) ** p
    terms = np.concatenate([dw, -dy, -dz])
    return math.fsum(terms), math.fsum(np.abs(terms))


def sk_closed_form(inst: MainLemmaInstance, k: int) -> float:
    p, c, dk = inst.p, inst.c, float(inst.d[k])
    return inst.n / 2.0 * ((c + dk) ** p + (c - dk) ** p - 2.0 * dk ** p - 2.0 * c ** p)


def check_sk_identity(inst: MainLemmaInstance, k: int) -> float:
    """Relative gap between the direct block sum ``s_k`` and its closed form."""
    if not 0 <= k < 2 * inst.m:
        raise ValueError(f"block index must lie in [0, {2 * inst.m - 1}]")
    direct, scale = block_terms(inst, k)
    return rel_gap(direct, sk_closed_form(inst, k), scale)


def verify_steps(inst: MainLemmaInstance, dp_limit: int = DEFAULT_DP_LIMIT) -> StepTrace:
    """Walk the four-step chain for one instance, term by term."""
    _check_size(inst, dp_limit)
    p, m, n, top, gamma = inst.p, inst.m, inst.n, inst.top, inst.gamma
    y, z, w = inst.y, inst.z, inst.w
    best = jp_norm_exact(w, p)
    A = tuple(sorted({0, top, *best.argmax_chain}))
    N = tuple(range(0, top + 1, n))
    AN = tuple(sorted(set(A) | set(N)))
    full = range(top + 1)
    r1, r2, r3 = rho1(m, n, gamma, p), 2.0 * inst.eps_actual, gamma / n ** (p - 1.0)
    vals = {
        "w_A": chain_power(w, A, p),
        "y_A": chain_power(y, A, p),
        "z_A": chain_power(z, A, p),
        "y_AN": chain_power(y, AN, p),
        "z_AN": chain_power(z, AN, p),
        "y_full": chain_power(y, full, p),
        "z_full": chain_power(z, full, p),
        "w_full": chain_power(w, full, p),
        "w_norm": best.power,
    }
    sides = [
        vals["w_A"],
        vals["y_A"] + vals["z_A"] + r1,
        vals["y_AN"] + vals["z_AN"] + r1 + r2,
        vals["y_full"] + vals["z_full"] + r1 + r2,
        vals["w_full"] + r1 + r2 + r3,
    ]
    s = [block_terms(inst, k)[0] for k in range(2 * m)]
    margins = {f"step{i + 1}": sides[i + 1] - sides[i] for i in range(4)}
    # adjoining the endpoints must not lose anything against the optimum
    margins["augment"] = vals["w_A"] - best.power
    # sum of block terms reproduces the full-interval decomposition
    decomposition = vals["w_full"] - vals["y_full"] - vals["z_full"]
    margins["blocks"] = -abs(decomposition - math.fsum(s))
    return StepTrace(
        A=A, N=N, ell=list(np.diff(A).tolist()), rho1=r1, rho2=r2, rho3=r3,
        values=vals, chain=sides, margins=margins, s=s,
        s_closed=[sk_closed_form(inst, k) for k in range(2 * m)],
    )
