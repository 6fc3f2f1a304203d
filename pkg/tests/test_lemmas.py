import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jamesp import lemmas
from jamesp.construction import phi
from jamesp.core import FiniteVector, jp_norm_exact, spike
from jamesp.lemmas import (
    MainLemmaInstance,
    best_constant_scan,
    check_endpoints,
    check_fillgaps,
    check_ineq1,
    check_ineq2,
    check_sk_identity,
    make_admissible_x,
    verify_mainlemma,
    verify_steps,
)

ps = st.sampled_from((1.1, 1.5, 2.0, 2.5, 3.0, 4.0))


# ----------------------------------------------------------- scalar lemmas

def test_ineq1_examples():
    assert check_ineq1(1, 1, 2) == pytest.approx(6.0)
    assert check_ineq1(1, 1e-6, 2) == pytest.approx(6e-6, rel=1e-6)


@settings(max_examples=200)
@given(st.floats(1e-4, 1e3), st.floats(1e-4, 1e3), ps, st.floats(0.01, 100))
def test_ineq1_homogeneous(a, b, p, lam):
    lhs = check_ineq1(lam * a, lam * b, p)
    rhs = lam ** p * check_ineq1(a, b, p)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12 * max(1.0, (lam * (a + b)) ** p))


@settings(max_examples=300)
@given(st.floats(1e-6, 10), st.floats(1e-6, 10), ps)
def test_ineq1_margin_nonnegative(a, b, p):
    assert lemmas.ineq1_ok(a, b, p)


def test_ineq1_domain():
    with pytest.raises(ValueError):
        check_ineq1(0.0, 1.0, 2)


def test_best_constant_p2_identically_one():
    for t in np.logspace(-8, 0, 200):
        assert lemmas.best_constant_ratio(float(t), 2.0) == pytest.approx(1.0, abs=1e-12)
    assert best_constant_scan(2.0, 500) == pytest.approx(1.0, abs=1e-12)


def test_best_constant_p4_at_one():
    assert lemmas.best_constant_ratio(1.0, 4.0) == pytest.approx(7.0)
    assert 7.0 == 2 ** 3 - 1


@pytest.mark.parametrize("p", [1.1, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0])
def test_best_constant_below_lemma_constant(p):
    assert best_constant_scan(p, 400) <= 2 ** p


def test_best_constant_grid_guard():
    with pytest.raises(ValueError):
        best_constant_scan(2.0, 50)


def test_ineq2_examples():
    assert check_ineq2(1.0, 2.5) == 0.0
    assert check_ineq2(2.0, 2) == pytest.approx(1.0)
    assert check_ineq2(10.0, 3) == pytest.approx(99.0)
    with pytest.raises(ValueError):
        check_ineq2(0.5, 2)


@settings(max_examples=300)
@given(st.floats(1.0, 1e3), ps)
def test_ineq2_margin_nonnegative(t, p):
    assert lemmas.ineq2_ok(t, p)


# ------------------------------------------------------------ fill gaps

def test_fillgaps_trivial():
    v = FiniteVector([0.3, -1, 2, 0.5])
    assert check_fillgaps(v, 2, [[0, 2, 3]], [[0, 2, 3]], []) == 0.0
    assert check_fillgaps(FiniteVector(), 2.5, [[0, 3]], [[0, 1, 3]], []) == 0.0


def test_fillgaps_hand_example():
    v = FiniteVector([1, 4, 0, 2, 5, -1, 3])
    gap = check_fillgaps(v, 2, [[0, 2], [3, 6]], [[0, 1, 2], [3, 4, 5, 6]], [[2, 3]])
    assert gap <= 1e-15
    # by hand: blocks give (9 + 16 - 1) + (9 + 36 + 16 - 1), the gap term is 0
    lhs = (9 + 16 - 1) + (9 + 36 + 16 - 1)
    from jamesp.core import chain_power
    assert chain_power(v, range(7), 2) - chain_power(v, [0, 2, 3, 6], 2) == pytest.approx(lhs)


def test_fillgaps_rejects_bad_families():
    v = FiniteVector([1, 2, 3, 4])
    with pytest.raises(ValueError):
        check_fillgaps(v, 2, [[0, 2]], [[0, 3]], [])
    with pytest.raises(ValueError):
        check_fillgaps(v, 2, [[0, 3], [2, 4]], [[0, 3], [2, 4]], [[3, 2]])
    with pytest.raises(ValueError):
        check_fillgaps(v, 2, [[0, 1], [3, 4]], [[0, 1], [3, 4]], [[2, 3]])


@pytest.mark.parametrize("seed", range(40))
def test_fillgaps_random(seed):
    rng = np.random.default_rng(seed)
    C, D, E = lemmas.random_fillgaps_family(rng, int(rng.integers(1, 6)))
    v = FiniteVector(rng.normal(size=max(max(c) for c in C) + 2))
    assert check_fillgaps(v, float(rng.choice([1.5, 2.0, 3.0])), C, D, E) <= 1e-10


# ------------------------------------------------------------- endpoints

def test_endpoints_equal_sets():
    v = FiniteVector([0, 1, 3, 2.5, 4])
    assert check_endpoints(v, 2, 0, 4, [0, 2, 3, 4]) == 0.0


def test_endpoints_ramp():
    v = FiniteVector(np.arange(10, dtype=float))
    margin = check_endpoints(v, 2.5, 1, 8, [3, 4, 6])
    assert margin >= 0
    # C = {1, 4, 8}
    assert margin == pytest.approx((7 ** 2.5 - 3 ** 2.5 - 4 ** 2.5)
                                   - (3 ** 2.5 - 1 - 2 ** 2.5))


def test_endpoints_reversed_ramp():
    v = FiniteVector(-np.arange(10, dtype=float))
    assert check_endpoints(v, 2.5, 1, 8, [3, 4, 6]) == pytest.approx(
        check_endpoints(FiniteVector(np.arange(10.0)), 2.5, 1, 8, [3, 4, 6]))


def test_endpoints_precondition():
    v = FiniteVector([0, 2, 1, 3, 0.5])
    with pytest.raises(ValueError):
        check_endpoints(v, 2, 0, 4, [1, 2, 3])
    with pytest.raises(ValueError):
        check_endpoints(v, 2, 0, 4, [1, 3])


@pytest.mark.parametrize("seed", range(40))
def test_endpoints_random(seed):
    rng = np.random.default_rng(seed)
    v, c, cp, B = lemmas.random_endpoint_instance(rng)
    p = float(rng.choice([1.5, 2.0, 3.0]))
    assert check_endpoints(v, p, c, cp, B) >= -1e-12 * lemmas.endpoints_scale(v, p, c, cp)


# -------------------------------------------------------------- main lemma

@pytest.mark.parametrize("seed", range(10))
def test_generator_m1(seed):
    x, eps = make_admissible_x(1, 1.0, 2, seed)
    h = 0.5 ** 0.5
    assert x.support_length <= 2
    steps = np.abs(np.diff(x.padded(3)))
    assert np.all(steps <= h + 1e-15)
    assert eps >= -1e-12


@pytest.mark.parametrize("m,p", [(1, 2.0), (3, 1.5), (4, 3.0)])
def test_generator_contract(m, p):
    for seed in range(20):
        x, eps = make_admissible_x(m, 1.3, p, seed)
        assert x.support_length <= 2 * m
        assert np.max(np.abs(np.diff(x.padded(2 * m + 1)))) ** p <= 1.3 / (2 * m) * (1 + 1e-12)
        full = sum(abs(x[j] - x[j + 1]) ** p for j in range(2 * m))
        assert eps == pytest.approx(jp_norm_exact(x, p).power - full, abs=1e-12)


def test_generator_deterministic():
    a = make_admissible_x(2, 1.0, 2.5, 17)
    b = make_admissible_x(2, 1.0, 2.5, 17)
    assert a[0] == b[0] and a[1] == b[1]


def test_spike_base_has_zero_slack():
    inst = MainLemmaInstance(p=2, m=1, gamma=1.0, x=spike(1, 2), n=8)
    assert inst.eps_actual == pytest.approx(0.0, abs=1e-15)


def test_zero_base():
    inst = MainLemmaInstance(p=2.5, m=2, gamma=1.0, x=FiniteVector(), n=4)
    assert inst.eps_actual == 0.0
    assert inst.w == inst.z
    r = verify_mainlemma(inst)
    assert r.passed
    assert r.values["slack"] == pytest.approx(0.0, abs=1e-12)


def test_instance_rejects_bad_input():
    with pytest.raises(ValueError):
        MainLemmaInstance(p=2, m=1, gamma=1.0, x=spike(1, 2), n=3)
    with pytest.raises(ValueError):
        MainLemmaInstance(p=2, m=1, gamma=1.0, x=FiniteVector([0, 0, 1]), n=2)
    with pytest.raises(ValueError):
        MainLemmaInstance(p=2, m=1, gamma=1.0, x=FiniteVector([0, 2.0]), n=2)


def test_dp_limit_guard():
    inst = MainLemmaInstance.generate(2.0, 4, 16, 0)
    with pytest.raises(ValueError):
        verify_mainlemma(inst, dp_limit=100)


@pytest.mark.parametrize("n", [2, 8])
def test_mainlemma_spike_base(n):
    inst = MainLemmaInstance(p=2, m=1, gamma=1.0, x=spike(1, 2), n=n)
    r = verify_mainlemma(inst)
    assert r.passed and all(v >= -1e-12 for v in r.margins.values())
    assert r.values["slack_cap"] == pytest.approx(phi(1, n, 2))


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("m,n", [(1, 2), (2, 4), (4, 8), (1, 16)])
def test_steps_chain(p, m, n):
    for seed in range(5):
        inst = MainLemmaInstance.generate(p, m, n, seed, gamma=1.0 + 0.25 * seed)
        tr = verify_steps(inst)
        assert tr.passed, tr.margins
        assert sum(tr.ell) == 2 * m * n
        assert tr.A[0] == 0 and tr.A[-1] == 2 * m * n
        assert tr.rho2 == 2 * inst.eps_actual
        assert tr.rho3 == pytest.approx(inst.gamma / n ** (p - 1))
        assert tr.s == pytest.approx(tr.s_closed, rel=1e-9, abs=1e-13)


def test_sk_vanish_at_two_and_nonnegative_above():
    for seed in range(10):
        tr2 = verify_steps(MainLemmaInstance.generate(2.0, 2, 8, seed))
        assert max(abs(s) for s in tr2.s) <= 1e-12
        tr3 = verify_steps(MainLemmaInstance.generate(3.0, 2, 8, seed))
        assert min(tr3.s) >= -1e-12


def test_sk_identity_examples():
    inst = MainLemmaInstance.generate(2.0, 2, 6, 4)
    assert all(check_sk_identity(inst, k) <= 1e-10 for k in range(4))
    assert lemmas.sk_closed_form(inst, 0) == pytest.approx(0.0, abs=1e-15)
    flat = MainLemmaInstance(p=3, m=1, gamma=1.0, x=FiniteVector([0.1, 0.1]), n=4)
    assert flat.d[0] == 0.0
    assert lemmas.block_terms(flat, 0)[0] == pytest.approx(0.0, abs=1e-15)
    assert lemmas.sk_closed_form(flat, 0) == pytest.approx(0.0, abs=1e-15)


def test_sk_identity_c_twice_d():
    # p = 3, n = 2, m = 1, gamma = 1: c = 4^(-1/3); choose |x(0) - x(1)| = n c / 2
    n, p = 2, 3.0
    c = 4 ** (-1 / 3)
    jump = n * c / 2
    x = FiniteVector([jump, 0.0])
    assert jump ** p <= 0.5
    inst = MainLemmaInstance(p=p, m=1, gamma=1.0, x=x, n=n)
    assert inst.d[0] == pytest.approx(c / 2)
    closed = n / 2 * ((1.5 * c) ** 3 + (0.5 * c) ** 3 - 2 * (0.5 * c) ** 3 - 2 * c ** 3)
    assert lemmas.sk_closed_form(inst, 0) == pytest.approx(closed)
    assert check_sk_identity(inst, 0) <= 1e-10


def test_sk_identity_block_guard():
    inst = MainLemmaInstance.generate(2.0, 1, 4, 0)
    with pytest.raises(ValueError):
        check_sk_identity(inst, 2)


def test_rho1_branches():
    assert lemmas.rho1(3, 16, 1.0, 2.0) == pytest.approx(4 * (16 ** -0.5 + 16 ** -0.5))
    assert lemmas.rho1(2, 8, 2.0, 3.0) == pytest.approx(8 * 2 * (4 / 2 + 8 ** (-2 / 3)))


def test_phi_single_source():
    # the main-lemma bound must use construction.phi itself
    assert lemmas.phi is phi
