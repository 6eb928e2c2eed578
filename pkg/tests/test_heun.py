"""Series machinery: parameter map, recurrence, termination, accessory polynomial.

The independent oracles here: rationalized hand arithmetic for the parameter
map (derivations recorded inline), a grid-scan root finder for the accessory
polynomial, and a finite-difference residual of the underlying ODE for the
series evaluation.
"""

import math

import numpy as np
import pytest

from twostate.errors import DomainError, ParameterError
from twostate.fields import FieldConfig, a_from_delta1
from twostate.heun import (BetaSeries, HeunParams, eval_series, expand, generalized_rabi,
                           map_to_heun, q_polynomial, q_polynomial_roots,
                           recurrence_coeffs, series_solution, termination_search)
from twostate.specfun import inc_beta

SQ2 = math.sqrt(2.0)


def n2_scaled_config(u0, delta1):
    return FieldConfig(u0=u0, a=a_from_delta1(delta1), delta1=delta1, delta2=2.0)


# ---------------------------------------------------------------- parameter map

def test_map_example_plus_sign():
    # u0=1, delta1=2: sqrt(4+4) = 2 sqrt2; alpha1 = 1 + sqrt2;
    # q = (3-1)*2*(1+sqrt2) = 4 (1+sqrt2)
    cfg = FieldConfig(u0=1.0, a=3.0, delta1=2.0, delta2=2.0)
    hp, pre = map_to_heun(cfg, +1)
    assert abs(hp.gamma - (1.0 + 2.0 * SQ2)) < 1e-14
    assert hp.delta == 2.0 and hp.epsilon == -2.0 and hp.alpha == 0.0
    assert abs(hp.beta - 2.0 * SQ2) < 1e-14
    assert abs(pre.alpha1 - (1.0 + SQ2)) < 1e-14
    assert abs(hp.q - 4.0 * (1.0 + SQ2)) < 1e-13
    assert pre.alpha2 == 0.0 and pre.alpha3 == 0.0
    assert hp.fuchs_residual() < 1e-12


def test_map_zero_coupling_degeneration():
    cfg = FieldConfig(u0=1e-15, a=3.0, delta1=2.0, delta2=1.0)
    hp, pre = map_to_heun(cfg, +1)
    assert abs(hp.gamma - 3.0) < 1e-12          # 1 + delta1
    assert abs(hp.beta - 2.0) < 1e-12
    assert abs(pre.alpha1 - 2.0) < 1e-12


def test_map_alpha_is_zero_and_fuchs_holds_both_signs():
    rng = np.random.default_rng(11)
    for _ in range(40):
        cfg = FieldConfig(u0=rng.uniform(0.1, 4.0), a=rng.uniform(0.1, 6.0),
                          delta1=rng.uniform(-4, 4), delta2=rng.uniform(-3, 3))
        if cfg.a == 1.0:
            continue
        for sign in (+1, -1):
            hp, _ = map_to_heun(cfg, sign)
            assert hp.alpha == 0.0
            assert hp.fuchs_residual() < 1e-12


def test_map_sign_symmetry():
    cfg = FieldConfig(u0=1.3, a=2.2, delta1=1.7, delta2=0.9)
    hp_p, pre_p = map_to_heun(cfg, +1)
    hp_m, pre_m = map_to_heun(cfg, -1)
    assert abs(hp_m.gamma - (2.0 - hp_p.gamma)) < 1e-13
    assert abs(hp_m.beta + hp_p.beta) < 1e-13
    assert abs((pre_p.alpha1 + pre_m.alpha1) - cfg.delta1) < 1e-13


def test_map_requires_scaled_config():
    cfg = FieldConfig(u0=1.0, a=3.0, delta1=2.0, delta2=2.0, delta=2.0)
    with pytest.raises(ParameterError):
        map_to_heun(cfg, +1)
    with pytest.raises(ParameterError):
        map_to_heun(cfg.scaled(), 2)


# ---------------------------------------------------------------- recurrence

def test_recurrence_r0_vanishes():
    hp, _ = map_to_heun(n2_scaled_config(1.0, 2.0), -1)
    assert recurrence_coeffs(hp, 0).rn == 0.0


def test_recurrence_p_vanishes_at_termination_index():
    # with epsilon = -2 the factor (n + epsilon) kills P at n = 2
    hp, _ = map_to_heun(n2_scaled_config(1.0, 2.0), -1)
    assert abs(recurrence_coeffs(hp, 2).pn) == 0.0


def test_recurrence_q1_frozen_hand_value():
    # plus branch of the map example: gamma = 1 + 2 sqrt2, delta = 2,
    # epsilon = -2, q = 4(1 + sqrt2).  Hand evaluation:
    #   -3(2 - gamma - delta) = 3 + 6 sqrt2
    #   -(1 + epsilon)(2 - gamma) = 1 - 2 sqrt2
    #   -q = -4 - 4 sqrt2
    # sum = 0 exactly.
    cfg = FieldConfig(u0=1.0, a=3.0, delta1=2.0, delta2=2.0)
    hp, _ = map_to_heun(cfg, +1)
    assert abs(recurrence_coeffs(hp, 1).qn) < 1e-13


def test_recurrence_rejects_negative_index():
    hp, _ = map_to_heun(n2_scaled_config(1.0, 2.0), -1)
    with pytest.raises(ParameterError):
        recurrence_coeffs(hp, -1)


# ---------------------------------------------------------------- expansion

@pytest.mark.parametrize("u0", [0.1, 1.0, 10.0])
@pytest.mark.parametrize("delta1", [-3.0, 4.0 / 3.0, 2.0, 5.0])
def test_expand_terminates_for_solvable_model(u0, delta1):
    hp, _ = map_to_heun(n2_scaled_config(u0, delta1), -1)
    bs = expand(hp)
    assert bs.terminated and bs.n_term == 2
    cmax = float(np.max(np.abs(bs.coeffs)))
    assert abs(bs.coeffs[3]) <= 1e-12 * cmax
    assert abs(bs.coeffs[4]) <= 1e-12 * cmax
    assert bs.coeffs[0] == 1.0


def test_expand_termination_needs_the_constraint():
    cfg = n2_scaled_config(1.0, 2.0)
    off = FieldConfig(u0=cfg.u0, a=1.01 * cfg.a, delta1=cfg.delta1, delta2=2.0)
    bs = expand(map_to_heun(off, -1)[0])
    cmax = float(np.max(np.abs(bs.coeffs)))
    assert abs(bs.coeffs[3]) > 1e-6 * cmax


def test_expand_coefficients_match_elementary_weights():
    # terminated weights in closed form: c1 = 2 d1 (1-R)/((d1+1) R),
    # c2 = (d1-1)(R-1)/((d1+1)(R+1))
    for (u0, d1) in [(1.0, 2.0), (0.5, 3.0), (1.3, -3.0)]:
        bs = expand(map_to_heun(n2_scaled_config(u0, d1), -1)[0])
        r = generalized_rabi(u0, d1)
        c1 = 2.0 * d1 * (1.0 - r) / ((d1 + 1.0) * r)
        c2 = (d1 - 1.0) * (r - 1.0) / ((d1 + 1.0) * (r + 1.0))
        assert abs(bs.coeffs[1] - c1) < 1e-12 * max(1.0, abs(c1))
        assert abs(bs.coeffs[2] - c2) < 1e-12 * max(1.0, abs(c2))


def test_expand_generic_series_not_terminated():
    cfg = FieldConfig(u0=0.9, a=0.45, delta1=1.2, delta2=0.8)
    bs = expand(map_to_heun(cfg, -1)[0], max_terms=25)
    assert not bs.terminated and bs.n_term is None
    assert len(bs.coeffs) == 26


def test_expand_requires_zero_exponent_at_infinity():
    hp = HeunParams(a=2.0, q=1.0, alpha=0.5, beta=1.0, gamma=1.0, delta=0.5, epsilon=0.0)
    with pytest.raises(ParameterError):
        expand(hp)


def test_expand_resonant_gamma_raises():
    # gamma = 2 makes the n = 2 pivot vanish while the numerator stays finite
    hp = HeunParams(a=2.0, q=0.7, alpha=0.0, beta=1.6, gamma=2.0, delta=0.3, epsilon=0.3)
    with pytest.raises(DomainError):
        expand(hp)


# ---------------------------------------------------------------- accessory polynomial

def test_q_polynomial_order_zero():
    # degree-1 polynomial; its root is the q-free part of Q_0, i.e. c_1 = 0
    # exactly at Q_0 = 0
    hp = HeunParams(a=2.0, q=0.0, alpha=0.0, beta=1.0, gamma=2.0 - 1.0, delta=2.0, epsilon=0.0)
    poly = q_polynomial(hp, 0)
    assert len(poly) == 2
    root = q_polynomial_roots(poly)[0]
    hp_at_root = HeunParams(a=hp.a, q=root, alpha=0.0, beta=hp.beta, gamma=hp.gamma,
                            delta=hp.delta, epsilon=hp.epsilon)
    assert abs(recurrence_coeffs(hp_at_root, 0).qn) < 1e-12


def test_q_polynomial_solvable_model_root():
    # the physical accessory parameter is a root exactly when the
    # termination constraint a (d1 - 1) - d1 - 1 = 0 holds
    for (u0, d1) in [(0.8, 2.0), (2.0, 3.0), (1.0, 1.7)]:
        a_star = a_from_delta1(d1)
        for a, should_vanish in [(a_star, True), (1.05 * a_star, False), (2.5, abs(a_from_delta1(d1) - 2.5) < 1e-12)]:
            cfg = FieldConfig(u0=u0, a=a, delta1=d1, delta2=2.0)
            hp, _ = map_to_heun(cfg, -1)
            poly = q_polynomial(hp, 2)
            norm = float(np.max(np.abs(poly)))
            res = abs(np.polyval(poly[::-1], hp.q))
            if should_vanish:
                assert res <= 1e-10 * norm, (u0, d1, a, res / norm)
            else:
                assert res > 1e-6 * norm, (u0, d1, a, res / norm)


def test_q_polynomial_degree_two_vs_grid_scan():
    # N = 1: quadratic in q; brute-force sign-change scan against companion roots
    cfg = FieldConfig(u0=1.1, a=2.6, delta1=1.9, delta2=1.0)
    hp, _ = map_to_heun(cfg, -1)
    poly = q_polynomial(hp, 1)
    assert len(poly) == 3
    f = lambda q: np.polyval(poly[::-1], q).real
    qs = np.linspace(-60.0, 60.0, 24001)
    vals = np.array([f(q) for q in qs])
    scan_roots = []
    for i in range(len(qs) - 1):
        if (vals[i] < 0) != (vals[i + 1] < 0):
            lo, hi = qs[i], qs[i + 1]
            flo = f(lo)
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if (flo < 0) != (f(mid) < 0):
                    hi = mid
                else:
                    lo, flo = mid, f(mid)
            scan_roots.append(0.5 * (lo + hi))
    assert len(scan_roots) == 2
    companion = sorted(q_polynomial_roots(poly).real)
    for s, c in zip(sorted(scan_roots), companion):
        assert abs(s - c) < 1e-8, (s, c)


def test_q_polynomial_requires_termination_precondition():
    hp = HeunParams(a=2.0, q=0.0, alpha=0.0, beta=0.7, gamma=0.3, delta=0.6, epsilon=0.8)
    with pytest.raises(ParameterError):
        q_polynomial(hp, 2)


# ---------------------------------------------------------------- series evaluation

def test_eval_series_single_term_is_beta_kernel():
    hp, _ = map_to_heun(FieldConfig(u0=0.7, a=3.0, delta1=1.3, delta2=0.7), -1)
    bs = BetaSeries(gamma0=1.0 - hp.gamma, delta_n=1.0 - hp.delta,
                    coeffs=np.array([1.0 + 0j]), terminated=False, n_term=None)
    z = 0.4 + 0.2j
    ref = inc_beta(1.0 - hp.gamma, 1.0 - hp.delta, z)
    assert abs(eval_series(bs, hp, z) - ref) < 1e-13 * (1.0 + abs(ref))


def test_eval_series_terminated_matches_beta_sum_inside_disc():
    # shape parameter < 1 branch keeps the circle inside the unit disc, so the
    # finite sum can be cross-checked term by term against the Beta kernel
    cfg = n2_scaled_config(1.0, -3.0)        # a = 0.5
    hp, _ = map_to_heun(cfg, -1)
    bs = expand(hp)
    for ang in np.linspace(0.0, 2 * math.pi, 9):
        z = math.sqrt(cfg.a) * np.exp(1j * ang)
        if abs(z - 1.0) < 1e-9:
            continue
        direct = sum(bs.coeffs[n] * inc_beta(bs.gamma0 + n, bs.delta_n, z)
                     for n in range(bs.n_term + 1))
        got = eval_series(bs, hp, z)
        assert abs(got - direct) < 1e-12 * (1.0 + abs(direct))


def test_eval_series_outside_disc_requires_termination():
    cfg = FieldConfig(u0=0.9, a=3.0, delta1=1.2, delta2=0.8)
    hp, _ = map_to_heun(cfg, -1)
    bs = expand(hp, max_terms=25)
    with pytest.raises(DomainError):
        eval_series(bs, hp, 1.4 + 0.2j)


def test_eval_series_ode_residual():
    # substitute the truncated expansion into the defining ODE; derivatives by
    # fourth-order finite differences in z
    cfg = FieldConfig(u0=0.8, a=3.0, delta1=1.4, delta2=1.3)
    hp, _ = map_to_heun(cfg, -1)
    bs = expand(hp, max_terms=80)
    assert not bs.terminated
    u = lambda z: eval_series(bs, hp, z)
    rng = np.random.default_rng(5)
    h = 1e-3
    for _ in range(20):
        z = rng.uniform(0.15, 0.7) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        um2, um1, u0v, up1, up2 = u(z - 2 * h), u(z - h), u(z), u(z + h), u(z + 2 * h)
        du = (um2 - 8 * um1 + 8 * up1 - up2) / (12 * h)
        d2u = (-um2 + 16 * um1 - 30 * u0v + 16 * up1 - up2) / (12 * h * h)
        coef1 = hp.gamma / z + hp.delta / (z - 1.0) + hp.epsilon / (z - hp.a)
        coef0 = -hp.q / (z * (z - 1.0) * (z - hp.a))
        resid = d2u + coef1 * du + coef0 * u0v
        scale = abs(d2u) + abs(coef1 * du) + abs(coef0 * u0v) + 1e-30
        assert abs(resid) / scale < 1e-6, (z, abs(resid) / scale)


def test_series_solution_fundamental_pair_independent():
    # nonzero normalized Wronskian of the two branches at a probe time
    cfg = n2_scaled_config(1.0, 2.0)
    a2p, da2p = series_solution(cfg, +1)
    a2m, da2m = series_solution(cfg, -1)
    t = 0.4
    w = a2p(t) * da2m(t) - a2m(t) * da2p(t)
    scale = abs(a2p(t) * da2m(t)) + abs(a2m(t) * da2p(t))
    assert abs(w) / scale > 1e-6


# ---------------------------------------------------------------- termination hierarchy

def test_termination_search_classifies_hierarchy():
    base = FieldConfig(u0=1.0, a=2.0, delta1=2.0, delta2=1.0)
    records = termination_search(base, 3)
    status = {r.n: r.status for r in records}
    assert status == {0: "trivial", 1: "trivial", 2: "unconditional", 3: "conditional"}
    rec2 = records[2]
    for roots in rec2.roots_by_u0.values():
        assert len(roots) == 1
        assert abs(roots[0] - a_from_delta1(2.0)) < 1e-6
    assert rec2.drift < 1e-6
    assert records[3].drift > 1e-3


def test_termination_search_validates_n_max():
    with pytest.raises(ParameterError):
        termination_search(FieldConfig(u0=1.0, a=2.0, delta1=2.0, delta2=1.0), -1)
