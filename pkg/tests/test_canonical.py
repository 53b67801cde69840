import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from canham import DomainError, Route, ab_ratio, ode_residual, pde_residual, theta_consistency
from canham.canonical import closed_form_ab, theta
from canham.fredholm import hamiltonian_at
from canham.verify import reference_theta

from conftest import BUMP, EXP


def test_values_at_zero_for_exponential():
    p = ab_ratio(EXP, 0.0, 2j)
    assert abs(p.a - 0.5833333333333334) <= 1e-12
    assert abs(p.b - 0.4166666666666667j) <= 1e-12


@given(st.floats(-1.0, 0.0), st.sampled_from([2j, 1 + 2j, -1 + 3j]))
def test_negative_t_trigonometric_form(t, z):
    p0 = ab_ratio(BUMP, 0.0, z)
    p = ab_ratio(BUMP, t, z)
    assert abs(p.a - (p0.a * cmath.cos(t * z) + p0.b * cmath.sin(t * z))) <= 1e-10
    assert abs(p.b - (-p0.a * cmath.sin(t * z) + p0.b * cmath.cos(t * z))) <= 1e-10


@pytest.mark.parametrize("t", [0.25, 1.0, 2.0])
@pytest.mark.parametrize("z", [2j, 1 + 2j, -1 + 3j])
def test_routes_agree(t, z):
    p = ab_ratio(BUMP, t, z, Route.PSI_PHI_TAIL)
    q = ab_ratio(BUMP, t, z, Route.PHI_PLUS_MINUS_TAIL)
    assert abs(p.a - q.a) <= 1e-7 and abs(p.b - q.b) <= 1e-7


def test_routes_agree_for_exponential():
    p = ab_ratio(EXP, 1.0, 1 + 2j, "PsiPhiTail")
    q = ab_ratio(EXP, 1.0, 1 + 2j, "PhiPlusMinusTail")
    assert abs(p.a - q.a) <= 1e-10 and abs(p.b - q.b) <= 1e-10


@pytest.mark.parametrize("route", list(Route))
def test_rescaled_pair_definition(route):
    p = ab_ratio(BUMP, 1.2, 1 + 2j, route)
    assert p.m == hamiltonian_at(BUMP, 1.2).m
    assert abs(p.a_frak * p.m - p.a) <= 1e-14 * abs(p.a)
    assert abs(p.b_frak - p.m * p.b) <= 1e-14 * abs(p.b_frak)


def test_domain_restriction():
    with pytest.raises(DomainError):
        ab_ratio(BUMP, 1.0, 0.05j)
    with pytest.raises(DomainError):
        ode_residual(BUMP, 1.0, 1 - 1j)


def test_ode_residual_second_order():
    r = ode_residual(BUMP, 1.0, 2j, 1e-2)
    assert r.observed_order == pytest.approx(2.0, abs=0.3)
    assert r.max <= 1.2e-4


@pytest.mark.parametrize("t,z", [(0.5, 2j), (0.5, 1 + 2j), (1.0, 1 + 2j), (1.5, -1 + 3j)])
def test_ode_residual_small_step(t, z):
    r = ode_residual(BUMP, t, z, 2e-3)
    assert r.max <= 1e-4
    assert r.observed_order == pytest.approx(2.0, abs=0.3)


def test_ode_closed_form_regime_is_pure_truncation():
    # central differences of cos/sin: error ~ h^2 |z|^3 / 6 relative to |a| + |b|
    r = ode_residual(EXP, -0.5, 2j, 1e-3)
    assert r.max <= 1e-3**2 * 8 / 6 * 1.2
    assert ode_residual(EXP, -0.5, 0.1j, 1e-3).max <= 1e-9


def test_ode_residual_linear_in_small_z():
    def res(z, t=1.0, h=1e-2):
        p, hi, lo = (ab_ratio(BUMP, s, z, margin=0.0) for s in (t, t + h, t - h))
        g = p.m**2
        return np.array([abs((hi.a - lo.a) / (2 * h) - z * g * p.b), abs((hi.b - lo.b) / (2 * h) + z * p.a / g)])

    ratio = res(2e-4j) / res(1e-4j)
    assert np.allclose(ratio, 2.0, atol=0.01)


def test_theta_consistency_exponential():
    c = theta_consistency(EXP, 2j, theta_ref=1 / 6)
    assert c.residual <= 1e-8 and c.normalization <= 1e-8


def test_theta_consistency_bump_against_reference():
    c = theta_consistency(BUMP, 3j, theta_ref=reference_theta(BUMP, 3j))
    assert c.residual <= 1e-8 and c.normalization <= 1e-8


def test_closed_form_ab_at_zero():
    th = theta(EXP, 2j)
    a, b = closed_form_ab(th, 0.0, 2j)
    assert abs(a - 1j * b - 1) <= 1e-15


def test_pde_closed_form_regime_exact():
    res = pde_residual(BUMP, -0.5, 1e-2)
    assert max(res.values()) <= 1e-10


def test_pde_second_order_convergence():
    r1 = pde_residual(BUMP, 1.0, 1e-2)
    r2 = pde_residual(BUMP, 1.0, 5e-3)
    for k in r1:
        assert r1[k] / r2[k] == pytest.approx(4.0, rel=0.2), k


def test_damping_matches_boundary_sum():
    # gamma'/gamma by differences agrees with 2 mu up to an O(h^2) term
    d1 = pde_residual(BUMP, 0.7, 4e-3)["damping"]
    d2 = pde_residual(BUMP, 0.7, 2e-3)["damping"]
    assert d2 <= 1e-4 and d1 / d2 == pytest.approx(4.0, rel=0.1)
