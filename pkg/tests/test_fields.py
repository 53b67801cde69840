import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import canham.fields as fields
from canham import DomainError, Field, KernelSpec, LinearSolveFailure, Resolution, boundary_m, field_extend, mu_at, solve_field
from canham.fields import (H_DEPENDENT, d_t, d_x, field_value, m_from_mu, observed_order, probe_points,
                           relation_residuals, singular_set)
from canham.fredholm import hamiltonian_at

from conftest import BUMP, EXP


def test_field_parse():
    assert Field.parse("phi_plus") is Field.PHI_PLUS
    assert Field.parse("Psi") is Field.PSI
    with pytest.raises(ValueError):
        Field.parse("chi")


def test_closed_form_at_zero():
    assert field_value(EXP, "Phi", 0.0, 1.0) == pytest.approx(0.5 * math.exp(-1) + 0.5, abs=1e-15)
    assert field_value(EXP, "Phi", 0.0, 1.0) == pytest.approx(0.6839397, abs=1e-7)


@given(st.floats(-1.5, 0.0), st.floats(-2, 2))
def test_closed_forms_for_nonpositive_t(t, x):
    s = x + t
    assert field_value(BUMP, "Phi", t, x) == pytest.approx(1 - BUMP.IK(s), abs=1e-15)
    assert field_value(BUMP, "Psi", t, x) == pytest.approx(1 + BUMP.IK(s), abs=1e-15)
    assert field_value(EXP, "PhiPlus", t, x) == float(EXP.K(s))
    assert field_value(EXP, "PhiMinus", t, x) == float(EXP.K(s))


@pytest.mark.parametrize("t", [0.0, -0.5])
def test_boundary_values_trivial_range(t):
    assert boundary_m(BUMP, t) == (1.0, 1.0)


@given(st.floats(0.1, 2.0), st.sampled_from(list(Field)))
def test_values_left_of_interval(t, which):
    sol = solve_field(BUMP, t, which, Resolution(24))
    x = np.array([-t - 0.5, -t - 3.0])
    expect = 1.0 if which.unit_rhs else 0.0
    assert np.all(sol(x) == expect)


@pytest.mark.parametrize("spec", [BUMP, EXP])
@pytest.mark.parametrize("which", list(Field))
def test_real_values_and_continuity_at_right_end(spec, which):
    sol = solve_field(spec, 1.0, which)
    assert sol.node_values.dtype == np.float64
    eps = 1e-7
    assert abs(sol(1.0 - eps) - field_extend(sol, 1.0 + eps)) <= 1e-5
    assert sol.boundary_value == sol(1.0)


def test_boundary_values_nonzero():
    for t in (0.5, 1.0, 2.0):
        assert solve_field(BUMP, t, Field.PHI).boundary_value > 0
        assert solve_field(BUMP, t, Field.PSI).boundary_value > 0


def test_extension_domain():
    sol = solve_field(BUMP, 1.0, Field.PHI)
    with pytest.raises(DomainError):
        field_extend(sol, 1.0)


def test_compact_support_kills_extension():
    sol = solve_field(BUMP, 0.5, Field.PHI_PLUS)
    assert np.all(field_extend(sol, np.array([1.6, 2.0, 5.0])) == 0.0)


def test_field_equation_holds_off_nodes():
    # the natural interpolant satisfies the integral equation by construction; compare with a direct rule
    sol = solve_field(BUMP, 1.0, Field.PSI)
    g = sol.grid
    xs = np.array([-0.8, -0.1, 0.42, 0.97])
    direct = 1.0 + np.array([np.dot(g.weights, BUMP.K(x + g.nodes) * sol.node_values) for x in xs])
    assert np.allclose(sol(xs), direct, atol=1e-10)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_resolution_doubling(t):
    xs = np.linspace(-t, t, 37)
    a = solve_field(BUMP, t, Field.PHI, Resolution(64))(xs)
    b = solve_field(BUMP, t, Field.PHI, Resolution(128))(xs)
    assert np.max(np.abs(a - b)) <= 1e-9


def _table(sign):
    xs = np.linspace(0.0, 1.0, 9)
    return KernelSpec.table(np.column_stack([xs, sign * 0.4 * np.sin(np.pi * xs) ** 2]))


def test_sign_symmetry_swaps_fields():
    pos, neg = _table(1.0), _table(-1.0)
    res = Resolution(8)
    xs = np.linspace(-0.9, 1.4, 23)
    f = lambda spec, w: solve_field(spec, 0.9, w, res)(xs)
    assert np.allclose(f(neg, Field.PHI), f(pos, Field.PSI), atol=1e-14, rtol=0)
    assert np.allclose(f(neg, Field.PHI_PLUS), -f(pos, Field.PHI_MINUS), atol=1e-14, rtol=0)


def test_mu_at_zero():
    assert mu_at(EXP, 0.0) == 1.0
    assert mu_at(BUMP, 0.0) == 0.0
    assert mu_at(EXP, -0.3) == 0.0


def test_m_from_mu_matches_determinant():
    assert abs(m_from_mu(BUMP, 1.0) - hamiltonian_at(BUMP, 1.0).m) <= 1e-6


def test_relations_vanish_in_closed_form_regime():
    r = relation_residuals(BUMP, -0.2, 1e-2)
    assert r.max() <= 1e-12
    r = relation_residuals(EXP, -0.5, 1e-2)
    assert r.max() <= 1e-12


def test_quadrature_identities_small_kernel():
    r = relation_residuals(KernelSpec.exponential(0.01, 1.0), 1.0, 1e-2)
    assert r["r5"] <= 1e-10 and r["r6"] <= 1e-10


@pytest.mark.parametrize("spec", [BUMP, EXP])
def test_quadrature_identities_at_solver_accuracy(spec):
    r = relation_residuals(spec, 1.0, 1e-2)
    assert r["r5"] <= 1e-10 and r["r6"] <= 1e-10


def test_relations_second_order_in_h():
    r1 = relation_residuals(BUMP, 1.0, 1e-2)
    r2 = relation_residuals(BUMP, 1.0, 5e-3)
    for k in H_DEPENDENT:
        assert observed_order(r1[k], r2[k]) == pytest.approx(2.0, abs=0.3), k


def test_relations_exponential_small_residuals():
    # the jump at zero leaves smooth dependence away from the probe exclusions
    r = relation_residuals(EXP, 1.0, 1e-2)
    assert max(r[k] for k in H_DEPENDENT) <= 1e-4


def test_observed_order_helper():
    assert observed_order(4e-4, 1e-4) == pytest.approx(2.0)
    assert math.isnan(observed_order(0.0, 0.0))


def test_exact_derivatives_in_closed_form_regime():
    x = np.array([0.1, 0.7, 1.4])
    assert np.allclose(d_t(BUMP, Field.PHI, -0.5, x, 1e-2), -BUMP.K(x - 0.5), atol=0)
    assert np.allclose(d_x(BUMP, Field.PSI, -0.5, x, 1e-2), BUMP.K(x - 0.5), atol=0)


def test_probe_points_avoid_singular_set():
    h = 1e-2
    x = probe_points(EXP, 1.0, h)
    bad = np.array(singular_set(EXP, 1.0))
    assert len(x) > 20
    assert np.min(np.abs(x[:, None] - bad[None, :])) > 3 * h


def test_condition_guard(monkeypatch):
    monkeypatch.setattr(fields, "COND_GUARD", 1.0)
    with pytest.raises(LinearSolveFailure):
        solve_field(BUMP, 0.8765, Field.PHI)


def test_cumulative_matches_quadrature():
    sol = solve_field(BUMP, 1.0, Field.PSI)
    full = sol.cumulative(np.array([1.0]))[0]
    assert full == pytest.approx(sol.integral() - 2.0, abs=1e-13)
