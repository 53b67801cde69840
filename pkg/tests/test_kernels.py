import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from canham import DomainError, KernelSpec, KinkPoint, SpecError, kernel_eval, kernel_fourier, kernel_validate, load_spec
from canham.kernels import Bump, fourier_tail, kernel_deriv

from conftest import BUMP, EXP


def test_point_values():
    assert kernel_eval(EXP, -1.0) == 0.0
    assert kernel_eval(EXP, 0.0) == 0.5
    assert kernel_eval(BUMP, 0.5) == pytest.approx(BUMP.family.alpha, rel=1e-15)
    assert kernel_eval(BUMP, 1.0) == 0.0


def test_bump_mass_matches_quadrature():
    mass = quad(lambda x: kernel_eval(BUMP, x), 0, 1, epsabs=1e-14)[0]
    assert mass == pytest.approx(0.9, abs=1e-12)


def test_derivative_values():
    assert kernel_deriv(EXP, 1.0) == pytest.approx(-0.5 * math.exp(-1), rel=1e-14)
    assert kernel_deriv(BUMP, -0.5) == 0.0
    with pytest.raises(KinkPoint):
        kernel_deriv(EXP, 0.0)


@given(st.floats(0.05, 0.95))
def test_derivative_matches_central_difference(x):
    # second-order truncation: error ratio ~4 when h halves
    errs = []
    for h in (1e-3, 5e-4):
        fd = (kernel_eval(BUMP, x + h) - kernel_eval(BUMP, x - h)) / (2 * h)
        errs.append(abs(fd - kernel_deriv(BUMP, x)))
    assert errs[1] <= errs[0] / 3 + 1e-9


def test_exponential_symbol_closed_form():
    assert kernel_fourier(EXP, 2j) == pytest.approx(1 / 6, abs=1e-14)


@given(st.floats(-20, 20), st.floats(0.5, 5.0))
def test_exponential_symbol_random_points(u, y):
    z = complex(u, y)
    exact = 0.5 / (1 - 1j * z)
    assert abs(kernel_fourier(EXP, z) - exact) <= 1e-10 * abs(exact)


def test_exponential_symbol_decays_on_horizontal_line():
    for u in (10.0, 100.0, 1000.0):
        assert abs(kernel_fourier(EXP, complex(u, 1))) == pytest.approx(0.5 / math.hypot(2, u), rel=1e-9)


def test_bump_symbol_decreasing_on_imaginary_axis():
    vals = [abs(kernel_fourier(BUMP, 1j * y)) for y in (1, 5, 25, 125)]
    assert vals[0] <= 0.9
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("z", [2j, 3j, 1 + 2j, -4 + 0.5j])
def test_bump_symbol_against_adaptive_quadrature(z):
    f = lambda x, part: part(kernel_eval(BUMP, x) * np.exp(1j * z * x))
    ref = complex(quad(f, 0, 1, args=(np.real,), epsabs=1e-15, limit=200)[0],
                  quad(f, 0, 1, args=(np.imag,), epsabs=1e-15, limit=200)[0])
    assert abs(kernel_fourier(BUMP, z) - ref) <= 1e-12


def test_fourier_tail_vectorised_and_consistent():
    lowers = np.array([0.0, 0.3, 1.7])
    tails = fourier_tail(EXP, 2j, lowers)
    exact = 0.5 * np.exp(-3 * lowers) / 3
    assert np.allclose(tails, exact, atol=1e-14)


def test_symbol_rejects_lower_half_plane():
    with pytest.raises(DomainError):
        kernel_fourier(EXP, -1j)


def test_validate_examples():
    assert kernel_validate(EXP).k5_small_symbol
    assert kernel_validate(EXP).fourier_sup_bound == pytest.approx(0.5 / 1.1, rel=1e-9)  # sup on Im z = 0.1
    assert not kernel_validate(KernelSpec.exponential(3.0, 1.0)).k5_small_symbol
    bad = KernelSpec.table([[-1.0, 0.2], [0.0, 0.5], [1.0, 0.1], [2.0, 0.0]])
    assert not kernel_validate(bad).support_ok


def test_validate_reports_exponential_jump():
    rep = kernel_validate(EXP)
    assert rep.support_ok
    assert rep.continuity_probe_max_jump == pytest.approx(0.5, abs=1e-8)


def test_spec_round_trip(tmp_path):
    for spec in (BUMP, EXP, KernelSpec.table([[0, 0], [0.5, 0.4], [1, 0]], order=1)):
        again = KernelSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
        xs = np.linspace(-0.5, 2, 41)
        assert np.array_equal(again.K(xs), spec.K(xs))
    path = tmp_path / "k.json"
    path.write_text(json.dumps({"family": "bump", "mass": 0.9, "width": 1.0}))
    assert load_spec(path).family.alpha == pytest.approx(BUMP.family.alpha, rel=1e-14)


@pytest.mark.parametrize("payload", ['{"family": "nope"}', '{"family": "exp"}', "[1, 2]", "{not json"])
def test_malformed_specs(tmp_path, payload):
    path = tmp_path / "k.json"
    path.write_text(payload)
    with pytest.raises(SpecError):
        load_spec(path)


def test_missing_spec_file(tmp_path):
    with pytest.raises(SpecError):
        load_spec(tmp_path / "absent.json")


def test_with_mass_inverts_mass():
    assert Bump.with_mass(0.37, 2.0).mass == pytest.approx(0.37, rel=1e-13)
