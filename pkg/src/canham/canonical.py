"""E-normalized canonical-system solutions a = A/E, b = B/E for Im z > c.

Two independent constructions are provided.  The first integrates the
extensions of Psi and Phi beyond t against e^{izx}; the second does the same
with phi_plus and phi_minus and converts through m(t).  Both reduce every tail
to the Fourier tails T(s) = int_s^inf K(u) e^{izu} du, so no truncation of the
field extensions is needed:

    int_t^inf (K f)(x) e^{izx} dx = sum_j w_j f(y_j) e^{-izy_j} T(t + y_j).
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .fields import DEFAULT_H, Field, d_t, d_tt, d_x, d_xx, mu_at, probe_points, solve_field
from .fredholm import hamiltonian_at
from .kernels import DEFAULT_MARGIN, fourier_tail, kernel_fourier
from .quadrature import DEFAULT_RESOLUTION


class Route(enum.Enum):
    PSI_PHI_TAIL = "PsiPhiTail"
    PHI_PLUS_MINUS_TAIL = "PhiPlusMinusTail"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        for r in cls:
            if r.value.lower() == str(name).lower() or r.name.lower() == str(name).lower():
                return r
        raise ValueError(f"unknown route {name!r}")


@dataclass(frozen=True)
class RatioPoint:
    t: float
    z: complex
    a: complex
    b: complex
    a_frak: complex
    b_frak: complex
    route: Route
    m: float = 1.0


def _require_z(spec, z, margin):
    z = complex(z)
    if z.imag < spec.growth_c + margin:
        raise DomainError(f"Im z = {z.imag} must be at least c + {margin} = {spec.growth_c + margin}")
    return z


@lru_cache(maxsize=256)
def theta(spec, z):
    return kernel_fourier(spec, complex(z))


def closed_form_ab(th, t, z):
    """a, b for t <= 0 from a(0) = (1 + Theta)/2 and b(0) = i(1 - Theta)/2."""
    a0, b0 = 0.5 * (1 + th), 0.5j * (1 - th)
    c, s = cmath.cos(t * z), cmath.sin(t * z)
    return a0 * c + b0 * s, -a0 * s + b0 * c


def _tail_sums(spec, sol, z, t):
    g = sol.grid
    T = fourier_tail(spec, z, t + g.nodes)
    return np.sum(g.weights * sol.node_values * np.exp(-1j * z * g.nodes) * T)


@lru_cache(maxsize=4096)
def _ab_cached(spec, t, z, route, resolution):
    th = theta(spec, z)
    if t <= 0:
        a, b = closed_form_ab(th, t, z)
        return RatioPoint(t, z, a, b, a, b, route, 1.0)
    m = hamiltonian_at(spec, t, resolution).m
    ezt = cmath.exp(1j * z * t)
    if route is Route.PSI_PHI_TAIL:
        psi = solve_field(spec, t, Field.PSI, resolution)
        phi = solve_field(spec, t, Field.PHI, resolution)
        a = 0.5 * ezt * (1 + th) - 0.5j * z * _tail_sums(spec, psi, z, t)
        minus_ib = 0.5 * ezt * (1 - th) + 0.5j * z * _tail_sums(spec, phi, z, t)
        b = 1j * minus_ib
        return RatioPoint(t, z, complex(a), complex(b), complex(a / m), complex(m * b), route, m)
    fp = solve_field(spec, t, Field.PHI_PLUS, resolution)
    fm = solve_field(spec, t, Field.PHI_MINUS, resolution)
    head = cmath.exp(-1j * z * t) * complex(fourier_tail(spec, z, np.array(2 * t)))
    a_frak = 0.5 * (ezt + head - _tail_sums(spec, fp, z, t))
    b_frak = 1j * 0.5 * (ezt - head - _tail_sums(spec, fm, z, t))
    return RatioPoint(t, z, complex(m * a_frak), complex(b_frak / m), complex(a_frak), complex(b_frak), route, m)


def ab_ratio(spec, t, z, route=Route.PSI_PHI_TAIL, resolution=DEFAULT_RESOLUTION, margin=DEFAULT_MARGIN):
    """a(t,z) and b(t,z) (and the m-rescaled pair) by the chosen route."""
    z = _require_z(spec, z, margin)
    return _ab_cached(spec, float(t), z, Route.parse(route), resolution)


@dataclass(frozen=True)
class OdeResidual:
    res_a: float
    res_b: float
    observed_order: float
    h: float

    @property
    def max(self):
        return max(self.res_a, self.res_b)


def _ode_at(spec, t, z, h, route, resolution):
    p = ab_ratio(spec, t, z, route, resolution)
    hi = ab_ratio(spec, t + h, z, route, resolution)
    lo = ab_ratio(spec, t - h, z, route, resolution)
    gamma = p.m ** 2
    scale = abs(p.a) + abs(p.b)
    da = (hi.a - lo.a) / (2 * h)
    db = (hi.b - lo.b) / (2 * h)
    return abs(da - z * gamma * p.b) / scale, abs(db + z * p.a / gamma) / scale


def ode_residual(spec, t, z, h=DEFAULT_H, route=Route.PSI_PHI_TAIL, resolution=DEFAULT_RESOLUTION):
    """Central-difference residuals of a' = z gamma b and b' = -z a / gamma, relative to |a| + |b|."""
    z = _require_z(spec, z, DEFAULT_MARGIN)
    t, h = float(t), float(h)
    ra, rb = _ode_at(spec, t, z, h, route, resolution)
    ra2, rb2 = _ode_at(spec, t, z, h / 2, route, resolution)
    r1, r2 = max(ra, rb), max(ra2, rb2)
    order = math.log2(r1 / r2) if r1 > 0 and r2 > 0 else math.nan
    return OdeResidual(ra, rb, order, h)


def _ab_derivatives(spec, t, z, h, resolution):
    """(a, a', a'', b, b', b'') by differences, exact in the closed-form regime."""
    p = ab_ratio(spec, t, z, resolution=resolution)
    if t + h <= 0:
        a, b = p.a, p.b
        return a, z * b, -z * z * a, b, -z * a, -z * z * b
    hi = ab_ratio(spec, t + h, z, resolution=resolution)
    lo = ab_ratio(spec, t - h, z, resolution=resolution)
    return (p.a, (hi.a - lo.a) / (2 * h), (hi.a - 2 * p.a + lo.a) / h**2,
            p.b, (hi.b - lo.b) / (2 * h), (hi.b - 2 * p.b + lo.b) / h**2)


PDE_NAMES = ("system_phi", "system_psi", "wave_phi", "wave_psi", "schrodinger_a", "schrodinger_b", "damping")


def pde_residual(spec, t, h=DEFAULT_H, z=2j, resolution=DEFAULT_RESOLUTION, probe=41):
    """Residuals of the first-order system, damped waves and Schrodinger forms.

        Phi_t + Psi_x / gamma = 0            Psi_t + gamma Phi_x = 0
        Phi_tt - Phi_xx + 2 mu Phi_t = 0     Psi_tt - Psi_xx - 2 mu Psi_t = 0
        a'' - 2 mu a' + z^2 a = 0            b'' + 2 mu b' + z^2 b = 0

    Field residuals are max norms over interior probe points; the a, b
    residuals are relative to |a| + |b|.  ``damping`` compares gamma'/gamma
    (differences of the determinant route) with 2 mu.
    """
    t, h = float(t), float(h)
    z = _require_z(spec, z, DEFAULT_MARGIN)
    P, S = Field.PHI, Field.PSI
    x = probe_points(spec, t, h, probe)
    gamma = hamiltonian_at(spec, t, resolution).gamma
    mu = mu_at(spec, t, resolution)
    phi_t, psi_t = d_t(spec, P, t, x, h, resolution), d_t(spec, S, t, x, h, resolution)
    phi_x, psi_x = d_x(spec, P, t, x, h, resolution), d_x(spec, S, t, x, h, resolution)
    out = {
        "system_phi": np.max(np.abs(phi_t + psi_x / gamma)),
        "system_psi": np.max(np.abs(psi_t + gamma * phi_x)),
        "wave_phi": np.max(np.abs(d_tt(spec, P, t, x, h, resolution) - d_xx(spec, P, t, x, h, resolution) + 2 * mu * phi_t)),
        "wave_psi": np.max(np.abs(d_tt(spec, S, t, x, h, resolution) - d_xx(spec, S, t, x, h, resolution) - 2 * mu * psi_t)),
    }
    a, da, dda, b, db, ddb = _ab_derivatives(spec, t, z, h, resolution)
    scale = abs(a) + abs(b)
    out["schrodinger_a"] = abs(dda - 2 * mu * da + z * z * a) / scale
    out["schrodinger_b"] = abs(ddb + 2 * mu * db + z * z * b) / scale
    if t + h <= 0:
        out["damping"] = 0.0
    else:
        g_hi = hamiltonian_at(spec, t + h, resolution).gamma
        g_lo = hamiltonian_at(spec, t - h, resolution).gamma
        out["damping"] = abs((g_hi - g_lo) / (2 * h) / gamma - 2 * mu)
    return {k: float(v) for k, v in out.items()}


@dataclass(frozen=True)
class ThetaConsistency:
    a_residual: float
    b_residual: float
    normalization: float

    @property
    def residual(self):
        return self.a_residual + self.b_residual


def theta_consistency(spec, z, theta_ref=None, resolution=DEFAULT_RESOLUTION):
    """Compare a(0,z), b(0,z) with (1 +- Theta)/2 forms; Theta defaults to kernel_fourier.

    ``normalization`` is |a(0,z) - i b(0,z) - 1|, which vanishes since E = A - iB.
    """
    z = _require_z(spec, z, DEFAULT_MARGIN)
    th = theta(spec, z) if theta_ref is None else complex(theta_ref)
    # a(0, z) through the phi_plus / phi_minus tail formula with an empty interval
    p = ab_ratio(spec, 0.0, z, Route.PHI_PLUS_MINUS_TAIL, resolution)
    tail = complex(fourier_tail(spec, z, np.array(0.0)))
    a0, b0 = 0.5 * (1 + tail), 0.5j * (1 - tail)
    return ThetaConsistency(
        a_residual=abs(a0 - 0.5 * (1 + th)) + abs(p.a - a0),
        b_residual=abs(b0 - 0.5j * (1 - th)) + abs(p.b - b0),
        normalization=abs(a0 - 1j * b0 - 1),
    )
