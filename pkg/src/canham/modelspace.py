"""Projection equations on [-t, t], the reproducing kernel j(t; z, w) and the energy identity.

The projection equations are (I +- K[t]) u = e_z +- Theta(z) e_{-z} with
e_z(x) = exp(izx); their values at x = t are tied to a, b through
a_z(t) = 2a/m and b_z(t) = -2i m b.  The kernel is the E-normalized

    j(t; z, w) = (conj(a(t,z)) b(t,w) - a(t,w) conj(b(t,z))) / (pi (w - conj(z)))

and satisfies j(t) - j(s) = (1/pi) int_t^s conj(a_z) a_w / gamma + conj(b_z) b_w gamma dr.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .canonical import ab_ratio, theta, _require_z
from .errors import K5Violation
from .fredholm import NEAR_SINGULAR, _lu_det, discretize, hamiltonian_at
from .kernels import DEFAULT_MARGIN
from .quadrature import DEFAULT_RESOLUTION, apply_kernel, gauss_nodes


@dataclass(frozen=True, eq=False)
class ProjectionSolution:
    t: float
    z: complex
    a_z_nodes: np.ndarray = field(repr=False)
    b_z_nodes: np.ndarray = field(repr=False)
    a_z_at_t: complex = 0j
    b_z_at_t: complex = 0j
    theta: complex = 0j
    spec: object = field(default=None, repr=False)
    grid: object = field(default=None, repr=False)

    def rhs(self, x, sign):
        x = np.asarray(x, dtype=float)
        return np.exp(1j * self.z * x) + sign * self.theta * np.exp(-1j * self.z * x)

    def equation_residual(self, x):
        """max |u +- K u - rhs| at points x using the polynomial interpolant of the node values."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        worst = 0.0
        for sign, u in ((1, self.a_z_nodes), (-1, self.b_z_nodes)):
            ux = self.grid.interpolate(u, x)
            ku = apply_kernel(self.spec, self.grid, u, x)
            worst = max(worst, float(np.max(np.abs(ux + sign * ku - self.rhs(x, sign)))))
        return worst


def _complex_solve(lu, rhs):
    return sla.lu_solve(lu, rhs.real, check_finite=False) + 1j * sla.lu_solve(lu, rhs.imag, check_finite=False)


def solve_projection_eqs(spec, t, z, resolution=DEFAULT_RESOLUTION, margin=DEFAULT_MARGIN):
    z = _require_z(spec, z, margin)
    t = float(t)
    th = theta(spec, z)
    ezt, emzt = cmath.exp(1j * z * t), cmath.exp(-1j * z * t)
    if t <= 0:
        empty = np.empty(0, dtype=complex)
        return ProjectionSolution(t, z, empty, empty, ezt + th * emzt, ezt - th * emzt, th, spec, None)
    disc = discretize(spec, t, resolution)
    grid = disc.grid
    sw = np.sqrt(grid.weights)
    out = {}
    for sign in (1, -1):
        det = _lu_det(disc.lu(sign))
        if abs(det) < NEAR_SINGULAR:
            raise K5Violation(t, f"det = {det:.3e}")
        rhs = np.exp(1j * z * grid.nodes) + sign * th * np.exp(-1j * z * grid.nodes)
        u = _complex_solve(disc.lu(sign), sw * rhs) / sw
        at_t = ezt + sign * th * emzt - sign * complex(apply_kernel(spec, grid, u, np.array([t]))[0])
        out[sign] = (u, at_t)
    return ProjectionSolution(t, z, out[1][0], out[-1][0], out[1][1], out[-1][1], th, spec, grid)


def boundary_identity(spec, t, z, resolution=DEFAULT_RESOLUTION):
    """|a_z(t) - 2a/m| + |b_z(t) + 2i m b|."""
    sol = solve_projection_eqs(spec, t, z, resolution)
    p = ab_ratio(spec, t, z, resolution=resolution)
    return abs(sol.a_z_at_t - 2 * p.a / p.m) + abs(sol.b_z_at_t + 2j * p.m * p.b)


@dataclass(frozen=True)
class KernelValue:
    t: float
    z: complex
    w: complex
    j_hat: complex


def _j_from(pz, pw, z, w):
    num = pz.a.conjugate() * pw.b - pw.a * pz.b.conjugate()
    return num / (math.pi * (w - z.conjugate()))


def j_kernel(spec, t, z, w, resolution=DEFAULT_RESOLUTION):
    z = _require_z(spec, z, DEFAULT_MARGIN)
    w = _require_z(spec, w, DEFAULT_MARGIN)
    t = float(t)
    pz = ab_ratio(spec, t, z, resolution=resolution)
    pw = ab_ratio(spec, t, w, resolution=resolution)
    return KernelValue(t, z, w, complex(_j_from(pz, pw, z, w)))


def theta_kernel(th_z, th_w, z, w):
    """j at t = 0: (1 - conj(Theta(z)) Theta(w)) / (2 pi i (conj(z) - w))."""
    return (1 - th_z.conjugate() * th_w) / (2j * math.pi * (z.conjugate() - w))


def closed_form_j(th_z, th_w, t, z, w):
    """j(t; z, w) for t <= 0 from the trigonometric closed forms."""
    d = w - z.conjugate()
    a0z, b0z = 0.5 * (1 + th_z), 0.5j * (1 - th_z)
    a0w, b0w = 0.5 * (1 + th_w), 0.5j * (1 - th_w)
    j0 = (a0z.conjugate() * b0w - a0w * b0z.conjugate()) / (math.pi * d)
    energy = a0z.conjugate() * a0w + b0z.conjugate() * b0w
    return j0 * cmath.cos(t * d) - energy * cmath.sin(t * d) / (math.pi * d)


@dataclass(frozen=True)
class EnergyResidual:
    lhs: complex
    rhs: complex

    @property
    def residual(self):
        return abs(self.lhs - self.rhs)


def energy_identity(spec, t, s, z, w, r_nodes=64, resolution=DEFAULT_RESOLUTION):
    """Both sides of j(t) - j(s) = (1/pi) int_t^s (conj(a_z) a_w / gamma + conj(b_z) b_w gamma) dr."""
    t, s = float(t), float(s)
    if s < t:
        raise ValueError("energy identity needs t <= s")
    z = _require_z(spec, z, DEFAULT_MARGIN)
    w = _require_z(spec, w, DEFAULT_MARGIN)
    lhs = j_kernel(spec, t, z, w, resolution).j_hat - j_kernel(spec, s, z, w, resolution).j_hat
    if s == t:
        return EnergyResidual(lhs, 0j)
    cuts = {0.0} | {0.5 * lam for lam in spec.breakpoints}
    edges = sorted({t, s, *(c for c in cuts if t < c < s)})
    total = 0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        rs, ws = gauss_nodes(r_nodes, lo, hi)
        for r, wr in zip(rs, ws):
            pz = ab_ratio(spec, r, z, resolution=resolution)
            pw = ab_ratio(spec, r, w, resolution=resolution)
            gamma = hamiltonian_at(spec, r, resolution).gamma
            total += wr * (pz.a.conjugate() * pw.a / gamma + pz.b.conjugate() * pw.b * gamma)
    return EnergyResidual(complex(lhs), complex(total / math.pi))


@dataclass(frozen=True)
class DecayScan:
    z: complex
    values: tuple
    increases: tuple
    min_value: float


def decay_scan(spec, z, t_grid, tol=1e-8, resolution=DEFAULT_RESOLUTION):
    """j(t; z, z) along a grid, recording increases larger than tol (no limit is claimed)."""
    z = _require_z(spec, z, DEFAULT_MARGIN)
    vals = tuple((float(t), j_kernel(spec, t, z, z, resolution).j_hat.real) for t in t_grid)
    inc = tuple(t1 for (t0, v0), (t1, v1) in zip(vals, vals[1:]) if v1 - v0 > tol)
    return DecayScan(z, vals, inc, min((v for _, v in vals), default=math.nan))
