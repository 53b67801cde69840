"""The four field equations on [-t, t], their extensions and derivative identities.

    Phi      + K Phi      = 1           Psi      - K Psi      = 1
    phi_plus + K phi_plus = K(. + t)    phi_minus - K phi_minus = K(. + t)

with (K f)(x) = int_{-t}^{t} K(x + y) f(y) dy.  Every solution is evaluated
through its natural interpolant (the right-hand side minus the kernel term),
which is valid for all real x and reduces to the extension formula for x > t.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, K5Violation, LinearSolveFailure
from .fredholm import NEAR_SINGULAR, _lu_det, discretize, hamiltonian_at
from .quadrature import DEFAULT_RESOLUTION, apply_kernel, gauss_nodes

COND_GUARD = 1e12
DEFAULT_H = 1e-2


class Field(enum.Enum):
    PHI = "Phi"
    PSI = "Psi"
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"

    @property
    def sign(self):
        """+1 when the operator is I + K, -1 for I - K."""
        return 1 if self in (Field.PHI, Field.PHI_PLUS) else -1

    @property
    def unit_rhs(self):
        return self in (Field.PHI, Field.PSI)

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).replace("_", "").replace("-", "").lower()
        for f in cls:
            if f.value.lower() == key:
                return f
        raise ValueError(f"unknown field {name!r}; expected one of {[f.value for f in cls]}")


def _iik(spec, s, q=32):
    """int_0^s IK(u) du, zero for s <= 0."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.zeros_like(s)
    for i, si in enumerate(s):
        if si <= 0:
            continue
        edges = sorted({0.0, si, *(p for p in spec.breakpoints if 0 < p < si)})
        for a, b in zip(edges[:-1], edges[1:]):
            u, w = gauss_nodes(q, a, b)
            out[i] += np.dot(w, spec.IK(u))
    return out


def _closed_form(spec, which, t, x, order=0):
    """Total derivative of the given order (in x, or equally in t) for t <= 0."""
    s = x + t
    if which.unit_rhs:
        sgn = -which.sign
        if order == 0:
            return 1.0 + sgn * spec.IK(s)
        if order == 1:
            return sgn * spec.K(s)
        if order == 2:
            return sgn * spec.dK(s)
    else:
        if order == 0:
            return spec.K(s)
        if order == 1:
            return spec.dK(s)
    raise ValueError("closed-form derivative order not available")


@dataclass(frozen=True, eq=False)
class FieldSolution:
    which: Field
    t: float
    spec: object = field(repr=False)
    grid: object = field(repr=False)
    node_values: np.ndarray = field(repr=False)
    boundary_value: float = math.nan
    cond: float = 1.0

    def __call__(self, x):
        """Field value at any real x (scalar in, scalar out)."""
        xa = np.asarray(x, dtype=float)
        out = self._evaluate(np.atleast_1d(xa))
        return float(out[0]) if xa.ndim == 0 else out

    def _evaluate(self, x):
        spec, t, which = self.spec, self.t, self.which
        if self.grid is None:
            return np.asarray(_closed_form(spec, which, t, x), dtype=float)
        if which.unit_rhs:
            base = 1.0 - which.sign * spec.IK(np.maximum(x - t, 0.0))
        else:
            base = spec.K(x + t)
        return base - which.sign * apply_kernel(spec, self.grid, self.node_values, x)

    @property
    def nodes(self):
        return None if self.grid is None else self.grid.nodes

    def cumulative(self, x):
        """int_{-t}^{x} (f - f(-inf)) dy for any real x.

        Inside [-t, t] the node interpolant is integrated exactly; beyond t the
        extension is integrated by Gauss panels split at the kernel's breakpoints.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        far = 1.0 if self.which.unit_rhs else 0.0
        if self.grid is None:
            if self.which.unit_rhs:
                return -self.which.sign * _iik(self.spec, x + self.t)
            return self.spec.IK(x + self.t)
        t, g = self.t, self.grid
        n = g.order_per_panel
        panel_sums = (g.weights * (self.node_values - far)).reshape(g.n_panels, n).sum(axis=1)
        before = np.concatenate([[0.0], np.cumsum(panel_sums)])
        xi = np.clip(x, -t, t)
        k = np.clip(np.searchsorted(g.edges, xi, side="right") - 1, 0, g.n_panels - 1)
        a = g.edges[k]
        gx, gw = gauss_nodes(n, -1.0, 1.0)
        half = 0.5 * (xi - a)
        y = a[:, None] + half[:, None] * (gx + 1.0)
        out = before[k] + half * ((g.interpolate(self.node_values, y) - far) @ gw)
        for i in np.flatnonzero(x > t):
            out[i] += self._beyond(x[i], far)
        return out

    def _beyond(self, x, far):
        t = self.t
        cuts = {p for lam in self.spec.breakpoints for p in (lam - t, lam + t)}
        edges = _breaks(t, x, cuts)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            u, w = gauss_nodes(self.grid.order_per_panel + 8, lo, hi)
            total += float(np.dot(w, self._evaluate(u) - far))
        return total

    def integral(self):
        """int_{-t}^{t} of the field (zero for t <= 0)."""
        if self.grid is None:
            return 0.0
        return float(np.dot(self.grid.weights, self.node_values))


@lru_cache(maxsize=1024)
def solve_field(spec, t, which, resolution=DEFAULT_RESOLUTION):
    which = Field.parse(which)
    t = float(t)
    if t <= 0:
        bv = float(_closed_form(spec, which, t, np.float64(t)))
        return FieldSolution(which, t, spec, None, np.empty(0), bv, 1.0)
    disc = discretize(spec, t, resolution)
    sign = which.sign
    det = _lu_det(disc.lu(sign))
    if abs(det) < NEAR_SINGULAR:
        raise K5Violation(t, f"det = {det:.3e}")
    cond = disc.cond(sign)
    if cond > COND_GUARD:
        raise LinearSolveFailure(t, cond)
    grid = disc.grid
    sw = np.sqrt(grid.weights)
    rhs = np.ones_like(grid.nodes) if which.unit_rhs else spec.K(grid.nodes + t)
    u = sla.lu_solve(disc.lu(sign), sw * rhs, check_finite=False) / sw
    u.setflags(write=False)
    sol = FieldSolution(which, t, spec, grid, u, math.nan, cond)
    object.__setattr__(sol, "boundary_value", sol(t))
    return sol


def field_extend(sol, x):
    """Value of the solution at x > t."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= sol.t):
        raise DomainError(f"extension needs x > t = {sol.t}")
    return sol(x)


def field_value(spec, which, t, x, resolution=DEFAULT_RESOLUTION):
    return solve_field(spec, float(t), Field.parse(which), resolution)(x)


def boundary_m(spec, t, resolution=DEFAULT_RESOLUTION):
    """(1/Phi(t,t), Psi(t,t)); both equal m(t)."""
    phi = solve_field(spec, float(t), Field.PHI, resolution).boundary_value
    psi = solve_field(spec, float(t), Field.PSI, resolution).boundary_value
    return 1.0 / phi, psi


def mu_at(spec, t, resolution=DEFAULT_RESOLUTION):
    """mu(t) = phi_plus(t,t) + phi_minus(t,t)."""
    t = float(t)
    return (solve_field(spec, t, Field.PHI_PLUS, resolution).boundary_value
            + solve_field(spec, t, Field.PHI_MINUS, resolution).boundary_value)


def _breaks(lo, hi, pts):
    return sorted({lo, hi, *(p for p in pts if lo < p < hi)})


def log_m_from_mu(spec, t, resolution=DEFAULT_RESOLUTION, q=24):
    """int_0^t mu(s) ds by composite Gauss split where 2s meets a breakpoint."""
    t = float(t)
    if t <= 0:
        return 0.0
    edges = _breaks(0.0, t, [0.5 * lam for lam in spec.breakpoints])
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        s, w = gauss_nodes(q, a, b)
        total += sum(wk * mu_at(spec, sk, resolution) for sk, wk in zip(s, w))
    return total


def m_from_mu(spec, t, resolution=DEFAULT_RESOLUTION, q=24):
    return math.exp(log_m_from_mu(spec, t, resolution, q))


# ---------------------------------------------------------------------------
# finite-difference derivatives


def _eval(spec, which, t, x, resolution):
    return solve_field(spec, float(t), which, resolution)(x)


def d_t(spec, which, t, x, h, resolution=DEFAULT_RESOLUTION):
    """Central difference in t; exact derivative once t + h <= 0."""
    if t + h <= 0:
        return _closed_form(spec, which, t, np.asarray(x, dtype=float), 1)
    return (_eval(spec, which, t + h, x, resolution) - _eval(spec, which, t - h, x, resolution)) / (2 * h)


def d_x(spec, which, t, x, h, resolution=DEFAULT_RESOLUTION):
    if t <= 0:
        return _closed_form(spec, which, t, np.asarray(x, dtype=float), 1)
    f = solve_field(spec, float(t), which, resolution)
    x = np.asarray(x, dtype=float)
    return (f(x + h) - f(x - h)) / (2 * h)


def d_tt(spec, which, t, x, h, resolution=DEFAULT_RESOLUTION):
    if t + h <= 0:
        return _closed_form(spec, which, t, np.asarray(x, dtype=float), 2)
    f0 = _eval(spec, which, t, x, resolution)
    return (_eval(spec, which, t + h, x, resolution) - 2 * f0 + _eval(spec, which, t - h, x, resolution)) / (h * h)


def d_xx(spec, which, t, x, h, resolution=DEFAULT_RESOLUTION):
    if t <= 0:
        return _closed_form(spec, which, t, np.asarray(x, dtype=float), 2)
    f = solve_field(spec, float(t), which, resolution)
    x = np.asarray(x, dtype=float)
    return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h)


def singular_set(spec, t, depth=3):
    """Points where the fields at time t may lose smoothness in x."""
    if t <= 0:
        return sorted({lam - t for lam in spec.kinks})
    pts = {-t, t}
    reach = 3 * abs(t) + (max(spec.kinks) if spec.kinks else 0.0)
    for _ in range(depth):
        pts |= {lam - p for lam in spec.kinks for p in pts if abs(lam - p) <= reach}
    return sorted(pts)


def probe_points(spec, t, h, count=41, margin=3.0):
    """Uniform interior points of (-t, t) (or (-1, 1) for t <= 0) away from singular points."""
    lo, hi = (-t, t) if t > 0 else (-1.0, 1.0)
    x = np.linspace(lo, hi, count + 2)[1:-1]
    bad = np.asarray(singular_set(spec, t) + ([] if t > 0 else []), dtype=float)
    if len(bad):
        keep = np.min(np.abs(x[:, None] - bad[None, :]), axis=1) > margin * h
        x = x[keep]
    return x


# ---------------------------------------------------------------------------
# relation residuals

H_DEPENDENT = ("r1", "r2", "r3", "r4", "r7", "r8", "r9", "r10")


@dataclass(frozen=True)
class ResidualMap:
    t: float
    h: float
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def max(self):
        return max(self.values.values())


def observed_order(r_h, r_h2):
    """log2 of the residual ratio under h-halving (nan when both vanish)."""
    if r_h2 <= 0 or r_h <= 0:
        return math.nan
    return math.log2(r_h / r_h2)


def _dt_cumulative(spec, which, t, x, h, resolution):
    """int_{-t}^{x} d/dt f(t, y) dy as a t-difference of int_{-t}^{x} (f - f(-inf))."""
    if not which.unit_rhs:
        raise ValueError("only Phi and Psi have this reconstruction")
    if t + h <= 0:
        return _closed_form(spec, which, t, np.asarray(x, dtype=float)) - 1.0
    hi = solve_field(spec, t + h, which, resolution).cumulative(x)
    lo = solve_field(spec, t - h, which, resolution).cumulative(x)
    return (hi - lo) / (2 * h)


def relation_residuals(spec, t, h=DEFAULT_H, resolution=DEFAULT_RESOLUTION, probe=41):
    """Residuals r1..r10 of the derivative relations and quadrature identities."""
    t, h = float(t), float(h)
    P, S, FP, FM = Field.PHI, Field.PSI, Field.PHI_PLUS, Field.PHI_MINUS
    x = probe_points(spec, t, h, probe)
    sol = {f: solve_field(spec, t, f, resolution) for f in Field}
    phi_tt = sol[P].boundary_value
    psi_tt = sol[S].boundary_value
    fp, fm = sol[FP](x), sol[FM](x)
    r = {}
    r["r1"] = np.max(np.abs(fp + d_t(spec, P, t, x, h, resolution) / phi_tt))
    r["r2"] = np.max(np.abs(fm + d_x(spec, P, t, x, h, resolution) / phi_tt))
    r["r3"] = np.max(np.abs(fp - d_x(spec, S, t, x, h, resolution) / psi_tt))
    r["r4"] = np.max(np.abs(fm - d_t(spec, S, t, x, h, resolution) / psi_tt))
    m = hamiltonian_at(spec, t, resolution).m
    r["r5"] = abs(1.0 / m - (1.0 - sol[FP].integral()))
    r["r6"] = abs(m - (1.0 + sol[FM].integral()))
    mu = sol[FP].boundary_value + sol[FM].boundary_value
    r["r7"] = np.max(np.abs(d_t(spec, FP, t, x, h, resolution) - d_x(spec, FM, t, x, h, resolution) + mu * fp))
    r["r8"] = np.max(np.abs(d_t(spec, FM, t, x, h, resolution) - d_x(spec, FP, t, x, h, resolution) - mu * fm))
    int_dphi = _dt_cumulative(spec, P, t, x, h, resolution)
    int_dpsi = _dt_cumulative(spec, S, t, x, h, resolution)
    r["r9"] = np.max(np.abs(sol[S](x) - (1.0 - int_dphi / phi_tt**2)))
    r["r10"] = np.max(np.abs(sol[P](x) - (1.0 - int_dpsi / psi_tt**2)))
    return ResidualMap(t, h, {k: float(v) for k, v in r.items()})
