"""Admissible Hankel kernels K and their Fourier symbol.

A kernel is supported on [0, inf), real valued and of exponential growth at
most ``exp(c x)``.  Three families are built in: a decaying exponential (jump
at 0), a C-infinity bump with compact support, and a sampled table with
spline interpolation.  Every other module reaches K only through
:class:`KernelSpec`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import make_interp_spline

from .errors import DomainError, KinkPoint, SpecError

FOURIER_TOL = 1e-12
DEFAULT_MARGIN = 0.1
# stand-in for "all derivatives vanish at 0+"
SMOOTH_INFINITY = 99

_GAUSS_Q = 32


@lru_cache(maxsize=None)
def _gauss(q):
    x, w = leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class Exponential:
    """K(x) = alpha * exp(-beta x) for x >= 0."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise SpecError("Exponential needs alpha > 0 and beta > 0")

    name = "exp"
    support_end = math.inf
    smoothness = 0

    @property
    def intrinsic_kinks(self):
        return (0.0,)

    @property
    def edges(self):
        return (0.0,)

    @property
    def bound(self):
        return self.alpha

    @property
    def panel_scale(self):
        return 1.0 / self.beta

    def value(self, x):
        return self.alpha * np.exp(-self.beta * x)

    def deriv(self, x):
        return -self.beta * self.alpha * np.exp(-self.beta * x)

    def cumulative(self, x):
        return self.alpha * (-np.expm1(-self.beta * x)) / self.beta


def _bump_profile(s):
    # exp(4 - 1/(s(1-s))) on (0, 1), zero elsewhere
    s = np.asarray(s, dtype=float)
    inside = (s > 0.0) & (s < 1.0)
    sc = np.where(inside, s, 0.5)
    return np.where(inside, np.exp(4.0 - 1.0 / (sc * (1.0 - sc))), 0.0)


@lru_cache(maxsize=None)
def _bump_unit_mass():
    g, w = _gauss(_GAUSS_Q)
    edges = np.linspace(0.0, 1.0, 17)
    h = np.diff(edges)[:, None]
    nodes = edges[:-1, None] + 0.5 * h * (g[None, :] + 1.0)
    return float(np.sum(0.5 * h * w[None, :] * _bump_profile(nodes)))


@dataclass(frozen=True)
class Bump:
    """K(x) = alpha * exp(4 - w^2 / (x (w - x))) on (0, w); K(w/2) = alpha."""

    alpha: float
    width: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.width > 0):
            raise SpecError("Bump needs alpha > 0 and width > 0")

    name = "bump"
    smoothness = SMOOTH_INFINITY

    @classmethod
    def with_mass(cls, mass, width=1.0):
        """Scale alpha so that the integral of K equals ``mass``."""
        return cls(alpha=mass / (width * _bump_unit_mass()), width=width)

    @property
    def mass(self):
        return self.alpha * self.width * _bump_unit_mass()

    @property
    def support_end(self):
        return self.width

    @property
    def intrinsic_kinks(self):
        return ()

    @property
    def edges(self):
        return (0.0, self.width)

    @property
    def bound(self):
        return self.alpha

    @property
    def panel_scale(self):
        return self.width / 8.0

    def value(self, x):
        return self.alpha * _bump_profile(np.asarray(x) / self.width)

    def deriv(self, x):
        w = self.width
        x = np.asarray(x, dtype=float)
        inside = (x > 0.0) & (x < w)
        xc = np.where(inside, x, 0.5 * w)
        q = xc * (w - xc)
        dexp = w * w * (w - 2.0 * xc) / (q * q)
        return np.where(inside, self.value(xc) * dexp, 0.0)

    def cumulative(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, self.width)
        return self.mass - _integrate_from(self, lambda u: self.value(u), x)


@dataclass(frozen=True)
class SampledTable:
    """Spline through (x_k, K_k); zero outside [max(0, x_0), x_last]."""

    xs: tuple
    ks: tuple
    order: int = 3

    name = "table"

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if xs.ndim != 1 or len(xs) != len(self.ks):
            raise SpecError("table abscissae and values must be 1-D of equal length")
        if self.order not in (1, 3):
            raise SpecError("interp_order must be 1 or 3")
        if len(xs) < self.order + 1:
            raise SpecError(f"order-{self.order} table needs at least {self.order + 1} samples")
        if np.any(np.diff(xs) <= 0):
            raise SpecError("table abscissae must be strictly increasing")
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(self.ks)):
            raise SpecError("table entries must be finite")

    @cached_property
    def _spline(self):
        return make_interp_spline(np.asarray(self.xs), np.asarray(self.ks), k=self.order)

    @cached_property
    def _dspline(self):
        return self._spline.derivative()

    @cached_property
    def _ispline(self):
        return self._spline.antiderivative()

    @property
    def lo(self):
        return max(0.0, float(self.xs[0]))

    @property
    def support_end(self):
        return float(self.xs[-1])

    @property
    def smoothness(self):
        return 0 if self.value(np.array([self.lo]))[0] != 0.0 else 1

    @property
    def intrinsic_kinks(self):
        if self.order == 1:
            return tuple(sorted({self.lo} | {float(x) for x in self.xs if x >= 0}))
        return (self.lo, self.support_end)

    @property
    def edges(self):
        return tuple(sorted({self.lo} | {float(x) for x in self.xs if x >= 0}))

    @cached_property
    def bound(self):
        grid = np.linspace(self.lo, self.support_end, 2001)
        return float(np.max(np.abs(self._spline(grid)))) or 1.0

    @property
    def panel_scale(self):
        return max(float(np.min(np.diff(self.xs))), 1e-3)

    def _inside(self, x):
        return (x >= self.lo) & (x <= self.support_end)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(self._inside(x), self._spline(x), 0.0)

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(self._inside(x), self._dspline(x), 0.0)

    def cumulative(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.support_end)
        return self._ispline(x) - self._ispline(self.lo)


Family = Union[Exponential, Bump, SampledTable]


# ---------------------------------------------------------------------------
# spec


@dataclass(frozen=True)
class KernelSpec:
    """An admissible kernel plus the metadata the discretization relies on.

    ``kinks`` holds the points where K or K' jumps (the set Lambda); panel
    grids are split at their images and kink-crossed blocks are integrated
    exactly.  ``growth_c`` is the constant c with |K(x)| <= C exp(c x).
    """

    family: Family
    growth_c: float = 0.0
    kinks: tuple = field(default=None)
    smoothness: int = field(default=None)

    def __post_init__(self):
        if self.growth_c < 0:
            raise SpecError("growth constant c must be nonnegative")
        declared = () if self.kinks is None else tuple(float(k) for k in self.kinks)
        if any(k < 0 for k in declared):
            raise SpecError("kinks must be nonnegative")
        merged = tuple(sorted(set(declared) | set(self.family.intrinsic_kinks)))
        object.__setattr__(self, "kinks", merged)
        if self.smoothness is None:
            object.__setattr__(self, "smoothness", int(self.family.smoothness))

    # -- convenience constructors
    @classmethod
    def exponential(cls, alpha, beta):
        return cls(Exponential(float(alpha), float(beta)))

    @classmethod
    def bump(cls, alpha, width=1.0):
        return cls(Bump(float(alpha), float(width)))

    @classmethod
    def bump_with_mass(cls, mass, width=1.0):
        return cls(Bump.with_mass(float(mass), float(width)))

    @classmethod
    def table(cls, samples, order=3, kinks=None, growth_c=0.0):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 2:
            raise SpecError("samples must be a list of [x, K] pairs")
        fam = SampledTable(tuple(samples[:, 0]), tuple(samples[:, 1]), int(order))
        return cls(fam, growth_c=float(growth_c), kinks=kinks)

    @property
    def breakpoints(self):
        """Kinks together with the support edges (where K is not analytic)."""
        pts = set(self.kinks) | set(self.family.edges)
        if math.isfinite(self.family.support_end):
            pts.add(float(self.family.support_end))
        return tuple(sorted(pts))

    @property
    def support_end(self):
        return self.family.support_end

    def K(self, x):
        """Vectorised K; exactly zero for x < 0."""
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        return np.where(x >= 0.0, self.family.value(xp), 0.0)

    def dK(self, x):
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        return np.where(x > 0.0, self.family.deriv(xp), 0.0)

    def IK(self, x):
        """Cumulative integral of K from 0 to x (zero for x <= 0)."""
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        return np.where(x > 0.0, self.family.cumulative(xp), 0.0)

    # -- serialization
    def to_dict(self):
        fam = self.family
        d = {"family": fam.name, "c": self.growth_c, "kinks": list(self.kinks)}
        if isinstance(fam, Exponential):
            d.update(alpha=fam.alpha, beta=fam.beta)
        elif isinstance(fam, Bump):
            d.update(alpha=fam.alpha, width=fam.width)
        else:
            d.update(samples=[[x, k] for x, k in zip(fam.xs, fam.ks)], interp_order=fam.order)
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            name = d["family"]
            c = float(d.get("c", 0.0))
            kinks = d.get("kinks")
            if name == "exp":
                fam = Exponential(float(d["alpha"]), float(d["beta"]))
            elif name == "bump":
                width = float(d.get("width", 1.0))
                if "alpha" in d:
                    fam = Bump(float(d["alpha"]), width)
                else:
                    fam = Bump.with_mass(float(d["mass"]), width)
            elif name == "table":
                return cls.table(d["samples"], d.get("interp_order", 3), kinks=kinks, growth_c=c)
            else:
                raise SpecError(f"unknown kernel family {name!r}")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"malformed kernel spec: {exc}") from exc
        return cls(fam, growth_c=c, kinks=kinks)


def load_spec(path):
    """Read a kernel spec JSON file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read kernel spec {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"kernel spec {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SpecError("kernel spec must be a JSON object")
    return KernelSpec.from_dict(data)


# ---------------------------------------------------------------------------
# point evaluation


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def kernel_eval(spec, x):
    """K(x); identically zero on the negative half-line."""
    return _scalar_or_array(x, spec.K(x))


def kernel_deriv(spec, x):
    """K'(x).  Raises :class:`KinkPoint` on the kink set."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    for k in spec.kinks:
        hit = xs == k
        if np.any(hit):
            raise KinkPoint(k)
    return _scalar_or_array(x, spec.dK(x))


# ---------------------------------------------------------------------------
# integrals of K times a smooth weight


def _partition(fam, upper, extra_scale=math.inf):
    """Panel edges on [0, upper] through every non-analytic point of K."""
    pts = sorted({0.0, float(upper)} | {e for e in fam.edges if 0.0 < e < upper})
    if math.isfinite(fam.support_end) and fam.support_end < upper:
        pts = sorted(set(pts) | {float(fam.support_end)})
    L = min(fam.panel_scale, extra_scale)
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(1, int(math.ceil((b - a) / L - 1e-12)))
        out.extend(np.linspace(a, b, k + 1)[1:].tolist())
    return np.asarray(out)


def _integrate_from(fam, f, lower, upper=None, extra_scale=math.inf):
    """Vectorised integral of f over [lower_k, upper] by composite Gauss.

    ``f`` must vanish wherever K does; panels are cut at every edge of the
    family so the integrand is analytic on each panel.
    """
    lower = np.asarray(lower, dtype=float)
    if upper is None:
        upper = fam.support_end
    edges = _partition(fam, upper, extra_scale)
    g, w = _gauss(_GAUSS_Q)
    h = np.diff(edges)
    nodes = edges[:-1, None] + 0.5 * h[:, None] * (g[None, :] + 1.0)
    full = np.sum(0.5 * h[:, None] * w[None, :] * f(nodes), axis=1)
    suffix = np.concatenate([np.cumsum(full[::-1])[::-1], [0.0]])
    lo = np.clip(lower, edges[0], edges[-1])
    idx = np.clip(np.searchsorted(edges, lo, side="right") - 1, 0, len(h) - 1)
    right = edges[idx + 1]
    span = right - lo
    pn = lo[..., None] + 0.5 * span[..., None] * (g + 1.0)
    partial = np.sum(0.5 * span[..., None] * w * f(pn), axis=-1)
    return partial + suffix[idx + 1]


def truncation_point(spec, z, tol=FOURIER_TOL):
    """X with C e^{(c - Im z) X} / (Im z - c) <= tol, or the support end."""
    fam = spec.family
    if math.isfinite(fam.support_end):
        return float(fam.support_end)
    gap = z.imag - spec.growth_c
    X = math.log(max(fam.bound / (tol * gap), 1.0)) / gap
    return max(X, 1.0)


def _check_half_plane(spec, z):
    z = complex(z)
    if not z.imag > spec.growth_c:
        raise DomainError(f"Im z = {z.imag} must exceed c = {spec.growth_c}")
    return z


def fourier_tail(spec, z, lower, tol=FOURIER_TOL):
    """Integral of K(u) e^{izu} over [lower, inf) for Im z > c (vectorised in lower)."""
    z = _check_half_plane(spec, z)
    X = truncation_point(spec, z, tol)
    lower = np.asarray(lower, dtype=float)
    osc = 4.0 / max(1.0, abs(z))
    f = lambda u: spec.K(u) * np.exp(1j * z * u)
    upper = max(X, float(np.max(lower, initial=0.0)))
    return _integrate_from(spec.family, f, np.maximum(lower, 0.0), upper, osc)


def kernel_fourier(spec, z, tol=FOURIER_TOL):
    """Theta(z) = int_0^inf K(x) e^{izx} dx for Im z > c."""
    return complex(fourier_tail(spec, z, np.array(0.0), tol))


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class KernelValidationReport:
    support_ok: bool
    continuity_probe_max_jump: float
    estimated_growth_c: float
    fourier_sup_bound: float
    k5_small_symbol: bool

    @property
    def ok(self):
        return self.support_ok


def kernel_validate(spec, probe=201, epsilon=DEFAULT_MARGIN):
    """Probe support, continuity, growth and the size of the symbol FK."""
    fam = spec.family
    support_ok = True
    neg = -np.geomspace(1e-8, 50.0, probe)
    if np.any(spec.K(neg) != 0.0):
        support_ok = False
    if isinstance(fam, SampledTable):
        xs, ks = np.asarray(fam.xs), np.asarray(fam.ks)
        if np.any((xs < 0) & (ks != 0)):
            support_ok = False

    pts = sorted(set(spec.breakpoints) | {0.0})
    jumps = []
    for p in pts:
        d = 1e-9 * max(1.0, abs(p))
        jumps.append(abs(float(spec.K(p + d)) - float(spec.K(p - d))))
    max_jump = max(jumps) if jumps else 0.0

    far = np.linspace(10.0, 60.0, probe)
    kv = np.abs(spec.K(far))
    keep = kv > 1e-300
    if np.count_nonzero(keep) >= 2:
        slope = np.polyfit(far[keep], np.log(kv[keep]), 1)[0]
        c_est = max(0.0, float(slope))
    else:
        c_est = 0.0

    u = np.unique(np.concatenate([np.linspace(-40.0, 40.0, probe), [0.0]]))
    y = spec.growth_c + epsilon
    sup = max(abs(kernel_fourier(spec, complex(ui, y), tol=1e-10)) for ui in u)
    return KernelValidationReport(
        support_ok=support_ok,
        continuity_probe_max_jump=max_jump,
        estimated_growth_c=c_est,
        fourier_sup_bound=float(sup),
        k5_small_symbol=bool(sup < 1.0),
    )
