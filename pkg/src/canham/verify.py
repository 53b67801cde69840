"""Identity suite behind ``canham verify``: residuals, tolerances and a deterministic report."""
from __future__ import annotations

import math
import platform
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .canonical import ab_ratio, ode_residual, pde_residual, theta, theta_consistency
from .fields import Field, boundary_m, log_m_from_mu, observed_order, relation_residuals, solve_field
from .fredholm import hamiltonian_at, spectrum_at
from .modelspace import boundary_identity, energy_identity, j_kernel, solve_projection_eqs, theta_kernel
from .quadrature import Resolution

VERIFY_H = 2e-3
ORDER_TARGET, ORDER_SLACK = 2.0, 0.3

PROFILES = {
    "default": {
        "determinant": 1e-8, "mu_route": 1e-6, "closed_forms": 1e-10, "relations": 1e-4,
        "ode": 1e-4, "theta": 1e-8, "spectral": 1e-8, "frobenius": 1e-10, "boundary": 1e-6,
        "reproducing_kernel": 1e-7, "hermitian": 1e-10, "energy": 1e-6, "pde": 1e-4,
    },
    "kinked": {
        "determinant": 1e-5, "mu_route": 1e-5, "closed_forms": 1e-10, "relations": 1e-4,
        "ode": 1e-4, "theta": 1e-8, "spectral": 1e-8, "frobenius": 1e-10, "boundary": 1e-6,
        "reproducing_kernel": 1e-7, "hermitian": 1e-10, "energy": 1e-6, "pde": 1e-4,
    },
}


@dataclass
class RunConfig:
    tmax: float = 2.0
    z_list: tuple = (2j, 1 + 2j)
    nodes: int = 64
    min_panels: int = 2
    h: float = VERIFY_H
    tol_profile: str = "default"
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tol_profile not in PROFILES:
            raise ValueError(f"unknown tolerance profile {self.tol_profile!r}")
        if self.h <= 0 or self.nodes < 1 or self.min_panels < 1:
            raise ValueError("h, nodes and min_panels must be positive")
        if any(v <= 0 for v in self.tolerances.values()):
            raise ValueError("tolerances must be positive")

    @property
    def resolution(self):
        return Resolution(self.nodes, self.min_panels)

    def tol(self, name):
        return self.tolerances.get(name, PROFILES[self.tol_profile][name])

    def to_dict(self):
        d = asdict(self)
        d["z_list"] = [_cstr(z) for z in self.z_list]
        return d


def _cstr(z):
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _ts(cfg, defaults):
    ts = [t for t in defaults if t <= cfg.tmax]
    return ts or [cfg.tmax]


def _fd_ts(cfg, defaults):
    """Like _ts, but a difference stencil may not straddle t = 0, where the fields are not smooth in t."""
    return [-cfg.h if abs(t) < cfg.h else t for t in _ts(cfg, defaults)]


@dataclass
class Entry:
    name: str
    parameters: dict
    residual: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)
    runtime: float = 0.0

    def to_dict(self):
        d = asdict(self)
        d.pop("runtime")
        return d


def _order_ok(order):
    return math.isnan(order) or abs(order - ORDER_TARGET) <= ORDER_SLACK


# -- identities ------------------------------------------------------------


def check_determinant(spec, cfg):
    ts = _ts(cfg, [0.25, 0.5, 1.0, 1.5, 2.0])
    worst = 0.0
    for t in ts:
        m = hamiltonian_at(spec, t, cfg.resolution).m
        inv_phi, psi = boundary_m(spec, t, cfg.resolution)
        worst = max(worst, abs(m - inv_phi), abs(m - psi))
    return Entry("determinant", {"t": ts}, worst, cfg.tol("determinant"), worst <= cfg.tol("determinant"))


def check_mu_route(spec, cfg):
    ts = _ts(cfg, [0.5, 1.0, 2.0])
    worst = 0.0
    for t in ts:
        m = hamiltonian_at(spec, t, cfg.resolution).m
        worst = max(worst, abs(m - math.exp(log_m_from_mu(spec, t, cfg.resolution))))
    return Entry("mu_route", {"t": ts}, worst, cfg.tol("mu_route"), worst <= cfg.tol("mu_route"))


def closed_form_errors(spec, t_values, x_values, z=2j):
    """Largest deviation of fields, ratios and projection values from the t <= 0 closed forms."""
    th = theta(spec, z)
    worst = 0.0
    for t in t_values:
        phi = solve_field(spec, t, Field.PHI)(x_values)
        psi = solve_field(spec, t, Field.PSI)(x_values)
        fp = solve_field(spec, t, Field.PHI_PLUS)(x_values)
        fm = solve_field(spec, t, Field.PHI_MINUS)(x_values)
        s = x_values + t
        worst = max(worst, np.max(np.abs(phi - (1 - spec.IK(s)))), np.max(np.abs(psi - (1 + spec.IK(s)))),
                    np.max(np.abs(fp - spec.K(s))), np.max(np.abs(fm - spec.K(s))))
        p = ab_ratio(spec, t, z)
        a0, b0 = 0.5 * (1 + th), 0.5j * (1 - th)
        worst = max(worst, abs(p.a - (a0 * np.cos(t * z) + b0 * np.sin(t * z))),
                    abs(p.b - (-a0 * np.sin(t * z) + b0 * np.cos(t * z))))
        proj = solve_projection_eqs(spec, t, z)
        ezt, emzt = np.exp(1j * z * t), np.exp(-1j * z * t)
        worst = max(worst, abs(proj.a_z_at_t - (ezt + th * emzt)), abs(proj.b_z_at_t - (ezt - th * emzt)))
        worst = max(worst, float(abs(hamiltonian_at(spec, t).m - 1.0)))
    return float(worst)


def check_closed_forms(spec, cfg):
    ts = list(np.linspace(-1.0, 0.0, 20))
    xs = np.linspace(-1.5, 1.5, 20)
    worst = closed_form_errors(spec, ts, xs)
    return Entry("closed_forms", {"t": [-1.0, 0.0], "probes": 20}, worst, cfg.tol("closed_forms"),
                 worst <= cfg.tol("closed_forms"))


def check_relations(spec, cfg):
    t = _fd_ts(cfg, [1.0])[-1]
    r1 = relation_residuals(spec, t, cfg.h, cfg.resolution)
    r2 = relation_residuals(spec, t, cfg.h / 2, cfg.resolution)
    tol = cfg.tol("relations")
    orders = {k: observed_order(r1[k], r2[k]) for k in ("r1", "r2", "r3", "r4", "r7", "r8", "r9", "r10")}
    checked = {k: o for k, o in orders.items() if r1[k] > 1e3 * 1e-13}
    ok = r1.max() <= tol and (t <= 0 or all(_order_ok(o) for o in checked.values()))
    return Entry("relations", {"t": t, "h": cfg.h}, r1.max(), tol, ok,
                 {"residuals": r1.values, "orders": orders})


def check_ode(spec, cfg):
    ts = _fd_ts(cfg, [0.5, 1.0])
    tol = cfg.tol("ode")
    worst, ok, rows = 0.0, True, []
    for t in ts:
        for z in cfg.z_list:
            r = ode_residual(spec, t, z, cfg.h, resolution=cfg.resolution)
            worst = max(worst, r.max)
            ok &= r.max <= tol and _order_ok(r.observed_order)
            rows.append({"t": t, "z": _cstr(z), "residual": r.max, "order": r.observed_order})
    return Entry("ode", {"t": ts, "z": [_cstr(z) for z in cfg.z_list], "h": cfg.h}, worst, tol, ok, {"points": rows})


def reference_theta(spec, z):
    """Theta(z) by adaptive quadrature, independent of the package's Gauss panels."""
    from scipy.integrate import quad

    z = complex(z)
    end = spec.support_end
    pts = [p for p in spec.breakpoints if 0 < p < end]
    f_re = lambda x: float(spec.K(x)) * math.exp(-z.imag * x) * math.cos(z.real * x)
    f_im = lambda x: float(spec.K(x)) * math.exp(-z.imag * x) * math.sin(z.real * x)
    if math.isfinite(end):
        kw = {"points": pts or None, "limit": 200, "epsabs": 1e-14, "epsrel": 1e-13}
        return complex(quad(f_re, 0, end, **kw)[0], quad(f_im, 0, end, **kw)[0])
    kw = {"limit": 200, "epsabs": 1e-14, "epsrel": 1e-13}
    return complex(quad(f_re, 0, math.inf, **kw)[0], quad(f_im, 0, math.inf, **kw)[0])


def check_theta(spec, cfg):
    tol = cfg.tol("theta")
    res = theta_consistency(spec, 2j, theta_ref=reference_theta(spec, 2j), resolution=cfg.resolution)
    worst = max(res.residual, res.normalization)
    return Entry("theta", {"z": _cstr(2j)}, worst, tol, worst <= tol)


def check_spectral(spec, cfg):
    ts = [t for t in (0.5, 1.0, 1.5, 2.0) if t <= cfg.tmax]
    tol, ftol = cfg.tol("spectral"), cfg.tol("frobenius")
    if not ts:
        return Entry("spectral", {"t": []}, 0.0, tol, True)
    reps = [spectrum_at(spec, t, cfg.resolution) for t in ts]
    lam1 = [r.lambda_plus[0] if r.lambda_plus else 0.0 for r in reps]
    drop = max([0.0] + [a - b for a, b in zip(lam1, lam1[1:])])
    frob = max(abs(r.frobenius_sq - r.eig_sq_sum) for r in reps)
    gap = min(r.gap_to_one for r in reps)
    ok = drop <= tol and frob <= ftol and gap > 0
    return Entry("spectral", {"t": ts}, drop, tol, ok,
                 {"lambda_plus_1": lam1, "frobenius_mismatch": frob, "min_gap_to_one": gap})


def check_boundary(spec, cfg):
    ts = _ts(cfg, [0.5, 1.0])
    worst = max(boundary_identity(spec, t, z, cfg.resolution) for t in ts for z in cfg.z_list)
    return Entry("boundary", {"t": ts, "z": [_cstr(z) for z in cfg.z_list]}, worst, cfg.tol("boundary"),
                 worst <= cfg.tol("boundary"))


def check_reproducing_kernel(spec, cfg):
    z, w = 2j, 1 + 2j
    tol, htol = cfg.tol("reproducing_kernel"), cfg.tol("hermitian")
    j0 = j_kernel(spec, 0.0, z, z, cfg.resolution).j_hat
    th = theta(spec, z)
    red = abs(j0 - theta_kernel(th, th, z, z))
    t = _ts(cfg, [1.0])[-1]
    herm = abs(j_kernel(spec, t, z, w, cfg.resolution).j_hat - j_kernel(spec, t, w, z, cfg.resolution).j_hat.conjugate())
    diag = j_kernel(spec, t, z, z, cfg.resolution).j_hat
    herm = max(herm, abs(diag.imag) / max(abs(diag), 1e-300))
    return Entry("reproducing_kernel", {"z": _cstr(z), "w": _cstr(w), "t": t}, red, tol,
                 red <= tol and herm <= htol, {"hermitian": herm})


def check_energy(spec, cfg):
    s = min(1.5, cfg.tmax)
    t = s - 1.0
    res = energy_identity(spec, t, s, 2j, 1 + 2j, 64, cfg.resolution)
    return Entry("energy", {"t": t, "s": s, "z": _cstr(2j), "w": _cstr(1 + 2j), "r_nodes": 64},
                 res.residual, cfg.tol("energy"), res.residual <= cfg.tol("energy"))


def check_pde(spec, cfg):
    t = _fd_ts(cfg, [1.0])[-1]
    p1 = pde_residual(spec, t, cfg.h, resolution=cfg.resolution)
    p2 = pde_residual(spec, t, cfg.h / 2, resolution=cfg.resolution)
    orders = {k: observed_order(p1[k], p2[k]) for k in p1}
    checked = {k: o for k, o in orders.items() if p1[k] > 1e-10}
    worst = max(p1.values())
    tol = cfg.tol("pde")
    ok = worst <= tol and (t <= 0 or all(_order_ok(o) for o in checked.values()))
    return Entry("pde", {"t": t, "h": cfg.h}, worst, tol, ok, {"residuals": p1, "orders": orders})


CHECKS = {
    "determinant": check_determinant,
    "mu_route": check_mu_route,
    "closed_forms": check_closed_forms,
    "relations": check_relations,
    "ode": check_ode,
    "theta": check_theta,
    "spectral": check_spectral,
    "boundary": check_boundary,
    "reproducing_kernel": check_reproducing_kernel,
    "energy": check_energy,
    "pde": check_pde,
}


def run_suite(spec, cfg, names=None):
    names = list(CHECKS) if names in (None, "all", ["all"]) else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown identities: {unknown}")
    out = []
    for n in names:
        t0 = time.perf_counter()
        e = CHECKS[n](spec, cfg)
        e.runtime = time.perf_counter() - t0
        e.residual = float(e.residual)
        e.passed = bool(e.passed)
        out.append(e)
    return out


def build_report(spec, cfg, entries, timestamp):
    """Report dict; everything except the ``timestamp`` block is deterministic."""
    return {
        "timestamp": {"utc": timestamp, "runtime_s": {e.name: e.runtime for e in entries}},
        "environment": {
            "canham": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "config": cfg.to_dict(),
        "kernel": spec.to_dict(),
        "entries": [_clean(e.to_dict()) for e in entries],
        "all_passed": all(e.passed for e in entries),
    }


def _clean(obj):
    """JSON-safe copy: nan/inf become strings, tuples become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return _cstr(obj)
    return obj
