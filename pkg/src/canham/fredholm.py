"""Fredholm determinants det(I +- K[t]), the Hamiltonian H(t) and spectra of K[t]."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .errors import InvalidInterval, K5Violation, NearSingular
from .quadrature import DEFAULT_RESOLUTION, assemble_nystrom, build_grid

NEAR_SINGULAR = 1e-13


@dataclass(frozen=True, eq=False)
class Discretization:
    """Nystrom matrix of K[t] together with its factorizations."""

    matrix: object
    eigenvalues: np.ndarray = field(repr=False)
    lu_plus: tuple = field(repr=False)
    lu_minus: tuple = field(repr=False)

    @property
    def grid(self):
        return self.matrix.grid

    def lu(self, sign):
        return self.lu_plus if sign > 0 else self.lu_minus

    def cond(self, sign):
        d = np.abs(1.0 + sign * self.eigenvalues)
        lo = d.min()
        return np.inf if lo == 0 else float(d.max() / lo)


@lru_cache(maxsize=256)
def discretize(spec, t, resolution=DEFAULT_RESOLUTION):
    t = float(t)
    if not t > 0:
        raise InvalidInterval(f"discretization needs t > 0, got {t}")
    grid = build_grid(spec, t, resolution.nodes, resolution.min_panels)
    M = assemble_nystrom(spec, grid)
    I = np.eye(M.size)
    ev = sla.eigvalsh(M.entries)
    ev.setflags(write=False)
    return Discretization(
        matrix=M,
        eigenvalues=ev,
        lu_plus=sla.lu_factor(I + M.entries, check_finite=False),
        lu_minus=sla.lu_factor(I - M.entries, check_finite=False),
    )


def _lu_det(lu):
    lu_mat, piv = lu
    d = np.diag(lu_mat)
    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    sign = -1.0 if swaps % 2 else 1.0
    return float(sign * np.prod(d))


def fredholm_det(M, sign):
    """det(I + sign*M) by pivoted LU; NearSingular when |det| < 1e-13."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    entries = M.entries if hasattr(M, "entries") else np.asarray(M, dtype=float)
    if entries.size == 0:
        return 1.0
    with warnings.catch_warnings():
        # an exactly singular factor is reported as NearSingular below
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        det = _lu_det(sla.lu_factor(np.eye(len(entries)) + sign * entries, check_finite=False))
    if abs(det) < NEAR_SINGULAR:
        raise NearSingular(det, sign)
    return det


def _disc_det(disc, sign):
    det = _lu_det(disc.lu(sign))
    if abs(det) < NEAR_SINGULAR:
        raise NearSingular(det, sign)
    return det


@dataclass(frozen=True)
class HamiltonianSample:
    t: float
    det_plus: float
    det_minus: float
    m: float
    gamma: float
    h11: float
    h22: float
    gap_to_one: float
    nodes: int
    panels: int

    @classmethod
    def identity(cls, t):
        return cls(float(t), 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0, 0)

    def row(self):
        return [self.t, self.det_plus, self.det_minus, self.m, self.gamma, self.h11, self.h22, self.gap_to_one]


CSV_COLUMNS = ("t", "det_plus", "det_minus", "m", "gamma", "h11", "h22", "gap_to_one")


def hamiltonian_at(spec, t, resolution=DEFAULT_RESOLUTION):
    """m(t) = det(I+K[t])/det(I-K[t]) and H(t) = diag(1/m^2, m^2)."""
    t = float(t)
    if t <= 0:
        return HamiltonianSample.identity(t)
    disc = discretize(spec, t, resolution)
    gap = 1.0 - float(np.max(np.abs(disc.eigenvalues)))
    try:
        dp, dm = _disc_det(disc, 1), _disc_det(disc, -1)
    except NearSingular as exc:
        raise K5Violation(t, str(exc)) from exc
    if gap <= 0 or dp <= 0 or dm <= 0:
        raise K5Violation(t, f"operator norm {1 - gap:.6g} reaches 1")
    m = dp / dm
    gamma = m * m
    return HamiltonianSample(t, dp, dm, m, gamma, 1.0 / gamma, gamma, gap,
                             disc.grid.size, disc.grid.n_panels)


@dataclass(frozen=True)
class HamiltonianCurve:
    samples: tuple
    max_jump: float

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)

    def __getitem__(self, k):
        return self.samples[k]


def hamiltonian_curve(spec, t_grid, resolution=DEFAULT_RESOLUTION):
    """Samples along an increasing grid plus max |m(t_k+1) - m(t_k)|."""
    ts = [float(t) for t in t_grid]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_grid must be strictly increasing")
    samples = tuple(hamiltonian_at(spec, t, resolution) for t in ts)
    ms = np.array([s.m for s in samples])
    jump = float(np.max(np.abs(np.diff(ms)))) if len(ms) > 1 else 0.0
    return HamiltonianCurve(samples, jump)


@dataclass(frozen=True)
class SpectrumReport:
    t: float
    eigenvalues: tuple
    lambda_plus: tuple
    lambda_minus: tuple
    op_norm: float
    gap_to_one: float
    frobenius_sq: float

    @property
    def eig_sq_sum(self):
        return float(np.sum(np.square(self.eigenvalues)))


def spectrum_at(spec, t, resolution=DEFAULT_RESOLUTION):
    t = float(t)
    if not t > 0:
        raise InvalidInterval(f"spectrum needs t > 0, got {t}")
    disc = discretize(spec, t, resolution)
    ev = np.sort(disc.eigenvalues)
    plus = tuple(sorted((float(v) for v in ev if v > 0), reverse=True))
    minus = tuple(float(v) for v in ev if v < 0)
    norm = float(np.max(np.abs(ev)))
    M = disc.matrix.entries
    return SpectrumReport(
        t=t,
        eigenvalues=tuple(float(v) for v in ev),
        lambda_plus=plus,
        lambda_minus=minus,
        op_norm=norm,
        gap_to_one=1.0 - norm,
        frobenius_sq=float(np.sum(M * M)),
    )


@dataclass(frozen=True)
class K5Certificate:
    min_gap: float
    gaps: tuple

    @property
    def ok(self):
        return self.min_gap > 0


def k5_certificate(spec, t_grid, resolution=DEFAULT_RESOLUTION):
    """Minimum of 1 - ||K[t]|| over the grid; t <= 0 contributes gap 1."""
    gaps = []
    for t in t_grid:
        t = float(t)
        gaps.append((t, 1.0 if t <= 0 else spectrum_at(spec, t, resolution).gap_to_one))
    return K5Certificate(min((g for _, g in gaps), default=1.0), tuple(gaps))
