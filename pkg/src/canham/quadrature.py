"""Gauss-Legendre panel grids on [-t, t] and the Nystrom matrix of K[t].

The operator f -> int K(x+y) f(y) dy on [-t, t] is discretized with the
symmetric weighting sqrt(w_i) K(x_i + x_j) sqrt(w_j).  Panel edges are placed
at the images lambda - t, lambda/2, t - lambda of the non-analytic points of K.
A line x + y = lambda through a kink still crosses some panel blocks; on those
blocks the entries are replaced by exact moments of the panel Lagrange bases
(inner integral split at the kink), which keeps M symmetric and restores
spectral convergence for kernels with jumps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import InvalidInterval

DEFAULT_NODES = 64
DEFAULT_MIN_PANELS = 2
# extra points for products of a degree n-1 basis with a smooth factor
_EXTRA = 8


@dataclass(frozen=True)
class Resolution:
    nodes: int = DEFAULT_NODES
    min_panels: int = DEFAULT_MIN_PANELS

    def __post_init__(self):
        if self.nodes < 1 or self.min_panels < 1:
            raise ValueError("resolution needs nodes >= 1 and min_panels >= 1")

    def refined(self, factor=2):
        return Resolution(self.nodes * factor, self.min_panels)


DEFAULT_RESOLUTION = Resolution()


@lru_cache(maxsize=None)
def _reference(n):
    x, w = leggauss(n)
    # barycentric weights for Legendre points (ascending order)
    bw = (-1.0) ** np.arange(n) * np.sqrt((1.0 - x * x) * w)
    for a in (x, w, bw):
        a.setflags(write=False)
    return x, w, bw


def gauss_nodes(n, a, b):
    """Gauss-Legendre nodes and weights on [a, b]; exact to degree 2n - 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not a < b:
        raise InvalidInterval(f"need a < b, got [{a}, {b}]")
    x, w, _ = _reference(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def lagrange_matrix(n, s):
    """Values of the n Lagrange basis polynomials on the reference Gauss nodes at points s."""
    x, _, bw = _reference(n)
    s = np.asarray(s, dtype=float)
    d = s[..., None] - x
    hit = d == 0.0
    d = np.where(hit, 1.0, d)
    tmp = bw / d
    L = tmp / np.sum(tmp, axis=-1, keepdims=True)
    exact = np.any(hit, axis=-1)
    return np.where(exact[..., None], hit.astype(float), L)


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    t: float
    edges: np.ndarray
    order_per_panel: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def panels(self):
        return list(zip(self.edges[:-1].tolist(), self.edges[1:].tolist()))

    @property
    def n_panels(self):
        return len(self.edges) - 1

    @property
    def size(self):
        return len(self.nodes)

    def panel_slice(self, k):
        n = self.order_per_panel
        return slice(k * n, (k + 1) * n)

    def interpolate(self, values, x):
        """Evaluate the piecewise polynomial through node values at x in [-t, t]."""
        values = np.asarray(values)
        x = np.asarray(x, dtype=float)
        k = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.n_panels - 1)
        a, b = self.edges[k], self.edges[k + 1]
        s = (2.0 * x - a - b) / (b - a)
        L = lagrange_matrix(self.order_per_panel, s)
        vals = values.reshape(self.n_panels, self.order_per_panel)[k]
        return np.sum(L * vals, axis=-1)


def _merge(points, tol):
    out = []
    for p in sorted(points):
        if not out or p - out[-1] > tol:
            out.append(p)
    return out


def build_grid(spec, t, n=DEFAULT_NODES, min_panels=DEFAULT_MIN_PANELS):
    """Panel grid on [-t, t] split at the images of the kernel's non-analytic points."""
    t = float(t)
    if not t > 0:
        raise InvalidInterval(f"grid needs t > 0, got {t}")
    tol = 1e-12 * max(1.0, t)
    cuts = set()
    for lam in spec.breakpoints:
        for p in (lam - t, 0.5 * lam, t - lam):
            if -t + tol < p < t - tol:
                cuts.add(p)
    edges = _merge([-t, t, *cuts], tol)
    while len(edges) - 1 < min_panels:
        k = int(np.argmax(np.diff(edges)))
        edges.insert(k + 1, 0.5 * (edges[k] + edges[k + 1]))
    edges = np.asarray(edges)
    xs, ws = zip(*(gauss_nodes(n, a, b) for a, b in zip(edges[:-1], edges[1:])))
    nodes, weights = np.concatenate(xs), np.concatenate(ws)
    for arr in (edges, nodes, weights):
        arr.setflags(write=False)
    return QuadratureGrid(t=t, edges=edges, order_per_panel=n, nodes=nodes, weights=weights)


@dataclass(frozen=True, eq=False)
class NystromMatrix:
    t: float
    entries: np.ndarray = field(repr=False)
    grid: QuadratureGrid = field(repr=False)
    corrected_blocks: tuple = ()

    @property
    def size(self):
        return self.entries.shape[0]


def _crosses(lo, hi, kinks, tol):
    return any(lo + tol < lam < hi - tol for lam in kinks)


def _pieces(a, b, cuts):
    """Sub-interval endpoints of [a, b] split at cuts, shape (..., len(cuts) + 2)."""
    cuts = np.clip(np.asarray(cuts, dtype=float), a, b)
    if cuts.ndim == 1:
        cuts = cuts[:, None]
    cuts = np.sort(cuts, axis=-1)
    lead = np.full(cuts.shape[:-1] + (1,), a)
    tail = np.full(cuts.shape[:-1] + (1,), b)
    return np.concatenate([lead, cuts, tail], axis=-1)


def _block_moments(spec, n, a0, a1, b0, b1, q):
    """A_ij = iint l_i(x) K(x+y) l_j(y) over [a0,a1] x [b0,b1], kinks split exactly."""
    kinks = np.asarray(spec.kinks, dtype=float)
    gq, wq, _ = _reference(q)
    outer = _merge([a0, a1, *[c for lam in kinks for c in (lam - b0, lam - b1) if a0 < c < a1]], 0.0)
    A = np.zeros((n, n))
    for p0, p1 in zip(outer[:-1], outer[1:]):
        hx = 0.5 * (p1 - p0)
        xq = hx * gq + 0.5 * (p0 + p1)
        La = lagrange_matrix(n, (2.0 * xq - a0 - a1) / (a1 - a0))
        ends = _pieces(b0, b1, kinks[None, :] - xq[:, None])
        lo, hi = ends[:, :-1], ends[:, 1:]
        hy = 0.5 * (hi - lo)
        Y = lo[..., None] + hy[..., None] * (gq + 1.0)
        kv = spec.K(xq[:, None, None] + Y) * hy[..., None] * wq
        Lb = lagrange_matrix(n, (2.0 * Y - b0 - b1) / (b1 - b0))
        G = np.einsum("qpr,qprj->qj", kv, Lb)
        A += La.T @ ((hx * wq)[:, None] * G)
    return A


def assemble_nystrom(spec, grid):
    """Symmetric matrix M_ij = sqrt(w_i) K(x_i + x_j) sqrt(w_j), kink blocks exact."""
    x, w = grid.nodes, grid.weights
    sw = np.sqrt(w)
    M = sw[:, None] * spec.K(x[:, None] + x[None, :]) * sw[None, :]
    n = grid.order_per_panel
    tol = 1e-13 * max(1.0, grid.t)
    corrected = []
    if spec.kinks:
        panels = grid.panels
        for ia, (a0, a1) in enumerate(panels):
            for ib in range(ia, len(panels)):
                b0, b1 = panels[ib]
                if not _crosses(a0 + b0, a1 + b1, spec.kinks, tol):
                    continue
                A = _block_moments(spec, n, a0, a1, b0, b1, n + _EXTRA)
                si, sj = grid.panel_slice(ia), grid.panel_slice(ib)
                blk = A / np.outer(sw[si], sw[sj])
                M[si, sj] = blk
                M[sj, si] = blk.T
                corrected.append((ia, ib))
    M = 0.5 * (M + M.T)
    M.setflags(write=False)
    return NystromMatrix(t=grid.t, entries=M, grid=grid, corrected_blocks=tuple(corrected))


def apply_kernel(spec, grid, values, x):
    """int_{-t}^{t} K(x + y) f(y) dy for the piecewise polynomial f through node values.

    The y-integral on each panel is split at lambda - x for every non-analytic
    point lambda of K, so the result is accurate for arbitrary x.
    """
    values = np.asarray(values)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = grid.order_per_panel
    gq, wq, _ = _reference(n + _EXTRA)
    bps = np.asarray(spec.breakpoints, dtype=float)
    vals = values.reshape(grid.n_panels, n)
    out = np.zeros(x.shape, dtype=np.result_type(values.dtype, float))
    for k, (b0, b1) in enumerate(grid.panels):
        ends = _pieces(b0, b1, bps[None, :] - x[:, None]) if len(bps) else np.tile([b0, b1], (len(x), 1))
        lo, hi = ends[:, :-1], ends[:, 1:]
        hy = 0.5 * (hi - lo)
        Y = lo[..., None] + hy[..., None] * (gq + 1.0)
        kv = spec.K(x[:, None, None] + Y) * hy[..., None] * wq
        fy = lagrange_matrix(n, (2.0 * Y - b0 - b1) / (b1 - b0)) @ vals[k]
        out = out + np.sum(kv * fy, axis=(1, 2))
    return out
