"""One-dimensional adaptive integration and polyline path integrals.

Scalar integrals use adaptive Simpson with Richardson correction.  Path
integrals of hyperbolic fields use per-segment Gauss-Legendre panels with
dyadic refinement.  The module also provides the prefix-integration ladder
(values of cumulative integrals at every quadrature node) that the
formal-power recursion is built on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NoConvergence
from .hypernum import HyperbolicNumber, hyper

DEFAULT_TOL = 1e-10
DEFAULT_MAX_DEPTH = 40
DEFAULT_GAUSS_ORDER = 8
MAX_PANEL_DOUBLINGS = 10


def integrate(f: Callable[[float], float], x0: float, x1: float,
              tol: float = DEFAULT_TOL, max_depth: int = DEFAULT_MAX_DEPTH) -> float:
    """Adaptive Simpson integral of a real function over [x0, x1].

    Antisymmetric under swapping the limits.  Raises NoConvergence when the
    recursive subdivision exceeds max_depth before meeting tol.
    """
    if x0 == x1:
        return 0.0
    if x1 < x0:
        return -integrate(f, x1, x0, tol=tol, max_depth=max_depth)

    def simpson(fa, fm, fb, width):
        return width / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, depth, tol):
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        err = (left + right - whole) / 15.0
        if abs(err) <= tol:
            return left + right + err
        if depth >= max_depth:
            raise NoConvergence(
                f"adaptive Simpson exceeded depth {max_depth} on "
                f"[{a:g}, {b:g}] (err {abs(err):.3e} > tol {tol:.3e})"
            )
        return (recurse(a, m, fa, flm, fm, left, depth + 1, 0.5 * tol)
                + recurse(m, b, fm, frm, fb, right, depth + 1, 0.5 * tol))

    fa, fb = f(x0), f(x1)
    fm = f(0.5 * (x0 + x1))
    whole = simpson(fa, fm, fb, x1 - x0)
    return recurse(x0, x1, fa, fm, fb, whole, 0, tol)


# ----------------------------------------------------------------------
# polylines


@dataclass(frozen=True)
class Polyline:
    """Ordered vertices of a rectifiable path in the hyperbolic plane."""

    vertices: tuple

    def __init__(self, vertices: Sequence):
        pts = tuple(hyper(v) for v in vertices)
        if len(pts) < 2:
            raise ValueError("a polyline needs at least two vertices")
        for a, b in zip(pts, pts[1:]):
            if a.re == b.re and a.im == b.im:
                raise ValueError("consecutive vertices must be distinct")
        object.__setattr__(self, "vertices", pts)

    @property
    def start(self) -> HyperbolicNumber:
        return self.vertices[0]

    @property
    def end(self) -> HyperbolicNumber:
        return self.vertices[-1]

    @property
    def is_closed(self) -> bool:
        return (self.start.re == self.end.re and self.start.im == self.end.im)

    def length(self) -> float:
        return sum(
            np.hypot(b.re - a.re, b.im - a.im)
            for a, b in zip(self.vertices, self.vertices[1:])
        )

    def reversed(self) -> "Polyline":
        return Polyline(tuple(reversed(self.vertices)))

    def concat(self, other: "Polyline") -> "Polyline":
        if (self.end.re, self.end.im) != (other.start.re, other.start.im):
            raise ValueError("paths do not join end to start")
        return Polyline(self.vertices + other.vertices[1:])

    @staticmethod
    def straight(z0, z1) -> "Polyline":
        return Polyline([hyper(z0), hyper(z1)])

    @staticmethod
    def l_path(z0, z1) -> "Polyline":
        """Axis-aligned path: x-leg first, then t-leg."""
        z0 = hyper(z0)
        z1 = hyper(z1)
        corner = HyperbolicNumber(z1.re, z0.im)
        pts = [z0]
        if (corner.re, corner.im) not in ((z0.re, z0.im), (z1.re, z1.im)):
            pts.append(corner)
        pts.append(z1)
        return Polyline(pts)

    @staticmethod
    def rectangle(corner_low, corner_high) -> "Polyline":
        """Closed rectangle boundary, counterclockwise from corner_low."""
        a = hyper(corner_low)
        b = hyper(corner_high)
        return Polyline([
            a,
            HyperbolicNumber(b.re, a.im),
            b,
            HyperbolicNumber(a.re, b.im),
            a,
        ])


# ----------------------------------------------------------------------
# Gauss-Legendre panel machinery

_RULE_CACHE: dict = {}


def _gauss_rule(order: int):
    """Canonical nodes/weights on [-1, 1] plus the prefix matrix K with
    K[i, k] = integral of the k-th Lagrange basis over [-1, node_i]."""
    cached = _RULE_CACHE.get(order)
    if cached is not None:
        return cached
    nodes, weights = np.polynomial.legendre.leggauss(order)
    # barycentric weights for the Lagrange basis at the Gauss nodes
    bary = np.ones(order)
    for i in range(order):
        diff = nodes[i] - np.delete(nodes, i)
        bary[i] = 1.0 / np.prod(diff)
    sub_nodes, sub_weights = np.polynomial.legendre.leggauss(order + 2)
    K = np.zeros((order, order))
    for i in range(order):
        half = 0.5 * (nodes[i] + 1.0)
        xs = -1.0 + half * (sub_nodes + 1.0)
        ws = half * sub_weights
        # Lagrange basis values at xs via the barycentric formula
        diffs = xs[:, None] - nodes[None, :]
        exact = np.isclose(diffs, 0.0, atol=1e-15)
        safe = np.where(exact, 1.0, diffs)
        terms = bary[None, :] / safe
        denom = terms.sum(axis=1)
        basis = terms / denom[:, None]
        basis[exact.any(axis=1)] = exact[exact.any(axis=1)].astype(float)
        K[i, :] = ws @ basis
    _RULE_CACHE[order] = (nodes, weights, K)
    return nodes, weights, K


class PathGrid:
    """Shared quadrature ladder along a polyline.

    Holds Gauss-Legendre nodes for every panel of every segment together
    with the matrices needed to evaluate prefix integrals (from the path
    start up to each node) of any integrand sampled on those nodes.
    """

    def __init__(self, path: Polyline, panels_per_segment: int,
                 order: int = DEFAULT_GAUSS_ORDER):
        nodes, weights, K = _gauss_rule(order)
        self.order = order
        self.panels = panels_per_segment
        self.path = path
        segs = list(zip(path.vertices[:-1], path.vertices[1:]))
        self.n_segments = len(segs)
        P = panels_per_segment
        xs = []
        ts = []
        dz_list = []
        for a, b in segs:
            # panel p covers u in [p/P, (p+1)/P] of the segment parameter
            u_bounds = np.linspace(0.0, 1.0, P + 1)
            u_nodes = (u_bounds[:-1, None]
                       + (nodes[None, :] + 1.0) * 0.5 * (1.0 / P))
            xs.append(a.re + (b.re - a.re) * u_nodes)
            ts.append(a.im + (b.im - a.im) * u_nodes)
            dz_list.append(HyperbolicNumber(b.re - a.re, b.im - a.im))
        # shapes: (n_segments, P, order)
        self.xs = np.stack(xs)
        self.ts = np.stack(ts)
        self.dz = dz_list
        self.weights = weights
        self.K = K
        self.panel_scale = 0.5 / P  # du/dxi within one panel

    @property
    def flat_x(self):
        return self.xs.ravel()

    @property
    def flat_t(self):
        return self.ts.ravel()

    def prefix_re(self, vre: np.ndarray, vim: np.ndarray):
        """Prefix values of Re(v dz) from the path start.

        vre, vim hold the integrand components at every node (flat, in path
        order).  Returns (node_prefix, total): node_prefix[i] is the integral
        from the start up to node i, total is the full-path integral.
        """
        S, P, q = self.n_segments, self.panels, self.order
        vre = vre.reshape(S, P, q)
        vim = vim.reshape(S, P, q)
        total = 0.0
        out = np.empty((S, P, q))
        for s in range(S):
            dz = self.dz[s]
            # Re[(vr + j vi)(dx + j dt)] = vr dx + vi dt per unit du
            f = vre[s] * dz.re + vim[s] * dz.im
            panel_full = self.panel_scale * (f @ self.weights)
            prefix = np.concatenate(([0.0], np.cumsum(panel_full)[:-1]))
            partial = self.panel_scale * (f @ self.K.T)
            out[s] = total + prefix[:, None] + partial
            total += panel_full.sum()
        return out.reshape(-1), total

    def integrate_values(self, vre: np.ndarray, vim: np.ndarray) -> HyperbolicNumber:
        """Full-path integral of (v dz) as a hyperbolic number."""
        S, P, q = self.n_segments, self.panels, self.order
        vre = vre.reshape(S, P, q)
        vim = vim.reshape(S, P, q)
        total_re = 0.0
        total_im = 0.0
        for s in range(S):
            dz = self.dz[s]
            fre = vre[s] * dz.re + vim[s] * dz.im
            fim = vre[s] * dz.im + vim[s] * dz.re
            total_re += self.panel_scale * float((fre @ self.weights).sum())
            total_im += self.panel_scale * float((fim @ self.weights).sum())
        return HyperbolicNumber(total_re, total_im)


def path_integral(W, path: Polyline, tol: float = DEFAULT_TOL,
                  order: int = DEFAULT_GAUSS_ORDER,
                  initial_panels: int = 2) -> HyperbolicNumber:
    """Integral of W dz along the polyline, dz = dx + j dt.

    W may be a HyperField or any callable z -> HyperbolicNumber.  Panels are
    doubled until two refinements agree within tol componentwise.
    """
    eval_many = getattr(W, "eval_many", None)

    def values(grid: PathGrid):
        if eval_many is not None:
            return eval_many(grid.flat_x, grid.flat_t)
        flat_x = grid.flat_x
        flat_t = grid.flat_t
        vre = np.empty(flat_x.size)
        vim = np.empty(flat_x.size)
        for i in range(flat_x.size):
            val = W(HyperbolicNumber(float(flat_x[i]), float(flat_t[i])))
            vre[i] = val.re
            vim[i] = val.im
        return vre, vim

    panels = initial_panels
    grid = PathGrid(path, panels, order)
    prev = grid.integrate_values(*values(grid))
    for _ in range(MAX_PANEL_DOUBLINGS):
        panels *= 2
        grid = PathGrid(path, panels, order)
        cur = grid.integrate_values(*values(grid))
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise NoConvergence(
        f"path integral did not stabilize within {MAX_PANEL_DOUBLINGS} "
        f"panel doublings (last delta {abs(cur - prev):.3e})"
    )
