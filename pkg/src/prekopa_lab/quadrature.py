"""Deterministic Gauss-Legendre quadrature on boxes, balls, shells and disks.

Every reduction goes through :func:`tree_sum`, a fixed pairwise summation
order, so results are bit-identical however node evaluation is scheduled.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import DomainError, IntegrationError, TruncationError
from .weights import DomainSpec

DEFAULT_BOX_ORDER = 48
DEFAULT_DISK_RADIAL = 48
DEFAULT_DISK_ANGULAR = 96
DEFAULT_JMAX = 64


def tree_sum(values, axis=0):
    """Pairwise sum along ``axis`` in a fixed order (zero-padded to a power of two)."""
    a = np.moveaxis(np.asarray(values), axis, 0)
    n = a.shape[0]
    if n == 0:
        return np.zeros(a.shape[1:], dtype=a.dtype)
    size = 1 << (n - 1).bit_length()
    if size != n:
        a = np.concatenate([a, np.zeros((size - n,) + a.shape[1:], dtype=a.dtype)])
    while a.shape[0] > 1:
        half = a.shape[0] // 2
        a = a[:half] + a[half:]
    return a[0]


@dataclass(frozen=True)
class QuadRule:
    """Gauss-Legendre rule with ``order`` nodes on the reference interval [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def on(self, lo: float, hi: float):
        """Nodes and weights mapped affinely to [lo, hi]."""
        half = 0.5 * (hi - lo)
        return lo + half * (self.nodes + 1.0), half * self.weights


@lru_cache(maxsize=None)
def gauss_legendre(m: int) -> QuadRule:
    if m < 1:
        raise DomainError("quadrature order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadRule(x, w, m)


def _segments(lo, hi, breaks):
    cuts = sorted(b for b in set(breaks or ()) if lo < b < hi)
    edges = [lo] + cuts + [hi]
    return list(zip(edges[:-1], edges[1:]))


def interval_rule(lo, hi, m, breaks=None):
    """Composite rule on [lo, hi], split at any breakpoints inside it."""
    rule = gauss_legendre(m)
    xs, ws = [], []
    for a, b in _segments(lo, hi, breaks):
        x, w = rule.on(a, b)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def box_rule(box: DomainSpec, m: int = DEFAULT_BOX_ORDER, breaks=None):
    """Tensor Gauss-Legendre points ``(K, n)`` and weights ``(K,)`` on a box."""
    if box.shape != "box":
        raise DomainError(f"box_rule needs a box, got {box.shape}")
    if m < 2:
        raise DomainError("box order must be >= 2")
    if breaks and box.dimension != 1:
        raise DomainError("breakpoints are supported for 1-D boxes only")
    axes = [interval_rule(lo, hi, m, breaks if box.dimension == 1 else None)
            for lo, hi in box.bounds]
    grids = np.meshgrid(*[x for x, _ in axes], indexing="ij")
    wgrids = np.meshgrid(*[w for _, w in axes], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return pts, wts


def shell_rule(n: int, r_in: float, r_out: float, m: int = DEFAULT_BOX_ORDER, breaks=None):
    """Points and weights on the shell r_in <= |x| <= r_out in R^n (n <= 3)."""
    if not 0 <= r_in < r_out:
        raise DomainError(f"bad shell radii ({r_in}, {r_out})")
    if n == 1:
        if r_in == 0:
            x, w = interval_rule(-r_out, r_out, m, breaks)
            return x[:, None], w
        xl, wl = interval_rule(-r_out, -r_in, m, breaks)
        xr, wr = interval_rule(r_in, r_out, m, breaks)
        return np.concatenate([xl, xr])[:, None], np.concatenate([wl, wr])
    if breaks:
        raise DomainError("breakpoints are supported for 1-D fibers only")
    rho, wr = gauss_legendre(m).on(r_in, r_out)
    n_az = 2 * m
    phi = 2.0 * math.pi * np.arange(n_az) / n_az
    w_az = 2.0 * math.pi / n_az
    if n == 2:
        R, P = np.meshgrid(rho, phi, indexing="ij")
        W = np.outer(wr * rho, np.full(n_az, w_az))
        return np.stack([(R * np.cos(P)).ravel(), (R * np.sin(P)).ravel()], axis=1), W.ravel()
    if n == 3:
        mu, wmu = gauss_legendre(m).nodes, gauss_legendre(m).weights
        R, M, P = np.meshgrid(rho, mu, phi, indexing="ij")
        W = (wr * rho ** 2)[:, None, None] * wmu[None, :, None] * w_az
        S = np.sqrt(1.0 - M ** 2)
        pts = np.stack([(R * S * np.cos(P)).ravel(), (R * S * np.sin(P)).ravel(), (R * M).ravel()],
                       axis=1)
        return pts, np.broadcast_to(W, R.shape).ravel()
    raise DomainError(f"ball and shell rules support n <= 3, got n={n}")


def ball_rule(ball: DomainSpec, m: int = DEFAULT_BOX_ORDER, breaks=None):
    if ball.shape != "ball":
        raise DomainError(f"ball_rule needs a ball, got {ball.shape}")
    return shell_rule(ball.dimension, 0.0, ball.radius, m, breaks)


def fiber_rule(fiber: DomainSpec, m: int = DEFAULT_BOX_ORDER, breaks=None):
    if fiber.shape == "box":
        return box_rule(fiber, m, breaks)
    if fiber.shape == "ball":
        return ball_rule(fiber, m, breaks)
    raise DomainError("unbounded fibers need exhaustion")


def evaluate(f, points) -> np.ndarray:
    """Evaluate ``f`` at all nodes; NaN anywhere raises with the first bad node."""
    vals = np.asarray(f(points))
    if vals.shape != (len(points),):
        vals = np.broadcast_to(vals, (len(points),))
    bad = np.flatnonzero(np.isnan(vals))
    if bad.size:
        node = points[bad[0]]
        raise IntegrationError(f"integrand is NaN at node {node!r}", node=node)
    return vals


def integrate_box(f, box: DomainSpec, m: int = DEFAULT_BOX_ORDER, breaks=None) -> float:
    """Tensor Gauss-Legendre integral of ``f`` (points ``(K, n)`` -> values) over a box."""
    pts, w = box_rule(box, m, breaks)
    return float(tree_sum(w * evaluate(f, pts)))


def integrate_ball(f, ball: DomainSpec, m: int = DEFAULT_BOX_ORDER, breaks=None) -> float:
    pts, w = ball_rule(ball, m, breaks)
    return float(tree_sum(w * evaluate(f, pts)))


def log_integral_exp_neg(phi_values, weights) -> float:
    """log of sum(w * exp(-phi)), shifted by min(phi) to avoid underflow.

    Returns ``-inf`` when phi is ``+inf`` at every node.
    """
    phi = np.asarray(phi_values, dtype=float)
    if np.isnan(phi).any():
        raise IntegrationError("phi is NaN at a node", node=int(np.flatnonzero(np.isnan(phi))[0]))
    finite = phi[np.isfinite(phi)]
    if finite.size == 0:
        if np.any(phi == -np.inf):
            return math.inf
        return -math.inf
    shift = float(finite.min())
    total = float(tree_sum(weights * np.exp(shift - phi)))
    if total == 0.0:
        return -math.inf
    return math.log(total) - shift


@dataclass(frozen=True)
class DiskRule:
    """Polar product rule on the disk |tau - center| < radius.

    Gauss-Legendre in rho^2 (so the area element is polynomial) times a
    uniform trapezoid rule in angle.
    """

    center: complex
    radius: float
    radial: QuadRule
    angular: int

    @cached_property
    def _table(self):
        u, wu = self.radial.on(0.0, self.radius ** 2)
        theta = 2.0 * math.pi * np.arange(self.angular) / self.angular
        rho = np.sqrt(u)
        nodes = complex(self.center) + np.outer(rho, np.exp(1j * theta))
        weights = np.outer(0.5 * wu, np.full(self.angular, 2.0 * math.pi / self.angular))
        return nodes.ravel(), weights.ravel()

    @property
    def nodes(self) -> np.ndarray:
        return self._table[0]

    @property
    def weights(self) -> np.ndarray:
        return self._table[1]


def disk_rule(center: complex, radius: float, radial: int = DEFAULT_DISK_RADIAL,
              angular: int = DEFAULT_DISK_ANGULAR) -> DiskRule:
    if not radius > 0:
        raise DomainError("disk radius must be positive")
    if angular < 1:
        raise DomainError("angular count must be >= 1")
    return DiskRule(complex(center), float(radius), gauss_legendre(radial), int(angular))


def integrate_disk(f, rule: DiskRule):
    """Integral of ``f`` (complex nodes -> real or complex values) over the disk."""
    vals = evaluate(f, rule.nodes)
    total = tree_sum(rule.weights * vals)
    return complex(total) if np.iscomplexobj(total) else float(total)


def integrate_exhausted(f, n: int, tol: float, j_max: int = DEFAULT_JMAX,
                        m: int = DEFAULT_BOX_ORDER, breaks=None):
    """Integrate a nonnegative ``f`` over R^n through the balls B_j = {|x| < j}.

    B_{j} is integrated as B_{j-1} plus the shell between radii j-1 and j, so
    the trace of partial integrals is nondecreasing by construction. Stops once
    two successive values differ by less than ``tol * (1 + |value|)``.

    Returns ``(value, trace)``; raises :class:`TruncationError` at ``j_max``.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    trace = []
    value = 0.0
    for j in range(1, j_max + 1):
        pts, w = shell_rule(n, j - 1.0, float(j), m, breaks)
        vals = evaluate(f, pts)
        if np.any(vals < 0):
            raise DomainError("exhaustion requires a nonnegative integrand")
        new = value + float(tree_sum(w * vals))
        if not math.isfinite(new):
            raise TruncationError(f"integral is infinite on B_{j}", trace=trace + [new])
        if trace and new < trace[-1]:
            raise IntegrationError("exhaustion trace decreased", node=j)
        trace.append(new)
        if j > 1 and abs(new - value) < tol * (1.0 + abs(new)):
            return new, trace
        value = new
    raise TruncationError(f"no convergence within j_max={j_max}", trace=trace)


def write_rule_csv(path, points, weights) -> None:
    """Dump a node/weight table for debugging."""
    points = np.asarray(points)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        if np.iscomplexobj(points):
            out.writerow(["re", "im", "weight"])
            for p, w in zip(points, weights):
                out.writerow([repr(float(p.real)), repr(float(p.imag)), repr(float(w))])
        else:
            pts = points.reshape(len(points), -1)
            out.writerow([f"x{i}" for i in range(pts.shape[1])] + ["weight"])
            for p, w in zip(pts, weights):
                out.writerow([repr(float(v)) for v in p] + [repr(float(w))])
