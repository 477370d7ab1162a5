"""Marginals Phi(t) = -log int_V exp(-phi(t, x)) dx and their convexity on grids."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import quadrature as quad
from .errors import (DivergenceError, InfiniteMarginalError, PrekopaLabError,
                     TruncationError, WeightError)
from .parallel import ordered_map
from .weights import PlanarWeight, WeightSpec

CONVEXITY_TOL = 1e-8
EXHAUSTION_TOL = 1e-14
DEFAULT_T0 = -3.0
DEFAULT_H = 0.05
DEFAULT_COUNT = 121
# radius of the region pre-scanned for the log-sum-exp shift on unbounded fibers
_SCAN_RADIUS = 8.0
# slack for the nonincreasing check on Phi_j traces
_TRACE_SLACK = 1e-12


@dataclass(frozen=True)
class MarginalGrid:
    weight: str
    t0: float
    h: float
    count: int
    phi_values: tuple
    quad_meta: dict = field(default_factory=dict)
    exhaustion_traces: Optional[tuple] = None

    def __post_init__(self):
        if self.count != len(self.phi_values):
            raise ValueError("phi_values length differs from count")
        for t, v in zip(self.t_values, self.phi_values):
            if not math.isfinite(v):
                raise InfiniteMarginalError(f"marginal is not finite at t={t}", t=t)
        for t, trace in zip(self.t_values, self.exhaustion_traces or ()):
            for j in range(len(trace) - 1):
                if trace[j + 1] > trace[j] + _TRACE_SLACK:
                    raise ValueError(f"exhaustion trace increases at t={t}, j={j + 1}")

    @property
    def t_values(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.count)


@dataclass(frozen=True)
class ConvexityReport:
    h: float
    second_differences: tuple
    min_second_difference: float
    violations: tuple
    verdict: str
    tolerance: float

    @property
    def convex(self) -> bool:
        return self.verdict == "convex-on-grid"

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "min_second_difference": self.min_second_difference,
            "violations": [[t, v] for t, v in self.violations],
            "verdict": self.verdict,
            "tolerance": self.tolerance,
        }


def _scan_shift(spec: WeightSpec, t: float, m: int) -> float:
    pts, _ = quad.shell_rule(spec.dimension, 0.0, _SCAN_RADIUS, min(m, 16))
    vals = spec.values(t, pts)
    finite = vals[np.isfinite(vals)]
    return float(finite.min()) if finite.size else 0.0


def marginal_with_trace(spec: WeightSpec, t: float, m: int = quad.DEFAULT_BOX_ORDER,
                        tol: float = EXHAUSTION_TOL, j_max: int = quad.DEFAULT_JMAX):
    """Phi(t) and, for unbounded fibers, the exhaustion trace Phi_1, Phi_2, ..."""
    if spec.is_planar:
        raise WeightError(f"{spec.name} is planar; marginals need a tube weight")
    t = float(t)
    breaks = spec.breakpoints(t)
    if spec.fiber.bounded:
        pts, w = quad.fiber_rule(spec.fiber, m, breaks or None)
        log_int = quad.log_integral_exp_neg(spec.values(t, pts), w)
        if log_int == -math.inf:
            raise InfiniteMarginalError(f"fiber integral vanishes at t={t}", t=t)
        if log_int == math.inf:
            raise DivergenceError(f"fiber integral diverges at t={t}", t=t)
        return -log_int, None

    shift = _scan_shift(spec, t, m)
    with np.errstate(over="ignore"):
        integrand = lambda X: np.exp(shift - spec.values(t, X))  # noqa: E731
        try:
            value, trace = quad.integrate_exhausted(integrand, spec.dimension, tol, j_max, m,
                                                    breaks or None)
        except TruncationError as exc:
            raise DivergenceError(f"fiber integral diverges at t={t}", t=t,
                                  trace=exc.trace) from None
    if value == 0.0:
        raise InfiniteMarginalError(f"fiber integral vanishes at t={t}", t=t)
    with np.errstate(divide="ignore"):
        phis = [shift - math.log(v) if v > 0 else math.inf for v in trace]
    return shift - math.log(value), phis


def marginal_at(spec: WeightSpec, t: float, **kw) -> float:
    """Phi(t) = -log int_V exp(-phi(t, x)) dx."""
    return marginal_with_trace(spec, t, **kw)[0]


def exhaustion_sequence(spec: WeightSpec, t: float, count: int,
                        m: int = quad.DEFAULT_BOX_ORDER) -> list:
    """Phi_j(t) for j = 1..count with no early stopping (full-space fibers)."""
    if spec.fiber is None or spec.fiber.bounded:
        raise WeightError("exhaustion applies to full-space fibers")
    shift = _scan_shift(spec, t, m)
    breaks = spec.breakpoints(t) or None
    total, out = 0.0, []
    for j in range(1, count + 1):
        pts, w = quad.shell_rule(spec.dimension, j - 1.0, float(j), m, breaks)
        total += float(quad.tree_sum(w * np.exp(shift - spec.values(t, pts))))
        out.append(shift - math.log(total) if total > 0 else math.inf)
    return out


def marginal_grid(spec: WeightSpec, t0: float, h: float, count: int, workers=None,
                  m: int = quad.DEFAULT_BOX_ORDER, tol: float = EXHAUSTION_TOL) -> MarginalGrid:
    if not h > 0:
        raise ValueError("grid step must be positive")
    if count < 3:
        raise ValueError("grid needs at least 3 points")
    ts = [t0 + i * h for i in range(count)]
    results = ordered_map(lambda t: marginal_with_trace(spec, t, m=m, tol=tol), ts, workers)
    traces = None
    if not spec.fiber.bounded:
        traces = tuple(tuple(tr) for _, tr in results)
    meta = {"order": m, "fiber": spec.fiber.shape}
    if traces is not None:
        meta["exhaustion_tol"] = tol
    return MarginalGrid(spec.name, float(t0), float(h), int(count),
                        tuple(float(v) for v, _ in results), meta, traces)


def second_differences(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return v[:-2] - 2.0 * v[1:-1] + v[2:]


def convexity_check(grid: MarginalGrid, tol: float = CONVEXITY_TOL) -> ConvexityReport:
    if grid.count < 3:
        raise ValueError("grid needs at least 3 points")
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    d2 = second_differences(grid.phi_values)
    ts = grid.t_values[1:-1]
    violations = tuple((float(t), float(v)) for t, v in zip(ts, d2) if v < -tol)
    dmin = float(d2.min())
    verdict = "convex-on-grid" if dmin >= -tol else "violated"
    return ConvexityReport(grid.h, tuple(float(v) for v in d2), dmin, violations, verdict, tol)


@dataclass(frozen=True)
class SuiteEntry:
    name: str
    convex_flag: str
    report: Optional[ConvexityReport] = None
    grid: Optional[MarginalGrid] = None
    error: Optional[str] = None


def prekopa_suite(specs, t0: float = DEFAULT_T0, h: float = DEFAULT_H,
                  count: int = DEFAULT_COUNT, tol: float = CONVEXITY_TOL, workers=None) -> list:
    """One convexity report per tube weight; failures are recorded, not raised."""
    out = []
    for spec in specs:
        try:
            grid = marginal_grid(spec, t0, h, count, workers=workers)
            out.append(SuiteEntry(spec.name, spec.convex_flag, convexity_check(grid, tol), grid))
        except PrekopaLabError as exc:
            out.append(SuiteEntry(spec.name, spec.convex_flag, error=f"{type(exc).__name__}: {exc}"))
    return out


def write_grid_csv(path, grid: MarginalGrid, report: ConvexityReport) -> None:
    d2 = [""] + [repr(v) for v in report.second_differences] + [""]
    flagged = {t for t, _ in report.violations}
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t", "phi", "second_diff", "violation_flag"])
        for t, phi, d in zip(grid.t_values, grid.phi_values, d2):
            out.writerow([repr(float(t)), repr(phi), d, int(float(t) in flagged)])


def marginal_lift(spec: WeightSpec, **kw) -> PlanarWeight:
    """Planar weight tau -> Phi(Re tau), the marginal of the lifted tube weight."""
    if spec.is_planar:
        raise WeightError(f"{spec.name} is already planar")

    def fn(tau):
        tau = np.asarray(tau, dtype=complex)
        uniq, inv = np.unique(tau.real.ravel(), return_inverse=True)
        vals = np.array([marginal_at(spec, t, **kw) for t in uniq])
        return vals[inv].reshape(tau.shape)

    return PlanarWeight(f"marginal[{spec.name}]", fn)
