"""Bump functions chi_R, their mass and gradient bound, and normalized convolution.

chi_R(y) = psi((|y| - (R - 2 sqrt R)) / sqrt R), where psi is a C-infinity
step equal to 1 on (-inf, 0] and 0 on [1, inf). Hence chi_R is 1 on
|y| <= R - 2 sqrt R, vanishes for |y| >= R - sqrt R, and
|grad chi_R| <= C_PSI / sqrt R with C_PSI = sup |psi'| independent of R.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import quadrature as quad
from .errors import AuditError, CoverageError, DomainError

# sup |psi'|, attained at u = 1/2 where psi = 1/2 and the logit slope is 8;
# re-measured in tests/test_smoothing.py
C_PSI = 2.0

MIN_R = 9.0
YOUNG_RTOL = 1e-10
STEPS_PER_SQRT_R = 64
_MASS_ORDER = 200
_GRAD_SAMPLES = 10001


def smooth_step(v) -> np.ndarray:
    """S(v) = E(v) / (E(v) + E(1 - v)) with E(v) = exp(-1/v) for v > 0."""
    v = np.asarray(v, dtype=float)
    out = np.where(v >= 1.0, 1.0, 0.0)
    inside = (v > 0.0) & (v < 1.0)
    vi = v[inside]
    out[inside] = expit(1.0 / (1.0 - vi) - 1.0 / vi)
    return out


def _step_derivatives(v):
    v = np.asarray(v, dtype=float)
    d1 = np.zeros_like(v)
    d2 = np.zeros_like(v)
    inside = (v > 0.0) & (v < 1.0)
    vi = v[inside]
    s = expit(1.0 / (1.0 - vi) - 1.0 / vi)
    g1 = 1.0 / (1.0 - vi) ** 2 + 1.0 / vi ** 2
    g2 = 2.0 / (1.0 - vi) ** 3 - 2.0 / vi ** 3
    d1[inside] = s * (1.0 - s) * g1
    d2[inside] = s * (1.0 - s) * (g2 + g1 * g1 * (1.0 - 2.0 * s))
    return d1, d2


def psi(u) -> np.ndarray:
    return smooth_step(1.0 - np.asarray(u, dtype=float))


def psi_prime(u) -> np.ndarray:
    return -_step_derivatives(1.0 - np.asarray(u, dtype=float))[0]


def psi_second(u) -> np.ndarray:
    return _step_derivatives(1.0 - np.asarray(u, dtype=float))[1]


def unit_ball_volume(n: int) -> float:
    """sigma_n = pi^(n/2) / Gamma(n/2 + 1)."""
    if n < 1:
        raise DomainError("dimension must be >= 1")
    # recurrence sigma_n = 2 pi / n * sigma_{n-2} keeps sigma_1 = 2 and sigma_2 = pi exact
    sigma = 2.0 if n % 2 else 1.0
    for k in range(2 if n % 2 == 0 else 3, n + 1, 2):
        sigma *= 2.0 * math.pi / k
    return sigma


@dataclass(frozen=True)
class BumpProfile:
    R: float
    n: int
    inner: float
    outer: float
    mass: float
    grad_sup: float
    c_psi: float = C_PSI

    @property
    def width(self) -> float:
        return math.sqrt(self.R)

    def radial(self, rho) -> np.ndarray:
        return psi((np.asarray(rho, dtype=float) - self.inner) / self.width)

    def __call__(self, y) -> np.ndarray:
        """chi_R at points ``y`` of shape ``(K, n)``."""
        y = np.asarray(y, dtype=float).reshape(-1, self.n)
        return self.radial(np.linalg.norm(y, axis=1))

    @property
    def mass_bounds(self) -> tuple:
        s = unit_ball_volume(self.n)
        return s * self.inner ** self.n, s * self.outer ** self.n


def make_bump(R: float, n: int, min_R: float = MIN_R) -> BumpProfile:
    R = float(R)
    if not R > 4.0 or R < min_R:
        raise DomainError(f"R={R} too small (need R > 4 and R >= {min_R})")
    if n < 1:
        raise DomainError("dimension must be >= 1")
    root = math.sqrt(R)
    inner, outer = R - 2.0 * root, R - root
    sigma = unit_ball_volume(n)
    rho, w = quad.gauss_legendre(_MASS_ORDER).on(inner, outer)
    shell = float(quad.tree_sum(w * psi((rho - inner) / root) * rho ** (n - 1)))
    mass = sigma * inner ** n + n * sigma * shell
    u = np.linspace(0.0, 1.0, _GRAD_SAMPLES)
    grad_sup = float(np.abs(psi_prime(u)).max()) / root
    return BumpProfile(R, n, inner, outer, mass, grad_sup)


@dataclass(frozen=True)
class AuditRecord:
    R: float
    n: int
    mass: float
    lower: float
    upper: float
    ratio: float
    cap: float
    grad_sup: float
    grad_bound: float
    grad_factor: float

    def row(self) -> list:
        return [self.R, self.n, self.mass, self.lower, self.upper, self.ratio, self.cap,
                self.grad_sup, self.grad_bound]

    def to_dict(self) -> dict:
        keys = ("R", "n", "mass", "lower", "upper", "ratio", "cap", "grad_sup", "grad_bound",
                "grad_factor")
        return {k: getattr(self, k) for k in keys}


AUDIT_COLUMNS = ["R", "n", "a_R", "lower", "upper", "ratio", "cap", "grad_sup", "bound"]


def norm_ratio(R: float, n: int) -> float:
    """(R / (R - 2 sqrt R))^(2n), the factor lost to the convolution at radius R."""
    return (R / (R - 2.0 * math.sqrt(R))) ** (2 * n)


def constants_audit(R: float, n: int) -> AuditRecord:
    """Check every explicit constant of the smoothing step at (R, n)."""
    R = float(R)
    if not R > 4.0:
        raise DomainError("constants audit needs R > 4")
    bump = make_bump(R, n, min_R=0.0)
    ratio = norm_ratio(R, n)
    cap = 1.25 ** (2 * n)
    if R >= 100.0 and ratio > cap:
        raise AuditError(f"ratio {ratio!r} exceeds (5/4)^(2n) = {cap!r} at R={R}")
    ladder = [norm_ratio(R * k, n) for k in (1, 2, 4)]
    if not ladder[0] > ladder[1] > ladder[2]:
        raise AuditError(f"ratio not decreasing along R, 2R, 4R: {ladder}")
    lower, upper = bump.mass_bounds
    if not lower <= bump.mass <= upper:
        raise AuditError(f"mass {bump.mass!r} outside [{lower!r}, {upper!r}]")
    grad_bound = C_PSI / math.sqrt(R)
    if bump.grad_sup > grad_bound:
        raise AuditError(f"gradient {bump.grad_sup!r} exceeds C_PSI/sqrt(R) = {grad_bound!r}")
    return AuditRecord(R, n, bump.mass, lower, upper, ratio, cap, bump.grad_sup, grad_bound,
                       grad_bound ** 2)


def write_audit_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(AUDIT_COLUMNS)
        for rec in records:
            out.writerow([repr(v) if isinstance(v, float) else v for v in rec.row()])


@dataclass(frozen=True)
class SampledField:
    """Values of f on the lattice step * Z^n restricted to [-extent, extent]^n.

    f is zero outside the closed ball of radius ``support``.
    """

    n: int
    step: float
    half_count: int
    values: np.ndarray
    support: float

    @property
    def extent(self) -> float:
        return self.half_count * self.step

    @property
    def axis(self) -> np.ndarray:
        return self.step * np.arange(-self.half_count, self.half_count + 1)

    def points(self) -> np.ndarray:
        grids = np.meshgrid(*([self.axis] * self.n), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def trapezoid_weights(self) -> np.ndarray:
        w1 = np.ones(2 * self.half_count + 1)
        w1[[0, -1]] = 0.5
        w = w1
        for _ in range(self.n - 1):
            w = np.multiply.outer(w, w1)
        return w.ravel() * self.step ** self.n


def sample_field(fn, n: int, support: float, extent: float = None, step: float = None,
                 R: float = None) -> SampledField:
    """Sample ``fn`` (points ``(K, n)`` -> values) on a lattice, zero outside the support.

    Defaults: extent = support, step = sqrt(R) / 64 with R = support.
    """
    R = support if R is None else R
    extent = support if extent is None else extent
    step = math.sqrt(R) / STEPS_PER_SQRT_R if step is None else step
    half = int(math.ceil(extent / step - 1e-9))
    axis = step * np.arange(-half, half + 1)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    inside = np.linalg.norm(pts, axis=1) <= support * (1.0 + 1e-14)
    vals = np.zeros(len(pts), dtype=np.result_type(float, np.asarray(fn(pts[:1])).dtype))
    if inside.any():
        vals[inside] = fn(pts[inside])
    return SampledField(n, step, half, vals, float(support))


def _check_coverage(field: SampledField, bump: BumpProfile):
    if field.n != bump.n:
        raise CoverageError(f"field dimension {field.n} != bump dimension {bump.n}")
    if field.extent < min(field.support, bump.R) * (1.0 - 1e-12):
        raise CoverageError(f"grid extent {field.extent} does not cover the support "
                            f"radius {min(field.support, bump.R)}")


def convolve(field: SampledField, bump: BumpProfile, y) -> complex | float:
    """(1/a_R) int f(w) chi_R(y - w) dw by the trapezoid rule on the field's lattice."""
    _check_coverage(field, bump)
    y = np.asarray(y, dtype=float).reshape(bump.n)
    kernel = bump(y[None, :] - field.points())
    total = quad.tree_sum(field.trapezoid_weights() * kernel * field.values) / bump.mass
    return complex(total) if np.iscomplexobj(total) else float(total)


def young_bound_check(field: SampledField, bump: BumpProfile, y) -> tuple:
    """|f~(y)|^2 <= (sigma_n R^n / a_R^2) int |f|^2, checked on the lattice."""
    lhs = abs(convolve(field, bump, y)) ** 2
    l2 = float(quad.tree_sum(field.trapezoid_weights() * np.abs(field.values) ** 2))
    rhs = unit_ball_volume(bump.n) * bump.R ** bump.n / bump.mass ** 2 * l2
    if lhs > rhs * (1.0 + YOUNG_RTOL):
        raise AuditError(f"convolution bound fails: {lhs!r} > {rhs!r}")
    return lhs, rhs
