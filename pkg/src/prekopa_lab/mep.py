"""Minimal extension property sweeps, the mean-value chain, and tube certificates."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bergman
from . import quadrature as quad
from .errors import ConsistencyError, DomainError, PrekopaLabError
from .marginal import marginal_lift
from .parallel import ordered_map
from .weights import WeightSpec

JENSEN_TOL = 1e-8
LOG_FLOOR = -700.0


def default_centers() -> list:
    """5 x 5 lattice on [-1, 1]^2, row-major in the imaginary part."""
    xs = np.linspace(-1.0, 1.0, 5)
    return [complex(x, y) for y in xs for x in xs]


DEFAULT_RADII = (0.25, 0.5, 1.0)


def mep_check(weight, a: complex, r: float, degree: int = bergman.DEFAULT_DEGREE,
              rule: Optional[quad.DiskRule] = None) -> bergman.ExtensionCertificate:
    """Certificate for (1/pi r^2) int |f|^2 e^{-Phi} <= e^{-Phi(a)} on D(a, r)."""
    a = complex(a)
    if hasattr(weight, "contains_disk") and not weight.contains_disk(a, r):
        raise DomainError(f"disk D({a}, {r}) leaves the weight's domain")
    phi_a = float(np.asarray(weight(np.array([a])))[0])
    if not math.isfinite(phi_a):
        raise DomainError(f"weight is not finite at the center {a}")
    gram = bergman.gram_matrix(weight, a, r, degree, rule)
    return bergman.min_extension(gram, phi_a)


@dataclass(frozen=True)
class MepSweep:
    weight: str
    centers: tuple
    radii: tuple
    certificates: tuple  # rows per center, columns per radius; None where a cell errored
    violations: tuple  # (a, r, reason)

    @property
    def overall(self) -> str:
        return "all-pass" if not self.violations else "violations"

    def cells(self):
        for i, a in enumerate(self.centers):
            for j, r in enumerate(self.radii):
                yield a, r, self.certificates[i][j]

    def to_dict(self) -> dict:
        return {
            "weight": self.weight,
            "overall": self.overall,
            "violations": [{"a": [a.real, a.imag], "r": r, "reason": why}
                           for a, r, why in self.violations],
            "certificates": [c.to_dict() for _, _, c in self.cells() if c is not None],
        }


def mep_sweep(weight, centers, radii, degree: int = bergman.DEFAULT_DEGREE,
              workers=None) -> MepSweep:
    centers = tuple(complex(a) for a in centers)
    radii = tuple(float(r) for r in radii)
    cells = [(a, r) for a in centers for r in radii]

    def run(cell):
        a, r = cell
        try:
            return mep_check(weight, a, r, degree), None
        except PrekopaLabError as exc:
            return None, f"{type(exc).__name__}: {exc}"

    results = ordered_map(run, cells, workers)
    rows, violations = [], []
    for i in range(len(centers)):
        rows.append(tuple(results[i * len(radii) + j][0] for j in range(len(radii))))
    for (a, r), (cert, err) in zip(cells, results):
        if err is not None:
            violations.append((a, r, err))
        elif not cert.passed:
            violations.append((a, r, f"minimal_norm {cert.minimal_norm!r} > bound {cert.bound!r}"))
    return MepSweep(getattr(weight, "name", ""), centers, radii, tuple(rows), tuple(violations))


def write_sweep_csv(path, certs) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["a_re", "a_im", "r", "minimal_norm", "bound", "verdict"])
        for c in certs:
            out.writerow([repr(c.center.real), repr(c.center.imag), repr(c.radius),
                          repr(c.minimal_norm), repr(c.bound), c.verdict])


@dataclass(frozen=True)
class MeanValueReport:
    center: complex
    radius: float
    area_mean: float
    value_at_center: float
    jensen_lhs: float
    log_mean: float
    slacks: tuple  # (MEP bound, Jensen step, sub-mean value of log|f|^2, conclusion)

    def to_dict(self) -> dict:
        return {
            "a": [self.center.real, self.center.imag],
            "r": self.radius,
            "area_mean": self.area_mean,
            "value_at_center": self.value_at_center,
            "jensen_lhs": self.jensen_lhs,
            "log_mean": self.log_mean,
            "slacks": list(self.slacks),
        }


def mean_value_check(weight, cert: bergman.ExtensionCertificate,
                     rule: Optional[quad.DiskRule] = None,
                     tol: float = JENSEN_TOL) -> MeanValueReport:
    """Walk the chain from the MEP bound to the sub-mean-value inequality.

    With A = area average over D(a, r) and f the certificate's extension:

        -Phi(a) >= log A(|f|^2 e^{-Phi})           (pass certificate)
                >= A(log |f|^2) - A(Phi)            (Jensen)
                >= -A(Phi)                          (log|f|^2 subharmonic, f(a) = 1)

    Every link is checked numerically; any one failing beyond ``tol`` is a bug.
    """
    if not cert.passed:
        raise DomainError("mean-value chain needs a passing certificate")
    a, r = cert.center, cert.radius
    rule = rule or quad.disk_rule(a, r)
    area = math.pi * r * r
    phi_a = float(np.asarray(weight(np.array([a])))[0])

    phi = quad.evaluate(weight, rule.nodes)
    f = cert.evaluate(rule.nodes)
    area_mean = float(quad.tree_sum(rule.weights * phi)) / area
    norm_mean = float(quad.tree_sum(rule.weights * np.abs(f) ** 2 * np.exp(-phi))) / area
    with np.errstate(divide="ignore"):
        log_f2 = np.maximum(np.log(np.abs(f) ** 2), LOG_FLOOR)
    log_mean = float(quad.tree_sum(rule.weights * log_f2)) / area

    log_norm = math.log(norm_mean)
    slacks = (
        -phi_a - log_norm,
        log_norm - (log_mean - area_mean),
        log_mean,
        area_mean - phi_a,
    )
    for k, s in enumerate(slacks):
        if s < -tol:
            raise ConsistencyError(f"mean-value chain link {k} fails by {s!r} at a={a}, r={r}")
    return MeanValueReport(a, r, area_mean, phi_a, -log_norm, log_mean, slacks)


def tube_certificate(spec: WeightSpec, a: complex, r: float,
                     degree: int = bergman.DEFAULT_DEGREE) -> bergman.ExtensionCertificate:
    """Disk extension check for a weight independent of Im(z) on D(a, r) x V.

    Extensions depending on tau alone see the weight only through the
    marginal, so the check reduces to the planar one for Phi(tau) = marginal
    at Re(tau); the bound pi r^2 int_V e^{-phi(a, x)} dx equals pi r^2 e^{-Phi(a)}.
    """
    return mep_check(marginal_lift(spec), a, r, degree)
