"""Minimal-norm holomorphic extension on a disk.

Minimizes int_{D(a,r)} |f|^2 exp(-Phi) over polynomials f of degree <= N
with f(a) = 1. The basis is ((tau - a)/r)^k, so the constraint is c_0 = 1
and the minimum is the Schur complement of the Gram matrix at index 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from . import quadrature as quad
from .errors import ConditioningError

DEFAULT_DEGREE = 16
PASS_RTOL = 1e-9
STABLE_RTOL = 1e-8


@dataclass(frozen=True)
class MonomialGram:
    """Hermitian Gram matrix ``gram[j, k] = <e_j, e_k>`` with ``e_k = ((tau - a)/r)^k``.

    The inner product is conjugate-linear in the first slot, so the weighted
    norm of ``sum_k c_k e_k`` is ``c^H gram c``.
    """

    center: complex
    radius: float
    degree: int
    gram: np.ndarray
    weight: str
    rule: Optional[quad.DiskRule] = None

    def leading(self, degree: int) -> "MonomialGram":
        """Gram of the nested subspace of polynomials of degree <= ``degree``."""
        k = degree + 1
        return MonomialGram(self.center, self.radius, degree, self.gram[:k, :k], self.weight,
                            self.rule)


@dataclass(frozen=True)
class ExtensionCertificate:
    center: complex
    radius: float
    degree: int
    minimal_norm: float
    bound: float
    coefficients: tuple
    verdict: str
    convergence: tuple
    weight: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def stabilized(self) -> bool:
        half, full = self.convergence
        return abs(half - full) <= STABLE_RTOL * abs(full)

    def evaluate(self, tau) -> np.ndarray:
        """The extension f(tau) = sum_k c_k ((tau - a)/r)^k."""
        w = (np.asarray(tau, dtype=complex) - self.center) / self.radius
        return np.polynomial.polynomial.polyval(w, np.array(self.coefficients))

    def to_dict(self) -> dict:
        return {
            "weight": self.weight,
            "a": [self.center.real, self.center.imag],
            "r": self.radius,
            "degree": self.degree,
            "minimal_norm": self.minimal_norm,
            "bound": self.bound,
            "verdict": self.verdict,
            "convergence": list(self.convergence),
            "stabilized": self.stabilized,
            "coefficient_magnitudes": [abs(c) for c in self.coefficients],
        }


def gram_matrix(weight, a: complex, r: float, degree: int = DEFAULT_DEGREE,
                rule: Optional[quad.DiskRule] = None) -> MonomialGram:
    """Assemble the weighted Gram matrix of the scaled monomials on D(a, r)."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    a = complex(a)
    rule = rule or quad.disk_rule(a, r)
    if rule.center != a or rule.radius != r:
        raise ValueError("disk rule does not match the disk D(a, r)")
    nodes = rule.nodes
    phi = quad.evaluate(weight, nodes).astype(float)
    if not np.all(np.isfinite(phi)):
        raise ValueError("weight is not finite on the closed disk")
    shift = float(phi.min())
    mass = rule.weights * np.exp(shift - phi)
    basis = ((nodes - a) / r)[:, None] ** np.arange(degree + 1)[None, :]
    products = mass[:, None, None] * np.conj(basis)[:, :, None] * basis[:, None, :]
    full = _reduce_hermitian(products) * math.exp(-shift)
    return MonomialGram(a, float(r), degree, full, getattr(weight, "name", repr(weight)), rule)


def _reduce_hermitian(products) -> np.ndarray:
    """Fixed-order node reduction; only the upper triangle is kept and mirrored."""
    g = quad.tree_sum(products, axis=0)
    upper = np.triu(g, 1)
    out = upper + np.conj(upper).T
    out[np.diag_indices_from(out)] = g.diagonal().real
    return out


def _cholesky(h: np.ndarray, degree: int):
    try:
        return linalg.cho_factor(h, lower=True, check_finite=True)
    except linalg.LinAlgError:
        raise ConditioningError(f"Gram matrix is not positive definite at degree {degree}",
                                degree=degree) from None


def _schur_minimum(h: np.ndarray, degree: int):
    """min c^H h c subject to c_0 = 1; returns (minimum, coefficients)."""
    if h.shape[0] == 1:
        return float(h[0, 0].real), np.ones(1, dtype=complex)
    rest = _cholesky(h[1:, 1:], degree)
    tail = -linalg.cho_solve(rest, h[1:, 0])
    value = float((h[0, 0] + h[0, 1:] @ tail).real)
    return value, np.concatenate([[1.0 + 0j], tail])


def min_extension(gram: MonomialGram, phi_at_a: float) -> ExtensionCertificate:
    """Minimal weighted norm among degree-N extensions with f(a) = 1."""
    _cholesky(gram.gram, gram.degree)
    value, coeffs = _schur_minimum(gram.gram, gram.degree)
    half_deg = gram.degree // 2
    half_value = _schur_minimum(gram.gram[:half_deg + 1, :half_deg + 1], half_deg)[0]
    bound = math.pi * gram.radius ** 2 * math.exp(-phi_at_a)
    verdict = "pass" if value <= bound * (1.0 + PASS_RTOL) else "fail-at-truncation"
    return ExtensionCertificate(gram.center, gram.radius, gram.degree, value, bound,
                                tuple(complex(c) for c in coeffs), verdict,
                                (half_value, value), gram.weight)


def kernel_diag(gram: MonomialGram) -> float:
    """e_0^H G^{-1} e_0, the reciprocal of the minimal extension norm."""
    fac = _cholesky(gram.gram, gram.degree)
    e0 = np.zeros(gram.degree + 1, dtype=complex)
    e0[0] = 1.0
    return float(linalg.cho_solve(fac, e0)[0].real)


def extension_norm(weight, cert: ExtensionCertificate,
                   rule: Optional[quad.DiskRule] = None) -> float:
    """Re-integrate int |f|^2 exp(-Phi) from the certificate's coefficients."""
    rule = rule or quad.disk_rule(cert.center, cert.radius)
    return quad.integrate_disk(lambda tau: np.abs(cert.evaluate(tau)) ** 2 * np.exp(-weight(tau)),
                               rule)
