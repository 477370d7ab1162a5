"""Weight functions phi(t, x) on R_t x V_x and planar weights Phi(tau).

A tube weight is evaluated on real arguments; its holomorphic lift to
``(R + iR) x (V + iR^n)`` simply discards imaginary parts. Radial planar
weights depend on the full complex variable and therefore never go through
the lift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import WeightError

KINDS = (
    "quadratic-form",
    "max-affine",
    "coupled-gaussian",
    "norm-power",
    "radial-planar",
    "custom-callable",
)
FLAGS = ("convex", "nonconvex", "unknown")
SHAPES = ("box", "ball", "full-space")

# eigenvalue slack when deciding positive semidefiniteness
_PSD_TOL = 1e-12


@dataclass(frozen=True)
class DomainSpec:
    """Fiber domain V: an axis-aligned box, a centered ball, or all of R^n."""

    shape: str
    dimension: int
    bounds: tuple = ()
    radius: Optional[float] = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise WeightError(f"unknown domain shape {self.shape!r}")
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise WeightError("domain dimension must be a positive integer")
        if self.shape == "box":
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
            if len(bounds) != self.dimension:
                raise WeightError("box needs one interval per axis")
            for lo, hi in bounds:
                if not lo < hi:
                    raise WeightError(f"box interval ({lo}, {hi}) is empty")
            object.__setattr__(self, "bounds", bounds)
        elif self.shape == "ball":
            if self.radius is None or not self.radius > 0:
                raise WeightError("ball radius must be positive")
            if self.bounds:
                raise WeightError("ball carries a radius, not bounds")
        else:
            if self.bounds or self.radius is not None:
                raise WeightError("full-space carries only its dimension")

    @property
    def bounded(self) -> bool:
        return self.shape != "full-space"

    def contains(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.shape == "box":
            lo = np.array([b[0] for b in self.bounds])
            hi = np.array([b[1] for b in self.bounds])
            return np.all((x >= lo) & (x <= hi), axis=1)
        if self.shape == "ball":
            return np.linalg.norm(x, axis=1) <= self.radius
        return np.ones(len(x), dtype=bool)

    @classmethod
    def box(cls, *intervals) -> "DomainSpec":
        return cls("box", len(intervals), bounds=tuple(intervals))

    @classmethod
    def ball(cls, radius: float, dimension: int = 1) -> "DomainSpec":
        return cls("ball", dimension, radius=float(radius))

    @classmethod
    def full(cls, dimension: int = 1) -> "DomainSpec":
        return cls("full-space", dimension)


@dataclass(frozen=True)
class WeightSpec:
    """Catalog entry describing a weight symbolically.

    Parameter layouts by ``kind`` (``n`` is the fiber dimension, ``d = n + 1``):

    quadratic-form
        ``d*d`` symmetric matrix entries (row-major, variable order ``(t, x)``),
        then ``d`` linear coefficients, then a constant.
    max-affine
        rows ``(alpha, beta_1..beta_n, gamma)``; phi = max(alpha t + beta.x + gamma).
    coupled-gaussian
        ``(alpha, beta)``; phi = alpha * sum_i (t - x_i)^2 + beta * |x|^2.
    norm-power
        ``(alpha, p, beta)``; phi = alpha * |x|^p + beta * t^2.
    radial-planar
        ``(coef, power, center_re, center_im)``; Phi(tau) = coef * |tau - c|^power.
    custom-callable
        no params; ``fn(t, X)`` with ``X`` of shape ``(K, n)`` returns ``(K,)``.

    ``t_shift`` replaces phi(t, x) by phi(t - t_shift, x).
    """

    name: str
    kind: str
    params: tuple = ()
    fiber: Optional[DomainSpec] = None
    convex_flag: str = "unknown"
    fn: Optional[Callable] = field(default=None, compare=False, repr=False)
    t_shift: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise WeightError(f"unknown weight kind {self.kind!r}")
        if self.convex_flag not in FLAGS:
            raise WeightError(f"unknown convex flag {self.convex_flag!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind == "radial-planar":
            if self.fiber is not None:
                raise WeightError("radial-planar weights have no fiber")
            if len(self.params) != 4:
                raise WeightError("radial-planar needs (coef, power, center_re, center_im)")
            coef, power = self.params[:2]
            if power <= 0:
                raise WeightError("radial-planar power must be positive")
            object.__setattr__(self, "convex_flag", "convex" if coef >= 0 else "nonconvex")
            return
        if self.fiber is None:
            raise WeightError(f"{self.kind} weight needs a fiber domain")
        n = self.fiber.dimension
        p = self.params
        if self.kind == "quadratic-form":
            d = n + 1
            if len(p) != d * d + d + 1:
                raise WeightError(f"quadratic-form over n={n} needs {d * d + d + 1} params")
            q = np.array(p[: d * d]).reshape(d, d)
            if not np.array_equal(q, q.T):
                raise WeightError("quadratic-form matrix must be symmetric")
            psd = np.linalg.eigvalsh(q).min() >= -_PSD_TOL
            object.__setattr__(self, "convex_flag", "convex" if psd else "nonconvex")
        elif self.kind == "max-affine":
            if not p or len(p) % (n + 2):
                raise WeightError(f"max-affine rows must have length {n + 2}")
        elif self.kind == "coupled-gaussian":
            if len(p) != 2:
                raise WeightError("coupled-gaussian needs (alpha, beta)")
        elif self.kind == "norm-power":
            if len(p) != 3:
                raise WeightError("norm-power needs (alpha, p, beta)")
            if p[1] <= 0:
                raise WeightError("norm-power exponent must be positive")
        elif self.kind == "custom-callable":
            if self.fn is None:
                raise WeightError("custom-callable weight needs fn")
            # no convexity guarantee is taken on trust for arbitrary callables
            object.__setattr__(self, "convex_flag", "unknown")

    @property
    def dimension(self) -> int:
        return self.fiber.dimension if self.fiber is not None else 0

    @property
    def is_planar(self) -> bool:
        return self.kind == "radial-planar"

    def shifted(self, c: float) -> "WeightSpec":
        """The weight phi(t - c, x)."""
        return WeightSpec(self.name, self.kind, self.params, self.fiber,
                          self.convex_flag, self.fn, self.t_shift + float(c))

    def values(self, t, X) -> np.ndarray:
        """Vectorized phi(t, X[k]) for ``X`` of shape ``(K, n)``."""
        if self.is_planar:
            raise WeightError("radial-planar weights depend on Im(tau); use planar_weight")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.dimension:
            raise WeightError(f"expected points of dimension {self.dimension}, got shape {X.shape}")
        t = float(t) - self.t_shift
        n = self.dimension
        p = self.params
        if self.kind == "quadratic-form":
            d = n + 1
            q = np.array(p[: d * d]).reshape(d, d)
            b = np.array(p[d * d: d * d + d])
            z = np.column_stack([np.full(len(X), t), X])
            return np.einsum("ki,ij,kj->k", z, q, z) + z @ b + p[-1]
        if self.kind == "max-affine":
            rows = np.array(p).reshape(-1, n + 2)
            aff = t * rows[:, 0][None, :] + X @ rows[:, 1:n + 1].T + rows[:, -1][None, :]
            return aff.max(axis=1)
        if self.kind == "coupled-gaussian":
            alpha, beta = p
            return alpha * np.sum((t - X) ** 2, axis=1) + beta * np.sum(X ** 2, axis=1)
        if self.kind == "norm-power":
            alpha, power, beta = p
            return alpha * np.linalg.norm(X, axis=1) ** power + beta * t * t
        out = np.asarray(self.fn(t, X), dtype=float)
        return np.broadcast_to(out, (len(X),)).copy()

    def breakpoints(self, t) -> list:
        """Points in a 1-D fiber where phi(t, .) may fail to be smooth."""
        if self.dimension != 1:
            return []
        t = float(t) - self.t_shift
        if self.kind == "norm-power":
            return [0.0]
        if self.kind == "max-affine":
            rows = np.array(self.params).reshape(-1, 3)
            pts = []
            for i in range(len(rows)):
                for j in range(i + 1, len(rows)):
                    db = rows[i, 1] - rows[j, 1]
                    if db != 0.0:
                        pts.append(-((rows[i, 0] - rows[j, 0]) * t + rows[i, 2] - rows[j, 2]) / db)
            return sorted(set(pts))
        return []


def eval(spec: WeightSpec, t: float, x) -> float:
    """phi(t, x) at a single point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.shape[0] != spec.dimension:
        raise WeightError(f"x has dimension {x.shape}, weight expects {spec.dimension}")
    return float(spec.values(t, x[None, :])[0])


def lift_eval(spec: WeightSpec, tau: complex, z) -> float:
    """Lift of phi to the tube: phi(Re tau, Re z), independent of Im."""
    if spec.is_planar:
        raise WeightError("radial-planar weights are not lifts of tube weights")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return eval(spec, complex(tau).real, z.real)


@dataclass(frozen=True)
class PlanarWeight:
    """A weight Phi on a planar domain, evaluated on complex arrays.

    ``domain`` is ``None`` for the whole plane or ``(center, radius)`` for an
    open disk. ``psh`` is catalog ground truth (``None`` when unknown).
    """

    name: str
    fn: Callable = field(compare=False, repr=False)
    psh: Optional[bool] = None
    domain: Optional[tuple] = None

    def __call__(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=complex)
        return np.asarray(self.fn(tau), dtype=float)

    def at(self, a: complex) -> float:
        return float(self(np.array([a]))[0])

    def contains_disk(self, a: complex, r: float) -> bool:
        if self.domain is None:
            return True
        c, big_r = self.domain
        return abs(complex(a) - complex(c)) + r <= big_r

    def translated(self, b: complex) -> "PlanarWeight":
        """The weight tau -> Phi(tau - b)."""
        b = complex(b)
        dom = None if self.domain is None else (complex(self.domain[0]) + b, self.domain[1])
        return PlanarWeight(f"{self.name}@{b}", lambda tau, f=self.fn: f(tau - b), self.psh, dom)

    def plus(self, c: float) -> "PlanarWeight":
        """The weight Phi + c."""
        return PlanarWeight(f"{self.name}+{c}", lambda tau, f=self.fn: f(tau) + c, self.psh, self.domain)


def planar_weight(spec: WeightSpec) -> PlanarWeight:
    if not spec.is_planar:
        raise WeightError(f"{spec.name} is a tube weight; lift its marginal instead")
    coef, power, cre, cim = spec.params
    center = complex(cre, cim)
    return PlanarWeight(spec.name, lambda tau: coef * np.abs(tau - center) ** power,
                        psh=spec.convex_flag == "convex")


def constant_weight(c: float = 0.0) -> PlanarWeight:
    return PlanarWeight(f"const:{c:g}", lambda tau: np.full(np.shape(tau), float(c)), psh=True)


def real_part_weight() -> PlanarWeight:
    return PlanarWeight("harmonic:re", lambda tau: np.real(tau), psh=True)


def quadratic(name, matrix, linear=None, const=0.0, fiber=None) -> WeightSpec:
    """Quadratic-form weight from a symmetric matrix in the variables (t, x)."""
    q = np.asarray(matrix, dtype=float)
    d = q.shape[0]
    lin = np.zeros(d) if linear is None else np.asarray(linear, dtype=float)
    fiber = fiber or DomainSpec.full(d - 1)
    return WeightSpec(name, "quadratic-form", tuple(q.ravel()) + tuple(lin) + (const,), fiber)


def catalog() -> list:
    """The fixed test family of weights used by suites and the CLI."""
    r1 = DomainSpec.full(1)
    entries = [
        WeightSpec("tube:coupled-gaussian", "coupled-gaussian", (1.0, 1.0), r1, "convex"),
        quadratic("tube:t2+x2-box", [[1, 0], [0, 1]], fiber=DomainSpec.box((-1.0, 1.0))),
        quadratic("tube:x2", [[0, 0], [0, 1]]),
        WeightSpec("tube:max-affine", "max-affine",
                   (1.0, 1.0, 0.0, -1.0, -1.0, 0.0, 0.5, -2.0, 0.3),
                   DomainSpec.box((-2.0, 2.0)), "convex"),
        WeightSpec("tube:abs-x", "norm-power", (1.0, 1.0, 0.5), r1, "convex"),
        quadratic("tube:quad-2d-box", [[1.0, 0.5, 0.0], [0.5, 1.0, 0.3], [0.0, 0.3, 1.0]],
                  fiber=DomainSpec.box((-1.0, 1.0), (-1.0, 1.0))),
        WeightSpec("tube:coupled-gaussian-2d-ball", "coupled-gaussian", (1.0, 1.0),
                   DomainSpec.ball(2.0, 2), "convex"),
        quadratic("tube:minus-t2+x2", [[-1, 0], [0, 1]]),
        quadratic("tube:x2+3tx+t2", [[1.0, 1.5], [1.5, 1.0]]),
        WeightSpec("radial:abs2", "radial-planar", (1.0, 2.0, 0.0, 0.0)),
        WeightSpec("radial:abs4", "radial-planar", (1.0, 4.0, 0.0, 0.0)),
        WeightSpec("radial:minus-abs2", "radial-planar", (-1.0, 2.0, 0.0, 0.0)),
    ]
    return entries


def lookup(name: str) -> WeightSpec:
    for spec in catalog():
        if spec.name == name:
            return spec
    raise WeightError(f"no catalog weight named {name!r}")


def to_kv(spec: WeightSpec) -> dict:
    """Flat key/value form used by CLI config documents."""
    if spec.kind == "custom-callable":
        raise WeightError("custom-callable weights cannot be serialized")
    kv = {
        "weight.name": spec.name,
        "weight.kind": spec.kind,
        "weight.params": ",".join(repr(p) for p in spec.params),
        "weight.flag": spec.convex_flag,
    }
    if spec.t_shift:
        kv["weight.t_shift"] = repr(spec.t_shift)
    if spec.fiber is not None:
        f = spec.fiber
        kv["weight.fiber.shape"] = f.shape
        kv["weight.fiber.dim"] = str(f.dimension)
        if f.shape == "box":
            kv["weight.fiber.bounds"] = ";".join(f"{lo!r},{hi!r}" for lo, hi in f.bounds)
        elif f.shape == "ball":
            kv["weight.fiber.radius"] = repr(f.radius)
    return kv


def _floats(text: str) -> tuple:
    text = text.strip()
    return tuple(float(v) for v in text.split(",")) if text else ()


def from_kv(kv: dict) -> WeightSpec:
    """Inverse of :func:`to_kv`; unknown keys are ignored."""
    try:
        kind = kv["weight.kind"]
        params = _floats(kv.get("weight.params", ""))
        fiber = None
        shape = kv.get("weight.fiber.shape")
        if shape is not None:
            dim = int(kv.get("weight.fiber.dim", "1"))
            if shape == "box":
                bounds = [_floats(iv) for iv in kv["weight.fiber.bounds"].split(";")]
                fiber = DomainSpec("box", dim, bounds=tuple(bounds))
            elif shape == "ball":
                fiber = DomainSpec("ball", dim, radius=float(kv["weight.fiber.radius"]))
            else:
                fiber = DomainSpec(shape, dim)
        return WeightSpec(kv.get("weight.name", "custom"), kind, params, fiber,
                          kv.get("weight.flag", "unknown"),
                          t_shift=float(kv.get("weight.t_shift", 0.0)))
    except KeyError as exc:
        raise WeightError(f"missing weight key {exc.args[0]}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, WeightError):
            raise
        raise WeightError(str(exc)) from None


__all__ = [
    "DomainSpec", "WeightSpec", "PlanarWeight", "eval", "lift_eval", "catalog",
    "lookup", "planar_weight", "constant_weight", "real_part_weight", "quadratic",
    "to_kv", "from_kv",
]
