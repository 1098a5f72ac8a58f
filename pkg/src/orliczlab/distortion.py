"""Model maps with closed-form distortion and the pointwise bounds they obey.

The distortion coefficient of a map at a point is the n-th power of its
operator norm over its Jacobian determinant, with the conventions that a
vanishing derivative gives 1 and a vanishing determinant under a nonzero
derivative gives infinity.  Radial stretches have constant coefficient and
exact Holder exponents, which makes them the calibration targets for the
numeric differentiator and for the sphere-average decay bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .constants import ConstantsConfig, DEFAULT_CONSTANTS
from .quadrature import integrate_panels
from .reports import VerificationReport
from .weights import RadialWeight, sphere_area

__all__ = [
    "DistortionError",
    "ModelMap",
    "ChordalGap",
    "identity_map",
    "radial_stretch",
    "shear_map",
    "parse_map",
    "kf_numeric",
    "distortion_bound",
    "holder_check",
    "fmo_bound",
    "chordal_distance",
    "chordal_to_infinity",
]

IDENTITY = "IDENTITY"
RADIAL_STRETCH = "RADIAL_STRETCH"
SHEAR = "SHEAR"


class DistortionError(ValueError):
    pass


@dataclass(frozen=True)
class ChordalGap:
    """Assumed chordal diameter of the omitted set; always in (0, 1]."""

    delta: float

    def __post_init__(self):
        if not (0.0 < self.delta <= 1.0):
            raise DistortionError("the chordal gap must lie in (0, 1]")


@dataclass
class ModelMap:
    kind: str
    dimension: int
    eval: Callable
    alpha: float = 1.0
    jacobian: Optional[Callable] = None  # closed form, (m,n,n) from (m,n)
    description: str = ""

    def __call__(self, points):
        return np.asarray(self.eval(np.atleast_2d(np.asarray(points, dtype=float))),
                          dtype=float)

    def kf_closed_form(self, points) -> np.ndarray:
        """Distortion coefficient where a closed form is available."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == IDENTITY:
            return np.ones(pts.shape[0])
        if self.kind == RADIAL_STRETCH:
            a = self.alpha
            value = a ** (self.dimension - 1) if a >= 1 else 1.0 / a
            return np.full(pts.shape[0], value)
        raise DistortionError(f"no closed-form coefficient for {self.kind}")


def identity_map(n: int) -> ModelMap:
    return ModelMap(IDENTITY, n, eval=lambda pts: np.atleast_2d(pts).copy(),
                    description=f"identity:n={n}")


def radial_stretch(alpha: float, n: int) -> ModelMap:
    """x -> x |x|^(alpha-1): constant distortion, exact Holder exponent alpha."""
    if alpha <= 0:
        raise DistortionError("need alpha > 0")

    def ev(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.linalg.norm(pts, axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(r > 0, r ** (alpha - 1.0), 0.0)
        return pts * scale

    def jac(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        m, n_ = pts.shape
        r = np.linalg.norm(pts, axis=1)
        out = np.empty((m, n_, n_))
        eye = np.eye(n_)
        for i in range(m):
            ri = r[i]
            unit = pts[i] / ri
            out[i] = ri ** (alpha - 1.0) * (
                eye + (alpha - 1.0) * np.outer(unit, unit)
            )
        return out

    return ModelMap(RADIAL_STRETCH, n, eval=ev, alpha=alpha, jacobian=jac,
                    description=f"stretch:alpha={alpha:g},n={n}")


def shear_map(f_values: Callable, k: int) -> ModelMap:
    """(x, y) -> (x, y + f(x)) for a scalar field on R^k; volume preserving."""

    def ev(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = pts.copy()
        out[:, -1] = pts[:, -1] + np.asarray(f_values(pts[:, :-1]), dtype=float)
        return out

    return ModelMap(SHEAR, k + 1, eval=ev, description=f"shear:k={k}")


def parse_map(spec: str) -> ModelMap:
    """Model map from a spec string: ``identity:n=3`` or ``stretch:alpha=0.5,n=3``."""
    name, _, body = spec.partition(":")
    params = dict(kv.split("=") for kv in body.split(",") if kv)
    name = name.strip().lower()
    if name == "identity":
        return identity_map(int(params.get("n", 3)))
    if name == "stretch":
        return radial_stretch(float(params.get("alpha", 1.0)), int(params.get("n", 3)))
    raise DistortionError(f"unknown map spec {spec!r}")


# ---------------------------------------------------------------------------
# numeric distortion
# ---------------------------------------------------------------------------

def _fd_jacobian(m: ModelMap, x: np.ndarray, step: float) -> np.ndarray:
    n = m.dimension
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        J[:, j] = (m(x + e)[0] - m(x - e)[0]) / (2 * step)
    return J


def kf_numeric(map_: ModelMap, x, step: float = 1e-6, richardson: bool = True) -> float:
    """Distortion coefficient from central differences.

    Uses two step sizes combined at fourth order.  Conventions: 1 when the
    derivative vanishes, +inf when the determinant vanishes under a nonzero
    derivative.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (map_.dimension,):
        raise DistortionError("point dimension mismatch")
    h = step * max(1.0, float(np.linalg.norm(x)))
    J = _fd_jacobian(map_, x, h)
    if richardson:
        J_half = _fd_jacobian(map_, x, h / 2)
        J = (4.0 * J_half - J) / 3.0
    if not np.all(np.isfinite(J)):
        raise DistortionError(f"finite-difference stencil is singular at {x.tolist()}")
    norm = float(np.linalg.norm(J, 2))
    det = float(np.linalg.det(J))
    if norm < 1e-14:
        return 1.0
    if det <= 0.0:
        return math.inf
    return norm ** map_.dimension / det


# ---------------------------------------------------------------------------
# pointwise bounds
# ---------------------------------------------------------------------------

def distortion_bound(k_profile: RadialWeight, gap: ChordalGap, x0, eps0: float,
                     x, constants: ConstantsConfig = DEFAULT_CONSTANTS) -> dict:
    """Chordal-displacement bound from the sphere average of the distortion.

    ``k_profile`` carries the sphere average of the (n-1) power of the
    coefficient.  Returns the bound in both its sphere-average and
    sphere-norm forms, which must coincide for radial profiles.
    """
    n = k_profile.dimension
    x0 = np.asarray(x0, dtype=float)
    x = np.asarray(x, dtype=float)
    dist = float(np.linalg.norm(x - x0))
    if not (0 < dist < eps0):
        raise DistortionError("need 0 < |x - x0| < eps0")

    def decay(r):
        r = np.asarray(r, dtype=float)
        kv = np.asarray(k_profile.sphere_mean(r), dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(kv > 0, 1.0 / (r * kv ** (1.0 / (n - 1))), np.inf)

    edges = np.geomspace(dist, eps0, 257)
    integral = float(np.sum(integrate_panels(decay, edges, order=8)))
    if not math.isfinite(integral):
        raise DistortionError("distortion profile is not integrable on the ring")
    bound = constants.alpha_n / gap.delta * math.exp(-integral)

    # sphere-norm form: omega^{1/(n-1)} / ||K||_{n-1}(r) under the integral,
    # where the norm comes from the profile (already the (n-1) power average):
    # ||K||_{n-1}(r) = (omega r^{n-1} k(r))^{1/(n-1)}
    scale = sphere_area(n) ** (1.0 / (n - 1))

    def decay_norm(r):
        r = np.asarray(r, dtype=float)
        kv = np.asarray(k_profile.sphere_mean(r), dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            norms = (sphere_area(n) * r ** (n - 1) * kv) ** (1.0 / (n - 1))
            return np.where(norms > 0, scale / norms, np.inf)

    integral_norm = float(np.sum(integrate_panels(decay_norm, edges, order=8)))
    bound_norm = constants.alpha_n / gap.delta * math.exp(-integral_norm)
    return {
        "bound": bound,
        "bound_norm_form": bound_norm,
        "integral": integral,
        "forms_rel_gap": abs(bound - bound_norm) / max(bound, 1e-300),
    }


def holder_check(map_: ModelMap, n: Optional[int] = None,
                 eps_grid=None) -> VerificationReport:
    """Holder calibration of a contracting radial stretch.

    Three independent readings of the exponent must agree: the hypothesis
    integral grows like ``omega K^{n-1} log(1/eps)`` with the closed-form
    constant, the sampled displacement fits ``|x|^alpha`` exactly, and the
    sphere-average decay bound predicts the same exponent.
    """
    if map_.kind != RADIAL_STRETCH or map_.alpha >= 1.0:
        raise DistortionError("calibration needs a radial stretch with alpha < 1")
    n = n or map_.dimension
    alpha = map_.alpha
    K = 1.0 / alpha
    omega = sphere_area(n)
    if eps_grid is None:
        eps_grid = [10.0**-j for j in range(1, 6)]

    # hypothesis integral of K^{n-1} |x|^{-n} over eps < |x| < 1
    logs = np.log(1.0 / np.asarray(eps_grid))
    integrals = []
    for eps in eps_grid:
        edges = np.geomspace(eps, 1.0, 129)
        vals = integrate_panels(
            lambda r: K ** (n - 1) * omega * np.asarray(r, dtype=float) ** (-1.0),
            edges, order=8,
        )
        integrals.append(float(np.sum(vals)))
    integrals = np.asarray(integrals)
    xm = logs - logs.mean()
    c_fit = float(np.dot(xm, integrals - integrals.mean()) / np.dot(xm, xm))
    c_expected = omega * K ** (n - 1)

    # sampled Holder exponent
    radii = np.geomspace(1e-4, 0.9, 32)
    pts = np.zeros((len(radii), map_.dimension))
    pts[:, 0] = radii
    images = np.linalg.norm(map_(pts), axis=1)
    lx = np.log(radii)
    beta_fit = float(np.dot(lx - lx.mean(), np.log(images) - np.log(images).mean())
                     / np.dot(lx - lx.mean(), lx - lx.mean()))

    # exponent predicted by the sphere-average decay bound
    beta_bound = 1.0 / (K ** (n - 1)) ** (1.0 / (n - 1))

    worst = max(abs(c_fit - c_expected) / c_expected,
                abs(beta_fit - alpha), abs(beta_bound - alpha))
    return VerificationReport.from_sides(
        "holder_calibration",
        "hypothesis constant, sampled exponent and bound exponent all match alpha",
        lhs=worst, rhs=0.0, margin=1e-6, relation="<=",
        details={
            "alpha": alpha,
            "fitted_constant": c_fit,
            "expected_constant": c_expected,
            "fitted_exponent": beta_fit,
            "bound_exponent": beta_bound,
        },
    )


def fmo_bound(gap: ChordalGap, eps0: float, beta: float, x, x0=None,
              constants: ConstantsConfig = DEFAULT_CONSTANTS) -> float:
    """Log-ratio displacement bound with a supplied exponent.

    The exponent depends on the majorant in a way the theory does not make
    explicit, so it is an input here; with beta = 1 this reduces to the
    logarithmic-singularity bound.
    """
    if beta <= 0:
        raise DistortionError("need beta > 0")
    if not (0 < eps0 < 1):
        raise DistortionError("need 0 < eps0 < 1")
    x = np.asarray(x, dtype=float)
    x0 = np.zeros_like(x) if x0 is None else np.asarray(x0, dtype=float)
    dist = float(np.linalg.norm(x - x0))
    if not (0 < dist < 1):
        raise DistortionError("need 0 < |x - x0| < 1 for the log ratio")
    ratio = math.log(1.0 / eps0) / math.log(1.0 / dist)
    return constants.alpha_n / gap.delta * ratio**beta


# ---------------------------------------------------------------------------
# chordal metric
# ---------------------------------------------------------------------------

def chordal_distance(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.linalg.norm(x - y)
                 / math.sqrt(1.0 + float(np.dot(x, x)))
                 / math.sqrt(1.0 + float(np.dot(y, y))))


def chordal_to_infinity(x) -> float:
    x = np.asarray(x, dtype=float)
    return 1.0 / math.sqrt(1.0 + float(np.dot(x, x)))
