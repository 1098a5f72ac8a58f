"""Radial weights: sphere means and sphere norms of a weight function.

A weight is described either by a radial profile ``q(r)`` (the mean of the
weight over the sphere of radius r around the center) or by a full pointwise
evaluator, in which case sphere means are computed by angular quadrature.
Dimensions 2 and 3 get exact-grade angular rules; higher dimensions accept
only radial profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = ["RadialWeight", "sphere_area", "ball_volume", "parse_weight"]


def sphere_area(n: int, r: float = 1.0) -> float:
    """Surface area of the sphere of radius r in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0) * r ** (n - 1)


def ball_volume(n: int, r: float = 1.0) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0) * r ** n


def _unit_directions(n: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature directions and weights (summing to 1) on the unit sphere."""
    if n == 2:
        theta = (np.arange(count) + 0.5) * (2 * math.pi / count)
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return dirs, np.full(count, 1.0 / count)
    if n == 3:
        m = max(8, int(math.sqrt(count)))
        mu, wmu = np.polynomial.legendre.leggauss(m)
        phi = (np.arange(2 * m) + 0.5) * (math.pi / m)
        st = np.sqrt(1.0 - mu**2)
        dirs = np.stack(
            [
                np.outer(st, np.cos(phi)).ravel(),
                np.outer(st, np.sin(phi)).ravel(),
                np.outer(mu, np.ones_like(phi)).ravel(),
            ],
            axis=1,
        )
        w = np.outer(wmu, np.full(2 * m, 1.0 / (2 * m))).ravel() / 2.0
        return dirs, w
    raise ValueError(f"angular quadrature not available in dimension {n}")


@dataclass(frozen=True)
class RadialWeight:
    """Weight around a center, seen through its sphere means.

    ``profile(r)`` is the mean of the weight over the sphere of radius r.
    ``full_eval`` takes an (m, n) array of points and returns m values; when
    present it is the ground truth and the profile (if any) is a cache of its
    sphere means.
    """

    dimension: int
    profile: Optional[Callable] = None
    full_eval: Optional[Callable] = None
    center: tuple = ()
    description: str = ""
    angular_nodes: int = 256

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be at least 2")
        if self.profile is None and self.full_eval is None:
            raise ValueError("need a radial profile or a full evaluator")
        if not self.center:
            object.__setattr__(self, "center", tuple([0.0] * self.dimension))

    # -- sphere statistics --------------------------------------------------

    def sphere_points(self, r: float):
        dirs, w = _unit_directions(self.dimension, self.angular_nodes)
        pts = np.asarray(self.center) + r * dirs
        return pts, w

    def sphere_mean(self, r) -> np.ndarray:
        """Mean of the weight over the sphere of radius r (vectorized in r)."""
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        if self.profile is not None:
            out = np.asarray(self.profile(r_arr), dtype=float)
        else:
            out = np.array([self._full_sphere_mean(float(ri), 1.0) for ri in r_arr])
        if np.ndim(r) == 0:
            return float(out.reshape(-1)[0])
        return out

    def sphere_mean_pow(self, r: float, power: float) -> float:
        """Mean of weight**power over the sphere of radius r."""
        if self.full_eval is not None:
            return self._full_sphere_mean(r, power)
        # radial weight: constant on spheres
        return float(self.sphere_mean(r)) ** power

    def _full_sphere_mean(self, r: float, power: float) -> float:
        pts, w = self.sphere_points(r)
        vals = np.asarray(self.full_eval(pts), dtype=float)
        return float(np.sum(w * vals**power))

    def lp_sphere_norm(self, r, p: Optional[float] = None) -> float:
        """L_p norm of the weight over the sphere of radius r.

        Default p is dimension - 1, the exponent every sphere-norm criterion
        in this package uses.
        """
        if p is None:
            p = self.dimension - 1
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        area = np.array([sphere_area(self.dimension, ri) for ri in r_arr])
        means = np.array([self.sphere_mean_pow(float(ri), p) for ri in r_arr])
        out = (area * means) ** (1.0 / p)
        if np.ndim(r) == 0:
            return float(out[0])
        return out

    def ball_mean(self, fn, radius: float = 1.0, n_radial: int = 512) -> float:
        """Mean of ``fn(weight)`` over the ball of the given radius."""
        nodes, wts = np.polynomial.legendre.leggauss(n_radial)
        r = 0.5 * radius * (nodes + 1.0)
        wr = 0.5 * radius * wts
        n = self.dimension
        if self.full_eval is not None:
            shell = np.array(
                [self._full_mean_of_fn(float(ri), fn) for ri in r]
            )
        else:
            shell = np.asarray(fn(self.sphere_mean(r)), dtype=float)
        integral = float(np.sum(wr * shell * sphere_area(n) * r ** (n - 1)))
        return integral / ball_volume(n, radius)

    def _full_mean_of_fn(self, r: float, fn) -> float:
        pts, w = self.sphere_points(r)
        vals = np.asarray(fn(np.asarray(self.full_eval(pts), dtype=float)))
        return float(np.sum(w * vals))

    def check_profile_consistency(self, radii, rtol: float = 1e-6) -> float:
        """Largest relative gap between the profile and full-eval sphere means."""
        if self.profile is None or self.full_eval is None:
            return 0.0
        worst = 0.0
        for r in np.atleast_1d(radii):
            a = float(self.profile(np.array([r]))[0])
            b = self._full_sphere_mean(float(r), 1.0)
            worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
        if worst > rtol:
            raise ValueError(
                f"radial profile disagrees with full evaluator: rel gap {worst:.3g}"
            )
        return worst


def parse_weight(spec: str, dimension: int) -> RadialWeight:
    """Weight from a spec string.

    Accepted forms: ``const:c=1``, ``rpow:a=-2`` for ``r**a``,
    ``logrecip:s=1`` for ``ln(1/r)**s``, ``table:<csv path>`` with columns
    r,q.
    """
    name, _, body = spec.partition(":")
    name = name.strip().lower()
    params = {}
    if name != "table" and body:
        for piece in body.split(","):
            key, _, raw = piece.partition("=")
            params[key.strip()] = float(raw)
    if name == "const":
        c = params.get("c", 1.0)
        return RadialWeight(dimension, profile=lambda r: np.full_like(np.asarray(r, float), c),
                            description=spec)
    if name == "rpow":
        a = params.get("a", -1.0)
        return RadialWeight(dimension, profile=lambda r: np.asarray(r, float) ** a,
                            description=spec)
    if name == "logrecip":
        s = params.get("s", 1.0)

        def prof(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(divide="ignore"):
                return np.where(r < 1.0, np.log(1.0 / np.maximum(r, 1e-320)) ** s, 0.0)

        return RadialWeight(dimension, profile=prof, description=spec)
    if name == "table":
        data = np.loadtxt(body.strip(), delimiter=",", dtype=float, comments="#")
        rs, qs = data[:, 0], data[:, 1]
        if np.any(np.diff(rs) <= 0):
            raise ValueError(f"weight table {body!r} needs strictly increasing r")
        return RadialWeight(
            dimension,
            profile=lambda r: np.interp(np.asarray(r, float), rs, qs),
            description=spec,
        )
    raise ValueError(f"unknown weight spec {spec!r}")
