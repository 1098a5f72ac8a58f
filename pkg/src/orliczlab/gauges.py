"""Monotone gauge functions and their generalized inverses.

A gauge is a non-decreasing function ``phi: [0, inf) -> [0, inf]``, usually
with ``phi(0) = 0`` and often convex.  Every convergence test in this package
is a statement about some gauge, so the representation keeps two evaluation
paths:

* ``fn``     -- vectorized direct evaluation,
* ``log_fn`` -- optional evaluation of ``ln phi(t)`` from ``ln t``, used by
  the deep-truncation machinery once ``t`` or ``phi(t)`` leaves double range.

Values above :data:`OVERFLOW_THRESHOLD` saturate to ``+inf``; the generalized
inverse treats saturated points as already past the target level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "GaugeError",
    "OrliczFunction",
    "GeneralizedInverse",
    "LogGauge",
    "eval_inverse",
    "eval_inverse_many",
    "eval_inverse_log",
    "clamp_below_one",
    "shift_normalize",
    "power_compose",
    "parse_gauge",
]

OVERFLOW_THRESHOLD = 1e300

# grid used for construction-time sanity checks
_CHECK_GRID = np.concatenate(([0.0], np.geomspace(1e-9, 1e9, 121)))


class GaugeError(ValueError):
    """A gauge violates its contract (non-monotone, wrong zero, bad spec)."""


def _saturate(values):
    values = np.asarray(values, dtype=float)
    with np.errstate(invalid="ignore"):
        out = np.where(values > OVERFLOW_THRESHOLD, np.inf, values)
    return out


@dataclass(frozen=True)
class OrliczFunction:
    """A non-decreasing gauge ``t -> phi(t)`` on ``[0, inf)``.

    ``fn`` must accept numpy arrays.  ``log_fn``, when provided, maps
    ``ln t -> ln phi(t)`` and must stay finite wherever ``phi(t)`` is a
    positive real (it may return ``-inf`` where ``phi`` vanishes and
    ``+inf`` where ``phi`` saturates).
    """

    fn: Callable
    description: str = ""
    convex: bool = False
    zero_at_zero: bool = True
    log_fn: Optional[Callable] = None
    check: bool = True

    def __post_init__(self):
        if self.check:
            self._validate()

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            v = _saturate(self.fn(t_arr))
        if np.ndim(t) == 0:
            return float(v)
        return v

    def log_eval(self, log_t):
        """ln phi(t) from ln t, via ``log_fn`` when available."""
        lt = np.asarray(log_t, dtype=float)
        if self.log_fn is not None:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                v = np.asarray(self.log_fn(lt), dtype=float)
        else:
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                raw = _saturate(self.fn(np.exp(lt)))
                v = np.where(raw > 0, np.log(raw), -np.inf)
        if np.ndim(log_t) == 0:
            return float(v)
        return v

    def _validate(self):
        vals = self(_CHECK_GRID)
        finite = np.isfinite(vals)
        if np.any(np.isnan(vals)):
            raise GaugeError(f"gauge {self.description!r} produced NaN")
        if self.zero_at_zero and abs(vals[0]) > 1e-300:
            raise GaugeError(
                f"gauge {self.description!r} must vanish at 0, got {vals[0]!r}"
            )
        both = finite[:-1] & finite[1:]
        with np.errstate(invalid="ignore"):
            d = vals[1:] - vals[:-1]
        scale = 1.0 + np.abs(vals[:-1])
        if np.any(d[both] < -1e-12 * scale[both]):
            raise GaugeError(f"gauge {self.description!r} is not non-decreasing")
        if np.any(finite[:-1] & ~finite[1:] & (vals[:-1] > OVERFLOW_THRESHOLD)):
            raise GaugeError(f"gauge {self.description!r} decreases after overflow")
        if self.convex:
            self._spot_check_convexity()

    def _spot_check_convexity(self):
        ts = np.geomspace(1e-6, 1e6, 25)
        t1, t2 = np.meshgrid(ts, ts)
        v1, v2 = self(t1), self(t2)
        for lam in (0.25, 0.5, 0.75):
            mid = self(lam * t1 + (1 - lam) * t2)
            rhs = lam * v1 + (1 - lam) * v2
            ok = np.isfinite(mid) & np.isfinite(rhs)
            # the absolute floor absorbs cancellation noise in gauges built
            # by subtraction (shifted anchors), which dwarfs 1e-12 relative
            # when the values themselves are tiny
            slack = 1e-12 * np.abs(rhs) + 1e-13 * (np.abs(v1) + np.abs(v2) + 1.0)
            if np.any(mid[ok] > rhs[ok] + slack[ok]):
                raise GaugeError(
                    f"gauge {self.description!r} flagged convex but fails "
                    f"a midpoint check at lambda={lam}"
                )

    def inverse(self) -> "GeneralizedInverse":
        return GeneralizedInverse(self)


@dataclass(frozen=True)
class GeneralizedInverse:
    """Generalized inverse ``tau -> inf{t : phi(t) >= tau}`` of a gauge."""

    source: OrliczFunction

    def __call__(self, tau):
        if np.ndim(tau) == 0:
            return eval_inverse(self.source, float(tau))
        return eval_inverse_many(self.source, np.asarray(tau, dtype=float))


def eval_inverse(phi: OrliczFunction, tau: float, tol: float = 1e-12) -> float:
    """inf{t : phi(t) >= tau}; +inf when the level is never reached."""
    return float(eval_inverse_many(phi, np.array([tau]), tol=tol)[0])


def eval_inverse_many(phi: OrliczFunction, taus: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Vectorized generalized inverse by bracket expansion plus bisection."""
    taus = np.asarray(taus, dtype=float)
    out = np.full(taus.shape, np.nan)
    at_zero = phi(np.zeros(1))[0] if taus.size else 0.0

    done_zero = taus <= at_zero
    out[done_zero] = 0.0
    active = ~done_zero
    if not np.any(active):
        return out

    lo = np.zeros(taus.shape)
    hi = np.ones(taus.shape)
    # geometric expansion of the upper bracket
    for _ in range(220):
        vals = phi(hi)
        need = active & (vals < taus)
        if not np.any(need):
            break
        lo = np.where(need, hi, lo)
        hi = np.where(need, hi * 8.0, hi)
        if np.all(hi[need] > 1e280):
            break
    vals = phi(hi)
    never = active & (vals < taus)
    out[never] = np.inf
    active = active & ~never

    for _ in range(200):
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        ge = phi(mid) >= taus
        hi = np.where(active & ge, mid, hi)
        lo = np.where(active & ~ge, mid, lo)
        width = hi - lo
        settled = active & (width <= tol + 4e-16 * hi)
        out[settled] = hi[settled]
        active = active & ~settled
    out[active] = hi[active]
    return out


def eval_inverse_log(phi: OrliczFunction, log_taus: np.ndarray,
                     w_lo: float = -745.0, w_hi: float = 1e7,
                     rtol: float = 1e-13) -> np.ndarray:
    """``ln`` of the generalized inverse: returns ``w`` with ``e^w = phi^{-1}(e^{log_tau})``.

    Works entirely in log coordinates so it survives levels far outside
    double range.  Requires monotone ``log_eval``; points whose level is
    never reached come back as ``+inf``.
    """
    lt = np.asarray(log_taus, dtype=float)
    out = np.full(lt.shape, np.nan)
    lo = np.full(lt.shape, w_lo)
    hi = np.full(lt.shape, w_hi)

    top = phi.log_eval(np.full(lt.shape, w_hi))
    never = top < lt
    out[never] = np.inf
    bottom = phi.log_eval(np.full(lt.shape, w_lo))
    at_floor = ~never & (bottom >= lt)
    out[at_floor] = w_lo
    active = ~never & ~at_floor

    for _ in range(120):
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        ge = phi.log_eval(mid) >= lt
        hi = np.where(active & ge, mid, hi)
        lo = np.where(active & ~ge, mid, lo)
        settled = active & (hi - lo <= rtol * np.maximum(1.0, np.abs(hi)))
        out[settled] = hi[settled]
        active = active & ~settled
    out[active] = hi[active]
    return out


@dataclass(frozen=True)
class LogGauge:
    """``t -> ln phi(t)`` with the conventions used by the growth conditions.

    The log is ``-inf`` wherever the gauge vanishes, and the derivative is
    taken to be 0 there.
    """

    source: OrliczFunction

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            lt = np.log(np.maximum(t_arr, 0.0))
            out = np.asarray(self.source.log_eval(lt), dtype=float)
        if np.ndim(t) == 0:
            return float(out)
        return out

    def deriv(self, t, rel_step: float = 1e-6):
        """Central-difference derivative, 0 on the vanishing set."""
        t_arr = np.asarray(t, dtype=float)
        h = rel_step * np.maximum(t_arr, 1e-30)
        up = self(t_arr + h)
        dn = self(t_arr - h)
        vanished = ~np.isfinite(up) | ~np.isfinite(dn)
        with np.errstate(invalid="ignore"):
            d = (up - dn) / (2 * h)
        out = np.where(vanished, 0.0, d)
        if np.ndim(t) == 0:
            return float(out)
        return out

    def inverse(self, eta):
        """inf{t : ln phi(t) >= eta}."""
        eta_arr = np.atleast_1d(np.asarray(eta, dtype=float))
        if self.source.log_fn is not None:
            w = eval_inverse_log(self.source, eta_arr)
            with np.errstate(over="ignore"):
                out = np.where(np.isinf(w), np.inf, np.exp(np.minimum(w, 709.0)))
        else:
            with np.errstate(over="ignore"):
                out = eval_inverse_many(self.source, np.exp(np.minimum(eta_arr, 709.0)))
        if np.ndim(eta) == 0:
            return float(out[0])
        return out


# ---------------------------------------------------------------------------
# constructions on gauges
# ---------------------------------------------------------------------------

def clamp_below_one(phi: OrliczFunction) -> OrliczFunction:
    """Freeze the gauge at its value at 1 on ``(0, 1)``, keep 0 at 0.

    The result agrees with ``phi`` on ``[1, inf)``; its small-argument
    behavior no longer matters for any of the growth integrals.
    """
    v1 = float(phi(1.0))
    base_fn = phi.fn

    def fn(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            tail = np.asarray(base_fn(np.maximum(t, 1.0)), dtype=float)
        return np.where(t <= 0.0, 0.0, np.where(t < 1.0, v1, tail))

    log_fn = None
    if phi.log_fn is not None:
        base_log = phi.log_fn
        lv1 = math.log(v1) if v1 > 0 else -math.inf

        def log_fn(lt):
            lt = np.asarray(lt, dtype=float)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                tail = np.asarray(base_log(np.maximum(lt, 0.0)), dtype=float)
            return np.where(lt < 0.0, lv1, tail)

    return OrliczFunction(
        fn,
        description=f"clamp1({phi.description})",
        convex=False,
        zero_at_zero=True,
        log_fn=log_fn,
    )


def shift_normalize(phi: OrliczFunction, c: float) -> OrliczFunction:
    """``t -> phi(t + c) - phi(c)``: re-anchor the gauge so it vanishes at 0.

    Monotone always; convexity is inherited from ``phi``.
    """
    if c < 0:
        raise GaugeError("shift must be nonnegative")
    base_fn = phi.fn
    vc = float(phi(c))

    def fn(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            v = np.asarray(base_fn(t + c), dtype=float)
        return np.where(t <= 0.0, 0.0, v - vc)

    log_fn = None
    if phi.log_fn is not None:
        base_log = phi.log_fn

        def log_fn(lt):
            lt = np.asarray(lt, dtype=float)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                # ln(t + c) without leaving log space for huge t
                lt_shift = np.where(
                    lt < 600.0,
                    np.log(np.exp(np.minimum(lt, 600.0)) + c),
                    lt + np.log1p(c * np.exp(-np.maximum(lt, 0.0))),
                )
                lv = np.asarray(base_log(lt_shift), dtype=float)
                if vc <= 0:
                    return lv
                # subtract phi(c): ln(e^lv - vc) = lv + log1p(-vc e^{-lv})
                ratio = np.where(lv > 700.0, 0.0, vc * np.exp(-np.minimum(lv, 700.0)))
                out = np.where(
                    ratio < 1.0,
                    lv + np.log1p(-np.minimum(ratio, 1.0 - 1e-16)),
                    -np.inf,
                )
            return out

    return OrliczFunction(
        fn,
        description=f"shift({phi.description},{c:g})",
        convex=phi.convex,
        zero_at_zero=True,
        log_fn=log_fn,
    )


def power_compose(phi: OrliczFunction, p: float):
    """Return the power pre-composition ``t -> phi(t^p)`` and its log version."""
    if p <= 0:
        raise GaugeError("power exponent must be positive")
    base_fn = phi.fn

    def fn(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return np.asarray(base_fn(np.power(t, p)), dtype=float)

    log_fn = None
    if phi.log_fn is not None:
        base_log = phi.log_fn

        def log_fn(lt):
            return base_log(p * np.asarray(lt, dtype=float))

    composed = OrliczFunction(
        fn,
        description=f"powcomp({phi.description},p={p:g})",
        convex=phi.convex and p >= 1,
        zero_at_zero=phi.zero_at_zero,
        log_fn=log_fn,
        check=False,
    )
    return composed, LogGauge(composed)


# ---------------------------------------------------------------------------
# parametric families and spec strings
# ---------------------------------------------------------------------------

def _parse_params(body: str) -> dict:
    params = {}
    if body:
        for piece in body.split(","):
            if "=" not in piece:
                raise GaugeError(f"malformed gauge parameter {piece!r}")
            key, _, raw = piece.partition("=")
            params[key.strip()] = raw.strip()
    return params


def power_gauge(p: float) -> OrliczFunction:
    if p <= 0:
        raise GaugeError("power gauge needs p > 0")

    def fn(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", divide="ignore"):
            return np.power(t, p)

    return OrliczFunction(
        fn,
        description=f"pow:p={p:g}",
        convex=p >= 1,
        log_fn=lambda lt: p * np.asarray(lt, dtype=float),
    )


def _log_log_e_plus_t(lt):
    """ln(ln(e + t)) from ln t, stable for huge t."""
    lt = np.asarray(lt, dtype=float)
    with np.errstate(over="ignore"):
        inner = np.where(
            lt > 30.0,
            lt + np.log1p(np.exp(1.0 - np.maximum(lt, 30.0))),
            np.log(np.e + np.exp(np.minimum(lt, 30.0))),
        )
    return np.log(inner)


def powerlog_gauge(p: float, s: float) -> OrliczFunction:
    """``t^p * ln(e + t)^s``; monotone for p > 0, s >= 0."""
    if p <= 0 or s < 0:
        raise GaugeError("power-log gauge needs p > 0 and s >= 0")

    def fn(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", divide="ignore"):
            return np.power(t, p) * np.log(np.e + t) ** s

    def log_fn(lt):
        lt = np.asarray(lt, dtype=float)
        return p * lt + s * _log_log_e_plus_t(lt)

    return OrliczFunction(
        fn,
        description=f"powlog:p={p:g},s={s:g}",
        convex=p >= 1,
        log_fn=log_fn,
    )


def exp_gauge(a: float) -> OrliczFunction:
    """``exp(t^a) - 1``."""
    if a <= 0:
        raise GaugeError("exp gauge needs a > 0")

    def fn(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            return np.expm1(np.power(t, a))

    def log_fn(lt):
        lt = np.asarray(lt, dtype=float)
        with np.errstate(over="ignore"):
            ta = np.exp(np.minimum(a * lt, 710.0))
            big = ta > 40.0
            out = np.where(
                big,
                ta + np.log1p(-np.exp(-np.minimum(ta, 700.0))),
                np.log(np.maximum(np.expm1(np.minimum(ta, 40.0)), 1e-300)),
            )
        return out

    return OrliczFunction(fn, description=f"exp:a={a:g}", convex=a >= 1, log_fn=log_fn)


def table_gauge(path: str) -> OrliczFunction:
    """Gauge from a two-column CSV ``t,value`` with strictly increasing t.

    Linear interpolation between nodes (monotone for monotone data), constant
    continuation beyond the last node.
    """
    data = np.loadtxt(path, delimiter=",", dtype=float, comments="#")
    if data.ndim != 2 or data.shape[1] != 2:
        raise GaugeError(f"table {path!r} must have two columns t,value")
    ts, vs = data[:, 0], data[:, 1]
    if np.any(np.diff(ts) <= 0):
        raise GaugeError(f"table {path!r} must have strictly increasing t")
    if np.any(np.diff(vs) < 0):
        raise GaugeError(f"table {path!r} values must be non-decreasing")
    zero_ok = ts[0] <= 0 and abs(vs[0]) < 1e-300

    def fn(t):
        return np.interp(np.asarray(t, dtype=float), ts, vs)

    return OrliczFunction(
        fn,
        description=f"table:{path}",
        convex=False,
        zero_at_zero=zero_ok,
    )


def parse_gauge(spec: str) -> OrliczFunction:
    """Build a gauge from a spec string.

    Accepted forms: ``pow:p=3``, ``powlog:p=2,s=2``, ``exp:a=1``,
    ``table:<csv path>``.
    """
    name, _, body = spec.partition(":")
    name = name.strip().lower()
    if name == "table":
        return table_gauge(body.strip())
    params = _parse_params(body)
    try:
        if name == "pow":
            return power_gauge(float(params["p"]))
        if name == "powlog":
            return powerlog_gauge(float(params["p"]), float(params.get("s", "1")))
        if name == "exp":
            return exp_gauge(float(params.get("a", "1")))
    except KeyError as exc:
        raise GaugeError(f"gauge spec {spec!r} is missing parameter {exc}") from None
    raise GaugeError(f"unknown gauge family {name!r} in spec {spec!r}")
