"""Shared quadrature and tail-classification machinery.

Improper integrals are classified numerically: the axis is cut into panels of
equal logarithmic width ("decades"), each panel is integrated with a fixed
Gauss-Legendre rule, and the sequence of panel contributions is fed to a
two-stage fit.  Stage one fits a geometric rate across panels, which settles
every integrand with a genuine power tail; the borderline band (local power
within the configured margin of the critical one) goes to a second fit of the
logarithmic correction.  Anything still ambiguous is reported as
INCONCLUSIVE, never forced to a verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CONVERGENT",
    "DIVERGENT",
    "INCONCLUSIVE",
    "panel_points",
    "integrate_panels",
    "cumulative_panels",
    "TailDecision",
    "classify_increments",
]

CONVERGENT = "CONVERGENT"
DIVERGENT = "DIVERGENT"
INCONCLUSIVE = "INCONCLUSIVE"

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(order: int):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def panel_points(edges: np.ndarray, order: int = 16):
    """Gauss-Legendre nodes and weights for every consecutive panel.

    Returns arrays of shape (n_panels, order).
    """
    edges = np.asarray(edges, dtype=float)
    nodes, weights = _gl(order)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * nodes[None, :]
    w = half * weights[None, :]
    return x, w


def integrate_panels(f, edges: np.ndarray, order: int = 16) -> np.ndarray:
    """Per-panel integrals of a vectorized integrand."""
    x, w = panel_points(edges, order)
    vals = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    return np.sum(vals * w, axis=1)


def cumulative_panels(f, edges: np.ndarray, order: int = 16) -> np.ndarray:
    """Cumulative integral at every edge, starting from 0 at ``edges[0]``."""
    contrib = integrate_panels(f, edges, order)
    out = np.empty(len(edges))
    out[0] = 0.0
    np.cumsum(contrib, out=out[1:])
    return out


@dataclass
class TailDecision:
    classification: str
    tail_exponent: float
    note: str


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x - x.mean(), y - y.mean()
    denom = float(np.dot(xm, xm))
    if denom == 0.0:
        return 0.0
    return float(np.dot(xm, ym) / denom)


def classify_increments(increments: np.ndarray, decade_index: np.ndarray,
                        margin: float = 0.05, window: int = 6,
                        zero_floor: float = 1e-290) -> TailDecision:
    """Classify sum(increments) as finite / infinite from its tail behavior.

    ``increments[j]`` must be the contribution of the j-th equal-log-width
    panel and ``decade_index[j]`` its position (log10 of the panel location,
    used by the second-stage fit of logarithmic corrections).
    """
    inc = np.asarray(increments, dtype=float)
    idx = np.asarray(decade_index, dtype=float)
    if inc.size == 0:
        return TailDecision(CONVERGENT, -np.inf, "empty tail")
    if not np.all(np.isfinite(inc)):
        return TailDecision(DIVERGENT, np.inf, "non-finite panel contribution")

    scale = np.max(np.abs(inc))
    if scale <= zero_floor:
        return TailDecision(CONVERGENT, -np.inf, "vanishing tail")
    # trailing underflow zeros can only support convergence; trim them
    floor = zero_floor * max(scale, 1.0)
    last = inc.size
    while last > 0 and abs(inc[last - 1]) <= floor:
        last -= 1
    if last == 0:
        return TailDecision(CONVERGENT, -np.inf, "vanishing tail")
    if last < inc.size:
        head = classify_increments(inc[:last], idx[:last], margin, window, zero_floor)
        if head.classification == DIVERGENT:
            return TailDecision(INCONCLUSIVE, head.tail_exponent,
                                "growth followed by underflow; inconsistent tail")
        return TailDecision(head.classification, head.tail_exponent,
                            head.note + "; trailing underflow trimmed")

    w = min(window, inc.size)
    tail = inc[-w:]
    tail_idx = idx[-w:]
    if np.max(np.abs(tail)) <= floor:
        return TailDecision(CONVERGENT, -np.inf, "vanishing tail")
    if np.any(tail <= 0):
        # signed or dying tail: bounded contribution
        if np.max(np.abs(tail)) <= 1e-12 * scale:
            return TailDecision(CONVERGENT, -np.inf, "tail negligible against head")
        return TailDecision(INCONCLUSIVE, np.nan, "sign-changing tail")

    y = np.log(tail)
    rate = _fit_slope(np.arange(w, dtype=float), y)
    # rate per panel of width ln(10): a pure power t^e gives rate=(e+1)ln10
    exponent = rate / math.log(10.0) - 1.0
    if rate <= -margin * math.log(10.0):
        return TailDecision(CONVERGENT, exponent, f"geometric decay, rate {rate:.3g}")
    if rate >= margin * math.log(10.0):
        return TailDecision(DIVERGENT, exponent, f"geometric growth, rate {rate:.3g}")

    # borderline power: fit the logarithmic correction D_j ~ j^b
    pos = tail_idx > 0
    if np.count_nonzero(pos) < 3:
        return TailDecision(INCONCLUSIVE, exponent, "critical power, no room for log fit")
    b = _fit_slope(np.log(tail_idx[pos]), y[pos])
    if b >= -1.0 + margin:
        return TailDecision(DIVERGENT, exponent, f"critical power, log-order {b:.3g}")
    if b <= -1.0 - margin:
        return TailDecision(CONVERGENT, exponent, f"critical power, log-order {b:.3g}")
    return TailDecision(INCONCLUSIVE, exponent, f"log-order {b:.3g} within margin")
