"""Convergence classification of the growth-integral conditions.

Each operation decides whether one of the package's improper integrals is
finite, using truncated quadrature plus the tail classifier from
:mod:`orliczlab.quadrature`.  A verdict is always accompanied by the partial
value at the cutoff, the fitted local tail exponent and a short evidence
string; a classifier that cannot separate the tail from the critical decay
says INCONCLUSIVE instead of guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gauges import OrliczFunction, eval_inverse, eval_inverse_log, power_compose
from .quadrature import (
    CONVERGENT,
    DIVERGENT,
    TailDecision,
    classify_increments,
    integrate_panels,
)
from .reports import VerificationReport
from .weights import RadialWeight, sphere_area

__all__ = [
    "ConvergenceVerdict",
    "ConditionError",
    "calderon_condition",
    "a_star",
    "condition_equivalence_report",
    "EQUIVALENCE_FORMS",
    "inverse_tail_condition",
    "lehto_integral",
    "lemma61_bound_check",
    "boundary_criterion",
]

DEFAULT_CUTOFF = 1e12
DEFAULT_MARGIN = 0.05
# log-radius window used for integrals over (0, 1): r from exp(-U_CAP) to exp(-U_FLOOR)
U_FLOOR = 1e-6
U_CAP = 600.0


class ConditionError(ValueError):
    """Precondition of a convergence test is violated."""


@dataclass
class ConvergenceVerdict:
    classification: str
    partial_value: float
    tail_exponent_estimate: float
    cutoff: float
    evidence: str
    condition: str = ""

    @property
    def convergent(self) -> bool:
        return self.classification == CONVERGENT

    @property
    def divergent(self) -> bool:
        return self.classification == DIVERGENT

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "classification": self.classification,
            "partial_value": self.partial_value,
            "tail_exponent": self.tail_exponent_estimate,
            "cutoff": self.cutoff,
            "evidence": self.evidence,
        }


def _decade_classify(f, lo: float, hi: float, margin: float,
                     ppd: int = 4, order: int = 16) -> tuple[TailDecision, float, np.ndarray]:
    """Integrate a nonnegative-tailed integrand over geometric decades.

    Returns the tail decision, the partial value, and per-decade increments.
    """
    n_dec = max(3, int(math.ceil(math.log10(hi / lo))))
    edges = lo * 10.0 ** (np.arange(n_dec * ppd + 1) / ppd)
    panel = integrate_panels(f, edges, order=order)
    increments = panel.reshape(n_dec, ppd).sum(axis=1)
    mids = np.log10(edges[:-1].reshape(n_dec, ppd)[:, 0]) + 0.5
    decision = classify_increments(increments, mids, margin=margin)
    return decision, float(np.sum(increments)), increments


def _verdict(name: str, decision: TailDecision, partial: float, cutoff: float,
             extra: str = "") -> ConvergenceVerdict:
    note = decision.note if not extra else f"{decision.note}; {extra}"
    return ConvergenceVerdict(
        classification=decision.classification,
        partial_value=partial,
        tail_exponent_estimate=decision.tail_exponent,
        cutoff=cutoff,
        evidence=note,
        condition=name,
    )


# ---------------------------------------------------------------------------
# gauge growth conditions
# ---------------------------------------------------------------------------

def calderon_condition(phi: OrliczFunction, k: int,
                       cutoff: float = DEFAULT_CUTOFF,
                       margin: float = DEFAULT_MARGIN) -> ConvergenceVerdict:
    """Classify the growth integral of ``[t / phi(t)]^(1/(k-1))`` from 1.

    Finiteness is exactly the regime where diameter bounds and a.e.
    differentiability hold; the borderline power gauge ``t^k`` diverges.
    """
    if k < 2:
        raise ConditionError("need k >= 2")
    if phi(1.0) <= 0.0:
        raise ConditionError("gauge vanishes at 1: integrand undefined on [1, inf)")

    inv = 1.0 / (k - 1)

    def f(t):
        t = np.asarray(t, dtype=float)
        lt = np.log(t)
        with np.errstate(over="ignore", invalid="ignore"):
            lg = (lt - phi.log_eval(lt)) * inv
            return np.exp(np.minimum(lg, 700.0))

    decision, partial, _ = _decade_classify(f, 1.0, cutoff, margin)
    return _verdict("calderon", decision, partial, cutoff)


def a_star(phi: OrliczFunction, k: int, cutoff: float = DEFAULT_CUTOFF) -> float:
    """Small-argument-corrected constant: partial integral plus ``phi(1)^{-1/(k-1)}``."""
    verdict = calderon_condition(phi, k, cutoff=cutoff)
    if not verdict.convergent:
        raise ConditionError(
            f"growth integral is {verdict.classification}; corrected constant undefined"
        )
    v1 = phi(1.0)
    if v1 <= 0:
        raise ConditionError("gauge must be positive at 1")
    return verdict.partial_value + (1.0 / v1) ** (1.0 / (k - 1))


# ---------------------------------------------------------------------------
# the six equivalent forms for a power pre-composition
# ---------------------------------------------------------------------------

EQUIVALENCE_FORMS = (
    "derivative_form",    # integral of H'(t) dt / t
    "stieltjes_form",     # integral of dH(t) / t
    "direct_form",        # integral of H(t) dt / t^2
    "reciprocal_form",    # integral of H(1/t) dt near 0
    "inverse_log_form",   # integral of d(eta) / H^{-1}(eta)
    "inverse_tail_form",  # integral of d(tau) / (tau * inverse(tau))
)


def _stieltjes_form(H, lo: float, hi: float, margin: float) -> ConvergenceVerdict:
    """Riemann-Stieltjes sum of dH/t on geometric partitions, refined 2x."""
    n_dec = max(3, int(math.ceil(math.log10(hi / lo))))

    def rs_increments(ppd):
        edges = lo * 10.0 ** (np.arange(n_dec * ppd + 1) / ppd)
        hv = np.asarray(H(edges), dtype=float)
        mid = np.sqrt(edges[:-1] * edges[1:])
        with np.errstate(invalid="ignore"):
            steps = (hv[1:] - hv[:-1]) / mid
        return np.where(np.isfinite(steps), steps, 0.0).reshape(n_dec, ppd).sum(axis=1)

    ppd = 8
    inc = rs_increments(ppd)
    for _ in range(6):
        finer = rs_increments(2 * ppd)
        if abs(finer.sum() - inc.sum()) <= 1e-6 * max(1.0, abs(finer.sum())):
            inc = finer
            break
        ppd *= 2
        inc = finer
    mids = np.log10(lo) + np.arange(n_dec) + 0.5
    decision = classify_increments(inc, mids, margin=margin)
    return _verdict("stieltjes_form", decision, float(inc.sum()), hi,
                    extra=f"partition {ppd * n_dec} points/refinement")


def condition_equivalence_report(Phi: OrliczFunction, p: float, delta: float,
                                 cutoff: float = DEFAULT_CUTOFF,
                                 margin: float = DEFAULT_MARGIN) -> dict:
    """Classify all six equivalent growth conditions for ``t -> Phi(t^p)``.

    For convex ``Phi`` the six verdicts must agree; the report leaves the
    comparison to the caller and only computes each form independently.
    """
    if p <= 0:
        raise ConditionError("need p > 0")
    Phi_p, H = power_compose(Phi, p)
    if Phi_p(delta) <= 0.0:
        raise ConditionError(
            "delta must exceed the last vanishing point of the composed gauge"
        )
    if math.isinf(float(H(cutoff))):
        # the gauge reaches +inf before the cutoff; every form is completed by +inf
        verd = ConvergenceVerdict(DIVERGENT, math.inf, math.inf, cutoff,
                                  "gauge reaches +inf inside the window")
        return {name: ConvergenceVerdict(DIVERGENT, math.inf, math.inf, cutoff,
                                         verd.evidence, condition=name)
                for name in EQUIVALENCE_FORMS}

    # start the tail past the region where H <= 0 so log-space increments are signed-free
    t_one = eval_inverse(Phi_p, 1.0)
    start = max(delta, 2.0 * t_one if math.isfinite(t_one) else delta, 10.0)
    out: dict[str, ConvergenceVerdict] = {}

    def h_log(lt):
        return Phi_p.log_eval(lt)

    def h_log_deriv(lt, step=1e-5):
        up = h_log(lt + step)
        dn = h_log(lt - step)
        bad = ~np.isfinite(up) | ~np.isfinite(dn)
        with np.errstate(invalid="ignore"):
            d = (up - dn) / (2 * step)
        return np.where(bad, 0.0, d)

    # derivative form: integrand H'(t)/t = (dH/dlnt) / t^2
    def f_deriv(t):
        t = np.asarray(t, dtype=float)
        return h_log_deriv(np.log(t)) / t**2

    dec, partial, _ = _decade_classify(f_deriv, start, cutoff, margin)
    head = _head_integral(lambda t: f_deriv(t), delta, start)
    out["derivative_form"] = _verdict("derivative_form", dec, partial + head, cutoff)

    # Stieltjes form
    out["stieltjes_form"] = _stieltjes_form(lambda t: H(t), start, cutoff, margin)

    # direct form: H(t)/t^2
    def f_direct(t):
        t = np.asarray(t, dtype=float)
        hv = np.asarray(H(t), dtype=float)
        return np.where(np.isfinite(hv), hv, 0.0) / t**2

    dec, partial, _ = _decade_classify(f_direct, start, cutoff, margin)
    head = _head_integral(f_direct, delta, start)
    out["direct_form"] = _verdict("direct_form", dec, partial + head, cutoff)

    # reciprocal form near zero: integral of H(1/t) on (0, 1/start], with
    # t = 1/(start * x) so the singular end becomes an upward tail in x
    def f_recip(x):
        x = np.asarray(x, dtype=float)
        hv = np.asarray(H(start * x), dtype=float)
        return np.where(np.isfinite(hv), hv, 0.0) / (start * x**2)

    dec, partial, _ = _decade_classify(f_recip, 1.0, cutoff, margin)
    out["reciprocal_form"] = _verdict(
        "reciprocal_form", dec, partial, cutoff,
        extra="computed through the substitution t -> 1/x",
    )

    # inverse-log form
    t_ref = max(start, 1.0)
    eta0 = float(h_log(np.log(2.0 * t_ref))) + 1.0
    eta0 = max(eta0, 1.0)

    def f_invlog(eta):
        eta = np.asarray(eta, dtype=float)
        w = eval_inverse_log(Phi_p, eta)
        with np.errstate(over="ignore"):
            return np.where(np.isinf(w), 0.0, np.exp(-w))

    dec, partial, _ = _decade_classify(f_invlog, eta0, eta0 * 1e12, margin)
    out["inverse_log_form"] = _verdict(
        "inverse_log_form", dec, partial, eta0 * 1e12, extra=f"from level {eta0:.3g}"
    )

    # inverse tail form, entirely in log(tau)
    y0 = eta0

    def f_invtail(y):
        # d(tau)/(tau * inv(tau)) after tau = e^y
        y = np.asarray(y, dtype=float)
        w = eval_inverse_log(Phi_p, y)
        with np.errstate(over="ignore"):
            return np.where(np.isinf(w), 0.0, np.exp(-w))

    n_dec = 12
    edges = y0 + math.log(10.0) * np.arange(0.0, n_dec + 0.25, 0.25)
    panel = integrate_panels(f_invtail, edges, order=16)
    inc = panel.reshape(n_dec, 4).sum(axis=1)
    mids = (y0 + math.log(10.0) * (np.arange(n_dec) + 0.5)) / math.log(10.0)
    dec = classify_increments(inc, mids, margin=margin)
    out["inverse_tail_form"] = _verdict(
        "inverse_tail_form", dec, float(inc.sum()), math.exp(min(y0, 700.0)) * 1e12,
        extra=f"from level ln tau = {y0:.3g}",
    )
    return out


def _head_integral(f, a: float, b: float, order: int = 32) -> float:
    if b <= a:
        return 0.0
    edges = np.geomspace(a, b, 9)
    return float(np.sum(integrate_panels(f, edges, order=order)))


def inverse_tail_condition(Phi: OrliczFunction, p: float, delta0: float,
                           cutoff: float = DEFAULT_CUTOFF,
                           margin: float = DEFAULT_MARGIN) -> ConvergenceVerdict:
    """Classify the inverse-gauge tail ``d(tau) / (tau * inverse(tau)^(1/p))``."""
    if p <= 0:
        raise ConditionError("need p > 0")
    if delta0 <= Phi(0.0):
        raise ConditionError("lower level must exceed the gauge value at 0")

    y0 = math.log(delta0)

    def f(y):
        y = np.asarray(y, dtype=float)
        w = eval_inverse_log(Phi, y)
        with np.errstate(over="ignore"):
            return np.where(np.isinf(w), 0.0, np.exp(-w / p))

    n_dec = max(3, int(round(math.log10(cutoff))))
    edges = y0 + math.log(10.0) * np.arange(0.0, n_dec + 0.25, 0.25)
    panel = integrate_panels(f, edges, order=16)
    inc = panel.reshape(n_dec, 4).sum(axis=1)
    mids = (y0 + math.log(10.0) * (np.arange(n_dec) + 0.5)) / math.log(10.0)
    decision = classify_increments(inc, mids, margin=margin)
    return _verdict("inverse_tail", decision, float(inc.sum()),
                    delta0 * cutoff, extra=f"from level {delta0:.3g}")


# ---------------------------------------------------------------------------
# weight conditions
# ---------------------------------------------------------------------------

def _weight_zero_interval(values: np.ndarray) -> bool:
    """Two consecutive vanishing samples count as a vanishing interval."""
    z = values <= 0.0
    return bool(np.any(z[1:] & z[:-1]))


def lehto_integral(w: RadialWeight, p: float,
                   margin: float = DEFAULT_MARGIN) -> ConvergenceVerdict:
    """Classify ``dr / (r * q(r)^(1/p))`` over the punctured unit radius.

    Divergence at the center is the criterion every weighted bound in this
    package keys on.  The quadrature runs in u = ln(1/r) from ``U_FLOOR`` to
    ``U_CAP``; both truncations are reported.
    """
    if p <= 0:
        raise ConditionError("need p > 0")

    def q_of_u(u):
        r = np.exp(-np.asarray(u, dtype=float))
        return np.asarray(w.sphere_mean(r), dtype=float)

    probe = q_of_u(np.geomspace(U_FLOOR, U_CAP, 200))
    if _weight_zero_interval(probe):
        return ConvergenceVerdict(
            classification=DIVERGENT,
            partial_value=math.inf,
            tail_exponent_estimate=math.inf,
            cutoff=U_CAP,
            evidence="weight vanishes on an interval: integrand is +inf there",
            condition="center_divergence",
        )

    def f(u):
        q = q_of_u(u)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(q > 0, q ** (-1.0 / p), np.inf)

    decision, partial, _ = _decade_classify(f, U_FLOOR, U_CAP, margin)
    return _verdict(
        "center_divergence", decision, partial, U_CAP,
        extra=f"u-window [{U_FLOOR:g}, {U_CAP:g}], u = ln(1/r)",
    )


def lemma61_bound_check(w: RadialWeight, Phi: OrliczFunction, p: float,
                        r_floor: float = 1e-6, tau_max: float = DEFAULT_CUTOFF,
                        tolerance: float = 1e-6) -> VerificationReport:
    """Check the sphere-average lower bound against its inverse-gauge side.

    LHS is the truncated center integral of ``1/(r q^{1/p})``; RHS is
    ``(1/n)`` times the truncated inverse-gauge tail starting at ``e`` times
    the ball mean of the composed weight.  Both sides keep their cutoffs in
    the slack table; the inequality must hold with the stated tolerance or
    the check fails (a violation indicates a quadrature bug, not new math).
    """
    n = w.dimension
    u_hi = math.log(1.0 / r_floor)

    def f_lhs(u):
        r = np.exp(-np.asarray(u, dtype=float))
        q = np.asarray(w.sphere_mean(r), dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(q > 0, q ** (-1.0 / p), np.inf)

    lhs_edges = np.geomspace(U_FLOOR, u_hi, 120)
    lhs_vals = integrate_panels(f_lhs, lhs_edges, order=16)
    if not np.all(np.isfinite(lhs_vals)):
        lhs = math.inf
    else:
        lhs = float(np.sum(lhs_vals))

    M = w.ball_mean(lambda q: np.asarray(Phi(q), dtype=float))
    if not math.isfinite(M) or M <= 0:
        return VerificationReport.from_sides(
            "sphere_average_lower_bound",
            "center integral of 1/(r q^{1/p}) >= (1/n) inverse-gauge tail from e*M",
            lhs, 0.0, tolerance,
            details={"ball_mean": M},
            inconclusive=True,
        )

    y0 = math.log(M) + 1.0

    def f_rhs(y):
        y = np.asarray(y, dtype=float)
        wlog = eval_inverse_log(Phi, y)
        with np.errstate(over="ignore"):
            return np.where(np.isinf(wlog), 0.0, np.exp(-wlog / p))

    y1 = y0 + math.log(tau_max)
    rhs_edges = np.linspace(y0, y1, 160)
    rhs = float(np.sum(integrate_panels(f_rhs, rhs_edges, order=16))) / n

    return VerificationReport.from_sides(
        "sphere_average_lower_bound",
        "center integral of 1/(r q^{1/p}) >= (1/n) inverse-gauge tail from e*M",
        lhs, rhs, tolerance,
        slack={
            "lhs_r_window": [r_floor, math.exp(-U_FLOOR)],
            "rhs_tau_window": [math.e * M, math.e * M * tau_max],
        },
        details={"ball_mean": M, "dimension": n, "p": p},
    )


def boundary_criterion(w: RadialWeight, delta_max: float,
                       margin: float = DEFAULT_MARGIN) -> ConvergenceVerdict:
    """Classify ``dr / ||Q||_{n-1}(r)`` near the center.

    Divergence means the weight is mild enough for boundary extension; the
    sphere norm uses exponent ``n - 1`` as everywhere in this package.
    """
    n = w.dimension
    if delta_max <= 0:
        raise ConditionError("need a positive radius window")

    probe_r = np.geomspace(delta_max * 1e-8, delta_max, 64)
    norms = np.array([w.lp_sphere_norm(float(r)) for r in probe_r])
    if _weight_zero_interval(norms):
        return ConvergenceVerdict(
            classification=DIVERGENT,
            partial_value=math.inf,
            tail_exponent_estimate=math.inf,
            cutoff=delta_max,
            evidence="sphere norm vanishes on an interval near the center",
            condition="boundary_criterion",
        )

    if w.profile is not None and w.full_eval is None:
        scale = sphere_area(n) ** (1.0 / (n - 1))

        # radial weight: ||Q||(r) = area(1)^{1/(n-1)} r q(r), so
        # dr/||Q|| = du / (scale * q) once u = ln(1/r)
        def f(u):
            r = np.exp(-np.asarray(u, dtype=float))
            q = np.asarray(w.sphere_mean(r), dtype=float)
            with np.errstate(divide="ignore", over="ignore"):
                return np.where(q > 0, 1.0 / (scale * q), np.inf)

        u_lo = max(math.log(1.0 / delta_max), U_FLOOR)
        decision, partial, _ = _decade_classify(f, u_lo, U_CAP, margin)
        return _verdict("boundary_criterion", decision, partial, U_CAP,
                        extra="radial closed form for the sphere norm")

    def f_full(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        r = np.exp(-u)
        vals = np.array([w.lp_sphere_norm(float(ri)) for ri in r])
        with np.errstate(divide="ignore"):
            return np.where(vals > 0, r / vals, np.inf)

    u_lo = max(math.log(1.0 / delta_max), U_FLOOR)
    decision, partial, _ = _decade_classify(f_full, u_lo, min(U_CAP, u_lo * 1e6), margin,
                                            ppd=2, order=8)
    return _verdict("boundary_criterion", decision, partial, U_CAP)
