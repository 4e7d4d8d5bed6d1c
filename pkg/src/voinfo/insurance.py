"""Insurance against a loss under constant absolute risk aversion.

The agent owns a good worth ``wealth``.  With probability ``p`` (the
second state) the good is lost.  Buying indemnity ``I`` costs
``alpha * I + fee``.  Utility is ``u(w) = 1 - exp(-R w)``.

Every expected utility is handled through its *complement*
``1 - U = exp(L)``, with ``L`` assembled by log-sum-exp.  The realistic
parameter values put exponents like ``R (1 - alpha) wealth = 9200`` in
play, so the naive formulas overflow; the log-complement never does.
Beliefs are often carried as log-odds ``t = log(p / (1 - p))`` for the
same reason: the belief at which the optimal indemnity reaches zero can be
far below the smallest positive double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from .errors import ConvergenceFailure, DomainError, InvalidInput, NegativeIndemnity
from .geometry import SmoothBody, TOL_FACE, hull_reduce


@dataclass(frozen=True)
class InsuranceParams:
    alpha: float
    fee: float
    wealth: float
    risk_aversion: float

    def __post_init__(self):
        bad = []
        if not 0.0 < self.alpha < 1.0:
            bad.append(f"alpha={self.alpha} not in (0, 1)")
        for name in ("fee", "wealth", "risk_aversion"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                bad.append(f"{name}={v} must be positive")
        if bad:
            raise InvalidInput("; ".join(bad))

    @property
    def R(self):
        return self.risk_aversion

    def as_dict(self):
        return {
            "alpha": self.alpha,
            "fee": self.fee,
            "wealth": self.wealth,
            "risk_aversion": self.risk_aversion,
        }


#: The headline parameter set: 8% loading, fee 10, good worth 1000, R = 10.
FIG2 = InsuranceParams(alpha=0.08, fee=10.0, wealth=1000.0, risk_aversion=10.0)

#: A moderate set whose threshold sits in the middle of the belief range, so
#: that value differences stay far above double precision.
DEMO = InsuranceParams(alpha=0.3, fee=0.1, wealth=1.0, risk_aversion=1.0)


# --------------------------------------------------------------------------
# Elementary pieces
# --------------------------------------------------------------------------

def premium(params, I):
    if I < 0:
        raise NegativeIndemnity(f"indemnity must be nonnegative, got {I}")
    return params.alpha * I + params.fee


def utility(params, w):
    """``1 - exp(-R w)``, accurate near zero."""
    return -np.expm1(-params.R * np.asarray(w, dtype=float))


def _check_p(p):
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0.0) & (p < 1.0)):
        raise DomainError(f"belief must lie strictly inside (0, 1), got {p}")
    return p


def _log_p(t):
    """``log p`` and ``log(1 - p)`` from log-odds."""
    t = np.asarray(t, dtype=float)
    return -np.logaddexp(0.0, -t), -np.logaddexp(0.0, t)


def _log_ratio(params, t):
    """``log x`` with ``x = (1-p)/p * alpha/(1-alpha)``."""
    a = params.alpha
    return math.log(a) - math.log1p(-a) - np.asarray(t, dtype=float)


def hat_logit(params):
    """Log-odds at which the optimal indemnity is exactly zero."""
    a = params.alpha
    return math.log(a) - math.log1p(-a) - params.R * params.wealth


def _L0(params, t):
    lp, lq = _log_p(t)
    return np.logaddexp(lp, lq - params.R * params.wealth)


def _L(params, t, I):
    """Log of ``1 - U(p, I)``."""
    lp, lq = _log_p(t)
    R, a, f, w = params.R, params.alpha, params.fee, params.wealth
    I = np.asarray(I, dtype=float)
    return np.logaddexp(lq - R * (w - a * I - f), lp - R * ((1.0 - a) * I - f))


def _L_opt(params, t):
    """Log of ``1 - max_{I >= 0} U(p, I)``."""
    t = np.asarray(t, dtype=float)
    a, R = params.alpha, params.R
    lp, lq = _log_p(t)
    lx = _log_ratio(params, t)
    interior = R * params.fee - R * (1.0 - a) * params.wealth + np.logaddexp(
        lq - a * lx, lp + (1.0 - a) * lx
    )
    return np.where(t > hat_logit(params), interior, _L(params, t, 0.0))


def _indemnity_t(params, t):
    return params.wealth - _log_ratio(params, t) / params.R


# --------------------------------------------------------------------------
# Public closed forms
# --------------------------------------------------------------------------

def expected_utility_no_insurance(params, p):
    p = _check_p(p)
    return -np.expm1(_L0(params, logit(p)))


def expected_utility(params, p, I):
    p = _check_p(p)
    if np.any(np.asarray(I) < 0):
        raise NegativeIndemnity(f"indemnity must be nonnegative, got {I}")
    return -np.expm1(_L(params, logit(p), I))


def optimal_indemnity(params, p):
    """Stationary point of ``I -> U(p, I)``; negative below the zero-indemnity belief."""
    p = _check_p(p)
    return _indemnity_t(params, logit(p))


def _delta_t(params, t):
    L0, Ls = _L0(params, t), _L_opt(params, t)
    return -np.exp(L0) * np.expm1(Ls - L0)


def delta(params, p):
    """Gain of the best insurance contract over staying uninsured."""
    p = _check_p(p)
    return _delta_t(params, logit(p))


def _sign_gap(params, t):
    # sign of delta without computing it: positive iff insurance is better
    return _L0(params, t) - _L_opt(params, t)


def threshold_logit(params, max_iter=200, tol=1e-12):
    """Log-odds of the belief above which buying insurance is optimal.

    Bisection on the sign of ``delta`` between the zero-indemnity belief
    and ``p = 1 - 1e-6``.
    """
    lo = hat_logit(params)
    hi = float(logit(1.0 - 1e-6))
    if _sign_gap(params, lo) >= 0:
        raise ConvergenceFailure("insurance already beneficial at the zero-indemnity belief")
    if _sign_gap(params, hi) <= 0:
        raise ConvergenceFailure("insurance never beneficial below p = 1 - 1e-6")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if _sign_gap(params, mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    else:
        raise ConvergenceFailure(f"bisection did not reach {tol} in {max_iter} steps")
    t_star = 0.5 * (lo + hi)
    _verify_sign(params, t_star)
    return t_star


def _verify_sign(params, t_star, n=41):
    ts = np.linspace(-30.0, 30.0, n) + t_star
    gaps = _sign_gap(params, ts)
    away = np.abs(ts - t_star) > 1e-6
    below, above = ts < t_star, ts > t_star
    if np.any(gaps[below & away] > 0) or np.any(gaps[above & away] < 0):
        raise ConvergenceFailure("delta changes sign more than once")


def threshold(params):
    """Threshold belief ``p*``; may underflow to 0.0 for extreme parameters."""
    return float(expit(threshold_logit(params)))


def _log1m_value(params, t):
    return np.minimum(_L0(params, t), _L_opt(params, t))


def insurance_value_function(params, q):
    """Best expected utility at belief ``q`` (insured or not)."""
    q = _check_p(q)
    v = -np.expm1(_log1m_value(params, logit(q)))
    return float(v) if v.ndim == 0 else v


def _value_closed(params, q):
    """Value on the closed interval [0, 1] (the sup at ``q = 1`` is 1)."""
    q = np.asarray(q, dtype=float)
    inner = np.clip(q, 1e-300, 1.0 - 1e-16)
    out = -np.expm1(_log1m_value(params, logit(inner)))
    out = np.where(q <= 0.0, float(utility(params, params.wealth)), out)
    return np.where(q >= 1.0, 1.0, out)


def voi_epsilon(params, p, eps):
    """VoI of learning ``p +- eps`` with equal chances."""
    if not (0.0 < eps < min(p, 1.0 - p)):
        raise DomainError(f"need 0 < eps < min(p, 1 - p), got p={p}, eps={eps}")
    t = logit(np.array([p - eps, p, p + eps]))
    L0, Ls = _L0(params, t), _L_opt(params, t)
    if np.all(L0 <= Ls):
        # all three beliefs on the uninsured branch, where the value is affine
        return 0.0
    L = np.minimum(L0, Ls)
    e = np.exp(L - L[1])
    return float(np.exp(L[1]) * (1.0 - 0.5 * (e[0] + e[2])))


def monetary_equivalent(params, gain):
    """Sure wealth whose utility equals a utility gain ``gain`` (``-log(1 - gain) / R``)."""
    return float(-np.log1p(-gain) / params.R)


def value_second_derivative(params, q):
    """Curvature of the value function on the insured branch."""
    q = _check_p(q)
    t = logit(q)
    I = _indemnity_t(params, t)
    P = params.alpha * I + params.fee
    R, a = params.R, params.alpha
    w1, w2 = params.wealth - P, I - P
    return ((1.0 - a) * np.exp(-R * w2) + a * np.exp(-R * w1)) / (q * (1.0 - q))


# --------------------------------------------------------------------------
# Action bodies
# --------------------------------------------------------------------------

def contract_payoffs(params, I):
    """Utility in the (no loss, loss) states for indemnity ``I``."""
    I = np.asarray(I, dtype=float)
    P = params.alpha * I + params.fee
    return np.column_stack([utility(params, params.wealth - P), utility(params, I - P)])


def insurance_action_set(params, I_grid=None):
    """Hull of the uninsured point and the contracts on ``I_grid``."""
    if I_grid is None:
        I_grid = np.linspace(0.0, 2.0 * params.wealth, 2001)
    I_grid = np.asarray(I_grid, dtype=float)
    if I_grid.size == 0 or np.any(I_grid < 0) or np.any(np.diff(I_grid) <= 0):
        raise InvalidInput("I_grid must be a nonempty increasing grid of nonnegative indemnities")
    pts = np.vstack([[utility(params, params.wealth), utility(params, 0.0)],
                     contract_payoffs(params, I_grid)])
    return hull_reduce(pts)


def insurance_body(params):
    """Exact continuum of contracts as a face-oracle body."""
    uninsured = np.array([utility(params, params.wealth), utility(params, 0.0)])

    def face(s):
        s1, s2 = float(s[0]), float(s[1])
        if s1 < 0 or s2 < 0 or s1 + s2 <= 0:
            raise DomainError("insurance body faces are defined for nonnegative directions")
        q = s2 / (s1 + s2)
        if q <= 0.0:
            return uninsured[None, :]
        if q >= 1.0:
            raise DomainError("no contract attains the supremum at certainty of loss")
        t = float(logit(q))
        if t <= hat_logit(params):
            return uninsured[None, :]
        L0, Ls = float(_L0(params, t)), float(_L_opt(params, t))
        insured = contract_payoffs(params, _indemnity_t(params, t))
        if abs(L0 - Ls) <= TOL_FACE:
            return np.vstack([uninsured, insured])
        return uninsured[None, :] if L0 < Ls else insured

    def value(s):
        s = np.asarray(s, dtype=float)
        tot = s.sum()
        return tot * float(_value_closed(params, s[1] / tot)) if tot > 0 else 0.0

    def batch(S):
        S = np.atleast_2d(S)
        tot = S.sum(axis=1)
        return tot * _value_closed(params, S[:, 1] / np.where(tot > 0, tot, 1.0))

    try:
        kinks = (threshold(params),)
    except ConvergenceFailure:
        kinks = ()
    return SmoothBody(2, face, value_fn=value, name="insurance", batch_value_fn=batch, kinks=kinks)
