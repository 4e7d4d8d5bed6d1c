"""Marginal value of small amounts of information.

A family of information structures indexed by ``theta > 0`` shrinks to no
information as ``theta -> 0``.  How fast its VoI vanishes tells the three
regimes apart: compared with ``theta`` the VoI can vanish faster (zero
marginal value), at the same rate (finite), or slower (infinite).  The rate
is read off the slope of ``log VoI`` against ``log theta``.

All families here are two-state; beliefs are ``(1 - t, t)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import expit, logit
from scipy.stats import poisson

from .analysis import voi
from .errors import DegenerateGrid, InvalidInput, QuadratureResidual, ThetaTooLarge
from .geometry import hull_reduce, quadratic_scoring_body
from .model import TOL_BAYES, InformationStructure, as_prior, validate_information_structure

VOI_FLOOR = 1e-14
BAND = 0.1

ZERO, FINITE, INFINITE = "Zero", "Finite", "Infinite"
CELL = {ZERO: "0", FINITE: "1", INFINITE: "inf"}


@dataclass(frozen=True)
class InfoFamily:
    """One of ``Brownian``, ``Poisson`` or ``BinarySplit``.

    Brownian: the agent watches ``Z ~ N(k theta, theta)`` where ``k`` is 0 in
    the first state and 1 in the second; integrated with ``nodes``
    Gauss-Hermite points per state.
    Poisson: successes arrive at rate ``rates[k]``; counts above ``n_max``
    are dropped.
    BinarySplit: the posterior moves to ``t +- theta**alpha`` with equal
    chances.
    """

    kind: str
    rates: tuple = (1.0, 9.0)
    alpha: float = 1.0
    nodes: int = 64
    n_max: int = 4

    def __post_init__(self):
        if self.kind not in ("Brownian", "Poisson", "BinarySplit"):
            raise InvalidInput(f"unknown family {self.kind!r}")
        if self.kind == "Poisson":
            r0, r1 = self.rates
            if not 0 < r0 < r1:
                raise InvalidInput("Poisson rates need 0 < rho0 < rho1")
        if self.kind == "BinarySplit" and not self.alpha > 0:
            raise InvalidInput("split exponent must be positive")

    @classmethod
    def brownian(cls, nodes=64):
        return cls("Brownian", nodes=nodes)

    @classmethod
    def poisson(cls, rho0, rho1, n_max=4):
        return cls("Poisson", rates=(float(rho0), float(rho1)), n_max=n_max)

    @classmethod
    def binary_split(cls, alpha):
        return cls("BinarySplit", alpha=float(alpha))

    def refined(self):
        """Same family with doubled quadrature nodes and one more count."""
        return InfoFamily(self.kind, self.rates, self.alpha, 2 * self.nodes, self.n_max + 1)

    @property
    def label(self):
        if self.kind == "Poisson":
            return f"Poisson(rho0={self.rates[0]:g}, rho1={self.rates[1]:g})"
        if self.kind == "BinarySplit":
            return f"BinarySplit(alpha={self.alpha:g})"
        return "Brownian"


def _bayes_correct(t, w, mu):
    """Tilt weights by ``1 + c (t - m)`` so that they average to ``mu``."""
    m = w @ t
    var = w @ (t - m) ** 2
    if var <= 0:
        return w
    w = w * (1.0 + (mu - m) / var * (t - m))
    return w / w.sum()


def _atoms(t, w, mu, tol=TOL_BAYES):
    keep = w > 0
    t, w = t[keep], w[keep] / w[keep].sum()
    w = _bayes_correct(t, w, mu)
    if np.any(w <= 0):
        raise QuadratureResidual("weight correction produced a non-positive weight")
    Q = InformationStructure(np.column_stack([1.0 - t, t]), w)
    resid = abs(w @ t - mu)
    if resid > tol:
        raise QuadratureResidual(f"Bayes residual {resid:.3g} after correction")
    return Q


def instantiate(family, prior, theta):
    """Information structure of ``family`` at parameter ``theta``."""
    prior = as_prior(prior, 2)
    mu = float(prior[1])
    if not theta > 0:
        raise InvalidInput("theta must be positive")

    if family.kind == "BinarySplit":
        s = theta ** family.alpha
        if not s < min(mu, 1.0 - mu):
            raise ThetaTooLarge(f"split {s:g} leaves the simplex at prior {mu:g}")
        t = np.array([mu - s, mu + s])
        Q = InformationStructure(np.column_stack([1.0 - t, t]), np.array([0.5, 0.5]))
        return Q

    if family.kind == "Poisson":
        r0, r1 = family.rates
        n = np.arange(family.n_max + 1)
        p0, p1 = poisson.pmf(n, r0 * theta), poisson.pmf(n, r1 * theta)
        w = (1.0 - mu) * p0 + mu * p1
        t = mu * p1 / w
        return _atoms(t, w, mu)

    if theta > 25.0:
        raise ThetaTooLarge("Brownian horizon too long for the fixed quadrature")
    x, gw = hermegauss(family.nodes)
    gw = gw / gw.sum()
    sd = np.sqrt(theta)
    z = np.concatenate([sd * x, theta + sd * x])
    w = np.concatenate([(1.0 - mu) * gw, mu * gw])
    t = expit(logit(mu) + z - 0.5 * theta)
    return _atoms(t, w, mu)


@dataclass
class MarginalReport:
    family: str
    theta_grid: np.ndarray
    voi_values: np.ndarray
    slope: float
    classification: str
    band: float = BAND
    n_used: int = 0
    extras: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "family": self.family,
            "theta_grid": self.theta_grid.tolist(),
            "voi_values": self.voi_values.tolist(),
            "slope": self.slope,
            "classification": self.classification,
            "band": self.band,
            "points_used": self.n_used,
        }


def classify_slope(slope, band=BAND):
    if slope > 1.0 + band:
        return ZERO
    if slope < 1.0 - band:
        return INFINITE
    return FINITE


def default_theta_grid(family, n=9):
    """Grid whose split sizes span 1e-1 down to 1e-5."""
    s = np.logspace(-1, -5, n)
    if family.kind == "BinarySplit":
        return s ** (1.0 / family.alpha)
    return s


def _check_grid(theta_grid):
    g = np.asarray(theta_grid, dtype=float)
    if g.ndim != 1 or len(g) < 4:
        raise DegenerateGrid("need at least 4 theta values")
    if np.any(g <= 0) or np.any(np.diff(g) >= 0):
        raise DegenerateGrid("theta grid must be positive and strictly decreasing")
    if np.log10(g[0] / g[-1]) < 2.0 - 1e-12:
        raise DegenerateGrid("theta grid must span at least two decades")
    return g


def marginal_voi(body, prior, family, theta_grid=None, band=BAND):
    """VoI along the family and the order of its marginal value."""
    g = _check_grid(default_theta_grid(family) if theta_grid is None else theta_grid)
    prior = as_prior(prior, 2)
    vals = []
    for th in g:
        Q = instantiate(family, prior, th)
        validate_information_structure(Q, prior).raise_if_invalid()
        vals.append(max(0.0, voi(body, prior, Q, validate=False)))
    vals = np.array(vals)
    used = vals > VOI_FLOOR
    if used.sum() < 2:
        return MarginalReport(family.label, g, vals, float("inf"), ZERO, band, int(used.sum()))
    slope = float(np.polyfit(np.log(g[used]), np.log(vals[used]), 1)[0])
    return MarginalReport(family.label, g, vals, slope, classify_slope(slope, band), band, int(used.sum()))


# --------------------------------------------------------------------------
# The classification grid
# --------------------------------------------------------------------------

TABLE1_PAYOFFS = np.array([[3.0, 0.0], [2.0, 2.0], [0.0, 2.5], [0.0, 0.0]])

REGIMES = ("Confident", "Undecided", "Flexible")


def test_problems():
    """Regime name -> (body, prior) used for the classification grid."""
    A = hull_reduce(TABLE1_PAYOFFS)
    return {
        "Confident": (A, np.array([0.5, 0.5])),
        "Undecided": (A, np.array([2.0 / 3.0, 1.0 / 3.0])),
        "Flexible": (quadratic_scoring_body(), np.array([0.5, 0.5])),
    }


test_problems.__test__ = False


def table2_families(nodes=64, n_max=4):
    return [
        ("Brownian", InfoFamily("Brownian", nodes=nodes, n_max=n_max)),
        ("Poisson q+ outside", InfoFamily("Poisson", rates=(1.0, 9.0), nodes=nodes, n_max=n_max)),
        ("Poisson q+ inside", InfoFamily("Poisson", rates=(3.0, 7.0), nodes=nodes, n_max=n_max)),
    ] + [
        (f"BinarySplit alpha={a:g}", InfoFamily("BinarySplit", alpha=a, nodes=nodes, n_max=n_max))
        for a in (0.25, 0.5, 0.75, 1.0, 2.0)
    ]


@dataclass
class Table2:
    rows: list
    columns: tuple
    cells: dict
    reports: dict

    def grid(self):
        return [[CELL[self.cells[(r, c)]] for c in self.columns] for r in self.rows]

    def as_dict(self):
        return {
            "columns": list(self.columns),
            "rows": [
                {"family": r, **{c: CELL[self.cells[(r, c)]] for c in self.columns}}
                for r in self.rows
            ],
            "reports": {
                f"{r} | {c}": rep.as_dict() for (r, c), rep in self.reports.items()
            },
        }


def table2_harness(nodes=64, n_max=4, band=BAND):
    """Classify every family against every regime's test problem."""
    problems = test_problems()
    rows, cells, reports = [], {}, {}
    for name, fam in table2_families(nodes, n_max):
        rows.append(name)
        for regime in REGIMES:
            body, prior = problems[regime]
            rep = marginal_voi(body, prior, fam, band=band)
            cells[(name, regime)] = rep.classification
            reports[(name, regime)] = rep
    return Table2(rows, REGIMES, cells, reports)
