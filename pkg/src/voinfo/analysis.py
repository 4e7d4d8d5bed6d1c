"""Value of information and its bounds.

All functions take a *body*: either an :class:`~voinfo.geometry.ActionSet`
(finite decision problems) or a :class:`~voinfo.geometry.SmoothBody`
(closed-form continuum problems).  Both expose ``dim``, ``support(s)`` and
``face(s)``.

Three regimes are distinguished at a prior:

* confident - the prior is interior to its confidence set, so small
  information is worthless;
* undecided - several actions are optimal at the prior (the value function
  has a kink there);
* flexible - the optimal action is unique and moves smoothly with the
  belief (positive definite Hessian of the value function).

For each regime a :class:`BoundCertificate` sandwiches the VoI of a given
information structure between computable bounds.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import BoundaryPrior, InvalidInput, NotFlexible, NotUndecided
from .geometry import (
    TOL_FEAS,
    ActionSet,
    BeliefPolytope,
    as_belief,
    as_measure,
    belief2,
    tangent_basis,
)
from .model import InformationStructure, as_prior, validate_information_structure

TOL_RANK = 1e-9
CONFIDENT_RADIUS = 1e-6
EIG_TOL = 1e-8
HESSIAN_DRIFT = 0.1

CONFIDENT = "Confident"
UNDECIDED = "Undecided"
FLEXIBLE = "Flexible"
OTHER = "Other"


def tol_cert(voi):
    return 1e-7 * (1.0 + abs(voi))


@dataclass
class BoundCertificate:
    """``lower <= voi <= upper`` for one of the three bound theorems."""

    theorem: str
    lower: float
    voi: float
    upper: float
    details: dict = field(default_factory=dict)

    @property
    def holds(self):
        tol = tol_cert(self.voi)
        ok = self.lower <= self.voi + tol and self.voi <= self.upper + tol
        if "inner" in self.details:
            inner = self.details["inner"]
            ok = ok and self.lower <= inner + tol and inner <= self.voi + tol
        return bool(ok)

    def as_dict(self):
        return {
            "theorem": self.theorem,
            "lower": self.lower,
            "voi": self.voi,
            "upper": self.upper,
            "holds": self.holds,
            "details": self.details,
        }


@dataclass
class RegimeReport:
    regime: str
    face_dim: int
    face: np.ndarray
    confidence_set: Optional[BeliefPolytope] = None
    hessian: Optional[np.ndarray] = None
    constants: dict = field(default_factory=dict)

    def as_dict(self):
        out = {
            "regime": self.regime,
            "face_dim": self.face_dim,
            "face": self.face.tolist(),
            "constants": self.constants,
            "hessian": None if self.hessian is None else self.hessian.tolist(),
        }
        if self.confidence_set is not None:
            out["confidence_set"] = polytope_as_dict(self.confidence_set)
        return out


def polytope_as_dict(P):
    out = {"normals": P.normals.tolist(), "offsets": P.offsets.tolist()}
    if P.dim == 2:
        iv = P.interval()
        out["interval"] = None if iv is None else list(iv)
    return out


# --------------------------------------------------------------------------
# Value function and optimal actions
# --------------------------------------------------------------------------

def value_function(body, p):
    """Best expected payoff at belief ``p``."""
    return body.support(as_belief(p, body.dim))


def values(body, P):
    """Value function on each row of ``P`` (rows are beliefs)."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if isinstance(body, ActionSet):
        return (P @ body.vertices.T).max(axis=1)
    batch = getattr(body, "batch_value_fn", None)
    if batch is not None:
        return np.asarray(batch(P), dtype=float)
    return np.array([body.support(p) for p in P])


def optimal_actions(body, p):
    """Vertices of the set of optimal actions at belief ``p``."""
    return ActionSet(body.face(as_belief(p, body.dim)), reduced=True)


def affine_dim(points, tol=TOL_RANK):
    pts = np.atleast_2d(points)
    if len(pts) < 2:
        return 0
    d = pts[1:] - pts[0]
    sv = np.linalg.svd(d, compute_uv=False)
    scale = max(1.0, np.abs(pts).max())
    return int((sv > tol * scale).sum())


def _checked(body, prior, Q, validate=True):
    prior = as_prior(prior, body.dim)
    if Q is not None and validate:
        rep = validate_information_structure(Q, prior)
        if not rep.valid:
            raise InvalidInput("; ".join(rep.messages))
    return prior


def voi(body, prior, Q, validate=True):
    """Expected value at the posteriors minus the value at the prior."""
    prior = _checked(body, prior, Q, validate)
    return float(Q.weights @ values(body, Q.posteriors) - body.support(prior))


# --------------------------------------------------------------------------
# Confidence set and valuable information
# --------------------------------------------------------------------------

def confidence_set(A, prior):
    """Beliefs at which every action optimal at the prior remains optimal.

    One halfspace ``<p, a' - a_i> <= 0`` per optimal vertex ``a_i`` and
    vertex ``a'`` of ``A``.
    """
    prior = as_prior(prior, A.dim)
    face = A.face(prior)
    normals = (A.vertices[None, :, :] - face[:, None, :]).reshape(-1, A.dim)
    return BeliefPolytope(normals, np.zeros(len(normals)), A.dim)


def is_valuable(A, prior, Q, tol=TOL_FEAS):
    """True iff some atom of positive weight leaves the confidence set."""
    prior = _checked(A, prior, Q)
    C = confidence_set(A, prior)
    return any(w > 0 and not C.contains(q, tol) for q, w in zip(Q.posteriors, Q.weights))


def shifted_value(body, prior, a):
    """``q -> v(q) - v(prior) - <q - prior, a>``; nonnegative when ``a`` is optimal at the prior."""
    a = np.asarray(a, dtype=float)
    base = body.support(prior)

    def phi(q):
        q = np.atleast_2d(q)
        return values(body, q) - base - (q - prior) @ a

    return phi


# --------------------------------------------------------------------------
# Lattices on the simplex
# --------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _cached_lattice(dim, n):
    grid = simplex_lattice(dim, n)
    grid.setflags(write=False)
    return grid


def simplex_lattice(dim, n):
    """All beliefs with coordinates in ``{0, 1/n, ..., 1}``."""
    if dim == 2:
        t = np.arange(n + 1) / n
        return np.column_stack([1.0 - t, t])
    if dim == 3:
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        keep = i + j <= n
        i, j = i[keep], j[keep]
        return np.column_stack([i, j, n - i - j]) / n
    pts = []
    for combo in combinations_with_replacement(range(dim), n):
        pts.append(np.bincount(combo, minlength=dim))
    return np.array(pts, dtype=float) / n


def lattice_covering_radius(dim, n):
    """Every belief is within this Euclidean distance of a lattice point.

    The lattice is a scaled copy of the root lattice A_{dim-1}, whose
    covering radius is ``sqrt(a (dim - a) / dim)`` with ``a = dim // 2``.
    """
    a = dim // 2
    return math.sqrt(a * (dim - a) / dim) / n


def _lattice_size(pitch):
    n = int(round(1.0 / pitch))
    if n < 1:
        raise InvalidInput(f"grid pitch {pitch} too coarse")
    return n


def _polygon_chart(P):
    """Vertices of a 3-state belief polytope in an isometric 2-D chart."""
    B = tangent_basis(3)
    c0 = np.full(3, 1.0 / 3.0)
    poly = [B.T @ (np.eye(3)[k] - c0) for k in range(3)]
    for n_, b in zip(P.normals, P.offsets):
        g, rhs = B.T @ n_, b - n_ @ c0
        out = []
        for i in range(len(poly)):
            cur, nxt = poly[i], poly[(i + 1) % len(poly)]
            fc, fn = g @ cur - rhs, g @ nxt - rhs
            if fc <= 0:
                out.append(cur)
            if (fc < 0 < fn) or (fn < 0 < fc):
                lam = fc / (fc - fn)
                out.append(cur + lam * (nxt - cur))
        poly = out
        if not poly:
            break
    return B, c0, np.array(poly)


def _convex_ccw(poly, tol=1e-12):
    """Drop repeated and collinear vertices; orient counter-clockwise."""
    pts = []
    for p in poly:
        if not pts or np.linalg.norm(p - pts[-1]) > tol:
            pts.append(p)
    if len(pts) > 1 and np.linalg.norm(pts[0] - pts[-1]) <= tol:
        pts.pop()
    pts = np.array(pts)
    if len(pts) <= 2:
        return pts
    area = 0.5 * np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1])
    if abs(area) <= tol:
        # collinear: keep the two extreme points
        d = pts - pts[0]
        u = d[np.argmax(np.linalg.norm(d, axis=1))]
        s = d @ u
        return pts[[np.argmin(s), np.argmax(s)]]
    if area < 0:
        pts = pts[::-1]
    keep = []
    m = len(pts)
    for i in range(m):
        a, b, c = pts[i - 1], pts[i], pts[(i + 1) % m]
        if (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > tol:
            keep.append(b)
    return np.array(keep)


def _min_max_affine(alpha, beta, s0, s1):
    """Exact ``min_{s in [s0, s1]} max_j (alpha_j + beta_j s)``."""
    cands = [s0, s1]
    for i in range(len(alpha)):
        for j in range(i + 1, len(alpha)):
            db = beta[j] - beta[i]
            if db != 0:
                s = (alpha[i] - alpha[j]) / db
                if s0 < s < s1:
                    cands.append(s)
    cands = np.array(cands)
    return float(np.max(alpha[None, :] + np.outer(cands, beta), axis=1).min())


def _offset_curve_min(A, C, a, epsilon, pitch):
    """Minimum of ``phi_a`` over beliefs at distance exactly ``epsilon`` from C (three states).

    The curve consists of the polygon's edges pushed out by ``epsilon``
    (handled exactly: phi is a max of affine functions along a segment) and
    circular arcs around its vertices (sampled at arclength ``pitch``, with
    the points where the arc crosses the simplex boundary added; the sample
    minimum is lowered by ``L * pitch``).
    """
    B, c0, poly = _polygon_chart(C)
    poly = _convex_ccw(poly)
    D = A.vertices - a
    G = D @ B          # phi(c0 + B y) = max_j (D c0)_j + (G y)_j
    h0 = D @ c0
    lip = float(np.linalg.norm(D, axis=1).max())
    best_seg, best_arc = math.inf, math.inf
    m = len(poly)

    def clip_segment(y0, y1):
        # keep s in [0, 1] with c0 + B (y0 + s (y1 - y0)) >= 0
        p0, dp = c0 + B @ y0, B @ (y1 - y0)
        lo, hi = 0.0, 1.0
        for k in range(3):
            if abs(dp[k]) < 1e-300:
                if p0[k] < -1e-12:
                    return None
            elif dp[k] > 0:
                lo = max(lo, -p0[k] / dp[k])
            else:
                hi = min(hi, -p0[k] / dp[k])
        return (lo, hi) if lo <= hi else None

    normals = []
    if m >= 2:
        edges = [(poly[i], poly[(i + 1) % m]) for i in range(m if m > 2 else 2)]
        for y0, y1 in edges:
            e = y1 - y0
            n_ = np.array([e[1], -e[0]]) / np.linalg.norm(e)
            normals.append(n_)
            z0, z1 = y0 + epsilon * n_, y1 + epsilon * n_
            rng = clip_segment(z0, z1)
            if rng is None:
                continue
            alpha, beta = h0 + G @ z0, G @ (z1 - z0)
            best_seg = min(best_seg, _min_max_affine(alpha, beta, *rng))

    for i in range(m):
        if m == 1:
            th0, span = 0.0, 2 * math.pi
        else:
            n_in, n_out = normals[i - 1], normals[i % len(normals)]
            th0 = math.atan2(n_in[1], n_in[0])
            span = (math.atan2(n_out[1], n_out[0]) - th0) % (2 * math.pi)
            if span == 0.0:
                continue
        n_pts = max(2, int(math.ceil(epsilon * span / pitch)) + 1)
        th = list(th0 + np.linspace(0.0, span, n_pts))
        # crossings of the simplex boundary, so short inside pieces are not missed
        base = c0 + B @ poly[i]
        for k in range(3):
            bk = B[k]
            r = math.hypot(bk[0], bk[1])
            if r == 0:
                continue
            ratio = -base[k] / (epsilon * r)
            if abs(ratio) <= 1:
                phase = math.atan2(bk[1], bk[0])
                for sgn in (1.0, -1.0):
                    t = phase + sgn * math.acos(ratio)
                    if (t - th0) % (2 * math.pi) <= span:
                        th.append(th0 + (t - th0) % (2 * math.pi))
        th = np.array(th)
        Y = poly[i] + epsilon * np.column_stack([np.cos(th), np.sin(th)])
        P = c0 + Y @ B.T
        inside = P.min(axis=1) >= -1e-12
        if inside.any():
            vals = (h0[None, :] + Y[inside] @ G.T).max(axis=1)
            best_arc = min(best_arc, float(vals.min()) - lip * epsilon * span / (n_pts - 1))
    best = min(best_seg, best_arc)
    info = {"method": "offset-curve", "arc_pitch": pitch, "lipschitz": lip}
    if not math.isfinite(best):
        return math.inf, info
    return max(0.0, best), info


def _polytope_vertices(G, h, dim, tol=1e-9):
    """Vertices of ``{q in simplex : G q <= h}`` by brute-force enumeration.

    Fine for the handful of constraints met here (a dozen or so).
    """
    B = tangent_basis(dim)
    c0 = np.full(dim, 1.0 / dim)
    G = np.vstack([G, -np.eye(dim)])
    h = np.concatenate([h, np.zeros(dim)])
    M = G @ B
    r = h - G @ c0
    k = dim - 1
    idx = np.array(list(combinations(range(len(G)), k)))
    mats = M[idx]
    ok = np.abs(np.linalg.det(mats)) > 1e-12
    if not ok.any():
        return np.empty((0, dim))
    z = np.linalg.solve(mats[ok], r[idx[ok]][..., None])[..., 0]
    q = c0 + z @ B.T
    feas = np.all(q @ G.T <= h + tol * (1.0 + np.abs(h).max()), axis=1)
    q = q[feas]
    if len(q) == 0:
        return q
    return np.unique(np.round(q, 13), axis=0)


def _sublevel_min(A, C, a, epsilon, prior, rel_tol=1e-7, max_iter=80):
    """Exact lower bound by bisection on sublevel sets of phi_a.

    ``S_t = {phi_a <= t}`` is a polytope and the distance to ``C`` is convex,
    so its largest value on ``S_t`` sits at a vertex of ``S_t``.  That
    maximum grows with ``t`` and is 0 at ``t = 0`` (where ``S_0 = C``).  The
    lower end of the final bracket is returned: every belief at distance at
    least ``epsilon`` has ``phi_a`` above it.
    """
    W = A.vertices - a
    t_hi = float(W.max())
    info = {"method": "sublevel-bisection"}

    B = tangent_basis(A.dim)
    norms = np.linalg.norm(C.normals @ B, axis=1)
    norms = np.where(norms > 0, norms, np.inf)

    def far(t):
        # does some vertex of S_t lie at distance >= epsilon from C?
        V = _polytope_vertices(W, np.full(len(W), t), A.dim)
        if len(V) == 0:
            return False
        # distance to a halfspace containing C is a cheap lower bound
        gap = ((V @ C.normals.T - C.offsets) / norms).max(axis=1) if len(norms) else np.zeros(len(V))
        if gap.max() >= epsilon:
            return True
        # the prior lies in C, so |v - prior| bounds the distance from above
        maybe = (gap > 0) & (np.linalg.norm(V - prior, axis=1) >= epsilon)
        return any(C.distance(v) >= epsilon for v in V[maybe])

    if not far(t_hi):
        return math.inf, info
    lo, hi = 0.0, t_hi
    for _ in range(max_iter):
        if hi - lo <= rel_tol * (1.0 + hi):
            break
        mid = 0.5 * (lo + hi)
        if far(mid):
            hi = mid
        else:
            lo = mid
    info["bracket"] = [lo, hi]
    return lo, info


def _phi_min_outside(A, C, a, epsilon, grid_pitch, method="auto", prior=None):
    """Lower bound on min of phi_a over beliefs at distance >= epsilon from C.

    phi_a is convex and vanishes on C, so along the segment from a point's
    projection onto C to the point it only grows: the minimum sits on the
    curve at distance exactly epsilon.  Two states: two candidate beliefs.
    Three states: the offset curve of the confidence polygon.  More states
    (or ``method="sublevel"``): bisection on sublevel sets.  With
    ``method="lattice"``: lattice minimum over points at distance
    >= epsilon - h, minus L h, where h is the lattice covering radius and L
    the Lipschitz constant of phi_a.
    """
    def phi(q):
        q = np.atleast_2d(q)
        cols = q @ (A.vertices - a).T
        return np.maximum.reduce(list(cols.T)) if cols.shape[1] > 1 else cols[:, 0]

    if A.dim == 2 and method == "auto":
        lo, hi = C.interval()
        step = epsilon / math.sqrt(2.0)
        cands = [t for t in (lo - step, hi + step) if 0.0 <= t <= 1.0]
        if not cands:
            return math.inf, {"method": "exact-1d"}
        return float(min(phi(belief2(t))[0] for t in cands)), {"method": "exact-1d"}
    if A.dim == 3 and method == "auto":
        return _offset_curve_min(A, C, a, epsilon, grid_pitch)
    if method in ("auto", "sublevel"):
        return _sublevel_min(A, C, a, epsilon, prior)

    n = _lattice_size(grid_pitch)
    h = lattice_covering_radius(A.dim, n)
    lip = float(np.linalg.norm(A.vertices - a, axis=1).max())
    grid = _cached_lattice(A.dim, n)
    info = {"method": "lattice", "grid_pitch": 1.0 / n, "covering_radius": h, "lipschitz": lip}
    if len(C.offsets) == 0:
        return math.inf, info
    # points of the confidence set have distance 0 and never qualify
    excess = grid @ C.normals.T - (C.offsets + TOL_FEAS)
    outside = np.maximum.reduce(list(excess.T)) > 0
    grid = grid[outside]
    if len(grid) == 0:
        return math.inf, info
    vals = phi(grid)
    best = math.inf
    for idx in np.argsort(vals):
        if C.distance(grid[idx]) >= epsilon - h:
            best = vals[idx]
            break
    if not math.isfinite(best):
        return math.inf, info
    return max(0.0, float(best - lip * h)), info


def spread_constant(A, prior):
    """``min_a max_a' |a - a'|`` with ``a`` ranging over the optimal face.

    ``phi_a`` vanishes on the confidence set only for optimal ``a``, so the
    outer minimum cannot run over all of ``A``.  The face vertices and their
    centroid are the candidates tried.
    """
    V = A.vertices
    F = A.face(prior)
    cand = np.vstack([F, F.mean(axis=0)])
    return float(np.linalg.norm(cand[:, None, :] - V[None, :, :], axis=2).max(axis=1).min())


def _spread_all(V):
    return float(np.linalg.norm(V[:, None, :] - V[None, :, :], axis=2).max(axis=1).min())


def theorem1_bounds(A, prior, Q, epsilon, grid_pitch=1e-3, method="auto"):
    """Confidence-set bounds.

    ``C_A E[d(q, conf)] >= VoI >= c P{d(q, conf) >= epsilon}`` where ``C_A``
    comes from :func:`spread_constant` and ``c`` is the minimum of ``phi_a``
    beyond distance ``epsilon`` of the confidence set, ``a`` the centroid of
    the optimal face.  ``C_A_all_actions`` in the details is the same
    min-max taken over every vertex; it can be too small to bound VoI.
    """
    if not epsilon > 0:
        raise InvalidInput("epsilon must be positive")
    prior = _checked(A, prior, Q)
    C = confidence_set(A, prior)
    value = voi(A, prior, Q, validate=False)

    dists = np.array([C.distance(q) for q in Q.posteriors])
    C_A = spread_constant(A, prior)
    upper = C_A * float(Q.weights @ dists)

    p_out = float(Q.weights[dists >= epsilon].sum())
    a = A.face(prior).mean(axis=0)
    c, how = _phi_min_outside(A, C, a, epsilon, grid_pitch, method, prior)
    lower = c * p_out if p_out > 0 else 0.0
    return BoundCertificate(
        "T1",
        lower,
        value,
        upper,
        {
            "epsilon": epsilon,
            "C_A": C_A,
            "C_A_all_actions": _spread_all(A.vertices),
            "c_mu_A_eps": c,
            "expected_distance": float(Q.weights @ dists),
            "prob_outside_neighborhood": p_out,
            "witness_action": a.tolist(),
            **how,
        },
    )


# --------------------------------------------------------------------------
# Undecided agent
# --------------------------------------------------------------------------

def indifference_kernel(A, prior):
    """Orthonormal basis (columns) of the signed measures that break no tie at the prior."""
    prior = as_prior(prior, A.dim)
    F = A.face(prior)
    if len(F) < 2:
        return np.eye(A.dim)
    D = F[1:] - F[0]
    _, sv, vt = np.linalg.svd(D)
    scale = max(1.0, np.abs(F).max())
    rank = int((sv > TOL_RANK * scale).sum())
    return vt[rank:].T


def affine_generators(F, tol=TOL_RANK):
    """Greedy subset of ``F`` (in order) with the same affine hull."""
    F = np.atleast_2d(F)
    chosen = [0]
    for i in range(1, len(F)):
        if affine_dim(F[chosen + [i]], tol) > affine_dim(F[chosen], tol):
            chosen.append(i)
    return F[chosen]


def _dual_ord(ord):
    if ord == 2:
        return 2
    if ord == 1:
        return np.inf
    if ord == np.inf:
        return 1
    raise InvalidInput(f"unsupported norm {ord!r}; use 1, 2 or inf")


def indifference_seminorm(A, prior, s):
    """``(1/n) max_{t, t' in T} <s, t - t'>`` for affine generators T of the optimal face."""
    prior = as_prior(prior, A.dim)
    s = as_measure(s, A.dim)
    F = A.face(prior)
    if len(F) < 2:
        raise NotUndecided("the optimal face at this prior is a single action")
    T = affine_generators(F)
    proj = T @ s
    return float((proj.max() - proj.min()) / len(T))


def theorem2_bounds(A, prior, Q, ord=2):
    """Bounds for an undecided agent.

    ``C_A E|q - prior| >= VoI_A >= VoI_face >= E seminorm(q - prior)`` with
    ``C_A = max |a|`` (dual norm) over the vertices.
    """
    prior = _checked(A, prior, Q)
    F = A.face(prior)
    if len(F) < 2:
        raise NotUndecided("the optimal face at this prior is a single action")
    value = voi(A, prior, Q, validate=False)
    face = ActionSet(F, reduced=True)
    inner = voi(face, prior, Q, validate=False)
    T = affine_generators(F)
    diffs = Q.posteriors - prior
    proj = diffs @ T.T
    semis = (proj.max(axis=1) - proj.min(axis=1)) / len(T)
    lower = float(Q.weights @ semis)
    C_A = float(np.linalg.norm(A.vertices, ord=_dual_ord(ord), axis=1).max())
    mean_dist = float(Q.weights @ np.linalg.norm(diffs, ord=ord, axis=1))
    return BoundCertificate(
        "T2",
        lower,
        value,
        C_A * mean_dist,
        {
            "inner": inner,
            "C_A": C_A,
            "norm": _ord_name(ord),
            "expected_distance": mean_dist,
            "generators": T.tolist(),
            "kernel_dim": int(indifference_kernel(A, prior).shape[1]),
        },
    )


def _ord_name(ord):
    return "inf" if ord == np.inf else str(int(ord))


# --------------------------------------------------------------------------
# Flexible agent
# --------------------------------------------------------------------------

def numeric_hessian(value_fn, prior, h=1e-3):
    """Central second differences of ``value_fn`` in the simplex tangent space.

    ``value_fn`` is a callable on beliefs or a body.  Returns the K x K
    matrix ``B H B^T`` where ``B`` is an orthonormal tangent basis and ``H``
    the (K-1) x (K-1) Hessian in that basis.
    """
    if not 1e-5 <= h <= 1e-2:
        raise InvalidInput(f"step {h} outside [1e-5, 1e-2]")
    f = value_fn.support if hasattr(value_fn, "support") else value_fn
    prior = as_belief(prior)
    if prior.min() <= 2 * h:
        raise BoundaryPrior(f"prior {prior} is within {2 * h} of the simplex boundary")
    B = tangent_basis(len(prior))
    m = B.shape[1]
    H = np.empty((m, m))
    f0 = f(prior)
    for i in range(m):
        ei = h * B[:, i]
        H[i, i] = (f(prior + ei) - 2 * f0 + f(prior - ei)) / h**2
        for j in range(i):
            ej = h * B[:, j]
            H[i, j] = H[j, i] = (
                f(prior + ei + ej) - f(prior + ei - ej) - f(prior - ei + ej) + f(prior - ei - ej)
            ) / (4 * h**2)
    return B @ H @ B.T


def _tangent_block(hessian):
    B = tangent_basis(hessian.shape[0])
    return B.T @ hessian @ B


def _ball_in_polytope(C, prior, r):
    B = tangent_basis(C.dim)
    slack = C.slack(prior)
    tang = np.linalg.norm(C.normals @ B, axis=1)
    for s, t in zip(slack, tang):
        if t < 1e-14:
            if s < 0:
                return False
        elif s < r * t:
            return False
    # the ball must stay inside the simplex as well
    return bool(prior.min() >= r * math.sqrt((C.dim - 1) / C.dim))


def _locally_flat(body, prior, a, r):
    phi = shifted_value(body, prior, a)
    B = tangent_basis(body.dim)
    pts = np.vstack([prior + r * B.T, prior - r * B.T])
    if pts.min() < 0:
        return False
    tol = 64 * np.finfo(float).eps * (1.0 + abs(body.support(prior)) + np.abs(a).max())
    return bool(np.all(phi(pts) <= tol))


def classify_prior(body, prior, confident_radius=CONFIDENT_RADIUS, eig_tol=EIG_TOL, h=1e-3):
    """Regime of the agent at ``prior``: Undecided, Confident, Flexible or Other."""
    prior = as_prior(prior, body.dim)
    F = body.face(prior)
    fdim = affine_dim(F)
    C = confidence_set(body, prior) if isinstance(body, ActionSet) else None
    constants = {}
    if isinstance(body, ActionSet):
        V = body.vertices
        constants["C_A_T1"] = spread_constant(body, prior)
        constants["C_A_T2"] = float(np.linalg.norm(V, axis=1).max())
    if fdim >= 1:
        return RegimeReport(UNDECIDED, fdim, F, C, None, constants)
    if C is not None:
        confident = _ball_in_polytope(C, prior, confident_radius)
        if confident:
            return RegimeReport(CONFIDENT, 0, F, C, None, constants)
    try:
        H = numeric_hessian(body, prior, h)
    except BoundaryPrior:
        return RegimeReport(OTHER, 0, F, C, None, constants)
    T = _tangent_block(H)
    if C is None and _locally_flat(body, prior, F[0], confident_radius):
        # at radius r rounding hides any curvature below ~eps / r^2, so the
        # second difference has to agree that the value is affine here
        if np.abs(np.linalg.eigvalsh(T)).max() <= eig_tol:
            return RegimeReport(CONFIDENT, 0, F, C, None, constants)
    eig = np.linalg.eigvalsh(T)
    constants["hessian_min_eig"] = float(eig.min())
    # a kink inside the stencil makes the second difference grow like 1/h;
    # a genuine curvature estimate barely moves when the step is halved
    T_half = _tangent_block(numeric_hessian(body, prior, h / 2))
    drift = float(np.linalg.norm(T_half - T) / max(np.linalg.norm(T), eig_tol))
    constants["hessian_step_drift"] = drift
    flexible = eig.min() > eig_tol and drift <= HESSIAN_DRIFT
    return RegimeReport(FLEXIBLE if flexible else OTHER, 0, F, C, H, constants)


def _quad_ratio(body, prior, a, ord):
    base = body.support(prior)

    def g(P):
        P = np.atleast_2d(P)
        d = P - prior
        return (values(body, P) - base - d @ a) / np.linalg.norm(d, ord=ord, axis=1) ** 2

    return g


def theorem3_bounds(body, prior, Q, grid_pitch=1e-3, ord=2, report=None):
    """Quadratic bounds for a flexible agent.

    ``C E|q - prior|^2 >= VoI >= c E|q - prior|^2`` where ``c``, ``C`` are
    the min and max over the simplex of
    ``g(p) = (v(p) - v(prior) - <p - prior, a#>) / |p - prior|^2``.
    They are estimated on a lattice of pitch ``grid_pitch`` together with
    the Hessian limit at the prior; with two states the lattice extremes are
    polished by bounded scalar search.
    """
    prior = _checked(body, prior, Q)
    report = report or classify_prior(body, prior)
    if report.regime != FLEXIBLE:
        raise NotFlexible(f"agent is {report.regime} at this prior, not flexible")
    a = report.face[0]
    g = _quad_ratio(body, prior, a, ord)
    n = _lattice_size(grid_pitch)
    grid = simplex_lattice(body.dim, n)
    # near the prior the ratio is all cancellation; the Hessian limit stands in
    r_min = 1e-4
    far = np.linalg.norm(grid - prior, axis=1) >= r_min
    grid = grid[far]
    gv = g(grid)

    limits = []
    Ht = _tangent_block(report.hessian)
    if body.dim == 2:
        d = np.array([-1.0, 1.0])
        limits.append(0.5 * (d @ report.hessian @ d) / np.linalg.norm(d, ord=ord) ** 2)
    elif ord == 2:
        eig = np.linalg.eigvalsh(Ht)
        limits += [0.5 * eig.min(), 0.5 * eig.max()]

    c_val, C_val = float(gv.min()), float(gv.max())
    if body.dim == 2:
        t = grid[:, 1]
        c_val = min(c_val, _polish(g, t, gv, prior[1], r_min, sign=1.0))
        C_val = max(C_val, -_polish(g, t, gv, prior[1], r_min, sign=-1.0))
    if limits:
        c_val, C_val = min(c_val, min(limits)), max(C_val, max(limits))

    value = voi(body, prior, Q, validate=False)
    sq = float(Q.weights @ np.linalg.norm(Q.posteriors - prior, ord=ord, axis=1) ** 2)
    return BoundCertificate(
        "T3",
        c_val * sq,
        value,
        C_val * sq,
        {
            "c_mu_A": c_val,
            "C_mu_A": C_val,
            "grid_pitch": 1.0 / n,
            "norm": _ord_name(ord),
            "expected_sq_distance": sq,
            "hessian_limit": limits,
        },
    )


def _polish(g, t, gv, t0, r_min, sign):
    """Refine the lattice minimum of ``sign * g`` over the second coordinate."""
    k = int(np.argmin(sign * gv))
    lo, hi = t[max(k - 1, 0)], t[min(k + 1, len(t) - 1)]
    # keep the bracket on one side of the excluded zone around the prior
    if lo < t0 < hi:
        if t[k] < t0:
            hi = min(hi, t0 - r_min)
        else:
            lo = max(lo, t0 + r_min)
    if hi - lo <= 0:
        return float(sign * gv[k])
    res = minimize_scalar(
        lambda x: sign * g(belief2(x))[0], bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(min(sign * gv[k], res.fun))


def two_atom_split(prior, delta):
    """Equally likely posteriors ``prior +- delta`` on the second state."""
    t = float(np.asarray(prior)[1])
    return InformationStructure(np.array([belief2(t - delta), belief2(t + delta)]), np.array([0.5, 0.5]))
