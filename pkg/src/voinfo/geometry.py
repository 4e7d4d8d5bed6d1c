"""Convex geometry on payoff vectors and beliefs.

Actions are points of R^K (one payoff per state), beliefs are points of the
probability simplex, and the pairing between them is the ordinary dot
product.  An :class:`ActionSet` is a finite vertex representation of a
convex body of actions; a :class:`BeliefPolytope` is a halfspace
representation of a convex subset of the simplex.  Smooth bodies that have
no finite vertex list are described by a face oracle (:class:`SmoothBody`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog, minimize, nnls
from scipy.spatial import ConvexHull, QhullError

from .errors import DimensionMismatch, EmptyInput, EmptyPolytope, InvalidInput, NotMember

TOL_FEAS = 1e-9
TOL_FACE = 1e-9
TOL_KKT = 1e-7

# Above this many points the Qhull vertex list seeds the LP redundancy tests.
_QHULL_MIN_POINTS = 64
# Candidate sets larger than this are taken from Qhull without LP confirmation.
_LP_MAX_CANDIDATES = 256


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def as_measure(s, dim=None):
    """Return ``s`` as a finite float vector, optionally checking its length."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {s.shape}")
    if dim is not None and s.shape[0] != dim:
        raise DimensionMismatch(f"expected {dim} coordinates, got {s.shape[0]}")
    if not np.all(np.isfinite(s)):
        raise InvalidInput("signed measure has non-finite entries")
    return s


def as_belief(p, dim=None, tol=TOL_FEAS):
    """Validate a probability vector.

    Entries down to ``-tol`` are clamped to zero; the sum must be one
    within ``tol``.
    """
    p = as_measure(p, dim)
    if p.shape[0] < 2:
        raise DimensionMismatch("beliefs need at least two states")
    if np.any(p < -tol):
        raise InvalidInput(f"belief has negative entries: {p}")
    if abs(p.sum() - 1.0) > tol:
        raise InvalidInput(f"belief sums to {p.sum()!r}, not 1")
    return np.maximum(p, 0.0)


def belief2(t):
    """Two-state belief with probability ``t`` on the second state."""
    return np.array([1.0 - t, t])


@lru_cache(maxsize=None)
def _tangent_basis(dim):
    B = null_space(np.ones((1, dim)))
    B.setflags(write=False)
    return B


def tangent_basis(dim):
    """Orthonormal basis (columns) of the hyperplane ``sum(x) = 0``."""
    return _tangent_basis(int(dim))


def _separation_margin(point, others, scale):
    """Largest t with <s, o - point> + t <= 0 for all others, s in [-1, 1]^K.

    A positive margin means ``point`` is strictly separated from the convex
    hull of ``others``.
    """
    k = point.shape[0]
    if len(others) == 0:
        return np.inf
    diffs = (others - point) / scale
    c = np.zeros(k + 1)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=np.hstack([diffs, np.ones((len(diffs), 1))]),
        b_ub=np.zeros(len(diffs)),
        bounds=[(-1.0, 1.0)] * k + [(None, 1.0)],
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"separation LP failed: {res.message}")
    return -res.fun


@dataclass(frozen=True)
class ActionSet:
    """Vertex representation of a convex body of payoff vectors."""

    vertices: np.ndarray
    reduced: bool = False

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.size == 0:
            raise EmptyInput("an action set needs at least one vertex")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("action payoffs must be finite")
        object.__setattr__(self, "vertices", _frozen(v))

    @property
    def dim(self):
        return self.vertices.shape[1]

    def __len__(self):
        return self.vertices.shape[0]

    def support(self, s):
        return support_function(self, s)[0]

    def face(self, s):
        return support_function(self, s)[1]


def hull_reduce(points, tol=1e-9):
    """Keep only the extreme points of the convex hull of ``points``.

    Redundancy is decided by a separation LP per point, testing each point
    against the points still kept, so near-duplicates never eliminate each
    other.  For large inputs the Qhull vertex list is used as the candidate
    set.  Input order is preserved.
    """
    pts = [np.asarray(p, dtype=float).ravel() for p in points]
    if not pts:
        raise EmptyInput("hull_reduce needs at least one point")
    dims = {p.shape[0] for p in pts}
    if len(dims) != 1:
        raise DimensionMismatch(f"points have mixed dimensions {sorted(dims)}")
    P = np.vstack(pts)
    if not np.all(np.isfinite(P)):
        raise InvalidInput("points must be finite")
    scale = 1.0 + np.abs(P).max()

    cand = np.arange(len(P))
    if len(P) > _QHULL_MIN_POINTS and P.shape[1] >= 2:
        try:
            cand = np.sort(ConvexHull(P).vertices)
        except QhullError:
            pass  # lower-dimensional input; fall back to LP tests on all points
        else:
            if len(cand) > _LP_MAX_CANDIDATES:
                return ActionSet(P[cand], reduced=True)

    keep = list(cand)
    for i in list(cand):
        others = [j for j in keep if j != i]
        if _separation_margin(P[i], P[others], scale) <= tol:
            keep.remove(i)
    return ActionSet(P[sorted(keep)], reduced=True)


def support_function(A, s):
    """Return ``(max_a <s, a>, argmax vertices)``.

    Vertices within ``1e-9 * (1 + |value|)`` of the maximum all count as
    maximizers.
    """
    s = as_measure(s, A.dim)
    vals = A.vertices @ s
    value = float(vals.max())
    band = TOL_FACE * (1.0 + abs(value))
    return value, A.vertices[vals >= value - band]


def exposed_face(A, s):
    """Vertex set of the face of ``A`` exposed by direction ``s``."""
    return ActionSet(support_function(A, s)[1], reduced=True)


def in_hull(A, a, tol=TOL_FEAS):
    a = as_measure(a, A.dim)
    scale = 1.0 + np.abs(A.vertices).max() + np.abs(a).max()
    return _separation_margin(a, A.vertices, scale) <= tol


@dataclass(frozen=True)
class BeliefPolytope:
    """Beliefs p with ``normals @ p <= offsets``, intersected with the simplex.

    Rows are stored with unit-norm normals, so the tolerance of
    :meth:`contains` is a distance in belief space.
    """

    normals: np.ndarray
    offsets: np.ndarray
    dim: int = field(default=0)

    def __post_init__(self):
        G = np.asarray(self.normals, dtype=float)
        h = np.asarray(self.offsets, dtype=float).ravel()
        dim = self.dim or (G.shape[1] if G.ndim == 2 and G.size else 0)
        if dim < 2:
            raise DimensionMismatch("belief polytopes need dim >= 2")
        G = G.reshape(-1, dim)
        if G.shape[0] != h.shape[0]:
            raise DimensionMismatch("normals and offsets disagree in length")
        norms = np.linalg.norm(G, axis=1)
        nonzero = norms > 1e-14
        # a zero normal encodes 0 <= offset: either vacuous or infeasible
        bad = (~nonzero) & (h < -1e-12)
        if np.any(bad):
            G = np.vstack([G[nonzero] / norms[nonzero, None], np.ones((1, dim)) / np.sqrt(dim)])
            h = np.append(h[nonzero] / norms[nonzero], -1.0)
        else:
            G, h = G[nonzero] / norms[nonzero, None], h[nonzero] / norms[nonzero]
        object.__setattr__(self, "normals", _frozen(G))
        object.__setattr__(self, "offsets", _frozen(h))
        object.__setattr__(self, "dim", dim)

    @classmethod
    def simplex(cls, dim):
        return cls(np.zeros((0, dim)), np.zeros(0), dim)

    def slack(self, p):
        return self.offsets - self.normals @ p

    def cone_contains(self, s, tol=TOL_FEAS):
        """Halfspace test alone, without the simplex constraints."""
        s = as_measure(s, self.dim)
        return bool(np.all(self.slack(s) >= -tol))

    def contains(self, p, tol=TOL_FEAS):
        p = np.asarray(p, dtype=float)
        if np.any(p < -tol) or abs(p.sum() - 1.0) > tol:
            return False
        return bool(np.all(self.slack(p) >= -tol))

    def is_empty(self):
        return polytope_is_empty(self)

    def project(self, q):
        return project_onto_polytope(q, self)

    def distance(self, q):
        return project_onto_polytope(q, self)[1]

    def interval(self):
        """For two states: the range ``(lo, hi)`` of the second coordinate.

        Returns ``None`` when the polytope is empty.
        """
        if self.dim != 2:
            raise DimensionMismatch("interval() is only defined for two states")
        lo, hi = 0.0, 1.0
        # n1 (1 - t) + n2 t <= b   <=>   (n2 - n1) t <= b - n1
        for (n1, n2), b in zip(self.normals, self.offsets):
            slope, rhs = n2 - n1, b - n1
            if abs(slope) < 1e-15:
                if rhs < -TOL_FEAS:
                    return None
            elif slope > 0:
                hi = min(hi, rhs / slope)
            else:
                lo = max(lo, rhs / slope)
        if lo > hi + TOL_FEAS:
            return None
        return lo, max(lo, hi)

    def intersect(self, other):
        return BeliefPolytope(
            np.vstack([self.normals, other.normals]),
            np.concatenate([self.offsets, other.offsets]),
            self.dim,
        )


def revealed_beliefs(A, a):
    """Beliefs at which ``a`` is an optimal action (normal cone of A at a)."""
    a = as_measure(a, A.dim)
    if not in_hull(A, a):
        raise NotMember(f"{a} is not in the action set")
    return BeliefPolytope(A.vertices - a, np.zeros(len(A)), A.dim)


def polytope_is_empty(P):
    """True iff no belief satisfies every halfspace (one LP solve)."""
    k = P.dim
    res = linprog(
        np.zeros(k),
        A_ub=P.normals if len(P.offsets) else None,
        b_ub=P.offsets if len(P.offsets) else None,
        A_eq=np.ones((1, k)),
        b_eq=[1.0],
        bounds=[(0.0, None)] * k,
        method="highs",
    )
    if res.status == 2:
        return True
    if res.status != 0:
        raise RuntimeError(f"feasibility LP failed: {res.message}")
    return False


def _all_constraints(P):
    k = P.dim
    G = np.vstack([P.normals, -np.eye(k)])
    h = np.concatenate([P.offsets, np.zeros(k)])
    return G, h


def kkt_residual(q, x, P, active_tol=1e-9):
    """Optimality residual of ``x`` as the projection of ``q`` onto ``P``.

    Combines primal infeasibility with the stationarity residual of the best
    nonnegative multipliers on the near-active constraints.
    """
    G, h = _all_constraints(P)
    B = tangent_basis(P.dim)
    slack = h - G @ x
    infeas = max(0.0, -slack.min(), abs(x.sum() - 1.0))
    active = slack <= active_tol * (1.0 + np.abs(h).max())
    r = B.T @ (q - x)
    if active.any():
        _, stat = nnls((G[active] @ B).T, r)
    else:
        stat = float(np.linalg.norm(r))
    return max(infeas, stat)


def _project_qp(q, G, h, B):
    """SLSQP projection, then an exact solve on the constraints it left active."""
    res = minimize(
        lambda z: 0.5 * z @ z,
        np.zeros(B.shape[1]),
        jac=lambda z: z,
        constraints=[{"type": "ineq", "fun": lambda z: h - G @ (q + B @ z), "jac": lambda z: -G @ B}],
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 500},
    )
    z = res.x
    slack = h - G @ (q + B @ z)
    active = slack <= 1e-7 * (1.0 + np.abs(h).max())
    if active.any():
        # closest point of the affine piece {G_act (q + B z) = h_act}
        Ga = G[active] @ B
        z_pol = np.linalg.lstsq(Ga, h[active] - G[active] @ q, rcond=None)[0]
        x_pol = q + B @ z_pol
        if np.all(h - G @ x_pol >= -1e-12):
            z = z_pol
    x = q + B @ z
    return np.where(np.abs(x) < 1e-15, 0.0, x)


def project_onto_polytope(q, P):
    """Euclidean projection of the belief ``q`` onto ``P``.

    Solved as a least-distance program through its NNLS dual
    (Lawson-Hanson), then certified by :func:`kkt_residual`.

    Returns ``(point, distance)``.
    """
    q = as_belief(q, P.dim)
    if P.contains(q, tol=0.0):
        return q.copy(), 0.0
    G, h = _all_constraints(P)
    B = tangent_basis(P.dim)
    # x = q + B z;  minimize |z|  s.t.  (-G B) z >= G q - h
    M = -G @ B
    b = G @ q - h
    scale = max(1.0, np.abs(b).max())
    E = np.vstack([M.T, b[None, :] / scale])
    f = np.zeros(E.shape[0])
    f[-1] = 1.0
    u, _ = nnls(E, f, maxiter=50 * E.shape[1])
    r = E @ u - f
    if abs(r[-1]) < 1e-12:
        raise EmptyPolytope("cannot project onto an empty polytope")
    z = -r[:-1] / r[-1] / scale
    x = q + B @ z
    x = np.where(np.abs(x) < 1e-15, 0.0, x)
    res = kkt_residual(q, x, P)
    if res > TOL_KKT:
        # NNLS can stall on rank-deficient duals; retry as a plain QP
        x = _project_qp(q, G, h, B)
        res = kkt_residual(q, x, P)
    if res > TOL_KKT:
        if polytope_is_empty(P):
            raise EmptyPolytope("cannot project onto an empty polytope")
        raise RuntimeError(f"projection KKT residual {res:.3g} above {TOL_KKT}")
    return x, float(np.linalg.norm(q - x))


@dataclass(frozen=True)
class SmoothBody:
    """Convex body given by a face oracle instead of a vertex list.

    ``face_fn(s)`` returns the (m, K) array of extreme maximizers of
    ``<s, a>``; several rows mean a kink.  ``value_fn``, when given,
    evaluates the support function directly (used where the face point runs
    off to infinity, e.g. at the boundary of the simplex).
    ``batch_value_fn`` maps an (n, K) array of beliefs to n values at once.
    ``kinks`` lists known two-state beliefs (second coordinate) where the
    face is not a single point.
    """

    dim: int
    face_fn: Callable[[np.ndarray], np.ndarray]
    value_fn: Optional[Callable[[np.ndarray], float]] = None
    name: str = "smooth body"
    batch_value_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kinks: tuple = ()

    def face(self, s):
        return np.atleast_2d(np.asarray(self.face_fn(as_measure(s, self.dim)), dtype=float))

    def support(self, s):
        s = as_measure(s, self.dim)
        if self.value_fn is not None:
            return float(self.value_fn(s))
        return float((self.face(s) @ s).max())


def quadratic_scoring_body():
    """Two-state quadratic (Brier) scoring rule.

    Reporting probability r of the second state pays ``1 - r**2`` in the
    first state and ``1 - (1 - r)**2`` in the second, so the value function
    at belief ``(1 - t, t)`` is ``1 - t (1 - t)``.  Faces are exact for
    every direction, not only beliefs.
    """

    def payoff(r):
        return np.array([1.0 - r * r, 1.0 - (1.0 - r) ** 2])

    def face(s):
        s1, s2 = s
        if s1 + s2 > 0:
            return payoff(min(1.0, max(0.0, s2 / (s1 + s2))))[None, :]
        ends = np.array([payoff(0.0), payoff(1.0)])
        vals = ends @ s
        return ends[vals >= vals.max() - TOL_FACE * (1 + abs(vals.max()))]

    def batch(S):
        S = np.atleast_2d(S)
        tot = S.sum(axis=1)
        r = np.clip(S[:, 1] / np.where(tot > 0, tot, 1.0), 0.0, 1.0)
        out = S[:, 0] * (1.0 - r * r) + S[:, 1] * (1.0 - (1.0 - r) ** 2)
        ends = np.maximum(S[:, 0], S[:, 1])
        return np.where(tot > 0, out, ends)

    return SmoothBody(2, face, name="quadratic scoring rule", batch_value_fn=batch)
