"""Random instance generators shared by the test modules."""

import numpy as np

from voinfo import InformationStructure, hull_reduce

TABLE1 = [[3.0, 0.0], [2.0, 2.0], [0.0, 2.5], [0.0, 0.0]]


def random_action_set(rng, K, max_vertices=8):
    m = int(rng.integers(1, max_vertices + 1))
    return hull_reduce(rng.uniform(0.0, 3.0, size=(m, K)))


def random_prior(rng, K, floor=0.02):
    p = np.maximum(rng.dirichlet(2.0 * np.ones(K)), floor)
    return p / p.sum()


def random_information(rng, prior, n_atoms, scale=1.0):
    """Bayes-plausible structure around ``prior``; ``scale`` in (0, 1] shrinks it."""
    x = rng.dirichlet(np.ones(len(prior)), size=n_atoms)
    w = rng.dirichlet(np.ones(n_atoms))
    d = x - w @ x
    # largest step keeping every atom in the simplex
    with np.errstate(divide="ignore"):
        limits = np.where(d < 0, prior[None, :] / -d, np.inf)
    lam = min(1.0, float(limits.min())) * scale
    q = prior + lam * d
    q = np.maximum(q, 0.0)
    q /= q.sum(axis=1, keepdims=True)
    # re-centre exactly on the prior after clipping
    resid = prior - w @ q
    q = q + resid
    if q.min() < 0:
        q = np.maximum(q, 0.0)
        q /= q.sum(axis=1, keepdims=True)
    return InformationStructure(q, w)


def two_atom(t, d1, d2):
    """Atoms at ``t - d1`` and ``t + d2`` with weights making the mean ``t``."""
    w1 = d2 / (d1 + d2)
    post = np.array([[1 - (t - d1), t - d1], [1 - (t + d2), t + d2]])
    return InformationStructure(post, np.array([w1, 1 - w1]))


def random_kink_prior(rng, A, tries=20):
    """A belief where at least two vertices of ``A`` are optimal, or None.

    Bisects along a random segment between beliefs with different maximizers.
    """
    K = A.dim
    for _ in range(tries):
        p0, p1 = rng.dirichlet(np.ones(K), size=2)
        i0 = int(np.argmax(A.vertices @ p0))
        if int(np.argmax(A.vertices @ p1)) == i0:
            continue
        lo, hi = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if int(np.argmax(A.vertices @ ((1 - mid) * p0 + mid * p1))) == i0:
                lo = mid
            else:
                hi = mid
        p = (1 - lo) * p0 + lo * p1
        if len(A.face(p)) >= 2 and p.min() > 1e-3:
            return p
    return None
