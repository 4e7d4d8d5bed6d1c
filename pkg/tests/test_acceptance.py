"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` or plain ``pytest``; the
summary lines bypass output capture either way.
"""

import time

import numpy as np
import pytest

from voinfo import (
    confidence_set,
    is_valuable,
    optimal_actions,
    quadratic_scoring_body,
    revealed_beliefs,
    theorem1_bounds,
    theorem2_bounds,
    theorem3_bounds,
    voi,
)
from voinfo import insurance as ins
from voinfo.analysis import values
from voinfo.errors import DomainError, VoIError
from voinfo.geometry import belief2
from voinfo.insurance import FIG2, InsuranceParams
from voinfo.marginal import table2_harness

from helpers import random_action_set, random_information, random_kink_prior, random_prior, two_atom

SUITE = 1000

TABLE2 = {
    "Brownian": ["0", "inf", "1"],
    "Poisson q+ outside": ["1", "1", "1"],
    "Poisson q+ inside": ["0", "1", "1"],
    "BinarySplit alpha=0.25": ["0", "inf", "inf"],
    "BinarySplit alpha=0.5": ["0", "inf", "1"],
    "BinarySplit alpha=0.75": ["0", "inf", "0"],
    "BinarySplit alpha=1": ["0", "1", "0"],
    "BinarySplit alpha=2": ["0", "0", "0"],
}


def announce(capsys, number, ok, note):
    with capsys.disabled():
        print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {note}")


# --------------------------------------------------------------------------
# 1. Geometry of the four-action example
# --------------------------------------------------------------------------

def test_criterion_1_example_geometry(capsys, table1):
    start = time.perf_counter()
    checks = {}

    # scan the state-2 coordinate and read off which action is optimal where
    ts = np.linspace(0.0, 1.0, 3001)
    faces = [{tuple(v) for v in optimal_actions(table1, belief2(t)).vertices} for t in ts]
    checks["(3,0) optimal iff p2 <= 1/3"] = all(
        ((3.0, 0.0) in f) == (t <= 1 / 3 + 1e-12) for t, f in zip(ts, faces)
    )
    checks["(2,2) optimal on [1/3, 4/5]"] = all(
        ((2.0, 2.0) in f) == (1 / 3 - 1e-12 <= t <= 0.8 + 1e-12) for t, f in zip(ts, faces)
    )
    checks["(0,5/2) optimal on [4/5, 1]"] = all(
        ((0.0, 2.5) in f) == (t >= 0.8 - 1e-12) for t, f in zip(ts, faces)
    )

    lo, hi = revealed_beliefs(table1, [3.0, 0.0]).interval()
    checks["revealed beliefs of (3,0) = [0, 1/3]"] = abs(lo) <= 1e-9 and abs(hi - 1 / 3) <= 1e-9
    lo, hi = confidence_set(table1, belief2(0.5)).interval()
    checks["confidence set at 1/2 = [1/3, 4/5]"] = abs(lo - 1 / 3) <= 1e-9 and abs(hi - 0.8) <= 1e-9

    elapsed = time.perf_counter() - start
    checks["runtime < 1 s"] = elapsed < 1.0
    failed = [k for k, v in checks.items() if not v]
    announce(capsys, 1, not failed, f"four-action geometry in {elapsed:.2f} s" + (f"; failed {failed}" if failed else ""))
    assert not failed


# --------------------------------------------------------------------------
# 2. is_valuable agrees with a positive VoI
# --------------------------------------------------------------------------

def test_criterion_2_valuable_equivalence(capsys):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    agree = valuable = 0
    for _ in range(SUITE):
        K = int(rng.integers(2, 5))
        A = random_action_set(rng, K, max_vertices=8)
        prior = random_prior(rng, K)
        # small scales keep many posteriors inside the confidence set
        scale = float(rng.choice([1e-3, 1e-2, 0.1, 1.0]))
        Q = random_information(rng, prior, int(rng.integers(1, 7)), scale)
        tol = 1e-9 * (1.0 + np.abs(A.vertices).max())
        flag = is_valuable(A, prior, Q)
        agree += flag == (voi(A, prior, Q) > tol)
        valuable += flag
    elapsed = time.perf_counter() - start
    ok = agree == SUITE and elapsed < 30.0
    announce(capsys, 2, ok, f"{agree}/{SUITE} agree ({valuable} valuable) in {elapsed:.1f} s")
    assert ok


# --------------------------------------------------------------------------
# 3 and 8. Sandwich suites
# --------------------------------------------------------------------------

def _t1_suite(rng):
    out = []
    while len(out) < SUITE:
        K = int(rng.integers(2, 5))
        A = random_action_set(rng, K)
        prior = random_prior(rng, K)
        Q = random_information(rng, prior, int(rng.integers(1, 7)), float(rng.choice([0.05, 0.3, 1.0])))
        out.append(theorem1_bounds(A, prior, Q, float(rng.uniform(0.01, 0.1))))
    return out


def _t2_suite(rng):
    out = []
    while len(out) < SUITE:
        K = int(rng.integers(2, 5))
        A = random_action_set(rng, K)
        if len(A) < 2:
            continue
        prior = random_kink_prior(rng, A)
        if prior is None:
            continue
        Q = random_information(rng, prior, int(rng.integers(1, 7)), float(rng.choice([0.05, 0.3, 1.0])))
        out.append(theorem2_bounds(A, prior, Q, ord=[1, 2, np.inf][len(out) % 3]))
    return out


def _t3_suite(rng):
    out = []
    scoring = quadratic_scoring_body()
    for i in range(SUITE):
        if i % 2 == 0:
            body = scoring
            t = rng.uniform(0.05, 0.95)
        else:
            params = InsuranceParams(
                rng.uniform(0.05, 0.5), rng.uniform(0.01, 0.3), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
            )
            body = ins.insurance_body(params)
            # the insured branch, away from the kink at the threshold
            t = rng.uniform(ins.threshold(params) + 0.03, 0.97)
        prior = belief2(t)
        Q = random_information(rng, prior, int(rng.integers(1, 7)), float(rng.choice([0.05, 0.3, 1.0])))
        out.append(theorem3_bounds(body, prior, Q))
    return out


@pytest.fixture(scope="module")
def suites():
    rng = np.random.default_rng(3)
    runs, times = {}, {}
    for name, build in (("T1", _t1_suite), ("T2", _t2_suite), ("T3", _t3_suite)):
        start = time.perf_counter()
        try:
            runs[name] = build(rng)
        except VoIError as exc:
            runs[name] = exc
        times[name] = time.perf_counter() - start
    return runs, times


def test_criterion_3_sandwich_suites(capsys, suites):
    runs, times = suites
    parts, ok = [], True
    for name, certs in runs.items():
        if isinstance(certs, Exception):
            parts.append(f"{name} raised {certs!r}")
            ok = False
            continue
        held = sum(c.holds for c in certs)
        ok &= held == len(certs) == SUITE
        parts.append(f"{name} {held}/{len(certs)}")
    total = sum(times.values())
    ok &= total < 120.0
    announce(capsys, 3, ok, ", ".join(parts) + f" in {total:.1f} s")
    assert ok


def _reconstructs(cert):
    """The sandwich is rebuilt from the reported constants and distances."""
    d = cert.details
    close = lambda x, y: abs(x - y) <= 1e-12 * (1.0 + abs(y))
    if cert.theorem == "T1":
        c = d["c_mu_A_eps"]
        lower = c * d["prob_outside_neighborhood"] if d["prob_outside_neighborhood"] > 0 else 0.0
        return close(cert.lower, lower) and close(cert.upper, d["C_A"] * d["expected_distance"]) and "method" in d
    if cert.theorem == "T2":
        return close(cert.upper, d["C_A"] * d["expected_distance"]) and "norm" in d
    sq = d["expected_sq_distance"]
    return (
        close(cert.lower, d["c_mu_A"] * sq)
        and close(cert.upper, d["C_mu_A"] * sq)
        and d["grid_pitch"] > 0
        and d["c_mu_A"] <= d["C_mu_A"]
    )


def test_criterion_8_certificate_property(capsys, suites):
    runs, _ = suites
    parts, ok = [], True
    for name, certs in runs.items():
        if isinstance(certs, Exception):
            parts.append(f"{name} unavailable")
            ok = False
            continue
        good = sum(c.holds and _reconstructs(c) for c in certs)
        ok &= good == len(certs)
        parts.append(f"{name} {good}/{len(certs)}")
    announce(capsys, 8, ok, "certificates valid with their reported constants: " + ", ".join(parts))
    assert ok


# --------------------------------------------------------------------------
# 4. Quadratic scoring rule
# --------------------------------------------------------------------------

def test_criterion_4_scoring_oracle(capsys, scoring):
    rng = np.random.default_rng(4)
    worst_voi = worst_const = 0.0
    for _ in range(200):
        t = rng.uniform(0.01, 0.99)
        Q = two_atom(t, rng.uniform(0, t), rng.uniform(0, 1 - t))
        exact = float(Q.weights @ (Q.posteriors[:, 1] - t) ** 2)
        worst_voi = max(worst_voi, abs(voi(scoring, belief2(t), Q) - exact))
    for _ in range(40):
        t = rng.uniform(0.05, 0.95)
        Q = two_atom(t, rng.uniform(0, t), rng.uniform(0, 1 - t))
        cert = theorem3_bounds(scoring, belief2(t), Q, ord=np.inf)
        worst_const = max(worst_const, abs(cert.details["c_mu_A"] - 1), abs(cert.details["C_mu_A"] - 1))
    ok = worst_voi <= 1e-10 and worst_const <= 1e-6
    announce(capsys, 4, ok, f"max |VoI - E(q-mu)^2| = {worst_voi:.1e}, max |c - 1|, |C - 1| = {worst_const:.1e} (sup norm)")
    assert ok


# --------------------------------------------------------------------------
# 5. Insurance with the headline parameters
# --------------------------------------------------------------------------

def _slope(p, eps):
    v = np.array([ins.voi_epsilon(FIG2, p, e) for e in eps])
    if np.any(v <= 0):
        raise DomainError(f"VoI is 0 in double precision for {int((v <= 0).sum())} of {len(v)} epsilons")
    return float(np.polyfit(np.log(eps), np.log(v), 1)[0])


def test_criterion_5_insurance_reproduction(capsys):
    start = time.perf_counter()
    checks = {}
    p_star = ins.threshold(FIG2)
    checks[f"p* = {p_star:.6g} within 0.334 +- 0.002"] = abs(p_star - 0.334) <= 0.002

    eps = np.logspace(-2, -5, 7)
    for label, p, lo, hi in (("at p*", p_star, 0.95, 1.05), ("at p*+0.1", p_star + 0.1, 1.95, 2.05)):
        try:
            s = _slope(p, eps)
            checks[f"slope {label} = {s:.4f} in [{lo}, {hi}]"] = lo <= s <= hi
        except DomainError as exc:
            checks[f"slope {label} undefined ({exc})"] = False
    try:
        zeros = [ins.voi_epsilon(FIG2, p_star - 0.05, e) for e in (1e-3, 1e-4, 1e-5)]
        checks["VoI exactly 0 at p*-0.05"] = all(z == 0.0 for z in zeros)
    except DomainError as exc:
        checks[f"VoI at p*-0.05 undefined ({exc})"] = False

    A = ins.insurance_action_set(FIG2, np.arange(0.0, 2001.0))
    q = np.linspace(0.05, 0.95, 181)
    err = float(np.abs(values(A, np.column_stack([1 - q, q])) - ins.insurance_value_function(FIG2, q)).max())
    checks[f"grid sup error {err:.1e} <= 1e-3"] = err <= 1e-3

    elapsed = time.perf_counter() - start
    checks[f"runtime {elapsed:.2f} s < 10 s"] = elapsed < 10.0
    failed = [k for k, v in checks.items() if not v]
    passed = [k for k, v in checks.items() if v]
    note = "; ".join(f"{'ok' if v else 'FAILED'} {k}" for k, v in checks.items())
    announce(capsys, 5, not failed, note)
    assert not failed, f"failed: {failed}; passed: {passed}"


# --------------------------------------------------------------------------
# 6. Marginal-value classification grid
# --------------------------------------------------------------------------

def test_criterion_6_table2(capsys):
    start = time.perf_counter()
    table = table2_harness()
    refined = table2_harness(nodes=128, n_max=5)
    elapsed = time.perf_counter() - start
    matches = table.rows == list(TABLE2) and table.grid() == list(TABLE2.values())
    stable = refined.grid() == table.grid()
    ok = matches and stable and elapsed < 60.0
    cells = sum(a == b for row, exp in zip(table.grid(), TABLE2.values()) for a, b in zip(row, exp))
    announce(capsys, 6, ok, f"{cells}/24 cells match, stable under refinement: {stable}, {elapsed:.1f} s")
    assert ok


# --------------------------------------------------------------------------
# 7. Numerical hygiene
# --------------------------------------------------------------------------

def test_criterion_7_hygiene(capsys):
    rng = np.random.default_rng(7)
    bad, drawn, biggest = [], 0, 0.0
    while drawn < SUITE:
        params = InsuranceParams(
            rng.uniform(1e-3, 0.999),
            float(np.exp(rng.uniform(np.log(1e-3), np.log(100.0)))),
            float(np.exp(rng.uniform(np.log(1e-2), np.log(1e4)))),
            float(np.exp(rng.uniform(np.log(1e-2), np.log(50.0)))),
        )
        # utilities lie in [1 - exp(R fee), 1]; past R fee ~ 709 the value
        # itself is not representable
        if params.R * params.fee > 700:
            continue
        drawn += 1
        biggest = max(biggest, params.R * (1 - params.alpha) * params.wealth)
        p = float(rng.uniform(1e-6, 1 - 1e-6))
        try:
            with np.errstate(over="raise", invalid="raise", divide="raise"):
                out = [
                    ins.expected_utility_no_insurance(params, p),
                    ins.expected_utility(params, p, float(max(0.0, ins.optimal_indemnity(params, p)))),
                    ins.delta(params, p),
                    ins.insurance_value_function(params, p),
                    ins.optimal_indemnity(params, p),
                    *ins.insurance_value_function(params, np.linspace(0.01, 0.99, 25)),
                ]
            if not all(np.isfinite(out)):
                bad.append(params)
        except FloatingPointError:
            bad.append(params)
    ok = not bad
    announce(capsys, 7, ok, f"{SUITE - len(bad)}/{SUITE} draws finite under raise-on-overflow (largest R(1-alpha)w = {biggest:.0f})")
    assert ok
