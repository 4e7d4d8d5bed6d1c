"""Decision problems, priors and information structures, plus file I/O.

Problem files are JSON::

    {"states": [...], "decisions": [...], "payoffs": [[...], ...],
     "prior": [...],
     "information": {"atoms": [{"posterior": [...], "weight": w}, ...]}}

``information`` is optional.  Instead of ``payoffs`` a file may name a
closed-form body, ``"body": {"kind": "quadratic_scoring"}`` or
``"body": {"kind": "insurance", "alpha": ..., "fee": ..., "wealth": ...,
"risk_aversion": ...}``.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, InvalidInput, ParseError, ValidationError
from .geometry import TOL_FEAS, ActionSet, as_belief, hull_reduce

TOL_BAYES = 1e-8
EPS_SUPPORT = 1e-12


@dataclass(frozen=True)
class DecisionProblem:
    """Finite decision problem: payoff ``payoffs[d, k]`` of decision d in state k."""

    state_names: tuple
    decision_names: tuple
    payoffs: np.ndarray

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.payoffs, dtype=float))
        states, decisions = tuple(self.state_names), tuple(self.decision_names)
        problems = []
        if len(states) < 2:
            problems.append("need at least two states")
        if len(decisions) < 1:
            problems.append("need at least one decision")
        if g.shape != (len(decisions), len(states)):
            problems.append(
                f"payoff matrix has shape {g.shape}, expected {(len(decisions), len(states))}"
            )
        if not np.all(np.isfinite(g)):
            problems.append("payoffs must be finite")
        if problems:
            raise ValidationError(problems)
        g.setflags(write=False)
        object.__setattr__(self, "payoffs", g)
        object.__setattr__(self, "state_names", states)
        object.__setattr__(self, "decision_names", decisions)

    @property
    def n_states(self):
        return len(self.state_names)

    @classmethod
    def from_payoffs(cls, payoffs):
        g = np.atleast_2d(np.asarray(payoffs, dtype=float))
        return cls(
            tuple(f"s{k + 1}" for k in range(g.shape[1])),
            tuple(f"d{d + 1}" for d in range(g.shape[0])),
            g,
        )


def to_action_set(problem):
    """Convex hull of the payoff rows, reduced to its extreme points."""
    return hull_reduce(list(problem.payoffs))


def as_prior(p, dim=None):
    """A full-support belief; every coordinate must be at least 1e-12."""
    p = as_belief(p, dim)
    if p.min() < EPS_SUPPORT:
        raise InvalidInput(f"prior must have full support, got {p}")
    return p


@dataclass(frozen=True)
class InformationStructure:
    """Finite distribution of posterior beliefs.

    Bayes plausibility (weights average the posteriors to the prior) is
    checked against a prior by :func:`validate_information_structure`.
    """

    posteriors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        q = np.atleast_2d(np.asarray(self.posteriors, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if q.shape[0] == 0 or q.shape[0] != w.shape[0]:
            raise DimensionMismatch("need one weight per posterior and at least one atom")
        q.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "posteriors", q)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, atoms):
        atoms = list(atoms)
        return cls(np.array([a[0] for a in atoms], dtype=float), np.array([a[1] for a in atoms]))

    @classmethod
    def null(cls, prior):
        return cls(np.asarray(prior, dtype=float)[None, :], np.ones(1))

    @property
    def dim(self):
        return self.posteriors.shape[1]

    def __len__(self):
        return self.weights.shape[0]

    def mean(self):
        return self.weights @ self.posteriors

    def expect(self, fn):
        """Expectation of ``fn(posterior)`` under the weights."""
        return float(sum(w * fn(q) for q, w in zip(self.posteriors, self.weights)))


@dataclass
class ValidationReport:
    weight_sum: float
    bayes_residual: np.ndarray
    nonpositive_weights: list = field(default_factory=list)
    off_simplex_atoms: list = field(default_factory=list)
    messages: list = field(default_factory=list)

    @property
    def valid(self):
        return not self.messages

    def raise_if_invalid(self):
        if not self.valid:
            raise ValidationError(self.messages)


def validate_information_structure(Q, prior, tol_bayes=TOL_BAYES, tol_feas=TOL_FEAS):
    """Check weights, simplex membership of each atom and Bayes plausibility."""
    prior = np.asarray(prior, dtype=float)
    msgs = []
    if Q.dim != prior.shape[0]:
        resid = np.full(prior.shape[0], np.inf)
        return ValidationReport(float(Q.weights.sum()), resid, messages=[
            f"posteriors have {Q.dim} states, prior has {prior.shape[0]}"
        ])
    wsum = float(Q.weights.sum())
    bad_w = [i for i, w in enumerate(Q.weights) if not w > 0]
    if bad_w:
        msgs.append(f"non-positive weights at atoms {bad_w}")
    if abs(wsum - 1.0) > tol_feas:
        msgs.append(f"weights sum to {wsum!r}, not 1")
    off = [
        i
        for i, q in enumerate(Q.posteriors)
        if not np.all(np.isfinite(q)) or q.min() < -tol_feas or abs(q.sum() - 1.0) > tol_feas
    ]
    if off:
        msgs.append(f"posteriors off the simplex at atoms {off}")
    resid = np.abs(Q.mean() - prior)
    if not np.all(resid <= tol_bayes):
        msgs.append(f"Bayes plausibility residual {resid.max():.3g} exceeds {tol_bayes:g}")
    return ValidationReport(wsum, resid, bad_w, off, msgs)


def garble(Q, prior, mix):
    """Contract every posterior toward the prior: ``q -> prior + mix (q - prior)``."""
    rep = validate_information_structure(Q, prior)
    if not rep.valid:
        raise InvalidInput("; ".join(rep.messages))
    if not 0.0 <= mix <= 1.0:
        raise InvalidInput(f"mix must lie in [0, 1], got {mix}")
    prior = np.asarray(prior, dtype=float)
    return InformationStructure(prior + mix * (Q.posteriors - prior), Q.weights.copy())


# --------------------------------------------------------------------------
# File formats
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemFile:
    """Everything a problem file can hold."""

    problem: DecisionProblem | None
    prior: np.ndarray
    information: InformationStructure | None = None
    body: dict | None = None


def _field(doc, key, path, required=True):
    if key not in doc:
        if required:
            raise ParseError("missing field", f"{path}.{key}" if path else key)
        return None
    return doc[key]


def _numbers(value, where, depth=1):
    arr = np.asarray(value, dtype=object)
    try:
        out = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"expected numbers ({exc})", where) from None
    if out.ndim != depth or arr.dtype == bool:
        raise ParseError(f"expected a {depth}-d numeric array", where)
    return out


def parse_problem(doc):
    """Build a :class:`ProblemFile` from a decoded JSON document."""
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object", "$")
    body = doc.get("body")
    problem = None
    if body is None:
        payoffs = _numbers(_field(doc, "payoffs", ""), "payoffs", depth=2)
        states = doc.get("states") or [f"s{k + 1}" for k in range(payoffs.shape[1])]
        decisions = doc.get("decisions") or [f"d{d + 1}" for d in range(payoffs.shape[0])]
        problem = DecisionProblem(tuple(states), tuple(decisions), payoffs)
    elif not isinstance(body, dict) or "kind" not in body:
        raise ParseError("body must be an object with a 'kind'", "body")

    raw_prior = _field(doc, "prior", "")
    prior = _numbers(raw_prior, "prior")
    errors = []
    try:
        prior = as_prior(prior)
    except (InvalidInput, DimensionMismatch) as exc:
        errors.append(f"prior: {exc}")

    info = None
    if doc.get("information") is not None:
        atoms = _field(doc["information"], "atoms", "information")
        if not isinstance(atoms, list) or not atoms:
            raise ParseError("atoms must be a non-empty list", "information.atoms")
        posts, weights = [], []
        for i, atom in enumerate(atoms):
            where = f"information.atoms[{i}]"
            if not isinstance(atom, dict):
                raise ParseError("atom must be an object", where)
            posts.append(_numbers(_field(atom, "posterior", where), where + ".posterior"))
            weights.append(_numbers([_field(atom, "weight", where)], where + ".weight")[0])
        if len({len(p) for p in posts}) != 1:
            raise ParseError("posteriors have different lengths", "information.atoms")
        info = InformationStructure(np.array(posts), np.array(weights))
        if not errors:
            errors += validate_information_structure(info, prior).messages
    if errors:
        raise ValidationError(errors)
    return ProblemFile(problem, prior, info, body)


def load_problem(path):
    """Read a problem file; returns ``(problem, prior, information)``.

    ``problem`` is ``None`` for files that name a closed-form ``body``; use
    :func:`load_problem_file` to get at it.
    """
    pf = load_problem_file(path)
    return pf.problem, pf.prior, pf.information


def load_problem_file(path):
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise ParseError("file is empty", f"{path}:1")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    return parse_problem(doc)


def problem_to_dict(problem, prior, information=None):
    doc = {
        "states": list(problem.state_names),
        "decisions": list(problem.decision_names),
        "payoffs": problem.payoffs.tolist(),
        "prior": np.asarray(prior, dtype=float).tolist(),
    }
    if information is not None:
        doc["information"] = {
            "atoms": [
                {"posterior": q.tolist(), "weight": float(w)}
                for q, w in zip(information.posteriors, information.weights)
            ]
        }
    return doc


_FLOAT_TAG = "\ue000f17:"
_FLOAT_RE = re.compile('"' + re.escape(_FLOAT_TAG) + '([^"]*)"')


def _tag_floats(obj):
    if isinstance(obj, dict):
        return {str(k): _tag_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _tag_floats(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return _FLOAT_TAG + format17(x)
    return obj


def format17(x):
    """Float to text with 17 significant digits."""
    return format(float(x), ".17g")


def dumps_json(record):
    """JSON text with every float written to 17 significant digits.

    Non-finite floats become the strings ``"inf"``, ``"-inf"``, ``"nan"``.
    """
    text = json.dumps(_tag_floats(record), indent=2, ensure_ascii=False)
    return _FLOAT_RE.sub(r"\1", text) + "\n"


def save_results(path, record):
    """Write a JSON record (see :func:`dumps_json`)."""
    Path(path).write_text(dumps_json(record), encoding="utf-8")


def write_csv(path_or_file, header, rows, metadata=None):
    """RFC-4180 CSV with a header row; floats at 17 significant digits.

    ``metadata`` lines are written first, each prefixed with ``#``.
    """
    def cell(x):
        if isinstance(x, (float, np.floating)):
            x = float(x)
            if math.isinf(x):
                return "inf" if x > 0 else "-inf"
            return format17(x)
        return x

    def emit(fh):
        for key, value in (metadata or {}).items():
            fh.write(f"# {key}: {json.dumps(_plain(value), sort_keys=True)}\r\n")
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([cell(x) for x in row])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
            emit(fh)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def read_csv(path):
    """Read a CSV written by :func:`write_csv`; returns ``(header, rows)``."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [row for row in reader]
