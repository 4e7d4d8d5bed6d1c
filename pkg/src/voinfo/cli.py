"""Command-line front end.

Subcommands: ``value``, ``voi``, ``bounds``, ``confidence``, ``classify``,
``insurance`` and ``table2``.  JSON goes to ``--output`` (stdout when
omitted); every output carries a metadata block echoing the run config
and tolerances, and nothing time-dependent, so identical runs produce
identical bytes.

Exit codes: 0 success, 2 unparsable input, 3 invalid input, 4 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis as an
from . import insurance as ins
from .errors import ConvergenceFailure, InvalidInput, NotFlexible, NotUndecided, ParseError, QuadratureResidual, VoIError
from .geometry import TOL_FACE, TOL_FEAS, TOL_KKT, ActionSet, belief2, quadratic_scoring_body
from .marginal import REGIMES, table2_harness
from .model import TOL_BAYES, as_prior, dumps_json, load_problem_file, to_action_set, write_csv

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3, 4

COMMANDS = ("value", "voi", "bounds", "confidence", "classify", "insurance", "table2")


@dataclass
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    prior: str | None = None
    epsilon: float = 0.05
    grid_pitch: float | None = None
    seed: int = 0
    format: str = "json"
    norm: str = "auto"
    theorem: str = "auto"
    alpha: float = ins.FIG2.alpha
    fee: float = ins.FIG2.fee
    wealth: float = ins.FIG2.wealth
    risk_aversion: float = ins.FIG2.risk_aversion
    data_dir: str | None = None
    nodes: int = 64
    n_max: int = 4

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise InvalidInput(f"unknown config fields: {', '.join(unknown)}")
        if d.get("command") not in COMMANDS:
            raise InvalidInput(f"unknown command {d.get('command')!r}")
        return cls(**d)

    def as_dict(self):
        return asdict(self)


def metadata(cfg):
    return {
        "tool": "voinfo",
        "version": __version__,
        "config": cfg.as_dict(),
        "tolerances": {
            "feasibility": TOL_FEAS,
            "face": TOL_FACE,
            "kkt": TOL_KKT,
            "bayes": TOL_BAYES,
            "certificate": "1e-7*(1+|voi|)",
        },
    }


def _norm(cfg, dim):
    # "auto": distance in the second coordinate for two states, Euclidean otherwise
    if cfg.norm == "auto":
        return np.inf if dim == 2 else 2
    return {"1": 1, "2": 2, "inf": np.inf}[cfg.norm]


# --------------------------------------------------------------------------
# Loading
# --------------------------------------------------------------------------

def _body_from_doc(doc):
    kind = doc.get("kind")
    if kind == "quadratic_scoring":
        return quadratic_scoring_body()
    if kind == "insurance":
        try:
            params = ins.InsuranceParams(
                float(doc.get("alpha", ins.FIG2.alpha)),
                float(doc.get("fee", ins.FIG2.fee)),
                float(doc.get("wealth", ins.FIG2.wealth)),
                float(doc.get("risk_aversion", ins.FIG2.risk_aversion)),
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), "body") from None
        if doc.get("grid_points"):
            grid = np.linspace(0.0, float(doc.get("grid_max", 2 * params.wealth)), int(doc["grid_points"]))
            return ins.insurance_action_set(params, grid)
        return ins.insurance_body(params)
    raise ParseError(f"unknown body kind {kind!r}", "body.kind")


def _parse_prior(text, dim):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise ParseError(f"cannot read prior {text!r}", "--prior") from None
    if len(vals) == 1 and dim == 2:
        vals = [1.0 - vals[0], vals[0]]
    return as_prior(vals, dim)


def load(cfg):
    if not cfg.input_path:
        raise InvalidInput("--input is required for this command")
    pf = load_problem_file(cfg.input_path)
    body = to_action_set(pf.problem) if pf.problem is not None else _body_from_doc(pf.body)
    prior = pf.prior if cfg.prior is None else _parse_prior(cfg.prior, body.dim)
    return body, prior, pf.information


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def _kinks_2state(body):
    """State-2 coordinates where several actions tie."""
    out = set()
    if isinstance(body, ActionSet):
        V = body.vertices
        for i in range(len(V)):
            for j in range(i + 1, len(V)):
                d = V[j] - V[i]
                # <(1-t, t), d> = 0
                denom = d[1] - d[0]
                if denom == 0:
                    continue
                t = -d[0] / denom
                if 0.0 <= t <= 1.0 and an.affine_dim(body.face(belief2(t))) >= 1:
                    out.add(float(t))
    else:
        out.update(float(t) for t in body.kinks)
    return sorted(out)


def cmd_value(cfg, out):
    body, _, _ = load(cfg)
    rows = []
    if body.dim == 2:
        n = int(round(1.0 / cfg.grid_pitch)) if cfg.grid_pitch else 2000
        ts = set(np.arange(n + 1) / n)
        kinks = _kinks_2state(body)
        ts.update(kinks)
        grid = [belief2(t) for t in sorted(ts)]
    else:
        n = int(round(1.0 / cfg.grid_pitch)) if cfg.grid_pitch else (100 if body.dim == 3 else 10)
        grid = list(an.simplex_lattice(body.dim, n))
        kinks = []
    for p in grid:
        try:
            face = body.face(p)
            fdim = an.affine_dim(face)
        except VoIError:
            fdim = 0
        rows.append([*p, body.support(p), fdim])
    header = [f"p_{k + 1}" for k in range(body.dim)] + ["value", "face_dim"]
    meta = metadata(cfg)
    meta["kinks"] = kinks
    if cfg.format == "csv":
        write_csv(out, header, rows, meta)
    else:
        out.write(dumps_json({"metadata": meta, "columns": header, "rows": rows, "kinks": kinks}))


def _certificates(cfg, body, prior, Q):
    report = an.classify_prior(body, prior)
    certs, warnings = [], []
    wanted = cfg.theorem
    if wanted in ("auto", "T1"):
        if isinstance(body, ActionSet):
            certs.append(an.theorem1_bounds(body, prior, Q, cfg.epsilon, cfg.grid_pitch or 1e-3))
        elif wanted == "T1":
            warnings.append("T1 needs a finite action set")
    if wanted in ("auto", "T2") and (wanted == "T2" or report.regime == an.UNDECIDED):
        try:
            if not isinstance(body, ActionSet):
                raise NotUndecided("T2 needs a finite action set")
            certs.append(an.theorem2_bounds(body, prior, Q, ord=_norm(cfg, body.dim)))
        except NotUndecided as exc:
            warnings.append(f"regime mismatch: {exc}")
    if wanted in ("auto", "T3") and (wanted == "T3" or report.regime == an.FLEXIBLE):
        try:
            certs.append(
                an.theorem3_bounds(body, prior, Q, cfg.grid_pitch or 1e-3, ord=_norm(cfg, body.dim), report=report)
            )
        except NotFlexible as exc:
            warnings.append(f"regime mismatch: {exc}")
    return report, certs, warnings


def _need_info(Q):
    if Q is None:
        raise InvalidInput("the problem file has no information structure")
    return Q


def cmd_voi(cfg, out):
    body, prior, Q = load(cfg)
    Q = _need_info(Q)
    rec = {"metadata": metadata(cfg), "prior": prior, "voi": an.voi(body, prior, Q)}
    if isinstance(body, ActionSet):
        rec["is_valuable"] = an.is_valuable(body, prior, Q)
    rec["regime"] = an.classify_prior(body, prior).regime
    out.write(dumps_json(rec))


def cmd_bounds(cfg, out):
    body, prior, Q = load(cfg)
    Q = _need_info(Q)
    report, certs, warnings = _certificates(cfg, body, prior, Q)
    rec = {
        "metadata": metadata(cfg),
        "prior": prior,
        "regime": report.regime,
        "voi": an.voi(body, prior, Q),
        "constants": report.constants,
        "certificates": [c.as_dict() for c in certs],
        "warnings": warnings,
    }
    out.write(dumps_json(rec))


def cmd_confidence(cfg, out):
    body, prior, _ = load(cfg)
    if not isinstance(body, ActionSet):
        raise InvalidInput("confidence sets are computed for finite action sets")
    C = an.confidence_set(body, prior)
    rec = {"metadata": metadata(cfg), "prior": prior, **an.polytope_as_dict(C)}
    out.write(dumps_json(rec))


def cmd_classify(cfg, out):
    body, prior, _ = load(cfg)
    rec = {"metadata": metadata(cfg), "prior": prior, **an.classify_prior(body, prior).as_dict()}
    out.write(dumps_json(rec))


EPS_GRID = np.logspace(-2, -5, 7)


def _slope_block(params, p):
    if not (0.0 < p < 1.0) or EPS_GRID[0] >= min(p, 1.0 - p):
        return {"belief": p, "slope": None, "note": "belief too close to the boundary for the epsilon grid"}
    vals = np.array([ins.voi_epsilon(params, p, e) for e in EPS_GRID])
    pos = vals > 0
    slope = float(np.polyfit(np.log(EPS_GRID[pos]), np.log(vals[pos]), 1)[0]) if pos.sum() >= 2 else None
    return {
        "belief": p,
        "epsilon": EPS_GRID,
        "voi": vals,
        "monetary_equivalent": [ins.monetary_equivalent(params, v) for v in vals],
        "slope": slope,
        "exact_zero": bool(np.all(vals == 0.0)),
    }


def cmd_insurance(cfg, out):
    params = ins.InsuranceParams(cfg.alpha, cfg.fee, cfg.wealth, cfg.risk_aversion)
    t_star = ins.threshold_logit(params)
    p_star = ins.threshold(params)
    rec = {
        "metadata": metadata(cfg),
        "params": params.as_dict(),
        "threshold": p_star,
        "threshold_logit": t_star,
        "zero_indemnity_logit": ins.hat_logit(params),
        "regimes": {
            "at_threshold": _slope_block(params, p_star),
            "above": _slope_block(params, p_star + 0.1),
            "below": _slope_block(params, p_star - 0.05),
        },
    }
    if cfg.data_dir:
        d = Path(cfg.data_dir)
        d.mkdir(parents=True, exist_ok=True)
        n = int(round(1.0 / cfg.grid_pitch)) if cfg.grid_pitch else 2000
        I = np.linspace(0.0, 2.0 * params.wealth, 2001)
        pay = ins.contract_payoffs(params, I)
        meta = metadata(cfg)
        write_csv(d / "boundary.csv", ["indemnity", "payoff_no_loss", "payoff_loss"],
                  [[i, a, b] for i, (a, b) in zip(I, pay)], meta)
        qs = np.arange(1, n) / n
        vs = ins.insurance_value_function(params, qs)
        write_csv(d / "value.csv", ["q", "value"], [[q, v] for q, v in zip(qs, vs)], meta)
        rec["data_files"] = ["boundary.csv", "value.csv"]
    out.write(dumps_json(rec))


def cmd_table2(cfg, out):
    table = table2_harness(nodes=cfg.nodes, n_max=cfg.n_max)
    if cfg.format == "csv":
        write_csv(out, ["family", *REGIMES], [[r, *row] for r, row in zip(table.rows, table.grid())],
                  metadata(cfg))
    else:
        out.write(dumps_json({"metadata": metadata(cfg), **table.as_dict()}))


HANDLERS = {
    "value": cmd_value,
    "voi": cmd_voi,
    "bounds": cmd_bounds,
    "confidence": cmd_confidence,
    "classify": cmd_classify,
    "insurance": cmd_insurance,
    "table2": cmd_table2,
}


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="voinfo", description="Value of information analyses.")
    parser.add_argument("--version", action="version", version=f"voinfo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", dest="input_path")
        p.add_argument("--output", dest="output_path")
        p.add_argument("--prior", help="comma-separated belief, or the state-2 probability for two states")
        p.add_argument("--epsilon", type=float, default=0.05)
        p.add_argument("--grid-pitch", type=float)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv"), default="csv" if name in ("value", "table2") else "json")
        p.add_argument("--norm", choices=("auto", "1", "2", "inf"), default="auto")
        if name == "bounds":
            p.add_argument("--theorem", choices=("auto", "T1", "T2", "T3"), default="auto")
        if name == "insurance":
            p.add_argument("--alpha", type=float, default=ins.FIG2.alpha)
            p.add_argument("--fee", type=float, default=ins.FIG2.fee)
            p.add_argument("--wealth", type=float, default=ins.FIG2.wealth)
            p.add_argument("--risk-aversion", type=float, default=ins.FIG2.risk_aversion)
            p.add_argument("--data-dir")
        if name == "table2":
            p.add_argument("--nodes", type=int, default=64)
            p.add_argument("--n-max", type=int, default=4)
    return parser


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ns = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_dict(vars(ns))
        buf = io.StringIO()
        HANDLERS[cfg.command](cfg, buf)
    except ParseError as exc:
        print(f"parse error: {exc}", file=stderr)
        return EXIT_PARSE
    except (ConvergenceFailure, QuadratureResidual) as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (VoIError, FileNotFoundError) as exc:
        print(f"invalid input: {exc}", file=stderr)
        return EXIT_INVALID
    text = buf.getvalue()
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
