"""Command-line entry point: ``bimatch <subcommand> [options]``.

Every option can also come from a flat ``key = value`` file passed with
``--config``; keys are the long option names (``delta-prime`` or
``delta_prime``) and command-line flags win over file values. Unit ids on the
command line and in every written file are 1-based.

Exit codes: 0 success, 1 reproduction tolerance failure, 2 invalid input,
3 no matches for any requested unit.
"""

from __future__ import annotations

import argparse
import glob
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

import numpy as np
import pandas as pd

from .data import BalanceCovariateSet, balance_covariates, validate
from .estimate import BiasBoundInputs, NoMatches, bias_bound, impute_and_estimate
from .exposure import parse_rule
from .inference import global_test, wald
from .io import IngestError, jsonable, load_panel, read_json, version_string, write_json
from .matching import BACKENDS, Method, MatchSet, NoMatchesPossible, TuningParams, build_problem, solve

log = logging.getLogger("bimatch")

SUMMARY_COLUMNS = {"bias": "Bias", "mse": "MSE", "cover": "Cover", "prop": "Prop", "n_reps": "Reps"}
EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NO_MATCHES = 0, 1, 2, 3


class UsageError(Exception):
    """Bad options or inputs; reported with exit code 2."""


# --------------------------------------------------------------------------
# parser


def _add_tuning(p):
    g = p.add_argument_group("tuning")
    g.add_argument("--delta", type=float, default=2.0, help="mean time-gap bound")
    g.add_argument("--delta-prime", type=float, default=0.05, help="mean covariate-gap bound ('inf' disables)")
    g.add_argument("--eps", type=int, default=6, help="per-match time-gap bound")
    g.add_argument("--delta-dprime", type=float, default=None, help="per-match covariate-gap bound")
    g.add_argument("--ell", type=float, default=None, help="auxiliary interval length")
    g.add_argument("--kpow", type=int, default=None, help="auxiliary power order K")
    g.add_argument("--unadjusted", action="store_true", help="drop the covariate balance constraints")
    g.add_argument("--backend", choices=BACKENDS, default="auto")
    g.add_argument("--time-limit", type=float, default=60.0, help="exact-solver time limit (s)")
    g.add_argument("--seed", type=int, default=0)


def _add_covariate_selection(p):
    g = p.add_argument_group("balance covariates (comma lists; 'none' for no columns; default all)")
    g.add_argument("--w", default=None, help="outcome-unit covariates")
    g.add_argument("--x", default=None, help="interventional covariates, summarized with q weights")
    g.add_argument("--p", default=None, help="network covariates, summarized with q weights")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bimatch", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=version_string())
    sub = parser.add_subparsers(dest="command", metavar="command")

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--config", default=None, help="flat key = value option file")
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    p = cmd("simulate", "Monte-Carlo study of one simulated design")
    p.add_argument("--scenario", choices=list("abcde"), default="a")
    p.add_argument("--sparsity", choices=["dense", "medium", "sparse"], default="medium")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--methods", default="1-1,1-1/2,1-2")
    p.add_argument("--both", action="store_true", help="run adjusted and unadjusted matching")
    p.add_argument("--no-naive", action="store_true")
    p.add_argument("--estimand", choices=["all", "exposed", "matched"], default="all")
    p.add_argument("--kernel", choices=["printed", "intended"], default="printed")
    p.add_argument("--heterogeneous", action="store_true")
    p.add_argument("--ar1-rho", type=float, default=None)
    p.add_argument("--network-confounding", action="store_true")
    p.add_argument("--null-effects", action="store_true")
    p.add_argument("--d", type=int, default=None, help="exposure threshold override")
    p.add_argument("--N", type=int, default=50)
    p.add_argument("--M", type=int, default=200)
    p.add_argument("--T", type=int, default=400)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dump-panel", action="store_true", help="also write replication 0 as CSV files")
    p.add_argument("--out", default=None)
    _add_tuning(p)

    p = cmd("match", "match one outcome unit")
    p.add_argument("--data", default=None, help="directory of panel CSV files")
    p.add_argument("--unit", type=int, default=None)
    p.add_argument("--exposure", default=None, help="threshold:d=K or proportion:th=X")
    p.add_argument("--method", default="1-1")
    p.add_argument("--out", default=None, help="matchset JSON path (default stdout)")
    _add_tuning(p)
    _add_covariate_selection(p)

    p = cmd("estimate", "effect estimate and Wald inference from a matchset")
    p.add_argument("--matchset", default=None)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--one-sided", action="store_true")
    p.add_argument("--out", default=None, help="estimate JSON path (default stdout)")
    p.add_argument("--inference-out", default=None, help="inference JSON path")

    p = cmd("test-global", "FDR-adjusted global null test over per-unit inference files")
    p.add_argument("inputs", nargs="*", help="inference JSON files or directories searched recursively")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", default=None)

    p = cmd("run", "full pipeline over outcome units and methods")
    p.add_argument("--data", default=None)
    p.add_argument("--units", default="all", help="'all' or a comma list of 1-based ids")
    p.add_argument("--exposure", default=None)
    p.add_argument("--methods", default="1-1,1-1/2,1-2")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    _add_tuning(p)
    _add_covariate_selection(p)

    p = cmd("reproduce", "re-run a reference simulation table and score it")
    p.add_argument("--table", default=None, help="2, 3, D1, D3, D4, D5 or D6")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--backend", choices=BACKENDS, default="auto")
    p.add_argument("--out", default=None)

    p = cmd("bound", "analytic bias bound for given tuning parameters")
    p.add_argument("--delta", type=float, default=2.0)
    p.add_argument("--delta-prime", type=float, default=0.05)
    p.add_argument("--beta2", type=float, default=0.0, help="time coefficient (linear model)")
    p.add_argument("--beta3-l1", type=float, default=0.0)
    p.add_argument("--beta4-l1", type=float, default=0.0)
    p.add_argument("--beta5-l1", type=float, default=0.0)
    p.add_argument("--c", type=float, default=None, help="derivative bound (smooth model)")
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--ell", type=float, default=None)
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--support", action="append", default=None, help="a,b covariate support; repeat")
    p.add_argument("--out", default=None)
    return parser


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _truthy(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {value!r}")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse ``argv``, filling unset options from ``--config`` when given."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        raise SystemExit(EXIT_INVALID)
    if not args.config:
        return args
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    cfg = read_config(args.config)
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in cfg.items():
        if key not in actions or key in ("help", "config"):
            raise UsageError(f"config key {key!r} is not an option of {args.command}")
        action = actions[key]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[key] = _truthy(value)
        elif isinstance(action, argparse._AppendAction):
            defaults[key] = [v.strip() for v in value.split(";") if v.strip()]
        else:
            defaults[key] = value  # argparse converts string defaults with the option's type
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


# --------------------------------------------------------------------------
# shared helpers


def _params(args) -> TuningParams:
    try:
        return TuningParams(delta=args.delta, delta_prime=args.delta_prime, eps=args.eps,
                            delta_dprime=args.delta_dprime, ell=args.ell, kpow=args.kpow,
                            adjust=not args.unadjusted)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _methods(text: str) -> List[Method]:
    try:
        return [Method.parse(m.strip()) for m in text.split(",") if m.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def method_slug(method) -> str:
    return str(Method.parse(method)).replace("/", "")


def _selection(text):
    if text is None:
        return None
    text = text.strip()
    if text.lower() == "none":
        return []
    return [s.strip() for s in text.split(",") if s.strip()]


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required for {args.command}")


def _alpha(a):
    if not 0 < a < 1:
        raise UsageError("alpha must lie in (0, 1)")
    return a


def _load(directory):
    if not os.path.isdir(directory):
        raise UsageError(f"data directory {directory} does not exist")
    loaded = load_panel(directory)
    if loaded.dataset is not None:
        report = validate(loaded.dataset)
        if not report.ok:
            raise UsageError(f"validation failed:\n{report}")
    return loaded


def unit_inputs(loaded, j: int, rule: Optional[str], selection=(None, None, None)):
    """Exposure, outcome and balance covariates of 0-based unit ``j``.

    Periods with a missing outcome or exposure are left out of matching.
    """
    ds = loaded.dataset
    if rule:
        if ds is None:
            raise UsageError("missing exposure source: an exposure rule needs treatments.csv and network.csv")
        try:
            E = parse_rule(rule)(ds, j).E.astype(float)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    elif loaded.exposures is not None:
        E = loaded.exposures[:, j].astype(float)
    else:
        raise UsageError("missing exposure source: pass --exposure or provide exposures.csv")
    Y = loaded.Y[:, j]
    E = np.where(np.isnan(Y), np.nan, E)
    if ds is None:
        return E, Y, BalanceCovariateSet.empty(len(E))
    w, x, p = selection
    try:
        cov = balance_covariates(ds, j, exposure=E, w=w, x=x, p=p, q=loaded.q_weights)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    except ValueError:
        # a single exposure class: matching reports no matches anyway
        cov = balance_covariates(ds, j, exposure=None, w=w, x=x, p=p, q=loaded.q_weights)
    return E, Y, cov


def match_unit(E, Y, cov, params, method, backend, seed, time_limit, unit_label) -> MatchSet:
    """Solve one unit; ``NoMatchesPossible`` becomes an empty set."""
    try:
        problem = build_problem(E, cov, params, method)
    except NoMatchesPossible:
        n_exp = int(np.nansum(E == 1))
        return MatchSet([], [], method, params, optimality="proven", upper_bound=0, n_exposed=n_exp,
                        backend="trivial", unit=unit_label)
    return solve(problem, backend=backend, seed=seed, time_limit=time_limit, unit=unit_label)


def matchset_payload(ms: MatchSet, Y, E) -> dict:
    out = ms.to_dict()
    out["outcomes"] = [None if math.isnan(v) else float(v) for v in np.asarray(Y, float)]
    out["exposure"] = [None if math.isnan(v) else int(v) for v in np.asarray(E, float)]
    out["version"] = version_string()
    return out


def _emit(path, payload):
    if path:
        write_json(path, payload)
    else:
        json.dump(jsonable(payload), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


def estimate_payloads(ms: MatchSet, Y, alpha, one_sided=False):
    """``(estimate, inference)`` report dicts; ``None`` pair for an empty set."""
    if len(ms) == 0:
        return None, None
    est = impute_and_estimate(ms, Y)
    inf = wald(est, alpha, one_sided=one_sided)
    e = est.to_dict()
    e.update(params=ms.params.to_dict(), version=version_string())
    i = inf.to_dict()
    i.update(unit=ms.unit, method=str(ms.method), version=version_string())
    return e, i


# --------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    from .simulate import ScenarioSpec, run_study, simulate_panel, summarize
    from .io import write_panel
    _need(args, "out")
    _alpha(args.alpha)
    try:
        spec = ScenarioSpec(args.scenario, args.sparsity, N=args.N, M=args.M, T=args.T, seed=args.seed,
                            heterogeneous=args.heterogeneous, ar1_rho=args.ar1_rho,
                            network_confounding=args.network_confounding, null_effects=args.null_effects,
                            kernel=args.kernel, d=args.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    methods = [str(m) for m in _methods(args.methods)]
    params = _params(args)
    records = run_study(spec, args.reps, methods=methods, params=params, alpha=args.alpha,
                        naive=not args.no_naive, unadjusted=args.unadjusted or args.both,
                        adjusted=not args.unadjusted or args.both, workers=args.workers, backend=args.backend)
    os.makedirs(args.out, exist_ok=True)
    for rep, g in records.groupby("rep", sort=True):
        write_json(os.path.join(args.out, "replications", f"rep_{rep + 1:04d}.json"),
                   {"rep": int(rep) + 1, "records": g.drop(columns="rep").to_dict("records")})
    table = summarize(records, args.estimand)
    table.rename(columns=SUMMARY_COLUMNS).to_csv(os.path.join(args.out, "summary.csv"), float_format="%.6g")
    write_json(os.path.join(args.out, "run.json"),
               {"spec": {k: getattr(spec, k) for k in spec.__dataclass_fields__}, "threshold": spec.threshold,
                "params": params.to_dict(), "methods": methods, "reps": args.reps, "alpha": args.alpha,
                "estimand": args.estimand, "version": version_string()})
    if args.dump_panel:
        panel = simulate_panel(spec, 0)
        write_panel(panel.dataset, os.path.join(args.out, "panel_rep_0001"), exposures=panel.E)
    print(table.to_string(float_format=lambda v: f"{v:.3f}"))
    return EXIT_OK


def cmd_match(args) -> int:
    _need(args, "data", "unit")
    loaded = _load(args.data)
    M = loaded.Y.shape[1]
    if not 1 <= args.unit <= M:
        raise UsageError(f"--unit must lie in 1..{M}")
    method = _methods(args.method)[0]
    j = args.unit - 1
    E, Y, cov = unit_inputs(loaded, j, args.exposure, (_selection(args.w), _selection(args.x), _selection(args.p)))
    ms = match_unit(E, Y, cov, _params(args), method, args.backend, args.seed, args.time_limit, args.unit)
    _emit(args.out, matchset_payload(ms, Y, E))
    log.info("unit %d, %s: %d of %d exposed periods matched (%s)", args.unit, method, len(ms), ms.n_exposed,
             ms.optimality)
    return EXIT_OK if len(ms) else EXIT_NO_MATCHES


def cmd_estimate(args) -> int:
    _need(args, "matchset")
    _alpha(args.alpha)
    try:
        payload = read_json(args.matchset)
        ms = MatchSet.from_dict(payload)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read matchset {args.matchset}: {exc}") from exc
    if "outcomes" not in payload:
        raise UsageError("matchset file carries no outcomes; write it with `bimatch match`")
    Y = np.array([np.nan if v is None else v for v in payload["outcomes"]], float)
    try:
        est, inf = estimate_payloads(ms, Y, args.alpha, args.one_sided)
    except NoMatches:
        est = None
    if est is None:
        print("no matched exposed periods; nothing to estimate", file=sys.stderr)
        return EXIT_NO_MATCHES
    _emit(args.out, est)
    if args.inference_out:
        write_json(args.inference_out, inf)
    return EXIT_OK


def _inference_files(inputs):
    files = []
    for item in inputs:
        if os.path.isdir(item):
            files += sorted(glob.glob(os.path.join(item, "**", "inference.json"), recursive=True))
        else:
            files.append(item)
    return files


def cmd_test_global(args) -> int:
    _alpha(args.alpha)
    files = _inference_files(args.inputs)
    if not files:
        raise UsageError("no inference files given")
    units, pvals, missing = [], [], []
    for f in files:
        try:
            d = read_json(f)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read {f}: {exc}") from exc
        label = d.get("unit", f)
        if d.get("p_value") is None:
            missing.append(label)
        else:
            units.append(label)
            pvals.append(float(d["p_value"]))
    if not pvals:
        raise UsageError("none of the inference files carries a p-value")
    res = global_test(pvals, args.alpha, units=units, unavailable=missing)
    out = res.to_dict()
    out["version"] = version_string()
    _emit(args.out, out)
    return EXIT_OK


def _run_unit(loaded, j, rule, selection, params, methods, alpha, backend, seed, time_limit):
    E, Y, cov = unit_inputs(loaded, j, rule, selection)
    rows = []
    for method in methods:
        ms = match_unit(E, Y, cov, params, method, backend, seed, time_limit, j + 1)
        est, inf = estimate_payloads(ms, Y, alpha)
        rows.append((method, matchset_payload(ms, Y, E), est, inf))
    return j, rows


def cmd_run(args) -> int:
    _need(args, "data", "out")
    _alpha(args.alpha)
    loaded = _load(args.data)
    M = loaded.Y.shape[1]
    if args.units.strip().lower() == "all":
        units = list(range(M))
    else:
        try:
            units = [int(u) - 1 for u in args.units.split(",") if u.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --units: {args.units}") from exc
        if any(not 0 <= j < M for j in units):
            raise UsageError(f"--units must lie in 1..{M}")
    methods = _methods(args.methods)
    params = _params(args)
    selection = (_selection(args.w), _selection(args.x), _selection(args.p))
    # fail fast on a missing exposure source before fanning out
    unit_inputs(loaded, units[0], args.exposure, selection)
    task = (args.exposure, selection, params, methods, args.alpha, args.backend, args.seed, args.time_limit)
    if args.workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_run_unit, [loaded] * len(units), units, *[[t] * len(units) for t in task]))
    else:
        results = [_run_unit(loaded, j, *task) for j in units]

    summary, any_match, pvals = [], False, {str(m): ({}, []) for m in methods}
    for j, rows in sorted(results, key=lambda r: r[0]):
        for method, ms_payload, est, inf in rows:
            base = os.path.join(args.out, f"unit_{j + 1}", method_slug(method))
            write_json(os.path.join(base, "matchset.json"), ms_payload)
            n = len(ms_payload["pairs"]) + len(ms_payload["triples"])
            any_match |= n > 0
            if est is not None:
                write_json(os.path.join(base, "estimate.json"), est)
                write_json(os.path.join(base, "inference.json"), inf)
                pvals[str(method)][0][j + 1] = inf["p_value"]
            else:
                pvals[str(method)][1].append(j + 1)
            summary.append(dict(unit=j + 1, method=str(method), estimate=est["tau_hat"] if est else math.nan,
                                ci_lo=inf["ci"][0] if inf else math.nan, ci_hi=inf["ci"][1] if inf else math.nan,
                                p_value=inf["p_value"] if inf else math.nan, n_matches=n,
                                n_exposed=ms_payload["n_exposed"], optimality=ms_payload["optimality"]))
    if M > 1:
        report = {}
        for m, (p, missing) in pvals.items():
            if p:
                res = global_test(list(p.values()), args.alpha, units=list(p), unavailable=missing)
                report[m] = res.to_dict()
            else:
                report[m] = {"unavailable": missing, "global_reject": None}
        write_json(os.path.join(args.out, "global_test.json"),
                   {"alpha": args.alpha, "methods": report, "version": version_string()})
    table = pd.DataFrame(summary)
    text = table.to_string(index=False, float_format=lambda v: f"{v:.4f}")
    with open(os.path.join(args.out, "summary.txt"), "w") as fh:
        fh.write(text + "\n")
    write_json(os.path.join(args.out, "run.json"),
               {"params": params.to_dict(), "methods": [str(m) for m in methods], "alpha": args.alpha,
                "exposure": args.exposure or "exposures.csv", "units": [j + 1 for j in units],
                "backend": args.backend, "seed": args.seed, "version": version_string()})
    print(text)
    if not any_match:
        print("no matches for any requested unit", file=sys.stderr)
        return EXIT_NO_MATCHES
    return EXIT_OK


def cmd_reproduce(args) -> int:
    from .simulate import reproduce
    _need(args, "table")
    try:
        res = reproduce(args.table, args.reps, seed=args.seed, workers=args.workers, backend=args.backend)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    frame = res.frame()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        frame.to_csv(os.path.join(args.out, f"table_{res.table}_checks.csv"), index=False, float_format="%.6g")
        for name, summ in res.summaries.items():
            safe = name.replace("/", "_").replace("=", "")
            summ.to_csv(os.path.join(args.out, f"table_{res.table}_{safe}.csv"), float_format="%.6g")
    for c in res.checks:
        status = {True: "PASS", False: "FAIL", None: "info"}[c.passed]
        ref = "" if c.reference is None else f" (reference {c.reference})"
        rng = "" if not c.checked else f" in [{c.lo}, {c.hi}]"
        print(f"{status:4s} table {c.table} {c.setting:10s} {c.estimator:10s} {c.metric:16s} {c.value:9.4f}{rng}{ref}")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_bound(args) -> int:
    supports = []
    for s in args.support or []:
        try:
            a, b = (float(v) for v in s.split(","))
        except ValueError as exc:
            raise UsageError(f"bad --support {s!r}; expected a,b") from exc
        supports.append((a, b))
    smooth = args.c is not None
    if smooth:
        _need(args, "K", "ell", "T")
    try:
        inputs = BiasBoundInputs(beta2=args.beta2, beta3_l1=args.beta3_l1, beta4_l1=args.beta4_l1,
                                 beta5_l1=args.beta5_l1, c=args.c, K=args.K, ell=args.ell, T=args.T,
                                 supports=tuple(supports))
        value = bias_bound(inputs, args.delta, args.delta_prime)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(args.out, {"model": "smooth" if smooth else "linear", "delta": args.delta,
                     "delta_prime": args.delta_prime, "bound": value})
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "match": cmd_match, "estimate": cmd_estimate, "test-global": cmd_test_global,
            "run": cmd_run, "reproduce": cmd_reproduce, "bound": cmd_bound}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"bimatch: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, IngestError) as exc:
        print(f"bimatch: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
