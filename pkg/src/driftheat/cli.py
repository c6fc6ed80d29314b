"""Command-line entry point.

    driftheat verify --config scenario.ini --out out/
    driftheat sweep|identities|schur|transfer|table [--config ...] [--seed N] [--out DIR] [--jobs N]

Exit codes: 0 all certifying checks pass, 2 a bound or identity is violated,
3 configuration error.  Probe checks never change the exit code.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import bounds, checks, identities, tables, transfer
from .checks import CheckResult, Series, worst
from .errors import ConfigurationError, DomainError
from .scenario import Scenario, build_initial, load_scenario
from .spectral import GaussianProfile, constant_field, linear_field, potential_field
from .models import make_model

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_CONFIG = 3
U64_MAX = 2**64 - 1

DEFAULT_SWEEP = {
    "c_values": (2.0, 1.5, 1.1, 1.01),
    "gamma_values": (0.5, 1.0, 1.5, 1.8),
    "epsilon_values": (0.5, 0.2, 0.1, 0.05),
    "tau_values": (0.0, 0.25, 0.5, 0.9),
    "t": 1.0,
    "batches": 4,
    "count": 1000,
}
EPSILON_T = 15.0
EPSILON_REL_TOL = 0.01


# --- task execution ---------------------------------------------------------------


def _timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - start


def _run_tasks(tasks, jobs):
    """Run ``(key, fn, args)`` tasks; results come back in key order whatever ``jobs`` is."""
    tasks = sorted(tasks, key=lambda task: task[0])
    if jobs <= 1 or len(tasks) <= 1:
        outs = [_timed(fn, *args) for _, fn, args in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_timed, fn, *args) for _, fn, args in tasks]
            outs = [f.result() for f in futures]
    return [(key, res, secs) for (key, _, _), (res, secs) in zip(tasks, outs)]


# --- subcommand bodies (top level so worker processes can import them) ----------


def _verify_tasks(sc):
    return [((i, name), checks.run_check, (name, sc)) for i, name in enumerate(sc.checks)]


def sweep_c(c, n):
    v = GaussianProfile("reverse", c, n)
    s = bounds.sharpness_L(v)
    ok = abs(s.numeric_t20 - s.closed_form) <= bounds.NUMERIC_TOL
    row = (c, s.closed_form, s.numeric_t20, ((c + 1) / (2 * c)) ** (n / 4))
    return CheckResult(f"sweep_c[{c}]", "bound_monitors", True, ok,
                       {"c": c, "L": s.closed_form, "L_t20": s.numeric_t20},
                       [Series("sweep_c", ("c", "L_closed_form", "L_numeric_t20", "L_table"), (row,))])


def sweep_gamma(gamma, t, sc):
    v = build_initial(sc)
    rep = bounds.bakry_emery_bound(v, t, gamma, sc.closed_form_tol)
    ratio = rep.ratios[0]
    row = (gamma, t, ratio, rep.verdict)
    passed = rep.passed or rep.verdict == "diverged"
    return CheckResult(f"sweep_gamma[{gamma}]", "bound_monitors", True, passed,
                       {"gamma": gamma, "t": t, "ratio": ratio, "verdict": rep.verdict},
                       [Series("sweep_gamma", ("gamma", "t", "ratio", "verdict"), (row,))])


def sweep_epsilon(eps, n):
    e = math.exp(EPSILON_T)
    gamma = (1 + e - eps * (e - 1)) / 2
    q = math.exp(-EPSILON_T) * bounds.euclidean_constant(EPSILON_T, gamma, n) ** (4 / n)
    ref = 2 * math.pi * (1 - eps) / eps
    rel = abs(q / ref - 1)
    return CheckResult(f"sweep_epsilon[{eps}]", "bound_monitors", True, rel <= EPSILON_REL_TOL,
                       {"epsilon": eps, "value": q, "limit": ref, "rel_gap": rel},
                       [Series("sweep_epsilon", ("epsilon", "t", "e^-t C^(4/n)", "limit", "rel_gap"),
                               ((eps, EPSILON_T, q, ref, rel),))])


def sweep_tau(tau, n, seed):
    rows = checks.schur_rows((tau,), (n,), seed)
    r = rows[0]
    ok = r[4] <= checks.SCHUR_CONSTANT_TOL and r[5] < checks.SCHUR_VARIANCE_TOL
    return CheckResult(f"sweep_tau[{tau}]", "ricci_transfer_schur", True, ok,
                       {"tau": tau, "C_X": r[2], "C_Y": r[6], "operator_bound": r[10]},
                       [Series("sweep_tau", checks.SCHUR_COLUMNS, tuple(rows))])


def identity_batch(seed, count):
    res = identities.random_divergence_sweep(seed, count)
    b, min_rhs = identities.random_bochner_sweep(seed, max(1, count // 10))
    ok = res.max_residual <= checks.DIVERGENCE_TOL and b.max_residual <= checks.DIVERGENCE_TOL and min_rhs >= -1e-12
    return CheckResult(
        f"identities[{seed}]", "identity_checks", True, ok,
        {"seed": seed, "count": count, "divergence_max": res.max_residual,
         "bochner_max_relative": b.max_residual, "bochner_min_rhs_psd": min_rhs},
        [Series("identities", ("seed", "count", "divergence_max_residual", "bochner_max_relative_residual"),
                ((seed, count, res.max_residual, b.max_residual),))],
    )


def identity_anchor():
    lhs, rhs, expect = checks.hand_anchor()
    gap = max(abs(lhs - expect), abs(rhs - expect))
    return CheckResult("identities_anchor", "identity_checks", True, gap <= checks.ANCHOR_TOL,
                       {"lhs": lhs, "rhs": rhs, "expected": expect, "gap": gap})


def schur_identity_task(seed):
    return checks.check_schur_identity(Scenario(seed=seed), None)


def schur_rows_task(n, taus, seed):
    rows = checks.schur_rows(taus, (n,), seed)
    ok = all(r[4] <= checks.SCHUR_CONSTANT_TOL and r[5] < checks.SCHUR_VARIANCE_TOL for r in rows)
    return CheckResult(f"schur_row_constant[n={n}]", "ricci_transfer_schur", True, ok,
                       {"max_C_X_rel_error": worst(r[4] for r in rows), "max_variance": worst(r[5] for r in rows),
                        "max_C_Y_rel_error": worst(r[8] for r in rows)},
                       [Series("schur_row_constant", checks.SCHUR_COLUMNS, tuple(rows))])


def heat_apply_task(n, seed):
    rows = checks.heat_apply_rows(n, seed)
    top = worst(r[2] for r in rows)
    return CheckResult(f"heat_apply[n={n}]", "ricci_transfer_schur", True, top <= checks.HEAT_APPLY_TOL,
                       {"max_residual": top},
                       [Series("heat_apply", ("tau", "n", "case", "residual"), tuple((r[0], n, r[1], r[2]) for r in rows))])


def transfer_battery(n):
    model = make_model("euclidean", n)
    c = (0.7, -1.3)[:n] if n <= 2 else (0.7,) * n
    items = [
        ("row1", constant_field(model)),
        ("row2", linear_field(model, c)),
        ("row3", potential_field(model)),
        *((f"reverse c={cc}", GaussianProfile("reverse", cc, n)) for cc in (1.5, 2.0, 3.0)),
        ("forward c=1.5", GaussianProfile("forward", 1.5, n)),
    ]
    return items


def transfer_task(n):
    rows = []
    ok = True
    for label, v in transfer_battery(n):
        for t in (0.5, 1.0, 3.0):
            val = transfer.flow_norm_identity(v, t)
            rows.append((label, n, t, val.residual, val.bound_ratio))
            ok = ok and val.residual <= checks.FLOW_NORM_TOL and val.bound_ratio <= 1 + 1e-8
    sc = Scenario(n=n)
    heat = checks.check_flow_heat_equation(sc, potential_field(make_model("euclidean", n)))
    resc = checks.check_rescaled_potential(sc, None)
    comp = checks.check_composition(sc, GaussianProfile("reverse", 1.5, n))
    ok = ok and heat.passed and resc.passed and comp.passed
    return CheckResult(
        f"transfer[n={n}]", "ricci_transfer_schur", True, ok,
        {"max_flow_norm_residual": worst(r[3] for r in rows), "max_bound_ratio": worst(r[4] for r in rows),
         "heat_equation_residual": heat.metrics["max_residual"],
         "rescaled_potential_deviation": resc.metrics["max_deviation"], "composition_gap": comp.metrics["gap"]},
        [Series("flow_norm_identity", ("input", "n", "t", "residual", "bound_ratio"), tuple(rows))],
        [transfer.TAU_RANGE_NOTE],
    )


def table_task(name):
    entries = tables.TABLES[name]((1, 2))
    bad = [e for e in entries if not e.passed]
    rows = tuple(tuple(e.as_dict()[k] for k in tables.CSV_FIELDS) for e in entries)
    return CheckResult(
        f"table_{name}", "tables", True, not bad,
        {"entries": len(entries), "failed": len(bad),
         "max_rel_error": worst(e.rel_error for e in entries)},
        [Series(f"table_{name}", tables.CSV_FIELDS, rows)],
    )


# --- output -------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _dumps(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, ensure_ascii=False, allow_nan=False)


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _merge_series(results):
    merged = {}
    for r in results:
        for s in r.series:
            cols, rows = merged.setdefault(s.name, (s.columns, []))
            if cols != s.columns:
                raise RuntimeError(f"series {s.name} has inconsistent columns")
            rows.extend(s.rows)
    return merged


def write_outputs(out: Path, command, echo, results, timings, exit_code):
    out.mkdir(parents=True, exist_ok=True)
    lines = [_dumps({"record": "scenario", "command": command, **echo})]
    for r in results:
        lines.append(_dumps({"record": "check", **r.as_dict()}))
    violations = [r.name for r in results if r.certifying and not r.passed]
    lines.append(_dumps({"record": "summary", "exit_code": exit_code, "violations": violations,
                         "checks": len(results)}))
    _write(out / "report.jsonl", "\n".join(lines) + "\n")

    width = max([len(r.name) for r in results] + [5])
    txt = [f"command: {command}", f"scenario: {echo.get('name')}", f"seed: {echo.get('seed')}", ""]
    txt.append(f"{'check':<{width}}  {'verdict':<7}  key metric")
    for r in results:
        key = next((k for k in ("max_ratio", "max_residual", "max_gap", "max_sup_error", "limit_agreement",
                                "max_rel_error", "divergence_max", "rel_gap", "max_C_X_rel_error",
                                "max_flow_norm_residual", "L_t20", "ratio", "C_X") if k in r.metrics), None)
        metric = f"{key}={_cell(r.metrics[key])}" if key else ""
        txt.append(f"{r.name:<{width}}  {r.verdict:<7}  {metric}")
    txt += ["", f"exit code: {exit_code}"]
    _write(out / "report.txt", "\n".join(txt) + "\n")

    for name, (cols, rows) in _merge_series(results).items():
        _write_csv(out / f"{name}.csv", cols, rows)

    # wall-clock kept apart so the reports stay byte-identical across runs
    _write(out / "timings.jsonl", "".join(_dumps({"check": k, "seconds": s}) + "\n" for k, s in timings))


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_csv(path, cols, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([_cell(x) for x in row])


# --- argument handling ---------------------------------------------------------------


def _u64(text):
    try:
        val = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= val <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return val


def _positive(text):
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError("--jobs must be >= 1")
    return val


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="driftheat", description="Weighted L2 monitors for the drift heat semigroup.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "verify": "run the checks listed in a scenario file",
        "sweep": "parameter sweeps over c, gamma, epsilon and tau",
        "identities": "random-jet identity suites",
        "schur": "Schur test constants and kernel application",
        "transfer": "soliton to Ricci-flow change of variables",
        "table": "reproduce the explicit solution, norm and L tables as CSV",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", type=Path, required=(name == "verify"))
        sp.add_argument("--seed", type=_u64, default=None)
        sp.add_argument("--out", type=Path, default=Path("driftheat-out"))
        sp.add_argument("--jobs", type=_positive, default=1)
    return p


def _scenario(args):
    sc = load_scenario(args.config) if args.config else Scenario(name=f"{args.command}-defaults")
    if args.seed is not None:
        sc = sc.with_seed(args.seed)
    return sc


def _tasks(command, sc):
    sw = {**DEFAULT_SWEEP, **sc.sweep}
    if command == "verify":
        if not sc.checks:
            raise ConfigurationError("scenario lists no checks")
        return _verify_tasks(sc)
    if command == "sweep":
        tasks = [(("c", c), sweep_c, (c, sc.n)) for c in sw["c_values"]]
        tasks += [(("gamma", g), sweep_gamma, (g, sw["t"], sc)) for g in sw["gamma_values"]]
        tasks += [(("epsilon", e), sweep_epsilon, (e, sc.n)) for e in sw["epsilon_values"]]
        tasks += [(("tau", t), sweep_tau, (t, sc.n, sc.seed)) for t in sw["tau_values"]]
        return tasks
    if command == "identities":
        tasks = [((0, sc.seed + i), identity_batch, (sc.seed + i, int(sw["count"]))) for i in range(int(sw["batches"]))]
        return tasks + [((1, 0), identity_anchor, ())]
    if command == "schur":
        tasks = [((0, 0), schur_identity_task, (sc.seed,))]
        tasks += [((1, n), schur_rows_task, (n, tuple(sw["tau_values"]), sc.seed)) for n in (1, 2, 3)]
        return tasks + [((2, n), heat_apply_task, (n, sc.seed)) for n in (1, 2)]
    if command == "transfer":
        return [((n,), transfer_task, (n,)) for n in (1, 2)]
    if command == "table":
        return [((i,), table_task, (name,)) for i, name in enumerate(tables.TABLES)]
    raise ConfigurationError(f"unknown command {command}")


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = _scenario(args)
        tasks = _tasks(args.command, sc)
        done = _run_tasks(tasks, args.jobs)
    except (ConfigurationError, DomainError) as exc:
        print(f"driftheat: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    results = [res for _, res, _ in done]
    timings = [(res.name, secs) for _, res, secs in done]
    violated = any(r.certifying and not r.passed for r in results)
    code = EXIT_VIOLATION if violated else EXIT_OK
    write_outputs(args.out, args.command, sc.echo(), results, timings, code)
    for r in results:
        print(f"{r.verdict:<5} {r.name}")
    print(f"report: {args.out / 'report.jsonl'}")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
