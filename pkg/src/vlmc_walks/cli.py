"""Command-line front end.

Every subcommand takes `--model <config.toml>`; analysis results print as
a short report (each number with its certification status) and the heavy
outputs go to CSV files. Exit codes: 0 success, 1 model error,
2 analytics blocked by an inconclusive series.

Seed resolution order: --seed flag, config `seed`, the VLMC_WALKS_SEED
environment variable, then 0.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time

from . import prw1d, prw2d, semi_markov
from .cascades import CascadeSeriesResult, kappa, q_entry
from .config import load_model_config
from .errors import ConfigError, InconclusiveSeries, VlmcError
from .process import CombModel, validate_non_null
from .stationary import Stationarity, stationarity_verdict

EXIT_OK = 0
EXIT_MODEL_ERROR = 1
EXIT_INCONCLUSIVE = 2


def _resolve_seed(args, cfg) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if cfg.seed is not None:
        return cfg.seed
    env = os.environ.get("VLMC_WALKS_SEED")
    if env is not None:
        return int(env)
    return 0


def _series_str(res: CascadeSeriesResult) -> str:
    tag = "analytic" if res.analytic else f"{res.terms_used} terms"
    if res.converged:
        return f"{res.value:.12g} (converged, {tag})"
    if res.diverges:
        return f"inf (diverges, {tag})"
    return f">= {res.value:.12g} (inconclusive after {res.terms_used} terms)"


def _float_str(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.12g}"


class _Report:
    def __init__(self, command: str, cfg):
        self.t0 = time.perf_counter()
        print(f"command: {command}")
        print(f"model: sha256:{cfg.fingerprint()}")
        self.warnings: list[str] = []

    def line(self, text: str):
        print(text)

    def warn(self, text: str):
        self.warnings.append(text)

    def close(self):
        for w in self.warnings:
            print(f"warning: {w}")
        print(f"wall_time_s: {time.perf_counter() - self.t0:.3f}")


def _cmd_check(args) -> int:
    cfg = load_model_config(args.model)
    model = cfg.build_model()
    rep = _Report("check", cfg)
    stable, witness = model.tree.is_stable()
    rep.line(f"tree: {model.tree!r}")
    rep.line(f"stable: {stable}" + (f" (witness {witness!r})" if witness else ""))
    s = model.tree.alpha_lis_set()
    rep.line(f"alpha_lis_set: {s} ({len(s)} states)")
    nn = validate_non_null(model)
    if nn.ok:
        rep.line("non_null: pass")
    else:
        rep.line(f"non_null: fail at {nn.witnesses[:10]}")
    rep.close()
    return EXIT_OK


def _cmd_cascades(args) -> int:
    cfg = load_model_config(args.model)
    model = cfg.build_model()
    rep = _Report("cascades", cfg)
    index = model.tree.alpha_lis_set()
    rows = []
    for word in index:
        res = kappa(model, word, cfg.policy)
        rows.append(("kappa", word, "", res))
        rep.line(f"kappa[{word}] = {_series_str(res)}")
    blocked = False
    for row_word in index:
        for col_word in index:
            res = q_entry(model, row_word, col_word, cfg.policy)
            rows.append(("Q", row_word, col_word, res))
            if not (res.converged or res.diverges):
                blocked = True
    rep.line(f"Q: {len(index)} x {len(index)} entries computed")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "row", "col", "status", "value", "terms_used", "analytic"])
            for kind, r, c, res in rows:
                w.writerow([kind, r, c, res.status.value, res.value,
                            res.terms_used, int(res.analytic)])
        rep.line(f"csv: {args.csv}")
    rep.close()
    return EXIT_INCONCLUSIVE if blocked else EXIT_OK


def _cmd_stationary(args) -> int:
    cfg = load_model_config(args.model)
    model = cfg.build_model()
    rep = _Report("stationary", cfg)
    verdict = stationarity_verdict(model, cfg.policy)
    rep.line(f"verdict: {verdict.outcome.value}")
    rep.line(f"reason: {verdict.reason}")
    code = EXIT_OK
    if verdict.unique:
        measure = verdict.measure
        rep.line(f"fixed_vector_residual: {measure.fixed_residual:.3e} (certified <= 1e-12)")
        for word in sorted(measure.base, key=model.alphabet.sort_key):
            rep.line(f"pi[{word}] = {measure.base[word]:.12g}")
        if args.cylinder:
            for w in args.cylinder:
                rep.line(f"pi_cylinder[{w}] = {measure.cylinder(w):.12g}")
        if args.csv:
            with open(args.csv, "w", newline="") as fh:
                cw = csv.writer(fh)
                cw.writerow(["alpha_lis", "mass"])
                for word in sorted(measure.base, key=model.alphabet.sort_key):
                    cw.writerow([word, measure.base[word]])
            rep.line(f"csv: {args.csv}")
    else:
        if args.cylinder:
            rep.warn("cylinder queries need a unique stationary probability")
        if verdict.outcome is Stationarity.UNSUPPORTED and "inconclusive" in verdict.reason:
            code = EXIT_INCONCLUSIVE
    rep.close()
    return code


def _cmd_classify1d(args) -> int:
    cfg = load_model_config(args.model)
    model = cfg.build_model()
    if not isinstance(model, CombModel) or model.alphabet.letters != "du":
        raise VlmcError("classify1d needs a double-comb model on alphabet 'du'")
    rep = _Report("classify1d", cfg)
    result = prw1d.classify(model, cfg.policy)
    r = result.report
    rep.line(f"theta_u = {_float_str(r.theta_u)} (analytic)")
    rep.line(f"theta_d = {_float_str(r.theta_d)} (analytic)")
    rep.line(f"d_M = {'undefined' if r.d_m is None else _float_str(r.d_m)}")
    rep.line(f"d_S = {'undefined' if r.d_s is None else _float_str(r.d_s)}")
    rep.line(f"J[u|d] = {_series_str(r.j_ud)}")
    rep.line(f"J[d|u] = {_series_str(r.j_du)}")
    rep.line(f"verdict: {result.verdict.value}")
    rep.line(f"rule_fired: {result.rule_fired}")
    for w in r.warnings:
        rep.warn(w)
    rep.close()
    return EXIT_INCONCLUSIVE if result.verdict is prw1d.Verdict1D.UNDECIDABLE else EXIT_OK


def _cmd_simulate1d(args) -> int:
    cfg = load_model_config(args.model)
    model = cfg.build_model()
    if not isinstance(model, CombModel) or model.alphabet.letters != "du":
        raise VlmcError("simulate1d needs a double-comb model on alphabet 'du'")
    seed = _resolve_seed(args, cfg)
    rep = _Report("simulate1d", cfg)
    walk = prw1d.simulate_prw1(model, args.steps, seed)
    rep.line(f"steps: {args.steps}  seed: {seed}")
    rep.line(f"final_position: {int(walk.positions[-1])}")
    rep.line(f"jumps: {len(walk.breaks) - 1}")
    if args.csv:
        flags = walk.is_breaking()
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "X", "S", "is_breaking"])
            for n in range(1, walk.n_steps + 1):
                w.writerow([n, walk.letters_trace.letter(n),
                            int(walk.positions[n]), int(flags[n])])
        rep.line(f"csv: {args.csv}")
    rep.close()
    return EXIT_OK


def _cmd_kernel2d(args) -> int:
    cfg = load_model_config(args.model)
    model = cfg.build_model()
    if not isinstance(model, CombModel) or model.alphabet.letters != "news":
        raise VlmcError("kernel2d needs a quadruple-comb model on alphabet 'news'")
    rep = _Report("kernel2d", cfg)
    kernel = prw2d.build_bend_kernel(model, cfg.policy)
    pi = prw2d.bend_stationary(kernel)
    rep.line(f"bends: {kernel.states}")
    for state, mass in zip(kernel.states, pi):
        rep.line(f"pi_J[{state}] = {mass:.12g} (analytic kernel, residual <= 1e-12)")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["from", "to", "probability"])
            for i, src in enumerate(kernel.states):
                for j, dst in enumerate(kernel.states):
                    w.writerow([src, dst, kernel.matrix[i, j]])
        rep.line(f"csv: {args.csv}")
    rep.close()
    return EXIT_OK


def _cmd_simulate2d(args) -> int:
    cfg = load_model_config(args.model)
    model = cfg.build_model()
    if not isinstance(model, CombModel) or model.alphabet.letters != "news":
        raise VlmcError("simulate2d needs a quadruple-comb model on alphabet 'news'")
    seed = _resolve_seed(args, cfg)
    rep = _Report("simulate2d", cfg)
    walk = prw2d.simulate_prw2(model, args.steps, seed)
    rep.line(f"steps: {args.steps}  seed: {seed}")
    rep.line(f"final_position: {tuple(int(x) for x in walk.positions[-1])}")
    rep.line(f"jumps: {len(walk.breaks) - 1}")
    if args.csv:
        flags = walk.is_breaking()
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "letter", "x", "y", "is_breaking", "bend"])
            for n in range(1, walk.n_steps + 1):
                w.writerow([
                    n, walk.letters_trace.letter(n),
                    int(walk.positions[n, 0]), int(walk.positions[n, 1]),
                    int(flags[n]), walk.bend_at(n),
                ])
        rep.line(f"csv: {args.csv}")
    rep.close()
    return EXIT_OK


def _cmd_dichotomy(args) -> int:
    cfg = load_model_config(args.model)
    model = cfg.build_model()
    if not isinstance(model, CombModel) or model.alphabet.letters != "news":
        raise VlmcError("dichotomy needs a quadruple-comb model on alphabet 'news'")
    seed = _resolve_seed(args, cfg)
    rep = _Report("dichotomy", cfg)
    threads = args.threads if args.threads else (os.cpu_count() or 1)
    report = prw2d.return_prob_diagnostic(
        model, args.horizon, args.trials, seed, threads=threads
    )
    rep.line(f"horizon: {report.horizon}  trials: {report.trials}  seed: {seed}")
    rep.line(f"partial_sum: {report.partial_sums[-1]:.6g} (Monte-Carlo, never a proof)")
    rep.line(f"trend: {report.trend} (heuristic: last-decade growth vs 1e-3)")
    rep.line(f"min_norm_mean: {report.min_norm_mean:.6g}")
    rep.line(f"min_norm_median: {report.min_norm_median:.6g}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "p_hat", "half_width", "partial_sum"])
            for row in report.rows():
                w.writerow(row)
        rep.line(f"csv: {args.csv}")
    rep.close()
    return EXIT_OK


def _cmd_kernel(args) -> int:
    cfg = load_model_config(args.model)
    model = cfg.build_model()
    rep = _Report("kernel", cfg)
    states = model.tree.alpha_lis_set()
    if args.source not in states:
        raise VlmcError(f"source {args.source!r} not an alpha-lis of this tree "
                        f"(expected one of {states})")
    kern = semi_markov.MrcKernel.from_model(model, args.k_max, cfg.policy)
    total = kern.row_total(args.source)
    rep.line(f"source: {args.source}  k_max: {args.k_max}")
    rep.line(f"tabulated_mass: {total:.12g}")
    rep.line(f"tail_remainder: {kern.remainder[args.source]:.6g} (certified)")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["source", "target", "k", "probability"])
            for b in states:
                vec = kern.probs[(args.source, b)]
                for k in range(1, args.k_max + 1):
                    w.writerow([args.source, b, k, vec[k - 1]])
            w.writerow([args.source, "", "tail", kern.remainder[args.source]])
        rep.line(f"csv: {args.csv}")
    rep.close()
    return EXIT_OK


def _cmd_diagram_check(args) -> int:
    cfg = load_model_config(args.model)
    model = cfg.build_model()
    if not isinstance(model, CombModel):
        raise VlmcError("diagram-check needs a comb model")
    seed = _resolve_seed(args, cfg)
    rep = _Report("diagram-check", cfg)
    two_d = model.alphabet.letters == "news"
    steps = args.steps
    if two_d:
        walk = prw2d.simulate_prw2(model, steps, seed)
    else:
        walk = prw1d.simulate_prw1(model, steps, seed)
    report = semi_markov.check_diagram(walk.letters_trace, walk, model)
    rep.line(f"steps: {steps}  seed: {seed}  jumps_compared: {report.n_jumps}")
    if report.ok:
        rep.line("diagram: commutes (states reverse, sojourns identical)")
    else:
        rep.line(f"diagram: MISMATCH {report.first_mismatch}")
    rep.close()
    return EXIT_OK if report.ok else EXIT_MODEL_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlmc-walks",
        description="Variable-length Markov chains and persistent random walks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", required=True, help="model config (TOML)")
        p.set_defaults(func=fn)
        return p

    add("check", _cmd_check, "validate a model config")
    p = add("cascades", _cmd_cascades, "cascade series and Q matrix")
    p.add_argument("--csv", help="write series table to CSV")
    p = add("stationary", _cmd_stationary, "stationarity verdict and measure")
    p.add_argument("--cylinder", action="append", help="query pi(w R); repeatable")
    p.add_argument("--csv", help="write base vector to CSV")
    add("classify1d", _cmd_classify1d, "recurrence/transience of the 1-d walk")
    p = add("simulate1d", _cmd_simulate1d, "simulate the 1-d walk")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--csv", help="write the trace to CSV")
    p = add("kernel2d", _cmd_kernel2d, "bend kernel and its invariant law")
    p.add_argument("--csv", help="write the kernel to CSV")
    p = add("simulate2d", _cmd_simulate2d, "simulate the 2-d walk")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--csv", help="write the trace to CSV")
    p = add("dichotomy", _cmd_dichotomy, "Monte-Carlo return-probability diagnostic")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=0, help="0 = machine parallelism")
    p.add_argument("--csv", help="write per-n estimates to CSV")
    p = add("kernel", _cmd_kernel, "semi-Markov kernel slices")
    p.add_argument("--source", required=True, help="alpha-lis word")
    p.add_argument("--k-max", type=int, default=32, dest="k_max")
    p.add_argument("--csv", help="write kernel slice to CSV")
    p = add("diagram-check", _cmd_diagram_check, "letter/walk extraction consistency")
    p.add_argument("--steps", type=int, default=5000)
    p.add_argument("--seed", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL_ERROR
    except InconclusiveSeries as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except VlmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL_ERROR


if __name__ == "__main__":
    sys.exit(main())
