"""Command-line front end: ``primelearn <subcommand> [flags]``.

Every subcommand prints (or writes, with --report) a JSON report whose
``metrics`` block depends only on the flags and the seed.  Exit codes: 0 ok,
1 bad flags, 2 precondition violated, 3 an acceptance threshold failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from ._rng import derive_seed, np_substream, substream
from .numtheory import count_multiplicity_vectors, omega_table, primes_below
from .oracles import NoiseMode, OracleModel, emit_training_set, format_decimal
from .qlearn import (
    CircuitFamily,
    estimate_value,
    exact_value,
    feature_dim,
    fit_model,
    predict,
    random_string,
    sample_budget,
    sample_budget_closed_form,
    shot_count,
)
from .reductions import candidate_count, factor_via_f1, factor_via_f2_f3
from .sampler import Sampler, SamplerConfig, exact_pmf, support

SCHEMA = 1
EXIT_OK, EXIT_FLAGS, EXIT_PRECONDITION, EXIT_THRESHOLD = 0, 1, 2, 3


class PreconditionError(ValueError):
    pass


@dataclass
class ExperimentReport:
    command: str
    config: dict
    metrics: dict = field(default_factory=dict)
    trials: list = field(default_factory=list)
    wall_clock: float = 0.0
    version: str = __version__
    passed: bool | None = None

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "command": self.command,
            "config": self.config,
            "metrics": self.metrics,
            "trials": self.trials,
            "passed": self.passed,
            "wall_clock": self.wall_clock,
            "version": self.version,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def metrics_block(self) -> str:
        """Canonical bytes of the reproducible part of the report."""
        return json.dumps(self.metrics, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> ExperimentReport:
        if doc.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {doc.get('schema')!r}")
        return cls(
            doc["command"],
            doc["config"],
            doc["metrics"],
            doc["trials"],
            doc["wall_clock"],
            doc["version"],
            doc.get("passed"),
        )


def write_report(r: ExperimentReport, path: str | Path) -> None:
    path = Path(path)
    try:
        path.write_text(r.to_json())
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report: {exc.strerror}", str(path)) from exc


def read_report(path: str | Path) -> ExperimentReport:
    return ExperimentReport.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# helpers


def _oracle(args, fn: str) -> OracleModel:
    return OracleModel(
        fn,
        c=args.c,
        u=args.u,
        delta=args.delta,
        mode=NoiseMode(args.oracle),
        seed=derive_seed(args.seed, "oracle", fn) % (1 << 63),
        K=args.K,
    )


def _sampler_config(args) -> SamplerConfig:
    try:
        return SamplerConfig(m=args.m, K=args.K, seed=args.seed)
    except ValueError as exc:
        raise PreconditionError(str(exc)) from exc


def _sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)


def _round(v: float, digits: int = 12) -> float:
    # keeps reports stable against last-bit noise in summed floats
    return float(f"{v:.{digits}g}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_dataset(args, rep: ExperimentReport) -> None:
    if args.n is None or args.n < 1:
        raise PreconditionError(f"--n must be >= 1, got {args.n}")
    cfg = _sampler_config(args)
    ts = emit_training_set(cfg, _oracle(args, args.fn), args.n, substream(args.seed, "dataset"))
    text = ts.to_csv() if args.format == "csv" else ts.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    xs = [x for x, _ in ts.pairs]
    rep.metrics.update(
        n=len(ts),
        distinct_x=len(set(xs)),
        max_x=max(xs),
        within_budget=all(x <= 1 << cfg.m for x in xs),
        first_pairs=[[str(x), format_decimal(y)] for x, y in ts.pairs[:5]],
    )
    rep.passed = rep.metrics["within_budget"]


def _sweep_inputs(args) -> list[int]:
    if args.max_x < 7:
        raise PreconditionError("--max-x must exceed 6 (the smallest two-prime x)")
    if args.max_x > 1 << 24:
        raise PreconditionError("--max-x above 2^24 is outside desk scale")
    limit = args.max_x - 1
    tab = omega_table(limit)
    xs = np.flatnonzero(tab == 2)
    xs = [int(x) for x in xs if x < args.max_x]
    if args.n is not None:
        if args.n < 1:
            raise PreconditionError(f"--n must be >= 1, got {args.n}")
        rng = substream(args.seed, "sweep-inputs")
        xs = sorted(rng.sample(xs, min(args.n, len(xs))))
    return xs


def cmd_factor_sweep(args, rep: ExperimentReport) -> None:
    xs = _sweep_inputs(args)
    if args.fn == "f1":
        o = _oracle(args, "f1")
        run: Callable = lambda x: factor_via_f1(x, o, attempts=args.attempts)
    else:
        o2, o3 = _oracle(args, "f2"), _oracle(args, "f3")
        run = lambda x: factor_via_f2_f3(x, o2, o3, attempts=args.attempts)
    found = unsound = over_budget = 0
    failures = []
    for x in xs:
        r = run(x)
        if r.found:
            found += 1
            if x % r.factor:
                unsound += 1
        else:
            failures.append(x)
        if r.candidates_tried > candidate_count(args.c, args.u, x) * r.estimates_used:
            over_budget += 1
    rate = found / len(xs)
    default_min = 0.95 if args.oracle == NoiseMode.FAILING.value else 1.0
    threshold = default_min if args.min_success is None else args.min_success
    rep.metrics.update(
        inputs=len(xs),
        found=found,
        success_rate=rate,
        unsound=unsound,
        over_candidate_budget=over_budget,
        first_failures=failures[:20],
        threshold=threshold,
    )
    rep.passed = rate >= threshold and unsound == 0 and over_budget == 0


def cmd_verify_sampler(args, rep: ExperimentReport) -> None:
    cfg = _sampler_config(args)
    if cfg.m > 12 or cfg.K > 3:
        raise PreconditionError("the exact pmf oracle needs m <= 12 and K <= 3")
    if args.draws < 1:
        raise PreconditionError("--draws must be >= 1")
    pmf = exact_pmf(cfg)
    sampler = Sampler(cfg)
    rng = substream(args.seed, "sampler")
    counts: dict[int, int] = {}
    for _ in range(args.draws):
        x = sampler.draw(rng).value
        counts[x] = counts.get(x, 0) + 1
    keys = set(pmf) | set(counts)
    tv = 0.5 * sum(abs(pmf.get(x, 0.0) - counts.get(x, 0) / args.draws) for x in keys)
    supp = support(cfg.m, cfg.K)
    coverage = set(x for x, p in pmf.items() if p > 0) == supp
    min_ratio = min(pmf[x] for x in supp) * len(supp) if coverage else 0.0
    bound = 1 - 3.0**-cfg.K + 0.05
    rep.metrics.update(
        draws=args.draws,
        support_size=len(supp),
        observed_distinct=len(counts),
        tv_distance=_round(tv),
        support_exact=coverage,
        min_ratio_vs_uniform=_round(min_ratio),
        rejection_rate=_round(sampler.rejection_rate),
        rejection_bound=bound,
        tv_threshold=args.tv_max,
    )
    rep.passed = tv <= args.tv_max and coverage and min_ratio > 0 and sampler.rejection_rate <= bound


def _parse_ms(text: str) -> list[int]:
    try:
        ms = sorted({int(t) for t in text.split(",") if t.strip()})
    except ValueError as exc:
        raise PreconditionError(f"bad --ms list {text!r}") from exc
    if len(ms) < 2 or ms[0] < 2:
        raise PreconditionError("--ms needs at least two bit budgets >= 2")
    return ms


def cmd_verify_lemma3(args, rep: ExperimentReport) -> None:
    ms = _parse_ms(args.ms)
    check_m = args.m if args.m in ms else ms[len(ms) // 2]
    lo_m, hi_m = ms[0], ms[-1]
    rng = substream(args.seed, "lemma3")
    primes = primes_below(1 << args.prime_bits)
    good = 0
    rows = []
    for _ in range(args.pairs):
        pair = sorted(rng.sample(primes, 2))
        ratios = {}
        for m in ms:
            if pair[0] * pair[1] <= 1 << m:
                ratios[m] = count_multiplicity_vectors(pair, m).ratio
        in_band = check_m in ratios and 0.5 <= ratios[check_m] <= 2.0
        trend = lo_m in ratios and hi_m in ratios and abs(ratios[hi_m] - 1) < abs(ratios[lo_m] - 1)
        good += in_band and trend
        rows.append({"primes": pair, "ratios": {str(m): _round(r) for m, r in ratios.items()}, "in_band": in_band, "trend": trend})
    frac = good / args.pairs
    rep.trials = rows
    rep.metrics.update(
        pairs=args.pairs,
        band_m=check_m,
        in_band=sum(r["in_band"] for r in rows),
        trend=sum(r["trend"] for r in rows),
        both=good,
        fraction_both=frac,
        threshold=0.8,
    )
    rep.passed = frac >= 0.8


def cmd_qlearn_demo(args, rep: ExperimentReport) -> None:
    ell, n = args.ell, args.n if args.n is not None else feature_dim(args.ell) + 5
    if ell < 1 or ell > 1 << 12:
        raise PreconditionError("--ell must be in [1, 4096]")
    if n < feature_dim(ell):
        raise PreconditionError(f"--n must be >= {feature_dim(ell)} for l={ell}")
    family = CircuitFamily(seed=derive_seed(args.seed, "circuit") % (1 << 63))
    rng = substream(args.seed, "qlearn-x")
    nprng = np_substream(args.seed, "qlearn-shots")
    train = [random_string(ell, rng) for _ in range(n)]
    if args.labels == "exact":
        labels = [exact_value(x, args.u, family) for x in train]
    else:
        labels = [estimate_value(x, args.u, args.c, args.delta, nprng, family) for x in train]
    model = fit_model(list(zip(train, labels)), args.u)
    held = [random_string(ell, rng) for _ in range(args.trials)]
    errs = [abs(predict(model, x) - exact_value(x, args.u, family)) for x in held]
    budget_ok = sample_budget(ell) == sample_budget_closed_form(ell)
    rep.metrics.update(
        ell=ell,
        n=n,
        dim=feature_dim(ell),
        labels=args.labels,
        held_out=len(held),
        max_error=float(f"{max(errs):.3e}"),
        mean_error=float(f"{sum(errs) / len(errs):.3e}"),
        sample_budget=sample_budget(ell),
        sample_budget_matches_closed_form=budget_ok,
    )
    if args.labels == "exact":
        rep.passed = max(errs) <= 1e-8 and budget_ok
    else:
        rep.metrics["shots_per_label"] = shot_count(ell, args.u, args.c, args.delta)
        rep.passed = budget_ok  # noisy-label error is reported, not asserted


def cmd_estimator_calib(args, rep: ExperimentReport) -> None:
    if args.c <= 0 or not 0 < args.delta < 0.5:
        raise PreconditionError("need --c > 0 and 0 < --delta < 1/2")
    if args.trials < 1:
        raise PreconditionError("--trials must be >= 1")
    ell = args.ell
    family = CircuitFamily(seed=derive_seed(args.seed, "circuit") % (1 << 63))
    x = random_string(ell, substream(args.seed, "calib-x"))
    exact = exact_value(x, args.u, family)
    failures = 0
    for t in range(args.trials):
        est = estimate_value(x, args.u, args.c, args.delta, np_substream(args.seed, "calib", t), family)
        failures += abs(est - exact) >= args.c
    rate = failures / args.trials
    limit = args.delta + 3 * _sigma(args.delta, args.trials)
    n = shot_count(ell, args.u, args.c, args.delta)
    closed = math.ceil(2 * ell ** (2 * (args.u + 1)) * math.log(2 / args.delta) / args.c**2)
    rep.metrics.update(
        ell=ell,
        x=x,
        exact=_round(exact),
        trials=args.trials,
        failures=failures,
        failure_rate=rate,
        limit=_round(limit),
        shots=n,
        shots_closed_form=closed,
    )
    rep.passed = rate <= limit and n == closed


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    env = os.environ.get("PRIMELEARN_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        return -1  # flagged in main


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="global seed (env PRIMELEARN_SEED, else 0)")
    common.add_argument("--report", default=None, help="write the JSON report here instead of stdout")
    common.add_argument("--m", type=int, default=8)
    common.add_argument("--K", type=int, default=2)
    common.add_argument("--n", type=int, default=None)
    common.add_argument("--fn", choices=["f1", "f2", "f3"], default="f1")
    common.add_argument("--oracle", choices=[m.value for m in NoiseMode], default="exact")
    common.add_argument("--c", type=float, default=None, help="noise scale (default 1; 0.1 for the circuit commands)")
    common.add_argument("--u", type=float, default=0.0)
    common.add_argument("--delta", type=float, default=None, help="failure probability (default 0; 0.1 for the circuit commands)")

    p = _Parser(prog="primelearn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-dataset", parents=[common], help="sample a labelled training set")
    g.add_argument("--out", default=None)
    g.add_argument("--format", choices=["csv", "json"], default="csv")

    f = sub.add_parser("factor-sweep", parents=[common], help="run a reduction over two-prime x < max-x")
    f.add_argument("--max-x", type=int, default=1 << 14)
    f.add_argument("--attempts", type=int, default=None, help="estimates per x (default 3 for failing, else 1)")
    f.add_argument("--min-success", type=float, default=None)

    s = sub.add_parser("verify-sampler", parents=[common], help="empirical vs exact pmf")
    s.add_argument("--draws", type=int, default=200_000)
    s.add_argument("--tv-max", type=float, default=0.03)

    lm = sub.add_parser("verify-lemma3", parents=[common], help="lattice count vs simplex volume")
    lm.add_argument("--ms", default="16,24,48")
    lm.add_argument("--pairs", type=int, default=20)
    lm.add_argument("--prime-bits", type=int, default=8)

    q = sub.add_parser("qlearn-demo", parents=[common], help="least-squares recovery of the circuit function")
    q.add_argument("--ell", type=int, default=6)
    q.add_argument("--labels", choices=["exact", "estimated"], default="exact")
    q.add_argument("--trials", type=int, default=100, help="held-out strings")

    e = sub.add_parser("estimator-calib", parents=[common], help="Hoeffding failure rate of the shot estimator")
    e.add_argument("--ell", type=int, default=4)
    e.add_argument("--trials", type=int, default=500)
    return p


COMMANDS = {
    "gen-dataset": cmd_gen_dataset,
    "factor-sweep": cmd_factor_sweep,
    "verify-sampler": cmd_verify_sampler,
    "verify-lemma3": cmd_verify_lemma3,
    "qlearn-demo": cmd_qlearn_demo,
    "estimator-calib": cmd_estimator_calib,
}


def run_command(argv: Sequence[str] | None = None) -> tuple[int, ExperimentReport | None]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None
    if args.seed is None:
        args.seed = _default_seed()
        if args.seed < 0:
            print("primelearn: PRIMELEARN_SEED must be a non-negative integer", file=sys.stderr)
            return EXIT_FLAGS, None
    circuit = args.command in ("qlearn-demo", "estimator-calib")
    if args.c is None:
        args.c = 0.1 if circuit else 1.0
    if args.delta is None:
        args.delta = 0.1 if circuit else 0.0
    if args.command == "factor-sweep" and args.attempts is None:
        args.attempts = 3 if args.oracle == NoiseMode.FAILING.value else 1
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("report", "out")}
    rep = ExperimentReport(args.command, config)
    start = time.perf_counter()
    try:
        COMMANDS[args.command](args, rep)
    except (PreconditionError, ValueError) as exc:
        print(f"primelearn {args.command}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION, None
    rep.wall_clock = round(time.perf_counter() - start, 3)
    if args.report:
        try:
            write_report(rep, args.report)
        except OSError as exc:
            print(f"primelearn: {exc}", file=sys.stderr)
            return EXIT_PRECONDITION, rep
    elif args.command != "gen-dataset" or args.out:
        sys.stdout.write(rep.to_json())
    return (EXIT_OK if rep.passed else EXIT_THRESHOLD), rep


def main(argv: Sequence[str] | None = None) -> int:
    code, _ = run_command(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
