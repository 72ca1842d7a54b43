"""Command-line interface: run a sequential test on streamed observations,
run simulation experiments from a JSON config, and summarize result CSVs.

Exit codes: 0 = ran, 2 = usage/configuration error, 3 = malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Iterable, Iterator, Optional

from . import distributions
from .betting import PayoffStrategy, run_sequential
from .distributions import Discrete, as_target_cdf, spec_from_dict
from .extensions import DominanceStrategy, SymmetryStrategy
from .kernels import GaussianKernel
from .one_sample import Chi2Strategy, EWKSStrategy, KS1PluginStrategy
from .simulate import ExperimentConfig, run_trials, write_csv, write_stopping_times
from .two_sample import KS2PluginStrategy, KTMMDStrategy, MMDPluginStrategy

__all__ = ["main", "cmd_test", "cmd_simulate", "cmd_report", "parse_target"]

_TWO_SAMPLE = {"ks2", "mmd", "dominance"}
_ONE_SAMPLE = {"ks1", "chi2", "symmetry"}


class UsageError(Exception):
    """Bad flags or config; maps to exit code 2."""


class InputError(Exception):
    """Malformed data line; maps to exit code 3."""


def parse_target(text: str):
    """Parse the target mini-language: ``uniform:a,b``, ``normal:mu,sigma``,
    ``discrete:p1,p2,...`` (support is 0..k-1)."""
    kind, sep, rest = text.partition(":")
    if not sep:
        raise UsageError(f"malformed target {text!r}; expected kind:args")
    try:
        args = [float(v) for v in rest.split(",")] if rest else []
    except ValueError:
        raise UsageError(f"malformed target arguments in {text!r}") from None
    try:
        if kind == "uniform":
            if len(args) != 2:
                raise UsageError("uniform target needs exactly a,b")
            return distributions.Uniform(args[0], args[1])
        if kind == "normal":
            if len(args) != 2:
                raise UsageError("normal target needs exactly mu,sigma")
            return distributions.Normal(args[0], args[1])
        if kind == "discrete":
            if not args:
                raise UsageError("discrete target needs at least one probability")
            return Discrete(tuple(range(len(args))), tuple(args))
    except ValueError as exc:
        raise UsageError(f"invalid target {text!r}: {exc}") from None
    raise UsageError(f"unknown target kind {kind!r}")


def _parse_point(text: str, lineno: int):
    """One observation side: scalar float or ;-separated vector."""
    parts = text.split(";")
    try:
        values = [float(v) for v in parts]
    except ValueError:
        raise InputError(f"line {lineno}: cannot parse observation {text!r}") from None
    return values[0] if len(values) == 1 else values


def parse_stream(lines: Iterable[str], two_sample: bool, discrete: bool) -> Iterator:
    """Wire format: one observation per line, pairs as ``x,y``, vector
    components ``;``-separated, ``#`` comments and blank lines skipped."""
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if two_sample:
            x, sep, y = line.partition(",")
            if not sep:
                raise InputError(f"line {lineno}: expected a pair 'x,y', got {line!r}")
            yield (_parse_point(x.strip(), lineno), _parse_point(y.strip(), lineno))
        elif discrete:
            try:
                yield int(line)
            except ValueError:
                raise InputError(f"line {lineno}: expected an integer symbol, got {line!r}") from None
        else:
            yield _parse_point(line, lineno)


def build_strategy(
    test: str,
    strategy: str,
    target,
    bandwidth: float,
) -> PayoffStrategy:
    """Wire flags to a payoff strategy; invalid combinations are usage errors."""
    if test in _ONE_SAMPLE and test != "symmetry" and target is None:
        raise UsageError(f"--target is required for test {test!r}")
    if test == "ks1":
        if strategy == "plugin":
            return KS1PluginStrategy(as_target_cdf(target))
        if strategy == "ew":
            return EWKSStrategy(as_target_cdf(target))
    elif test == "chi2":
        if not isinstance(target, Discrete):
            raise UsageError("chi2 needs a discrete target (discrete:p1,p2,...)")
        if strategy in ("plugin", "pgd"):
            return Chi2Strategy(target.support, target.pmf, mode=strategy)
    elif test == "ks2":
        if strategy == "plugin":
            return KS2PluginStrategy()
    elif test == "mmd":
        if strategy == "plugin":
            return MMDPluginStrategy(GaussianKernel(bandwidth))
        if strategy == "kt":
            return KTMMDStrategy(GaussianKernel(bandwidth))
    elif test == "dominance":
        if strategy == "plugin":
            return DominanceStrategy()
    elif test == "symmetry":
        if strategy == "plugin":
            return SymmetryStrategy()
    else:
        raise UsageError(f"unknown test {test!r}")
    raise UsageError(f"strategy {strategy!r} is not available for test {test!r}")


def cmd_test(args) -> int:
    target = parse_target(args.target) if args.target else None
    strategy = build_strategy(args.test, args.strategy, target, args.bandwidth)
    two_sample = args.test in _TWO_SAMPLE
    discrete = args.test == "chi2"

    def trace(t: int, w: float) -> None:
        print(f"n={t} wealth={w:.6g}", file=sys.stderr)

    fh = sys.stdin if args.input == "-" else open(args.input, "r", encoding="utf-8")
    try:
        stream = parse_stream(fh, two_sample, discrete)
        outcome = run_sequential(
            strategy,
            stream,
            args.alpha,
            args.nmax,
            checkpoint_cb=trace if args.trace else None,
        )
    finally:
        if fh is not sys.stdin:
            fh.close()
    if outcome.rejected:
        print(f"REJECT at n={outcome.tau}")
    else:
        print(f"NO-DECISION after n={outcome.n_seen}")
    return 0


_TOP_KEYS = {
    "output_dir",
    "alpha",
    "n_max",
    "n_trials",
    "checkpoints",
    "master_seed",
    "scenarios",
}
_SCENARIO_KEYS = {
    "name",
    "tests",
    "null",
    "alternative",
    "params",
    "alpha",
    "n_max",
    "n_trials",
    "checkpoints",
}


def _check_keys(d: dict, allowed: set, where: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise UsageError(f"unknown keys {sorted(extra)} in {where}")


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("config root must be a JSON object")
    _check_keys(doc, _TOP_KEYS, "config root")
    scenarios = doc.get("scenarios")
    if not isinstance(scenarios, list) or not scenarios:
        raise UsageError("config needs a nonempty 'scenarios' list")
    for i, sc in enumerate(scenarios):
        if not isinstance(sc, dict):
            raise UsageError(f"scenario {i} must be an object")
        _check_keys(sc, _SCENARIO_KEYS, f"scenario {i}")
        for key in ("name", "tests", "alternative"):
            if key not in sc:
                raise UsageError(f"scenario {i} is missing {key!r}")
    return doc


def _scenario_config(doc: dict, sc: dict, test: str, args) -> ExperimentConfig:
    def pick(key, default):
        return sc.get(key, doc.get(key, default))

    try:
        null = sc.get("null")
        null_specs = (spec_from_dict(null),) if null is not None else ()
        alt_specs = (spec_from_dict(sc["alternative"]),)
        seed = doc.get("master_seed", 0)
        if args.seed is not None:
            seed = args.seed
        env_seed = os.environ.get("BETCRAFT_SEED")
        if env_seed is not None:
            seed = int(env_seed)
        checkpoints = pick("checkpoints", None)
        return ExperimentConfig(
            test=test,
            null=null_specs,
            alternative=alt_specs,
            alpha=float(pick("alpha", 0.05)),
            n_max=int(args.nmax if args.nmax is not None else pick("n_max", 10_000)),
            n_trials=int(args.trials if args.trials is not None else pick("n_trials", 200)),
            checkpoints=tuple(checkpoints) if checkpoints is not None else None,
            master_seed=int(seed),
            params=dict(sc.get("params", {})),
        )
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid scenario {sc.get('name')!r}: {exc}") from None


def cmd_simulate(args) -> int:
    doc = load_config(args.config)
    outdir = Path(args.outdir if args.outdir is not None else doc.get("output_dir", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    for sc in doc["scenarios"]:
        for test in sc["tests"]:
            config = _scenario_config(doc, sc, test, args)
            curve = run_trials(config, jobs=args.jobs)
            base = outdir / f"{sc['name']}_{test}"
            write_csv(curve, f"{base}.csv")
            if curve.taus:
                write_stopping_times(curve.taus, f"{base}_tau.csv")
            print(f"wrote {base}.csv", file=sys.stderr)
    return 0


def _read_csv(path) -> tuple[str, list[list[str]]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise InputError(f"{path}: empty file")
    header = lines[0]
    return header, [ln.split(",") for ln in lines[1:]]


def cmd_report(args) -> int:
    power_files: dict[str, list[list[str]]] = {}
    tau_files: dict[str, list[list[str]]] = {}
    for path in args.csvs:
        header, rows = _read_csv(path)
        stem = Path(path).name.removesuffix(".csv")
        if header == "n,reject_fraction,stderr":
            power_files[stem] = rows
        elif header == "trial,tau,censored":
            tau_files[stem.removesuffix("_tau")] = rows
        else:
            raise InputError(f"{path}: unrecognized schema {header!r}")

    table = [["name", "n", "power", "mean_tau", "censor_rate"]]
    for name in sorted(power_files):
        rows = power_files[name]
        if rows:
            n, power = rows[-1][0], rows[-1][1]
            if args.at is not None:
                eligible = [r for r in rows if int(r[0]) <= args.at]
                if eligible:
                    n, power = eligible[-1][0], eligible[-1][1]
        else:
            n, power = "-", "-"
        mean_tau = censor = "-"
        taus = tau_files.get(name)
        if taus is not None:
            stopped = [int(r[1]) for r in taus if r[2] == "0"]
            censored = sum(1 for r in taus if r[2] == "1")
            if stopped:
                mean_tau = f"{sum(stopped) / len(stopped):.1f}"
            censor = f"{censored / len(taus):.3f}" if taus else "-"
        table.append([name, n, power, mean_tau, censor])
    for name in sorted(set(tau_files) - set(power_files)):
        taus = tau_files[name]
        stopped = [int(r[1]) for r in taus if r[2] == "0"]
        mean_tau = f"{sum(stopped) / len(stopped):.1f}" if stopped else "-"
        censor = f"{sum(1 for r in taus if r[2] == '1') / len(taus):.3f}"
        table.append([name, "-", "-", mean_tau, censor])

    widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
    for row in table:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="betcraft", description="Sequential nonparametric testing by betting."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run one sequential test on streamed data")
    p_test.add_argument(
        "--test",
        required=True,
        choices=["ks1", "chi2", "ks2", "mmd", "dominance", "symmetry"],
    )
    p_test.add_argument("--strategy", default="plugin", choices=["plugin", "ew", "pgd", "kt"])
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--target", default=None, help="uniform:a,b | normal:mu,sigma | discrete:p1,p2,...")
    p_test.add_argument("--input", default="-", help="data file, or - for stdin")
    p_test.add_argument("--bandwidth", type=float, default=1.0)
    p_test.add_argument("--nmax", type=int, default=2**62, help="observation cap")
    p_test.add_argument("--trace", action="store_true", help="print per-step wealth to stderr")
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="run Monte Carlo experiments from a JSON config")
    p_sim.add_argument("config", help="JSON experiment description")
    p_sim.add_argument("--jobs", type=int, default=1)
    p_sim.add_argument("--trials", type=int, default=None, help="override n_trials")
    p_sim.add_argument("--nmax", type=int, default=None, help="override n_max")
    p_sim.add_argument("--seed", type=int, default=None, help="override master seed")
    p_sim.add_argument("--outdir", default=None, help="override output directory")
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("report", help="summarize result CSVs as a table")
    p_rep.add_argument("csvs", nargs="+", help="power-curve and stopping-time CSVs")
    p_rep.add_argument("--at", type=int, default=None, help="report power at the last checkpoint <= AT")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
