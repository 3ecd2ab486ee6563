"""Command-line interface.

Subcommands::

    parachain sample gibbs       simulate Gibbs chains, emit the chain CSV
    parachain sample rosenbrock  simulate random-walk Metropolis chains
    parachain estimate           covariance estimate from a chain CSV (JSON)
    parachain ess                estimate plus effective sample size (JSON)
    parachain coverage           coverage experiment from a JSON config (CSV)
    parachain running            running-statistic experiment (CSV)

Exit codes: 0 success, 1 usage/input error, 2 numeric error (for example
an indefinite lugsail estimate reaching a determinant).

`coverage` and `running` render matplotlib figures next to the CSV when
--plot-dir is given. Data outputs are byte-identical across reruns and
across --threads values for a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chainio import chains_to_csv, read_chains, write_chains
from .config import load_config
from .diagnostics import ess as compute_ess
from .errors import InputError, NumericError, UsageError
from .estimators import BatchSpec, default_batch_size
from .experiments import (
    coverage_rows_to_csv,
    resolve_threads,
    run_coverage,
    run_running_stat,
    running_rows_to_csv,
    sigma_estimate,
)
from .numerics import ChainSet, RngState, mix64
from .samplers import (
    DEFAULT_ROSENBROCK_INIT_SPREAD,
    DEFAULT_ROSENBROCK_PROPOSAL_SD,
    GibbsParams,
    RwmParams,
    gibbs_run,
    gibbs_start_points,
    rosenbrock_logpdf,
    rosenbrock_start_points,
    rwm_run,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}".rstrip())


def _build_parser() -> _Parser:
    parser = _Parser(prog="parachain", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"parachain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sample = sub.add_parser("sample", help="simulate chains and write the chain CSV")
    targets = sample.add_subparsers(dest="target", required=True)

    gibbs = targets.add_parser("gibbs", help="deterministic-scan bivariate Gaussian sampler")
    gibbs.add_argument("--rho", type=float, required=True)
    gibbs.add_argument("--omega1", type=float, default=1.0)
    gibbs.add_argument("--omega2", type=float, default=1.0)
    gibbs.add_argument("--mu1", type=float, default=0.0)
    gibbs.add_argument("--mu2", type=float, default=0.0)
    _add_sample_common(gibbs)

    rosen = targets.add_parser("rosenbrock", help="random-walk Metropolis on the Rosenbrock density")
    rosen.add_argument("--proposal-sd", type=float, default=DEFAULT_ROSENBROCK_PROPOSAL_SD)
    rosen.add_argument("--init-spread", type=float, default=DEFAULT_ROSENBROCK_INIT_SPREAD)
    _add_sample_common(rosen)

    estimate = sub.add_parser("estimate", help="covariance estimate from a chain CSV")
    _add_estimate_common(estimate)

    ess_cmd = sub.add_parser("ess", help="covariance estimate plus effective sample size")
    _add_estimate_common(ess_cmd)

    coverage = sub.add_parser("coverage", help="confidence-region coverage experiment")
    coverage.add_argument("--config", required=True)
    coverage.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    coverage.add_argument("--threads", type=int, default=None)
    coverage.add_argument("--plot-dir", default=None, help="also render figures into this directory")

    running = sub.add_parser("running", help="running-statistic experiment")
    running.add_argument("--config", required=True)
    running.add_argument("--stat", choices=("frobenius", "ess-per-sample"), default="frobenius")
    running.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    running.add_argument("--threads", type=int, default=None)
    running.add_argument("--plot-dir", default=None, help="also render figures into this directory")

    return parser


def _add_sample_common(p) -> None:
    p.add_argument("--n", type=int, required=True, help="iterations per chain")
    p.add_argument("--m", type=int, required=True, help="number of chains")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")


def _add_estimate_common(p) -> None:
    p.add_argument("--method", choices=("bm", "abm", "rbm", "naive"), required=True)
    p.add_argument("--b", default="auto-sqrt", help="auto-sqrt | auto-cube:MULT | integer")
    p.add_argument("--r", type=int, default=1, help="lugsail ratio (1 disables)")
    p.add_argument("--c", type=float, default=0.0, help="lugsail weight in [0, 1)")
    p.add_argument("--input", required=True, help="chain CSV path")
    p.add_argument("--truncate-to-min", action="store_true", help="cut unequal chains to the shortest")
    p.add_argument("--out", default=None, help="output JSON path (default: stdout)")


def _write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _resolve_batch(arg: str, n: int) -> int:
    if arg == "auto-sqrt":
        return default_batch_size(n, "sqrt")
    if arg.startswith("auto-cube"):
        mult = 1.0
        if ":" in arg:
            _, _, tail = arg.partition(":")
            try:
                mult = float(tail)
            except ValueError:
                raise UsageError(f"bad multiplier in --b {arg!r}") from None
        return default_batch_size(n, "cube_root", mult)
    try:
        return int(arg)
    except ValueError:
        raise UsageError(f"--b must be auto-sqrt, auto-cube:MULT, or an integer, got {arg!r}") from None


def _cmd_sample(args) -> None:
    states = [
        RngState(seed=args.seed, stream=mix64(args.seed, 0, k)) for k in range(args.m)
    ]
    if args.target == "gibbs":
        params = GibbsParams(
            mu1=args.mu1, mu2=args.mu2, omega1=args.omega1, omega2=args.omega2, rho=args.rho
        )
        starts = gibbs_start_points(params, args.m)
        chains = [gibbs_run(params, args.n, starts[k], states[k]) for k in range(args.m)]
    else:
        starts = rosenbrock_start_points(args.m, args.init_spread)
        chains = [
            rwm_run(RwmParams(rosenbrock_logpdf, args.proposal_sd, starts[k]), args.n, states[k]).chain
            for k in range(args.m)
        ]
    cs = ChainSet(np.stack(chains), validate=False)
    if args.out is None:
        sys.stdout.write(chains_to_csv(cs))
    else:
        write_chains(cs, args.out)


def _estimate_from_args(args):
    cs = read_chains(args.input, truncate_to_min=args.truncate_to_min)
    if args.method == "bm" and cs.m != 1:
        raise UsageError(f"--method bm expects a single-chain file; {args.input!r} holds m={cs.m}")
    if not 0.0 <= args.c < 1.0:
        raise UsageError(f"--c must be in [0, 1), got {args.c}")
    if args.r < 1:
        raise UsageError(f"--r must be >= 1, got {args.r}")
    if args.method == "naive":
        spec = BatchSpec(b=1)  # unused; naive has no batching
    else:
        spec = BatchSpec(b=_resolve_batch(args.b, cs.n), r=args.r, c=args.c)
    return cs, sigma_estimate(cs, args.method, spec, cfg=None)


def _cmd_estimate(args) -> None:
    _, est = _estimate_from_args(args)
    _write_text(json.dumps(est.to_dict()) + "\n", args.out)


def _cmd_ess(args) -> None:
    cs, est = _estimate_from_args(args)
    report = compute_ess(cs, est)
    payload = est.to_dict()
    payload["ess"] = report.ess
    _write_text(json.dumps(payload) + "\n", args.out)


def _cmd_coverage(args) -> None:
    cfg = load_config(args.config)
    rows = run_coverage(cfg, threads=resolve_threads(args.threads))
    _write_text(coverage_rows_to_csv(rows), args.out)
    if args.plot_dir is not None:
        from .plots import save_coverage_plot

        outdir = Path(args.plot_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        save_coverage_plot(rows, cfg.level, outdir / "coverage.png")


def _cmd_running(args) -> None:
    cfg = load_config(args.config)
    stat = args.stat.replace("-", "_")
    rows = run_running_stat(cfg, stat=stat, threads=resolve_threads(args.threads))
    _write_text(running_rows_to_csv(rows), args.out)
    if args.plot_dir is not None:
        from .plots import save_running_plot

        outdir = Path(args.plot_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        save_running_plot(rows, stat, outdir / f"running_{stat}.png")


_COMMANDS = {
    "sample": _cmd_sample,
    "estimate": _cmd_estimate,
    "ess": _cmd_ess,
    "coverage": _cmd_coverage,
    "running": _cmd_running,
}


def main(argv=None) -> int:
    """Dispatch one CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"parachain: {err}", file=sys.stderr)
        return 1
    except SystemExit as err:  # --help / --version
        return int(err.code or 0)
    try:
        _COMMANDS[args.command](args)
    except InputError as err:
        print(f"parachain: error: {err}", file=sys.stderr)
        return 1
    except NumericError as err:
        print(f"parachain: numeric error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"parachain: error: {err}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())
