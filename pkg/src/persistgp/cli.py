"""Command-line front end.

Subcommands: corr (tabulate a correlation), sample (emit paths), persist
(survival curve + exponent fit), scan (asymptotic ladders), verify (lemma
suite).  A flat INI config file may supply defaults per subcommand; CLI flags
override file values, unknown keys are rejected.  All outputs are written
atomically (temp file + rename) with '.' decimals and 17 significant digits.

Exit codes: 0 success, 2 validation error, 3 numerical failure (quadrature,
factorization, embedding, tail budget), 4 verify-suite violation.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import verify as verify_mod
from .corr import make_correlation
from .errors import (
    ConfigError,
    DomainError,
    EmbeddingNotNonnegativeError,
    InsufficientSurvivorsError,
    NotPositiveDefiniteError,
    PersistgpError,
    QuadratureError,
    SeriesError,
    TailBudgetExceededError,
)
from .persistence import (
    FitMode,
    McSettings,
    estimate_exponent,
    fit_exponent,
    rescaled_exponent,
    simulate_survival_curve,
    survival_curve_selfsimilar,
    write_fit_csv,
    write_survival_csv,
)
from .quadrature import QuadratureSpec
from .sampler import (
    SampleMethod,
    TimeGrid,
    build_covariance,
    sample_cholesky,
    sample_circulant,
    sample_direct_mh,
    sample_direct_mstar,
    write_paths_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4

_NUMERICAL_ERRORS = (
    QuadratureError,
    SeriesError,
    NotPositiveDefiniteError,
    EmbeddingNotNonnegativeError,
    TailBudgetExceededError,
    InsufficientSurvivorsError,
)

THREADS_ENV = "PERSISTGP_THREADS"


def _default_threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")


def _atomic_write(path, writer):
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".persistgp-", suffix=".tmp")
    try:
        os.close(fd)
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x):
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def _add_corr_args(p):
    p.add_argument("--kind", default="gh",
                   choices=["exp", "ch", "rh", "gh", "gh-quad", "gstar"])
    p.add_argument("--hurst", type=float, default=None)
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--eps-half", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None,
                   help="optional time rescaling: evaluate base(tau/kappa)")
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)


def _make_corr(ns):
    quad = QuadratureSpec(rel_tol=ns.rel_tol, abs_tol=ns.abs_tol)
    corr = make_correlation(ns.kind, hurst=ns.hurst, rate=ns.rate, quad=quad,
                            eps_half=ns.eps_half)
    if ns.kappa is not None:
        from .corr import corr_rescaled

        corr = corr_rescaled(corr, ns.kappa)
    return corr


def build_parser():
    parser = argparse.ArgumentParser(prog="persistgp", description=__doc__)
    parser.add_argument("--config", default=None, help="INI file with per-subcommand defaults")
    parser.add_argument("--dry-run", action="store_true",
                        help="print the fully resolved configuration and exit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corr", help="tabulate a correlation function to CSV")
    _add_corr_args(p)
    p.add_argument("--tau-max", type=float, default=10.0)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--out", required=False, default=None)

    p = sub.add_parser("sample", help="emit simulated paths to CSV")
    _add_corr_args(p)
    p.add_argument("--method", default="cholesky",
                   choices=["cholesky", "circulant", "direct-mh", "direct-mstar"])
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--n-points", type=int, default=201)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--s-max", type=float, default=None)
    p.add_argument("--n-quad", type=int, default=4096)
    p.add_argument("--out", required=False, default=None)

    p = sub.add_parser("persist", help="survival curve and exponent fit")
    _add_corr_args(p)
    p.add_argument("--corr", dest="kind", help=argparse.SUPPRESS)  # alias for --kind
    p.add_argument("--method", default="cholesky", choices=["cholesky", "circulant"])
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--T", "--horizon", dest="horizon", type=float, default=10.0)
    p.add_argument("--embed-horizon", type=float, default=None)
    p.add_argument("--paths", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--level", type=float, default=0.0)
    p.add_argument("--window-lo", type=float, default=None)
    p.add_argument("--window-hi", type=float, default=None)
    p.add_argument("--out", default=None, help="survival-curve CSV path")
    p.add_argument("--fit-out", default=None, help="fit-summary CSV path")

    p = sub.add_parser("scan", help="asymptotic ladders for the limit theorems")
    p.add_argument("--target", required=True, choices=["zero", "one", "half"])
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--T", "--horizon", dest="horizon", type=float, default=10.0)
    p.add_argument("--paths", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None, help="JSON table path")

    p = sub.add_parser("verify", help="run lemma certification checks")
    p.add_argument("--check", default="all",
                   help="check name (e.g. 3.4, phi, holder, continuity, lhopital, "
                        "monotone) or 'all'")
    p.add_argument("--lemma", dest="check", help=argparse.SUPPRESS)  # alias
    p.add_argument("--out", default=None, help="JSON report path")
    return parser


def _apply_config_file(parser, argv):
    """Merge INI-file values (section per subcommand) under the CLI flags."""
    ns, _ = parser.parse_known_args(argv)
    if not ns.config:
        return argv
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep key case (e.g. 'T')
    read = cp.read(ns.config)
    if not read:
        raise ConfigError(f"config file {ns.config!r} not found")
    command = ns.command
    if not cp.has_section(command):
        return argv
    sub_actions = {}
    for action in parser._subparsers._group_actions[0].choices[command]._actions:
        for opt in action.option_strings:
            name = opt.lstrip("-")
            sub_actions[name] = opt
            sub_actions[name.replace("-", "_")] = opt
    injected = []
    for key, value in cp.items(command):
        if key not in sub_actions:
            raise ConfigError(f"unknown config key {key!r} in section [{command}]")
        injected.extend([sub_actions[key], value])
    # file values go right after the subcommand so explicit flags win
    idx = argv.index(command)
    return argv[: idx + 1] + injected + argv[idx + 1 :]


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def _resolved_config(ns):
    skip = {"config", "dry_run", "command"}
    return {k: (v.value if hasattr(v, "value") else v)
            for k, v in sorted(vars(ns).items()) if k not in skip}


def _cmd_corr(ns):
    corr = _make_corr(ns)
    if not (ns.step > 0.0 and ns.tau_max >= 0.0):
        raise ConfigError("corr needs step > 0 and tau-max >= 0")
    n = int(round(ns.tau_max / ns.step)) + 1
    rows = [(k * ns.step, corr(k * ns.step)) for k in range(n)]

    def writer(path):
        with open(path, "w") as fh:
            fh.write("tau,rho\n")
            for tau, rho in rows:
                fh.write(f"{_fmt(tau)},{_fmt(rho)}\n")

    if ns.out:
        _atomic_write(ns.out, writer)
    else:
        sys.stdout.write("tau,rho\n")
        for tau, rho in rows:
            sys.stdout.write(f"{_fmt(tau)},{_fmt(rho)}\n")
    return EXIT_OK


def _cmd_sample(ns):
    threads = ns.threads if ns.threads is not None else _default_threads()
    grid = TimeGrid(step=ns.step, n_points=ns.n_points)
    if ns.method in ("direct-mh", "direct-mstar"):
        times = np.exp(grid.taus)
        if ns.method == "direct-mh":
            if ns.hurst is None:
                raise ConfigError("direct-mh needs --hurst")
            batch = sample_direct_mh(ns.hurst, times, ns.paths, ns.seed,
                                     s_max=ns.s_max, n_quad=ns.n_quad, threads=threads)
        else:
            batch = sample_direct_mstar(times, ns.paths, ns.seed,
                                        s_max=ns.s_max, n_quad=ns.n_quad, threads=threads)
    else:
        corr = _make_corr(ns)
        if ns.method == "cholesky":
            cov = build_covariance(corr, grid)
            batch = sample_cholesky(cov, grid, ns.paths, ns.seed, threads=threads,
                                    corr_label=corr.label())
        else:
            batch = sample_circulant(corr, grid, ns.paths, ns.seed, threads=threads)
    if ns.out:
        _atomic_write(ns.out, lambda p: write_paths_csv(batch, p))
    else:
        write_paths_csv(batch, sys.stdout.fileno() and "/dev/stdout")
    return EXIT_OK


def _cmd_persist(ns):
    threads = ns.threads if ns.threads is not None else _default_threads()
    corr = _make_corr(ns)
    window = None
    if (ns.window_lo is None) != (ns.window_hi is None):
        raise ConfigError("--window-lo and --window-hi must be given together")
    if ns.window_lo is not None:
        window = (ns.window_lo, ns.window_hi)
    mc = McSettings(step=ns.step, horizon=ns.horizon, n_paths=ns.paths, seed=ns.seed,
                    method=SampleMethod(ns.method), threads=threads, level=ns.level,
                    window=window, embed_horizon=ns.embed_horizon)
    if ns.kappa is not None:
        est = rescaled_exponent(corr, ns.kappa, mc)
        curve = None
    else:
        curve, est = estimate_exponent(corr, mc)
    if ns.out and curve is not None:
        _atomic_write(ns.out, lambda p: write_survival_csv(curve, p))
    if ns.fit_out:
        _atomic_write(ns.fit_out, lambda p: write_fit_csv([est], p))
    summary = {
        "theta_hat": est.theta_hat,
        "stderr": est.stderr,
        "window": list(est.window),
        "r_squared": est.r_squared,
        "two_point_slope": est.two_point_slope,
        "mode": est.mode.value,
        "kappa": est.kappa,
    }
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def _cmd_scan(ns):
    threads = ns.threads if ns.threads is not None else _default_threads()
    mc = McSettings(step=ns.step, horizon=ns.horizon, n_paths=ns.paths, seed=ns.seed,
                    threads=threads)
    fn = {"zero": verify_mod.scan_h_to_zero,
          "one": verify_mod.scan_h_to_one,
          "half": verify_mod.scan_h_to_half}[ns.target]
    rows = fn(mc)
    payload = json.dumps({"target": ns.target, "rows": rows}, indent=2)
    if ns.out:
        _atomic_write(ns.out, lambda p: open(p, "w").write(payload + "\n"))
    else:
        sys.stdout.write(payload + "\n")
    return EXIT_OK


def _cmd_verify(ns):
    if ns.check == "all":
        reports = verify_mod.run_all_checks()
    else:
        reports = {ns.check: verify_mod.run_check(ns.check)}
    payload = json.dumps({name: r.to_dict() for name, r in reports.items()}, indent=2)
    if ns.out:
        _atomic_write(ns.out, lambda p: open(p, "w").write(payload + "\n"))
    else:
        sys.stdout.write(payload + "\n")
    hard_failures = [name for name, r in reports.items()
                     if not r.passed and not r.informational]
    if hard_failures:
        sys.stderr.write(f"verify violations: {', '.join(sorted(hard_failures))}\n")
        return EXIT_VERIFY
    return EXIT_OK


_COMMANDS = {
    "corr": _cmd_corr,
    "sample": _cmd_sample,
    "persist": _cmd_persist,
    "scan": _cmd_scan,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        ns = parser.parse_args(argv)
        if ns.dry_run:
            sys.stdout.write(json.dumps({ns.command: _resolved_config(ns)}, indent=2) + "\n")
            return EXIT_OK
        return _COMMANDS[ns.command](ns)
    except (ConfigError, DomainError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
