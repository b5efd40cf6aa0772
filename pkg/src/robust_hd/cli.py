"""``robust-hd`` command line: estimate, cov, bootstrap, simulate, diagnose.

Exit codes: 0 success, 2 bad arguments, 3 bad input data, 4 infeasible
epsilon under ``--require-valid-epsilon``. Failures print one JSON line
to stderr.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .contamination import AdversarySpec
from .covariance import (
    correlation_normalize,
    feasibility_condition,
    winsorized_covariance,
)
from .errors import ArgumentError, DegenerateScaleError, PreconditionError
from .estimators import (
    centered_sample_mean,
    epsilon_schedule,
    normalized_winsorized_mean,
    trimmed_mean,
    winsorized_mean,
)
from .sampler import bootstrap_critical_value, stream
from .simlab import MixtureComponent, ScenarioConfig, run_scenario
from .theory import RATE_KINDS, c_constant_brackets, rate_bound, sharp_feasibility

EXIT_OK, EXIT_ARGS, EXIT_DATA, EXIT_EPSILON = 0, 2, 3, 4
SEED_ENV = "ROBUST_HD_SEED"
DEFAULT_SEED = 20250409
FULL_REPLICATIONS = 10_000


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind, self.message = code, kind, message


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_ARGS, "argument_error", message)


def read_csv(path: str, header: bool = False) -> np.ndarray:
    """Read an n x d numeric CSV (rows are observations)."""
    try:
        x = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except OSError as exc:
        raise CliError(EXIT_DATA, "data_error", f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise CliError(EXIT_DATA, "data_error", f"non-numeric input: {exc}") from exc
    if x.size == 0:
        raise CliError(EXIT_DATA, "data_error", "input contains no observations")
    if not np.all(np.isfinite(x)):
        raise CliError(EXIT_DATA, "data_error", "input contains NaN or infinite entries")
    return x


def _parse_mu(text: str, d: int) -> np.ndarray:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise CliError(EXIT_ARGS, "argument_error", f"bad --mu value {text!r}") from exc
    if len(parts) not in (1, d):
        raise CliError(
            EXIT_ARGS, "argument_error", f"--mu needs 1 or {d} values, got {len(parts)}"
        )
    return np.broadcast_to(np.array(parts), (d,)).copy()


def _resolve_seed(seed: int | None, fallback: int | None = DEFAULT_SEED) -> int | None:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise CliError(
                EXIT_ARGS, "argument_error", f"{SEED_ENV} must be an integer, got {env!r}"
            ) from exc
    return fallback


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _schedules(args, n: int, d: int):
    sched = epsilon_schedule(n, d, args.eta_bar, args.lambda1, args.lambda2, "mean")
    sched_cov = epsilon_schedule(n, d, args.eta_bar, args.lambda1p, args.lambda2p, "covariance")
    return sched, sched_cov


def _infeasible(args, sched) -> dict | None:
    if sched.valid:
        return None
    msg = f"epsilon={sched.epsilon!r} ({sched.mode} mode) lies outside (0, 1/2)"
    if getattr(args, "require_valid_epsilon", False):
        raise CliError(EXIT_EPSILON, "infeasible_epsilon", msg)
    return {"reason": msg}


def cmd_estimate(args) -> int:
    x = read_csv(args.input, args.header)
    n, d = x.shape
    mu = _parse_mu(args.mu, d)
    sched, sched_cov = _schedules(args, n, d)
    out = {
        "statistic": args.statistic,
        "n": n,
        "d": d,
        "schedule": sched.to_dict(),
        "values": None,
        "sup_norm": None,
    }
    if args.statistic == "sample_mean":
        stat = centered_sample_mean(x, mu)
    else:
        bad = _infeasible(args, sched)
        if bad is None and args.statistic == "normalized":
            out["covariance_schedule"] = sched_cov.to_dict()
            bad = _infeasible(args, sched_cov)
        if bad is not None:
            out["not_implementable"] = bad["reason"]
            _emit(out)
            return EXIT_OK
        if args.statistic == "winsorized":
            stat = winsorized_mean(x, mu, sched)
        elif args.statistic == "trimmed":
            stat = trimmed_mean(x, mu, sched)
        else:
            sd = winsorized_covariance(x, sched_cov).diag_sd
            stat = normalized_winsorized_mean(x, mu, sched, sd)
    out["values"] = stat.values.tolist()
    out["sup_norm"] = stat.sup_norm()
    _emit(out)
    return EXIT_OK


def cmd_cov(args) -> int:
    x = read_csv(args.input, args.header)
    n, d = x.shape
    sched_cov = epsilon_schedule(n, d, args.eta_bar, args.lambda1p, args.lambda2p, "covariance")
    out = {"n": n, "d": d, "schedule": sched_cov.to_dict(), "correlation": args.correlation}
    bad = _infeasible(args, sched_cov)
    if bad is not None:
        out["not_implementable"] = bad["reason"]
        _emit(out)
        return EXIT_OK
    cov = winsorized_covariance(x, sched_cov)
    if args.correlation:
        cov = correlation_normalize(cov)
    m = cov.matrix
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "sigma_tilde.csv"
    j, k = np.indices(m.shape)
    lines = ["j,k,value"]
    lines += [f"{a},{b},{v!r}" for a, b, v in zip(j.ravel(), k.ravel(), m.ravel().tolist())]
    path.write_text("\n".join(lines) + "\n")
    out["path"] = str(path)
    out["diagonal"] = np.diag(m).tolist()
    _emit(out)
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    x = read_csv(args.input, args.header)
    n, d = x.shape
    sched_cov = epsilon_schedule(n, d, args.eta_bar, args.lambda1p, args.lambda2p, "covariance")
    seed = _resolve_seed(args.seed)
    out = {"n": n, "d": d, "schedule": sched_cov.to_dict(), "normalized": args.normalized, "seed": seed}
    bad = _infeasible(args, sched_cov)
    if bad is not None:
        out["not_implementable"] = bad["reason"]
        _emit(out)
        return EXIT_OK
    cov = winsorized_covariance(x, sched_cov)
    if args.normalized:
        cov = correlation_normalize(cov)
    cv = bootstrap_critical_value(cov, args.alpha, args.B, stream(seed, 0))
    out["critical_value"] = cv.to_dict()
    _emit(out)
    return EXIT_OK


_INT_FIELDS = {"n", "d", "replications", "bootstrap_B", "seed", "pp_points"}
_FLOAT_FIELDS = {"nu", "eta_bar", "lambda1", "lambda2", "lambda1_prime", "lambda2_prime", "alpha"}
_BOOL_FIELDS = {"baseline_bootstrap", "covariance_error"}


def load_config(path: str) -> dict:
    """Read a scenario INI file into ScenarioConfig keyword arguments.

    Section ``[scenario]`` holds ScenarioConfig fields and ``[adversary]``
    holds ``kind``, ``magnitude`` and ``target_sign``. The adversary budget
    is always the scenario's ``eta_bar``.
    """
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise CliError(EXIT_ARGS, "argument_error", f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise CliError(EXIT_ARGS, "argument_error", f"malformed config: {exc}") from exc
    unknown = set(cp.sections()) - {"scenario", "adversary"}
    if unknown:
        raise CliError(EXIT_ARGS, "argument_error", f"unknown config sections {sorted(unknown)}")
    kw: dict = {}
    known = _INT_FIELDS | _FLOAT_FIELDS | _BOOL_FIELDS | {"distribution", "statistics", "threads", "mixture"}
    sec = cp["scenario"] if cp.has_section("scenario") else {}
    try:
        for key, raw in sec.items():
            if key not in known:
                raise CliError(EXIT_ARGS, "argument_error", f"unknown scenario key {key!r}")
            if key in _INT_FIELDS:
                kw[key] = int(raw)
            elif key in _FLOAT_FIELDS:
                kw[key] = float(raw)
            elif key in _BOOL_FIELDS:
                kw[key] = cp.getboolean("scenario", key)
            elif key == "statistics":
                kw[key] = tuple(s.strip() for s in raw.split(",") if s.strip())
            elif key == "threads":
                kw[key] = raw.strip() if raw.strip() == "auto" else int(raw)
            elif key == "mixture":
                kw[key] = tuple(MixtureComponent.parse(c) for c in raw.split(";") if c.strip())
            else:
                kw[key] = raw.strip()
        adv: dict = {}
        if cp.has_section("adversary"):
            for key, raw in cp["adversary"].items():
                if key == "kind":
                    adv["kind"] = raw.strip()
                elif key == "magnitude":
                    adv["magnitude"] = float(raw)
                elif key == "target_sign":
                    adv["target_sign"] = raw.strip()
                else:
                    raise CliError(EXIT_ARGS, "argument_error", f"unknown adversary key {key!r}")
    except ValueError as exc:
        raise CliError(EXIT_ARGS, "argument_error", f"bad config value: {exc}") from exc
    kw["_adversary"] = adv
    return kw


def build_scenario(args) -> ScenarioConfig:
    kw = load_config(args.config) if args.config else {"_adversary": {}}
    adv = kw.pop("_adversary")
    overrides = {
        "n": args.n,
        "d": args.d,
        "nu": args.nu,
        "distribution": args.distribution,
        "eta_bar": args.eta_bar,
        "lambda1": args.lambda1,
        "lambda2": args.lambda2,
        "lambda1_prime": args.lambda1p,
        "lambda2_prime": args.lambda2p,
        "replications": args.replications,
        "bootstrap_B": args.B,
        "alpha": args.alpha,
        "threads": args.threads,
    }
    if args.statistics:
        overrides["statistics"] = tuple(s.strip() for s in args.statistics.split(",") if s.strip())
    if args.full:
        overrides["replications"] = FULL_REPLICATIONS
    kw.update({k: v for k, v in overrides.items() if v is not None})
    # Precedence: --seed, then the config file, then ROBUST_HD_SEED.
    if args.seed is not None or "seed" not in kw:
        kw["seed"] = _resolve_seed(args.seed)
    if args.adversary:
        adv["kind"] = args.adversary
    if args.magnitude is not None:
        adv["magnitude"] = args.magnitude
    if args.target_sign:
        adv["target_sign"] = args.target_sign
    kw["adversary"] = AdversarySpec(eta_bar=kw.get("eta_bar", 0.0), **adv)
    return ScenarioConfig(**kw)


def cmd_simulate(args) -> int:
    cfg = build_scenario(args)
    summary = run_scenario(cfg)
    files = summary.write(args.output_dir, svg=args.svg)
    out = summary.to_json_dict()
    out["files"] = [str(p) for p in files]
    _emit(out)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    n, d = args.n, args.d
    sched, sched_cov = _schedules(args, n, d)
    out: dict = {
        "n": n,
        "d": d,
        "eta_bar": args.eta_bar,
        "mean_schedule": sched.to_dict(),
        "covariance_schedule": sched_cov.to_dict(),
        "c_constant_brackets": list(c_constant_brackets(args.lambda1, args.lambda2)),
    }
    if 0.0 < sched_cov.epsilon < 1.0:
        out["feasibility"] = feasibility_condition(
            n, d, sched_cov.epsilon, lambda2_prime=args.lambda2p
        ).to_dict()
        out["sharp_feasibility"] = sharp_feasibility(
            n, d, sched_cov.epsilon, args.lambda1p, args.eta_bar > 0
        ).to_dict()
    else:
        out["feasibility"] = None
        out["sharp_feasibility"] = None
    if 0.0 < sched.epsilon < 1.0:
        out["mean_feasibility"] = feasibility_condition(n, d, sched.epsilon, mode="mean").to_dict()
    else:
        out["mean_feasibility"] = None
    if d >= 2:
        out["rates"] = {
            k: rate_bound(k, n, d, args.m, args.eta_bar, args.C).value for k in RATE_KINDS
        }
    else:
        out["rates"] = None
    out["C"] = args.C
    out["m"] = args.m
    _emit(out)
    return EXIT_OK


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _threads(text: str):
    return "auto" if text == "auto" else _positive_int(text)


def _tuning(p, defaults: bool = True) -> None:
    dflt = (lambda v: v) if defaults else (lambda v: None)
    p.add_argument("--eta-bar", type=float, default=dflt(0.0), help="contamination budget")
    p.add_argument("--lambda1", type=float, default=dflt(1.05))
    p.add_argument("--lambda2", type=float, default=dflt(0.1))
    p.add_argument("--lambda1p", type=float, default=dflt(1.05), help="lambda1' (covariance)")
    p.add_argument("--lambda2p", type=float, default=dflt(0.07), help="lambda2' (covariance)")


def _data_input(p) -> None:
    p.add_argument("--input", required=True, help="CSV file, rows are observations")
    p.add_argument("--header", action="store_true", help="skip one header line")
    p.add_argument("--require-valid-epsilon", action="store_true",
                   help="exit 4 instead of reporting an infeasible epsilon")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robust-hd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("estimate", help="robust mean statistics of a CSV sample")
    _data_input(p)
    _tuning(p)
    p.add_argument("--statistic", default="winsorized",
                   choices=["winsorized", "trimmed", "normalized", "sample_mean"])
    p.add_argument("--mu", default="0", help="centering: one value or d comma-separated")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("cov", help="winsorized covariance, written to sigma_tilde.csv")
    _data_input(p)
    _tuning(p)
    p.add_argument("--correlation", action="store_true", help="export the correlation form")
    p.add_argument("--output-dir", default=".")
    p.set_defaults(func=cmd_cov)

    p = sub.add_parser("bootstrap", help="multiplier-bootstrap critical value")
    _data_input(p)
    _tuning(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--B", type=int, default=1000, help="bootstrap draws")
    p.add_argument("--normalized", action="store_true", help="use the correlation form")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("simulate", help="run a Monte Carlo scenario")
    p.add_argument("--config", help="scenario INI file")
    p.add_argument("--output-dir", default="results")
    p.add_argument("--svg", action="store_true", help="also render P-P curves as SVG")
    p.add_argument("--full", action="store_true",
                   help=f"run {FULL_REPLICATIONS} replications")
    p.add_argument("--n", type=_positive_int)
    p.add_argument("--d", type=_positive_int)
    p.add_argument("--nu", type=float)
    p.add_argument("--distribution", choices=["student_t", "standard_normal", "user_mixture"])
    _tuning(p, defaults=False)
    p.add_argument("--replications", type=_positive_int)
    p.add_argument("--B", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--statistics", help="comma-separated statistic names")
    p.add_argument("--adversary", help="adversary kind")
    p.add_argument("--magnitude", type=float)
    p.add_argument("--target-sign", choices=["+", "-", "both"])
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=_threads, help="worker cap, or 'auto'")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("diagnose", help="feasibility and rate-bound report")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--d", type=_positive_int, required=True)
    _tuning(p)
    p.add_argument("--m", type=float, default=4.0, help="moment index (> 2)")
    p.add_argument("--C", type=float, default=1.0, help="constant in the rate bounds")
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        err = exc
    except PreconditionError as exc:
        err = CliError(EXIT_EPSILON, "precondition_error", str(exc))
    except DegenerateScaleError as exc:
        err = CliError(EXIT_DATA, "data_error", str(exc))
    except ArgumentError as exc:
        err = CliError(EXIT_ARGS, "argument_error", str(exc))
    sys.stderr.write(
        json.dumps({"error": err.kind, "message": err.message, "exit_code": err.code}) + "\n"
    )
    return err.code


if __name__ == "__main__":
    sys.exit(main())
