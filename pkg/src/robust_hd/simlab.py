"""Monte Carlo harness for the heavy-tailed max-statistic experiments.

One replication draws an ``(n, d)`` sample with i.i.d. coordinates,
optionally lets an adversary corrupt it, and evaluates the configured
statistics centered at the true mean. It records their sup-norms and
bootstrap critical values. The aggregation step turns those records into
rejection frequencies, P-P curves and Kolmogorov-Smirnov distances.

Replication ``r`` draws its randomness only from ``stream(seed, r, block)``.
That makes a summary a deterministic function of the config, whatever the
thread count.
"""

from __future__ import annotations

import json
import math
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import stats as sps

from .contamination import AdversarySpec, apply_adversary
from .covariance import (
    correlation_normalize,
    feasibility_condition,
    winsorized_covariance,
)
from .errors import ArgumentError
from .estimators import (
    MeanStatistic,
    as_sample,
    centered_sample_mean,
    epsilon_schedule,
    normalized_winsorized_mean,
    winsorized_and_trimmed,
)
from .sampler import (
    _CHUNK,
    empirical_quantile,
    max_norm_cdf_diagonal,
    max_quantile_diagonal,
    stream,
)
from .theory import sharp_feasibility

__all__ = [
    "DiagonalMaxNormLaw",
    "EmpiricalLaw",
    "MixtureComponent",
    "NotImplementable",
    "PPCurve",
    "ReplicationSummary",
    "ScenarioConfig",
    "comparator_trimmed_mean",
    "generate_sample",
    "ks_distance",
    "population_moments",
    "pp_curve",
    "rejection_frequency",
    "run_scenario",
]

BASE_STATISTICS = ("sample_mean", "winsorized", "trimmed", "normalized")
_COMPARATOR = re.compile(r"^comparator_trim\((\d+)\)$")

# Per-replication bootstrap norms kept for the pooled P-P reference law.
PP_BOOTSTRAP_KEEP = 200


@dataclass(frozen=True)
class NotImplementable:
    """Marker for a statistic that cannot be computed for these settings."""

    reason: str


@dataclass(frozen=True)
class MixtureComponent:
    """One component of an i.i.d. coordinate mixture.

    ``family="normal"`` is ``loc + scale * N(0,1)``. ``family="student_t"``
    is ``loc + scale * t(nu)`` with ``nu > 2``.
    """

    weight: float
    family: str
    loc: float = 0.0
    scale: float = 1.0
    nu: float | None = None

    def __post_init__(self):
        if not self.weight > 0:
            raise ArgumentError("mixture weights must be positive")
        if self.family not in ("normal", "student_t"):
            raise ArgumentError(f"unknown mixture family {self.family!r}")
        if self.family == "student_t" and not (self.nu is not None and self.nu > 2):
            raise ArgumentError("student_t mixture components need nu > 2")
        if not self.scale > 0:
            raise ArgumentError("mixture scales must be positive")

    @classmethod
    def parse(cls, text: str) -> "MixtureComponent":
        """Parse ``weight:normal:loc:scale`` or ``weight:student_t:nu:loc:scale``."""
        parts = [p.strip() for p in text.split(":")]
        try:
            if parts[1] == "normal" and len(parts) == 4:
                return cls(float(parts[0]), "normal", float(parts[2]), float(parts[3]))
            if parts[1] == "student_t" and len(parts) == 5:
                return cls(
                    float(parts[0]), "student_t", float(parts[3]), float(parts[4]),
                    nu=float(parts[2]),
                )
        except (ValueError, IndexError):
            pass
        raise ArgumentError(f"cannot parse mixture component {text!r}")

    def variance(self) -> float:
        if self.family == "normal":
            return self.scale**2
        return self.scale**2 * self.nu / (self.nu - 2.0)


@dataclass(frozen=True)
class ScenarioConfig:
    n: int = 200
    d: int = 500
    distribution: str = "student_t"
    nu: float = 3.01
    mixture: tuple[MixtureComponent, ...] = ()
    eta_bar: float = 0.0
    lambda1: float = 1.05
    lambda2: float = 0.1
    lambda1_prime: float = 1.05
    lambda2_prime: float = 0.07
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    replications: int = 2000
    bootstrap_B: int = 1000
    alpha: float = 0.05
    statistics: tuple[str, ...] = ("sample_mean", "winsorized", "trimmed")
    baseline_bootstrap: bool = True
    covariance_error: bool | None = None
    pp_points: int = 512
    seed: int = 20250409
    threads: int | str = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n <= 3:
            raise ArgumentError(f"n must be an integer > 3, got {self.n!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ArgumentError(f"d must be a positive integer, got {self.d!r}")
        if self.distribution not in ("student_t", "standard_normal", "user_mixture"):
            raise ArgumentError(f"unknown distribution {self.distribution!r}")
        if self.distribution == "student_t" and not self.nu > 2:
            raise ArgumentError(f"nu must exceed 2 (finite variance), got {self.nu!r}")
        if self.distribution == "user_mixture" and not self.mixture:
            raise ArgumentError("user_mixture needs at least one component")
        if self.replications < 1:
            raise ArgumentError("replications must be >= 1")
        if self.bootstrap_B != 0 and self.bootstrap_B < 100:
            raise ArgumentError("bootstrap_B must be 0 (off) or >= 100")
        if not 0.0 < self.alpha < 1.0:
            raise ArgumentError("alpha must lie in (0, 1)")
        if self.adversary.eta_bar != self.eta_bar:
            raise ArgumentError(
                "adversary.eta_bar must match eta_bar "
                f"({self.adversary.eta_bar} != {self.eta_bar})"
            )
        for s in self.statistics:
            if s not in BASE_STATISTICS and not _COMPARATOR.match(s):
                raise ArgumentError(f"unknown statistic {s!r}")
        if self.threads != "auto" and (int(self.threads) != self.threads or self.threads < 1):
            raise ArgumentError(f"threads must be a positive integer or 'auto'")

    @property
    def track_covariance_error(self) -> bool:
        if self.covariance_error is None:
            return self.d <= 1000
        return self.covariance_error

    def worker_count(self) -> int:
        if self.threads == "auto":
            return os.cpu_count() or 1
        return int(self.threads)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["adversary"] = self.adversary.to_dict()
        out["mixture"] = [asdict(c) for c in self.mixture]
        out["statistics"] = list(self.statistics)
        return out


def population_moments(cfg: ScenarioConfig) -> tuple[float, float]:
    """Common coordinate mean and variance of the uncontaminated law."""
    if cfg.distribution == "student_t":
        return 0.0, cfg.nu / (cfg.nu - 2.0)
    if cfg.distribution == "standard_normal":
        return 0.0, 1.0
    w = np.array([c.weight for c in cfg.mixture])
    w = w / w.sum()
    locs = np.array([c.loc for c in cfg.mixture])
    second = np.array([c.variance() + c.loc**2 for c in cfg.mixture])
    mean = float(w @ locs)
    return mean, float(w @ second - mean**2)


def generate_sample(cfg: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """An ``(n, d)`` draw with i.i.d. entries.

    The array is Fortran-ordered, so each coordinate is contiguous.
    """
    shape = (cfg.d, cfg.n)
    if cfg.distribution == "student_t":
        z = rng.standard_t(cfg.nu, size=shape)
    elif cfg.distribution == "standard_normal":
        z = rng.standard_normal(shape)
    else:
        w = np.array([c.weight for c in cfg.mixture])
        label = rng.choice(len(cfg.mixture), size=shape, p=w / w.sum())
        z = np.empty(shape)
        for i, comp in enumerate(cfg.mixture):
            mask = label == i
            k = int(mask.sum())
            if comp.family == "normal":
                base = rng.standard_normal(k)
            else:
                base = rng.standard_t(comp.nu, size=k)
            z[mask] = comp.loc + comp.scale * base
    return z.T


def comparator_trimmed_mean(data, k_trim: int, mu) -> MeanStatistic | NotImplementable:
    """Symmetric trimmed mean dropping ``k_trim`` order statistics per tail,
    scaled by ``sqrt(n)``. Returns :class:`NotImplementable` if ``2k >= n``."""
    x = as_sample(data)
    n, d = x.shape
    if int(k_trim) != k_trim or k_trim < 0:
        raise ArgumentError(f"k_trim must be a nonnegative integer, got {k_trim!r}")
    k = int(k_trim)
    if 2 * k >= n:
        return NotImplementable(f"trimming {2 * k} of n={n} observations")
    m = np.broadcast_to(np.asarray(mu, dtype=np.float64), (d,))
    cols = np.ascontiguousarray(x.T)
    if k > 0:
        cols = np.partition(cols, [k - 1, n - k], axis=1)[:, k : n - k]
    values = math.sqrt(n) * np.sum(cols - m[:, None], axis=1) / (n - 2 * k)
    return MeanStatistic(values, "trimmed", m.copy())


def rejection_frequency(stat_norms, critical) -> float:
    """Fraction of norms strictly above ``critical`` (scalar or per-replication)."""
    x = np.asarray(stat_norms, dtype=np.float64)
    if x.size == 0:
        raise ArgumentError("empty sample")
    return float(np.mean(x > np.asarray(critical, dtype=np.float64)))


class DiagonalMaxNormLaw:
    """Law of ``||Z||_inf`` for ``Z ~ N(0, sigma2 * I_d)``."""

    def __init__(self, sigma2: float, d: int):
        self.sigma2 = float(sigma2)
        self.d = int(d)

    def cdf(self, t):
        return max_norm_cdf_diagonal(t, self.sigma2, self.d)

    def ppf(self, p):
        p = np.atleast_1d(np.asarray(p, dtype=np.float64))
        return np.array(
            [max_quantile_diagonal(self.sigma2, self.d, 1.0 - q).value for q in p]
        )

    continuous = True


class EmpiricalLaw:
    """Empirical law of a sample, e.g. pooled bootstrap norms."""

    def __init__(self, sample):
        self.sample = np.sort(np.asarray(sample, dtype=np.float64).ravel())
        if self.sample.size == 0:
            raise ArgumentError("empty sample")

    def cdf(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.searchsorted(self.sample, t, side="right") / self.sample.size

    def ppf(self, p):
        return np.quantile(self.sample, p)

    continuous = False


@dataclass(frozen=True)
class PPCurve:
    t: np.ndarray
    cdf_reference: np.ndarray
    cdf_empirical: np.ndarray

    def to_csv(self) -> str:
        rows = ["t,cdf_reference,cdf_empirical"]
        rows += [
            f"{t!r},{r!r},{e!r}"
            for t, r, e in zip(
                self.t.tolist(), self.cdf_reference.tolist(), self.cdf_empirical.tolist()
            )
        ]
        return "\n".join(rows) + "\n"


def pp_curve(
    stat_norms,
    reference_cdf: Callable | DiagonalMaxNormLaw | EmpiricalLaw,
    grid=None,
    *,
    points: int = 512,
    reference_ppf: Callable | None = None,
) -> PPCurve:
    """Pairs ``(F_ref(t), F_emp(t))`` over a grid of t values.

    The default grid merges ``points/2`` quantiles of the sample with
    ``points/2`` quantiles of the reference. If no reference quantile
    function is available, all ``points`` come from the sample.
    """
    x = np.sort(np.asarray(stat_norms, dtype=np.float64).ravel())
    if x.size == 0:
        raise ArgumentError("empty sample")
    cdf = getattr(reference_cdf, "cdf", reference_cdf)
    ppf = reference_ppf or getattr(reference_cdf, "ppf", None)
    if grid is None:
        if ppf is not None:
            half = max(points // 2, 1)
            levels = (np.arange(half) + 0.5) / half
            grid = np.concatenate([np.quantile(x, levels), np.asarray(ppf(levels))])
        else:
            grid = np.quantile(x, (np.arange(points) + 0.5) / points)
    t = np.unique(np.asarray(grid, dtype=np.float64))
    emp = np.searchsorted(x, t, side="right") / x.size
    ref = np.maximum.accumulate(np.clip(np.asarray(cdf(t), dtype=np.float64), 0.0, 1.0))
    return PPCurve(t=t, cdf_reference=ref, cdf_empirical=emp)


def ks_distance(stat_norms, law: DiagonalMaxNormLaw | EmpiricalLaw) -> float:
    """Kolmogorov-Smirnov distance between the sample and ``law``."""
    x = np.sort(np.asarray(stat_norms, dtype=np.float64).ravel())
    if isinstance(law, EmpiricalLaw):
        return float(sps.ks_2samp(x, law.sample).statistic)
    f = np.asarray(law.cdf(x), dtype=np.float64)
    k = np.arange(1, x.size + 1)
    return float(max(np.max(k / x.size - f), np.max(f - (k - 1) / x.size)))


@dataclass
class ReplicationSummary:
    """Aggregated results of :func:`run_scenario`."""

    config: ScenarioConfig
    norms: dict[str, np.ndarray]
    gaussian_critical: dict[str, float]
    bootstrap_critical: dict[str, np.ndarray]
    rejection: dict[str, dict[str, float]]
    ks: dict[str, dict[str, float]]
    pp: dict[str, PPCurve]
    not_implementable: dict[str, str]
    feasibility: dict
    schedules: dict
    covariance_errors: np.ndarray | None
    modified_counts: np.ndarray
    warnings: list[str]
    runtime_seconds: float
    pooled_bootstrap: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def to_json_dict(self) -> dict:
        cov = None
        if self.covariance_errors is not None:
            ce = self.covariance_errors
            cov = {
                "median": float(np.median(ce)),
                "mean": float(np.mean(ce)),
                "max": float(np.max(ce)),
            }
        return {
            "config": self.config.to_dict(),
            "schedules": self.schedules,
            "feasibility": self.feasibility,
            "statistics": {
                name: {
                    "rejection_gaussian": self.rejection[name].get("gaussian"),
                    "rejection_bootstrap": self.rejection[name].get("bootstrap"),
                    "ks_gaussian": self.ks[name].get("gaussian"),
                    "ks_bootstrap": self.ks[name].get("bootstrap"),
                    "critical_gaussian": self.gaussian_critical.get(name),
                    "critical_bootstrap_mean": (
                        float(np.mean(self.bootstrap_critical[name]))
                        if name in self.bootstrap_critical
                        else None
                    ),
                    "norm_mean": float(np.mean(self.norms[name])),
                    "norm_median": float(np.median(self.norms[name])),
                    "norm_max": float(np.max(self.norms[name])),
                }
                for name in self.norms
            },
            "not_implementable": self.not_implementable,
            "covariance_max_entry_error": cov,
            "modified_rows": {
                "min": int(self.modified_counts.min()),
                "max": int(self.modified_counts.max()),
            },
            "warnings": self.warnings,
            "runtime": {
                "seconds": self.runtime_seconds,
                "threads": self.config.worker_count(),
                "replications": self.config.replications,
            },
        }

    def write(self, output_dir, svg: bool = False) -> list[Path]:
        """Write ``summary.json`` and one ``pp_<name>.csv`` per curve (plus
        ``.svg`` renderings if requested). Returns the written paths."""
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "summary.json"]
        written[0].write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")
        for name, curve in self.pp.items():
            path = out / f"pp_{name}.csv"
            path.write_text(curve.to_csv())
            written.append(path)
            if svg:
                written.append(_render_svg(curve, name, out / f"pp_{name}.svg"))
        return written


def _render_svg(curve: PPCurve, title: str, path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4, 4))
    ax.plot(curve.cdf_reference, curve.cdf_empirical, lw=1.2)
    ax.plot([0, 1], [0, 1], color="black", lw=0.8)
    ax.set_xlabel("reference cdf")
    ax.set_ylabel("empirical cdf")
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


@dataclass
class _Plan:
    cfg: ScenarioConfig
    mu: float
    sched: object
    sched_cov: object
    comparators: dict[str, int]
    names: list[str]
    boot_names: list[str]
    keep: int


def _bootstrap_blocks(
    blocks: dict[str, np.ndarray], B: int, keep: int, alpha: float, rng
) -> tuple[dict[str, float], dict[str, np.ndarray]]:
    # One multiplier vector per draw, shared across all residual blocks.
    names = list(blocks)
    n = next(iter(blocks.values())).shape[0]
    norms = {k: np.empty(B) for k in names}
    scale = 1.0 / math.sqrt(n)
    for start in range(0, B, _CHUNK):
        k = min(_CHUNK, B - start)
        xi = rng.standard_normal((k, n))
        for name in names:
            norms[name][start : start + k] = np.max(np.abs(xi @ blocks[name]), axis=1) * scale
    crit = {k: empirical_quantile(v, alpha) for k, v in norms.items()}
    return crit, {k: v[:keep].copy() for k, v in norms.items()}


def _replicate(plan: _Plan, r: int) -> dict:
    cfg = plan.cfg
    x = generate_sample(cfg, stream(cfg.seed, r, 0))
    x, modified = apply_adversary(x, cfg.adversary, stream(cfg.seed, r, 1))
    norms: dict[str, float] = {}
    blocks: dict[str, np.ndarray] = {}
    rec: dict = {"modified": modified}

    cov = None
    if plan.sched_cov.valid and (
        "normalized" in plan.names or plan.boot_names or cfg.track_covariance_error
    ):
        cov = winsorized_covariance(x, plan.sched_cov)

    if "sample_mean" in plan.names:
        norms["sample_mean"] = centered_sample_mean(x, plan.mu).sup_norm()
        if "sample_mean" in plan.boot_names:
            blocks["sample_mean"] = x - x.mean(axis=0)
    if plan.sched.valid and ({"winsorized", "trimmed"} & set(plan.names)):
        wins, trim = winsorized_and_trimmed(x, plan.mu, plan.sched)
        norms["winsorized"] = wins.sup_norm()
        norms["trimmed"] = trim.sup_norm()
    if "normalized" in plan.names and plan.sched.valid and cov is not None:
        try:
            stat = normalized_winsorized_mean(x, plan.mu, plan.sched, cov.diag_sd)
            norms["normalized"] = stat.sup_norm()
            if "normalized" in plan.boot_names:
                blocks["normalized"] = correlation_normalize(cov).residuals
        except ArithmeticError:
            norms["normalized"] = math.nan
    for name, k in plan.comparators.items():
        stat = comparator_trimmed_mean(x, k, plan.mu)
        norms[name] = stat.sup_norm()
    if cov is not None and ({"winsorized", "trimmed"} & set(plan.boot_names)):
        blocks["winsorized"] = cov.residuals

    if blocks:
        crit, kept = _bootstrap_blocks(
            blocks, cfg.bootstrap_B, plan.keep, cfg.alpha, stream(cfg.seed, r, 2)
        )
        if "winsorized" in crit:
            crit["trimmed"] = crit["winsorized"]
            kept["trimmed"] = kept["winsorized"]
        rec["crit"] = crit
        rec["kept"] = kept

    if cov is not None and cfg.track_covariance_error:
        _, sigma2 = population_moments(cfg)
        g = cov.matrix.copy()
        g[np.diag_indices_from(g)] -= sigma2
        rec["cov_error"] = float(np.max(np.abs(g)))
    rec["norms"] = norms
    return rec


def _make_plan(cfg: ScenarioConfig) -> tuple[_Plan, dict[str, str], dict, list[str]]:
    sched = epsilon_schedule(cfg.n, cfg.d, cfg.eta_bar, cfg.lambda1, cfg.lambda2, "mean")
    sched_cov = epsilon_schedule(
        cfg.n, cfg.d, cfg.eta_bar, cfg.lambda1_prime, cfg.lambda2_prime, "covariance"
    )
    mu, _ = population_moments(cfg)
    missing: dict[str, str] = {}
    names: list[str] = []
    comparators: dict[str, int] = {}
    for s in cfg.statistics:
        m = _COMPARATOR.match(s)
        if m:
            k = int(m.group(1))
            if 2 * k >= cfg.n:
                missing[s] = f"trimming {2 * k} of n={cfg.n} observations"
                continue
            comparators[s] = k
            names.append(s)
        elif s in ("winsorized", "trimmed") and not sched.valid:
            missing[s] = f"epsilon={sched.epsilon:.6g} outside (0, 1/2)"
        elif s == "normalized" and not (sched.valid and sched_cov.valid):
            missing[s] = "mean or covariance epsilon outside (0, 1/2)"
        else:
            names.append(s)

    boot: list[str] = []
    if cfg.bootstrap_B:
        for s in names:
            if s in ("winsorized", "trimmed", "normalized"):
                if sched_cov.valid:
                    boot.append(s)
            elif s == "sample_mean" and cfg.baseline_bootstrap:
                boot.append(s)

    warn: list[str] = []
    feas: dict = {
        "mean_schedule_valid": sched.valid,
        "covariance_schedule_valid": sched_cov.valid,
    }
    if 0 < sched_cov.epsilon < 1:
        simple = feasibility_condition(
            cfg.n, cfg.d, sched_cov.epsilon, lambda2_prime=cfg.lambda2_prime
        )
        sharp = sharp_feasibility(
            cfg.n, cfg.d, sched_cov.epsilon, cfg.lambda1_prime, cfg.eta_bar > 0
        )
        feas["covariance_simple"] = simple.to_dict()
        feas["covariance_sharp"] = {
            "lhs_value": sharp.lhs_value,
            "satisfied": sharp.satisfied,
        }
        if not simple.satisfied:
            warn.append(
                "covariance feasibility condition violated "
                f"(lhs={simple.lhs_value:.4g} >= 1)"
            )
    for s, why in missing.items():
        warn.append(f"{s}: not implementable ({why})")

    plan = _Plan(
        cfg=cfg,
        mu=mu,
        sched=sched,
        sched_cov=sched_cov,
        comparators=comparators,
        names=names,
        boot_names=boot,
        keep=min(cfg.bootstrap_B, PP_BOOTSTRAP_KEEP),
    )
    schedules = {"mean": sched.to_dict(), "covariance": sched_cov.to_dict()}
    return plan, missing, {"feasibility": feas, "schedules": schedules}, warn


def run_scenario(
    cfg: ScenarioConfig, progress: Callable[[int, int], None] | None = None
) -> ReplicationSummary:
    """Run all replications of ``cfg`` and aggregate them."""
    started = time.perf_counter()
    plan, missing, meta, warn = _make_plan(cfg)
    R = cfg.replications
    records: list[dict | None] = [None] * R

    def work(rs: Sequence[int]) -> None:
        for r in rs:
            records[r] = _replicate(plan, r)
            if progress is not None:
                progress(r, R)

    workers = cfg.worker_count()
    if workers == 1:
        work(range(R))
    else:
        chunks = [range(i, R, workers) for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, chunks))

    names = [s for s in plan.names if not all(math.isnan(rec["norms"].get(s, math.nan)) for rec in records)]
    norms = {s: np.array([rec["norms"][s] for rec in records]) for s in names}
    for s in list(norms):
        if np.any(np.isnan(norms[s])):
            missing[s] = "degenerate scale estimate in some replication"
            warn.append(f"{s}: degenerate scale estimate in some replication")
            del norms[s]

    _, sigma2 = population_moments(cfg)
    gauss_law = {"default": DiagonalMaxNormLaw(sigma2, cfg.d), "normalized": DiagonalMaxNormLaw(1.0, cfg.d)}
    crit_gauss = {
        "default": max_quantile_diagonal(sigma2, cfg.d, cfg.alpha).value,
        "normalized": max_quantile_diagonal(1.0, cfg.d, cfg.alpha).value,
    }

    gaussian_critical: dict[str, float] = {}
    bootstrap_critical: dict[str, np.ndarray] = {}
    rejection: dict[str, dict[str, float]] = {}
    ks: dict[str, dict[str, float]] = {}
    pp: dict[str, PPCurve] = {}
    pooled: dict[str, np.ndarray] = {}
    for s, x in norms.items():
        key = "normalized" if s == "normalized" else "default"
        gaussian_critical[s] = crit_gauss[key]
        rejection[s] = {"gaussian": rejection_frequency(x, crit_gauss[key])}
        ks[s] = {"gaussian": ks_distance(x, gauss_law[key])}
        pp[s] = pp_curve(x, gauss_law[key], points=cfg.pp_points)
        if s in plan.boot_names:
            cb = np.array([rec["crit"][s] for rec in records])
            bootstrap_critical[s] = cb
            rejection[s]["bootstrap"] = rejection_frequency(x, cb)
            pooled[s] = np.concatenate([rec["kept"][s] for rec in records])
            law = EmpiricalLaw(pooled[s])
            ks[s]["bootstrap"] = ks_distance(x, law)
            pp[f"{s}_bootstrap"] = pp_curve(x, law, points=cfg.pp_points)

    cov_err = None
    if any("cov_error" in rec for rec in records):
        cov_err = np.array([rec.get("cov_error", math.nan) for rec in records])

    return ReplicationSummary(
        config=cfg,
        norms=norms,
        gaussian_critical=gaussian_critical,
        bootstrap_critical=bootstrap_critical,
        rejection=rejection,
        ks=ks,
        pp=pp,
        not_implementable=missing,
        feasibility=meta["feasibility"],
        schedules=meta["schedules"],
        covariance_errors=cov_err,
        modified_counts=np.array([rec["modified"] for rec in records]),
        warnings=warn,
        runtime_seconds=time.perf_counter() - started,
        pooled_bootstrap=pooled,
    )


def with_overrides(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    """Copy of ``cfg`` with the non-None ``changes`` applied."""
    return replace(cfg, **{k: v for k, v in changes.items() if v is not None})
