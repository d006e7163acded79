"""Categorical and Gaussian benchmark studies, and their ``.dat`` tables."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .coding import ZipfModel, entropy_bits, zipf_code_length
from .distributions import (
    Categorical,
    Gaussian,
    TransformedTruncatedGaussian,
    TruncatedGaussian,
    TruncatedGaussianSpec,
    compute_m,
    compute_wmin_gaussian,
    dirichlet_sample,
    kl_bits,
    normal_ppf,
    tvd,
    uniform_categorical,
)
from .randomness import GENERATOR_VERSION, Stream, StreamKey, derive_seed, uniforms
from .samplers import (
    GreedyTable,
    SamplerConfig,
    candidates,
    greedy_rs_batch,
    hybrid_batch,
    hybrid_center,
    hybrid_w_min,
    mrc_batch,
    optimal_w_min,
    orc_batch,
    pfr_batch,
    rs_batch,
)

log = logging.getLogger(__name__)

DEFAULT_SEED = 20220202
CATEGORICAL_ALGORITHMS = ("rs", "rs*", "mrc", "orc", "pfr")
GAUSSIAN_ALGORITHMS = ("pfr", "hybrid")
# stable per-algorithm tags for keying run seeds
_ALG_TAGS = {"rs": 1, "rs*": 2, "mrc": 3, "orc": 4, "pfr": 5, "hybrid": 6}


def percentiles(samples, qs) -> list[float]:
    """Nearest-rank percentiles: the value at rank ``max(1, ceil(q * n))``."""
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if x.size == 0:
        raise ValueError("no samples")
    out = []
    for q in qs:
        if not 0 <= q <= 1:
            raise ValueError("percentile levels must lie in [0, 1]")
        rank = max(1, math.ceil(q * x.size - 1e-12))
        out.append(float(x[rank - 1]))
    return out


@dataclass
class CategoricalExperimentConfig:
    dim: int = 2**10
    alpha: float = 0.02
    num_targets: int = 10
    num_samples: int = 10_000
    candidates: tuple[int, ...] = tuple(2**k for k in range(15))
    algorithms: tuple[str, ...] = CATEGORICAL_ALGORITHMS
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        self.candidates = tuple(int(n) for n in self.candidates)
        self.algorithms = tuple(self.algorithms)
        unknown = set(self.algorithms) - set(CATEGORICAL_ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        if self.dim < 1 or self.alpha <= 0 or self.num_targets < 1 or self.num_samples < 1:
            raise ValueError("dim, alpha, num_targets and num_samples must be positive")
        if any(n < 1 for n in self.candidates):
            raise ValueError("candidate budgets must be positive")

    @classmethod
    def full_scale(cls, **overrides) -> CategoricalExperimentConfig:
        base = dict(dim=2**16, alpha=3e-4, num_targets=20, num_samples=100_000,
                    candidates=tuple(2**k for k in range(18)))
        base.update(overrides)
        return cls(**base)


@dataclass
class CategoricalRecord:
    algorithm: str
    n: int
    coding_cost: float
    tvd: float
    iter_mean: float
    iter_p25: float
    iter_p50: float
    iter_p75: float
    zipf_cost: float

    def __post_init__(self):
        assert self.iter_p25 <= self.iter_p50 <= self.iter_p75


@dataclass
class CategoricalResult:
    config: CategoricalExperimentConfig
    mean_kl: float
    records: dict[str, list[CategoricalRecord]] = field(default_factory=dict)


def categorical_targets(config: CategoricalExperimentConfig) -> list[Categorical]:
    return [
        dirichlet_sample(config.alpha, config.dim, StreamKey(config.seed, Stream.TARGET, t))
        for t in range(config.num_targets)
    ]


def run_seeds(seed: int, algorithm: str, target: int, count: int) -> np.ndarray:
    """Per-run seeds keyed by (algorithm, target, sample); shared across budgets."""
    return derive_seed(seed, _ALG_TAGS[algorithm], target, np.arange(count, dtype=np.uint64))


def _categorical_cell(algorithm, target, proposal, n_cand, seeds, table=None):
    if algorithm == "rs":
        return rs_batch(target, proposal, optimal_w_min(target, proposal), seeds, n_cand)
    if algorithm == "rs*":
        return greedy_rs_batch(target, proposal, seeds, n_cand, table=table)
    if algorithm == "mrc":
        return mrc_batch(target, proposal, n_cand, seeds)
    if algorithm == "orc":
        return orc_batch(target, proposal, n_cand, seeds, optimal_w_min(target, proposal))
    if algorithm == "pfr":
        return pfr_batch(target, proposal, optimal_w_min(target, proposal), seeds, n_cand)
    raise ValueError(algorithm)


def run_categorical(config: CategoricalExperimentConfig) -> CategoricalResult:
    """Compare algorithms on Dirichlet-distributed categorical targets.

    For every (algorithm, budget N) the TVD is averaged over targets, and the
    coding cost is the plug-in entropy of the index histogram pooled over
    targets.  RS, ORC and PFR use the per-target optimal ``w_min``.
    """
    proposal = uniform_categorical(config.dim)
    targets = categorical_targets(config)
    mean_kl = float(np.mean([kl_bits(q, proposal) for q in targets]))
    zipf = ZipfModel.for_kl(mean_kl)
    result = CategoricalResult(config=config, mean_kl=mean_kl)
    log.info("categorical: D=%d alpha=%g mean KL=%.4f bits", config.dim, config.alpha, mean_kl)

    for alg in config.algorithms:
        tables = [GreedyTable(q, proposal) for q in targets] if alg == "rs*" else [None] * len(targets)
        seeds = [run_seeds(config.seed, alg, t, config.num_samples) for t in range(len(targets))]
        rows = []
        for n_cand in config.candidates:
            index_hist = np.zeros(n_cand + 1)
            tvds, iters, zipf_len = [], [], []
            for t, q in enumerate(targets):
                res = _categorical_cell(alg, q, proposal, n_cand, seeds[t], tables[t])
                z = candidates(proposal, seeds[t], res.index[:, None])[:, 0]
                hist = np.bincount(z, minlength=config.dim) / z.size
                tvds.append(tvd(hist, q.probs))
                index_hist += np.bincount(res.index, minlength=n_cand + 1)
                iters.append(res.iterations)
                zipf_len.append(zipf_code_length(zipf, res.index))
            iters = np.concatenate(iters)
            p25, p50, p75 = percentiles(iters, (0.25, 0.5, 0.75))
            rows.append(CategoricalRecord(
                algorithm=alg,
                n=n_cand,
                coding_cost=entropy_bits(index_hist),
                tvd=float(np.mean(tvds)),
                iter_mean=float(iters.mean()),
                iter_p25=p25,
                iter_p50=p50,
                iter_p75=p75,
                zipf_cost=float(np.mean(np.concatenate(zipf_len))),
            ))
            log.debug("%s N=%d cc=%.4f tv=%.4f", alg, n_cand, rows[-1].coding_cost, rows[-1].tvd)
        result.records[alg] = rows
    return result


@dataclass
class GaussianExperimentConfig:
    sigmas: tuple[float, ...] = (0.5, 1, 2, 3, 4, 5, 7.5, 10, 15, 20, 25, 30, 40, 50)
    dim: int = 1
    theta: float = 1e-4
    trials: int = 10_000
    algorithms: tuple[str, ...] = GAUSSIAN_ALGORITHMS
    mode: str = "geometric"
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        self.sigmas = tuple(float(s) for s in self.sigmas)
        self.algorithms = tuple(self.algorithms)
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if self.trials < 1 or self.dim < 1:
            raise ValueError("trials and dim must be positive")
        if any(s <= 0 for s in self.sigmas):
            raise ValueError("sigma must be positive")
        if self.mode not in ("geometric", "full"):
            raise ValueError("mode must be 'geometric' or 'full'")
        unknown = set(self.algorithms) - set(GAUSSIAN_ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")


@dataclass
class GaussianRecord:
    algorithm: str
    sigma: float
    p25: float
    p50: float
    p75: float
    mean: float
    m: int

    def __post_init__(self):
        assert self.p25 <= self.p50 <= self.p75


def gaussian_means(seed: int, sigma_index: int, sigma: float, trials: int, dim: int) -> np.ndarray:
    """Trial means ``x ~ N(0, sigma^2 I)``, shared by all algorithms."""
    u = uniforms(derive_seed(seed, sigma_index), Stream.TARGET,
                 np.arange(trials, dtype=np.uint64)[:, None], np.arange(dim, dtype=np.uint64)[None, :])
    return sigma * normal_ppf(np.clip(u, 2.0**-60, None))


def geometric_iterations(w, u) -> np.ndarray:
    """Geometric(w) counts on {1, 2, ...} by inversion of uniforms ``u``."""
    w = np.asarray(w, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        n = 1 + np.floor(np.log1p(-np.asarray(u)) / np.log1p(-w))
    return np.where(w >= 1, 1, n).astype(np.int64)


def gaussian_iterations(algorithm: str, spec: TruncatedGaussianSpec, w_min: float, m: int, seed: int) -> int:
    """Iterations of one full PFR or hybrid encoding of the truncated Gaussian ``spec``."""
    if algorithm == "pfr":
        target = TruncatedGaussian(spec)
        proposal = Gaussian(np.zeros(spec.dim), spec.marginal_var)
        return int(pfr_batch(target, proposal, w_min, [seed]).iterations[0])
    target = TransformedTruncatedGaussian(spec, m)
    center = hybrid_center(spec, m)
    config = SamplerConfig(w_min=hybrid_w_min(w_min, [m] * spec.dim))
    return int(hybrid_batch(target, center, [seed], config).iterations[0])


def run_gaussian(config: GaussianExperimentConfig) -> dict[str, list[GaussianRecord]]:
    """Iteration-count percentiles of PFR and hybrid coding per prior scale sigma.

    ``mode='geometric'`` samples Geometric(w_min) for PFR and
    Geometric(min(1, w_min M^D)) for hybrid coding; ``mode='full'`` runs the
    encoders.
    """
    out = {alg: [] for alg in config.algorithms}
    for si, sigma in enumerate(config.sigmas):
        m = compute_m(sigma, config.theta, config.dim)
        xs = gaussian_means(config.seed, si, sigma, config.trials, config.dim)
        specs = [TruncatedGaussianSpec(tuple(x), sigma, config.theta) for x in xs]
        w = np.array([compute_wmin_gaussian(s) for s in specs])
        for alg in config.algorithms:
            seeds = derive_seed(config.seed, _ALG_TAGS[alg], si, np.arange(config.trials, dtype=np.uint64))
            if config.mode == "geometric":
                param = w if alg == "pfr" else np.minimum(1.0, w * float(m) ** config.dim)
                iters = geometric_iterations(param, uniforms(seeds, Stream.RUN, 0))
            else:
                iters = np.array([
                    gaussian_iterations(alg, s, wi, m, int(sd)) for s, wi, sd in zip(specs, w, seeds)
                ])
            p25, p50, p75 = percentiles(iters, (0.25, 0.5, 0.75))
            out[alg].append(GaussianRecord(alg, sigma, p25, p50, p75, float(np.mean(iters)), m))
            log.info("gaussian %s sigma=%g M=%d median=%g", alg, sigma, m, p50)
    return out


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) or float(x).is_integer():
        return str(int(x))
    return f"{float(x):.6f}"


def write_table(path: Path, header: list[str], rows: list[list]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [" ".join(header)] + [" ".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_sidecar(path: Path, config, extra: dict | None = None) -> Path:
    meta = {
        "config": asdict(config),
        "seed": config.seed,
        "version": __version__,
        "generator_version": GENERATOR_VERSION,
    }
    meta.update(extra or {})
    sidecar = Path(path).with_suffix(".json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return sidecar


def _alg_filename(alg: str) -> str:
    return alg.replace("*", "star")


def write_categorical(result: CategoricalResult, out_dir: Path) -> list[Path]:
    paths = []
    for alg, rows in result.records.items():
        path = Path(out_dir) / f"categorical_{_alg_filename(alg)}.dat"
        write_table(path, ["N", "cc", "TV", "Imean", "I25", "I50", "I75"],
                    [[r.n, r.coding_cost, r.tvd, r.iter_mean, r.iter_p25, r.iter_p50, r.iter_p75] for r in rows])
        write_sidecar(path, result.config, {
            "algorithm": alg,
            "mean_kl_bits": result.mean_kl,
            "zipf_cost_bits": {str(r.n): r.zipf_cost for r in rows},
        })
        paths.append(path)
    return paths


def write_gaussian(records: dict[str, list[GaussianRecord]], config: GaussianExperimentConfig, out_dir: Path) -> list[Path]:
    paths = []
    for alg, rows in records.items():
        path = Path(out_dir) / f"gaussian_{config.dim}_{alg}.dat"
        write_table(path, ["sigma", "p25", "p50", "p75"], [[r.sigma, r.p25, r.p50, r.p75] for r in rows])
        write_sidecar(path, config, {"algorithm": alg, "M": {_fmt(r.sigma): r.m for r in rows},
                                     "mean_iterations": {_fmt(r.sigma): r.mean for r in rows}})
        paths.append(path)
    return paths
