"""Command-line entry point: ``chansim {categorical,gaussian,roundtrip,bounds}``."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import bounds
from .coding import BitSource, decode_selection, encode_selection
from .distributions import (
    Gaussian,
    TransformedTruncatedGaussian,
    TruncatedGaussian,
    TruncatedGaussianSpec,
    compute_m,
    compute_wmin_gaussian,
    dirichlet_sample,
    uniform_categorical,
)
from .experiments import (
    CATEGORICAL_ALGORITHMS,
    DEFAULT_SEED,
    GAUSSIAN_ALGORITHMS,
    CategoricalExperimentConfig,
    GaussianExperimentConfig,
    gaussian_means,
    run_categorical,
    run_gaussian,
    write_categorical,
    write_gaussian,
)
from .randomness import Stream, StreamKey
from .samplers import (
    SamplerConfig,
    decode,
    greedy_rs_encode,
    hybrid_center,
    hybrid_decode,
    hybrid_encode,
    hybrid_w_min,
    mrc_encode,
    orc_encode,
    orc_tvd_bound,
    pfr_encode,
    rs_encode,
)

log = logging.getLogger("chansim")

_POW = re.compile(r"^\s*2\^(\d+)\s*$")


def parse_budget(text: str) -> int:
    m = _POW.match(text)
    value = 2 ** int(m.group(1)) if m else int(text)
    if value < 1:
        raise ValueError(f"candidate budget must be positive: {text}")
    return value


def parse_budgets(text: str) -> tuple[int, ...]:
    """``"2^0..2^14"`` (powers of two), ``"1,4,16"`` or a mix of both."""
    out = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = (parse_budget(p) for p in part.split(".."))
            k = lo
            while k <= hi:
                out.append(k)
                k *= 2
        else:
            out.append(parse_budget(part))
    return tuple(out)


def parse_sigmas(text: str) -> tuple[float, ...]:
    """Comma list, or ``start:stop:step`` inclusive of ``stop``."""
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        return tuple(float(v) for v in np.round(np.arange(start, stop + step / 2, step), 10))
    return tuple(float(v) for v in text.split(","))


def _arg_type(fn):
    def conv(text):
        try:
            return fn(text)
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from e
    conv.__name__ = fn.__name__
    return conv


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chansim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    # also accepted after the subcommand; SUPPRESS keeps the top-level count
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    cat = sub.add_parser("categorical", parents=[common], help="algorithm comparison on Dirichlet targets")
    cat.add_argument("--dim", type=int, default=2**10)
    cat.add_argument("--alpha", type=float, default=0.02)
    cat.add_argument("--num-targets", type=int, default=10)
    cat.add_argument("--num-samples", type=int, default=10_000)
    cat.add_argument("--candidates", type=_arg_type(parse_budgets), default="2^0..2^14")
    cat.add_argument("--algorithms", default=",".join(CATEGORICAL_ALGORITHMS))
    cat.add_argument("--full-scale", action="store_true", help="D=2^16, alpha=3e-4, 20 targets, 1e5 samples")
    cat.add_argument("--seed", type=int, default=DEFAULT_SEED)
    cat.add_argument("--out", type=Path, default=Path("results"))

    gau = sub.add_parser("gaussian", parents=[common], help="PFR vs hybrid iteration counts")
    gau.add_argument("--sigma-grid", type=_arg_type(parse_sigmas), default="0.5,1,2,3,4,5,7.5,10,15,20,25,30,40,50")
    gau.add_argument("--dim", type=int, default=1)
    gau.add_argument("--theta", type=float, default=1e-4)
    gau.add_argument("--trials", type=int, default=10_000)
    gau.add_argument("--mode", choices=("geometric", "full"), default="geometric")
    gau.add_argument("--algorithms", default=",".join(GAUSSIAN_ALGORITHMS))
    gau.add_argument("--seed", type=int, default=DEFAULT_SEED)
    gau.add_argument("--out", type=Path, default=Path("results"))

    rt = sub.add_parser("roundtrip", parents=[common], help="encode one sample, emit the bit stream, decode it")
    rt.add_argument("--alg", choices=("rs", "rs*", "mrc", "orc", "pfr", "hybrid"), default="hybrid")
    rt.add_argument("--sigma", type=float, default=10.0)
    rt.add_argument("--theta", type=float, default=1e-4)
    rt.add_argument("--dim", type=int, default=1, help="Gaussian dimension (categorical size for rs*)")
    rt.add_argument("--alpha", type=float, default=0.02, help="Dirichlet concentration for rs*")
    rt.add_argument("--candidates", type=_arg_type(parse_budget), default=None)
    rt.add_argument("--seed", type=int, default=DEFAULT_SEED)

    bd = sub.add_parser("bounds", parents=[common], help="coding-cost bounds in bits")
    bd.add_argument("--mi", type=float, required=True, help="mutual information / expected KL in bits")
    bd.add_argument("--wmin", type=float, default=None)
    bd.add_argument("--lattice", default=None, help="comma-separated side lengths M_i")
    bd.add_argument("--t", type=float, default=None, help="ORC oversampling exponent for the TVD bound")
    return parser


def _algorithms(text: str, allowed) -> tuple[str, ...]:
    algs = tuple(a.strip() for a in text.split(",") if a.strip())
    bad = [a for a in algs if a not in allowed]
    if bad:
        raise ValueError(f"unknown algorithms {bad}; choose from {list(allowed)}")
    return algs


def cmd_categorical(args) -> int:
    fields = dict(dim=args.dim, alpha=args.alpha, num_targets=args.num_targets, num_samples=args.num_samples,
                  candidates=args.candidates, algorithms=_algorithms(args.algorithms, CATEGORICAL_ALGORITHMS),
                  seed=args.seed)
    if args.full_scale:
        fields.update(dim=2**16, alpha=3e-4, num_targets=20, num_samples=100_000)
    config = CategoricalExperimentConfig(**fields)
    log.info("config %s", json.dumps(asdict(config), sort_keys=True))
    for path in write_categorical(run_categorical(config), args.out):
        print(path)
    return 0


def cmd_gaussian(args) -> int:
    config = GaussianExperimentConfig(sigmas=args.sigma_grid, dim=args.dim, theta=args.theta, trials=args.trials,
                                      algorithms=_algorithms(args.algorithms, GAUSSIAN_ALGORITHMS),
                                      mode=args.mode, seed=args.seed)
    log.info("config %s", json.dumps(asdict(config), sort_keys=True))
    for path in write_gaussian(run_gaussian(config), config, args.out):
        print(path)
    return 0


def roundtrip(alg: str, seed: int, sigma: float = 10.0, theta: float = 1e-4, dim: int = 1,
              alpha: float = 0.02, n_candidates: int | None = None) -> dict:
    """Encode one sample, serialise it, parse it back and reconstruct it."""
    sides = None
    if alg == "rs*":
        proposal = uniform_categorical(dim if dim > 1 else 16)
        target = dirichlet_sample(alpha, proposal.size, StreamKey(seed, Stream.TARGET, 0))
        outcome = greedy_rs_encode(target, proposal, seed, n_candidates)
    else:
        x = gaussian_means(seed, 0, sigma, 1, dim)[0]
        spec = TruncatedGaussianSpec(tuple(x), sigma, theta)
        w_min = compute_wmin_gaussian(spec)
        if alg == "hybrid":
            m = compute_m(sigma, theta, dim)
            sides = [m] * dim
            target = TransformedTruncatedGaussian(spec, m)
            config = SamplerConfig(w_min=hybrid_w_min(w_min, sides), max_candidates=n_candidates)
            outcome = hybrid_encode(target, hybrid_center(spec, m), m, config, seed)
        else:
            target = TruncatedGaussian(spec)
            proposal = Gaussian(np.zeros(dim), spec.marginal_var)
            budget = n_candidates or (2**12 if alg in ("mrc", "orc") else None)
            if alg == "rs":
                outcome = rs_encode(target, proposal, SamplerConfig(w_min, budget), seed)
            elif alg == "pfr":
                outcome = pfr_encode(target, proposal, SamplerConfig(w_min, budget), seed)
            elif alg == "orc":
                outcome = orc_encode(target, proposal, SamplerConfig(w_min, budget), seed)
            else:
                outcome = mrc_encode(target, proposal, budget, seed)

    sink = encode_selection(outcome.index, outcome.lattice_point, sides)
    payload, nbits = sink.to_bytes(), len(sink)
    index, k = decode_selection(BitSource.from_bytes(payload, nbits), sides)
    if alg == "hybrid":
        decoded = hybrid_decode(seed, index, k)
    else:
        decoded = decode(proposal, seed, index)
    encoded = np.asarray(outcome.sample)
    decoded = np.asarray(decoded)
    match = encoded.dtype == decoded.dtype and encoded.tobytes() == decoded.tobytes()
    report = {
        "algorithm": alg,
        "seed": seed,
        "index": outcome.index,
        "lattice_point": None if k is None else k.tolist(),
        "iterations": outcome.iterations,
        "reason": outcome.reason.name,
        "bits": nbits,
        "hex": payload.hex(),
        "encoded_sample": encoded.tolist(),
        "decoded_sample": decoded.tolist(),
        "match": bool(match),
    }
    if alg == "hybrid":
        report["sample_original_space"] = target.to_raw(decoded).tolist()
    elif alg == "rs*":
        report["target_prob_of_sample"] = float(target.probs[int(decoded)])
    return report


def cmd_roundtrip(args) -> int:
    log.info("config %s", json.dumps(vars(args), default=str, sort_keys=True))
    report = roundtrip(args.alg, args.seed, args.sigma, args.theta, args.dim, args.alpha, args.candidates)
    for key, value in report.items():
        print(f"{key}: {value}")
    if not report["match"]:
        log.error("decoder output differs from the encoder's sample")
        return 1
    return 0


def cmd_bounds(args) -> int:
    mi = args.mi
    if mi < 0:
        raise ValueError("--mi must be non-negative")
    print(f"upper bound (exact sample): {bounds.exact_sample_upper_bound(mi):.3f} bits")
    print(f"lower bound (worst case): {bounds.worst_case_lower_bound(mi):.3f} bits")
    print(f"PFR/ORC index entropy bound: {bounds.orc_index_entropy_bound(mi):.3f} bits")
    if args.wmin is not None:
        print(f"RS index entropy bound: {bounds.rs_index_entropy_bound(args.wmin):.3f} bits")
    if args.lattice is not None:
        sides = [int(v) for v in args.lattice.split(",")]
        print(f"hybrid (N*, K*) entropy bound: {bounds.hybrid_entropy_bound(mi, sides):.3f} bits")
    if args.t is not None:
        if args.wmin is None:
            raise ValueError("--t needs --wmin")
        print(f"ORC TVD bound at N = 2^(KL + {args.t:g}): {orc_tvd_bound(mi, args.t, args.wmin):.6f}")
    return 0


COMMANDS = {
    "categorical": cmd_categorical,
    "gaussian": cmd_gaussian,
    "roundtrip": cmd_roundtrip,
    "bounds": cmd_bounds,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ValueError, RuntimeError) as e:
        log.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
