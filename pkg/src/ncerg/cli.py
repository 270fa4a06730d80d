"""Config-driven experiment runner.

Every check is described by a JSON config (command, inputs, params, output);
a file holding a list of configs runs as a batch with one summary.  Reports
are JSON lines with a fixed field order; the only timestamp lives in the
header line, so rerunning a config with the same seed reproduces the report
body byte for byte.  Exit codes: 0 all passed, 1 check failures, 2 parse or
validation errors.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import brunel as brunel_mod
from . import convergence as conv_mod
from . import fileio
from .algebra import AlgebraContext, is_psd, op_norm, projection
from .averages import SectorSequence, diagonal_sequence
from .dsop import DSMap, DSTuple, verify_ds
from .fileio import FormatError
from .maximal import (ConjugatePair, convexity_counterexample,
                      holder_contraction_check, holder_scalar_check,
                      uem_one_sided_certificate, weak_type_pp_certificate,
                      yeadon_certificate)
from .reporting import CERT_TOL, CertificateReport
from .sampling import (random_commuting_tuple, random_ds_map, random_kraus_map,
                       random_nonneg_weights, random_psd)
from .weights import (SectorSpec, WeightSequence, besicovitch_distance,
                      besicovitch_generate, finiteness_transfer_check,
                      hartman_estimate, sector_sup_seminorm,
                      wq_seminorm_estimate)

COMMANDS = ("verify-ds", "holder", "counterexample", "yeadon", "weak-type",
            "uem", "brunel", "bau", "bww", "besicovitch", "hartman", "seminorm")

TOL_ENV = "NCERG_TOL_OVERRIDE"


@dataclass
class ExperimentConfig:
    command: str
    inputs: dict
    params: dict
    output: str | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise FormatError("config must be a JSON object")
        command = doc.get("command")
        if command not in COMMANDS:
            raise FormatError(f"unknown command {command!r}; expected one of {COMMANDS}")
        inputs = doc.get("inputs", {})
        params = doc.get("params", {})
        if not isinstance(inputs, dict) or not isinstance(params, dict):
            raise FormatError("inputs and params must be objects")
        for name, path in inputs.items():
            paths = path if isinstance(path, list) else [path]
            for p in paths:
                if not os.path.exists(p):
                    raise FormatError(f"input {name}: no such file {p}")
        return cls(command, inputs, params, doc.get("output"))


def _rng(config: ExperimentConfig, seed_override) -> np.random.Generator:
    seed = config.params.get("seed", 0) if seed_override is None else seed_override
    return np.random.default_rng(int(seed))


def _tol(config: ExperimentConfig, tol_override) -> float:
    if tol_override is not None:
        return float(tol_override)
    return float(config.params.get("tol", CERT_TOL))


def _load_tuple(config: ExperimentConfig) -> DSTuple:
    inputs = config.inputs
    if "operators" in inputs:
        paths = inputs["operators"]
        paths = paths if isinstance(paths, list) else [paths]
        maps = [fileio.load_operator(p) for p in paths]
        return DSTuple(maps, commuting=bool(config.params.get("commuting", True)))
    return DSTuple([fileio.load_operator(inputs["operator"])])


def _load_x(config: ExperimentConfig, ctx: AlgebraContext, rng,
            psd_required: bool = True) -> np.ndarray:
    if "x" in config.inputs:
        x, _ = fileio.load_matrix(config.inputs["x"])
        if x.shape != (ctx.dim, ctx.dim):
            raise FormatError("x dimension does not match the operators")
        if psd_required and not is_psd(x):
            raise FormatError("input x is not positive semidefinite")
        return x
    return random_psd(rng, ctx)


def _load_alpha(config: ExperimentConfig, shape, rng) -> WeightSequence:
    if "sequence" in config.inputs:
        alpha = fileio.load_sequence(config.inputs["sequence"])
        want = shape if np.iterable(shape) else (shape,)
        if any(h < w for h, w in zip(alpha.horizon, want)):
            raise FormatError(f"sequence horizon {alpha.horizon} is too short")
        return alpha
    return random_nonneg_weights(rng, shape)


# -- command handlers ----------------------------------------------------------


def _cmd_counterexample(config, rng, tol):
    return [convexity_counterexample(tol)]


def _cmd_verify_ds(config, rng, tol):
    phi = fileio.load_operator(config.inputs["operator"])
    samples = int(config.params.get("samples", 32))
    seed = int(config.params.get("seed", 0))
    return [verify_ds(phi, samples=samples, seed=seed, tol=tol)]


def _cmd_holder(config, rng, tol):
    p = float(config.params.get("p", 2.0))
    pair = ConjugatePair.conjugate(p)
    trials = int(config.params.get("trials", 25))
    dim = int(config.params.get("dim", 3))
    terms = int(config.params.get("terms", 8))
    variant = config.params.get("variant", "contraction")
    ctx = AlgebraContext(dim)
    fixed_x = None
    if "x" in config.inputs:
        fixed_x, ctx = fileio.load_matrix(config.inputs["x"])
        if not is_psd(fixed_x):
            raise FormatError("input x is not positive semidefinite")
    reports = []
    for k in range(trials):
        alphas = rng.random(terms) * 2.0
        if variant == "scalar":
            xs = [random_psd(rng, ctx) for _ in range(terms)]
            rep = holder_scalar_check(alphas, xs, pair, ctx, tol=tol)
        else:
            maps = [random_kraus_map(rng, ctx, n_ops=int(rng.integers(1, 4)))
                    for _ in range(terms)]
            x = fixed_x if fixed_x is not None else random_psd(rng, ctx)
            rep = holder_contraction_check(alphas, maps, x, pair, tol=tol)
        rep.metadata["trial"] = k
        reports.append(rep)
    return reports


def _cmd_yeadon(config, rng, tol):
    trials = int(config.params.get("trials", 1))
    horizon = int(config.params.get("horizon", 24))
    reports = []
    for k in range(trials):
        if "operator" in config.inputs:
            phi = fileio.load_operator(config.inputs["operator"])
            ctx = phi.context
        else:
            ctx = AlgebraContext(int(config.params.get("dim", 3)))
            phi = random_ds_map(rng, ctx)
        x = _load_x(config, ctx, rng)
        lam = float(config.params.get("lambda", 0.5 * max(1e-9, op_norm(x))))
        rep = yeadon_certificate(phi, x, lam, horizon=horizon, tol=tol)
        rep.metadata["trial"] = k
        reports.append(rep)
    return reports


def _cmd_weak_type(config, rng, tol):
    p = float(config.params.get("p", 2.0))
    pair = ConjugatePair.conjugate(p)
    C = float(config.params.get("C", 1.0))
    chi = float(config.params.get("chi", 1.0))
    horizon = int(config.params.get("horizon", 16))
    trials = int(config.params.get("trials", 1))
    d = int(config.params.get("d", 1))
    reports = []
    for k in range(trials):
        if "operators" in config.inputs or "operator" in config.inputs:
            tup = _load_tuple(config)
        else:
            ctx = AlgebraContext(int(config.params.get("dim", 3)))
            tup = random_commuting_tuple(rng, ctx, d)
        ctx = tup.context
        shape = (horizon,) * tup.d
        alpha = _load_alpha(config, shape, rng)
        x = _load_x(config, ctx, rng, psd_required=False)
        lam = float(config.params.get("lambda", 0.5))
        sector = SectorSpec(C, tup.d)
        rep = weak_type_pp_certificate(tup, alpha, x, lam, pair, sector,
                                       chi_d=chi, horizon=horizon, tol=tol)
        rep.metadata["trial"] = k
        reports.append(rep)
    return reports


def _cmd_uem(config, rng, tol):
    p = float(config.params.get("p", 4.0))
    horizon = int(config.params.get("horizon", 24))
    trials = int(config.params.get("trials", 1))
    reports = []
    for k in range(trials):
        if "operator" in config.inputs:
            phi = fileio.load_operator(config.inputs["operator"])
            ctx = phi.context
        else:
            ctx = AlgebraContext(int(config.params.get("dim", 3)))
            phi = random_ds_map(rng, ctx)
        alpha = _load_alpha(config, horizon, rng)
        x = _load_x(config, ctx, rng)
        lam = float(config.params.get("lambda", 0.5 * max(1e-9, op_norm(x))))
        rep = uem_one_sided_certificate(phi, alpha, x, lam, p,
                                        horizon=horizon, tol=tol)
        rep.metadata["trial"] = k
        reports.append(rep)
    return reports


def _cmd_brunel(config, rng, tol):
    tup = _load_tuple(config)
    params = config.params
    if "weights" in config.inputs:
        d, H, entries = fileio.load_weight_map(config.inputs["weights"])
        if d != tup.d:
            raise FormatError("weight map dimension does not match operators")
        a = entries
    else:
        gen = params.get("generator", {"kind": "geometric", "H": 6})
        H = int(gen.get("H", 6))
        if gen.get("kind", "geometric") == "geometric":
            a = brunel_mod.geometric_weights(tup.d, H, float(gen.get("ratio", 0.5))).a
        else:
            a = brunel_mod.uniform_box_weights(tup.d, H).a
    n_range = [int(n) for n in params.get("n_range", [2, 4, 8])]
    probes = int(params.get("probes", 16))
    seed = int(params.get("seed", 0))
    if params.get("calibrate", True):
        w = brunel_mod.search_parameters(tup, a, n_range, probes=probes, seed=seed)
    else:
        w = brunel_mod.BrunelWeights(tup.d, a, float(params.get("chi", 1.0)))
    reports = []
    S = brunel_mod.brunel_operator(tup, w)
    for n in n_range:
        reports.append(brunel_mod.domination_check(
            tup, w, n, probes=probes, seed=seed + 1, tol=tol, S=S))
        reports[-1].metadata["calibrated_chi"] = w.chi
    return reports


def _seq_from_params(config, d: int) -> SectorSequence:
    spec = config.params.get("sequence_spec", {"kind": "diagonal", "count": 24})
    kind = spec.get("kind", "diagonal")
    if kind == "diagonal":
        return diagonal_sequence(d, int(spec.get("count", 24)),
                                 step=int(spec.get("step", 1)),
                                 C=float(spec.get("C", 1.0)))
    if kind == "explicit":
        C = float(spec.get("C", 1.0))
        return SectorSequence(tuple(tuple(n) for n in spec["indices"]),
                              SectorSpec(C, d))
    raise FormatError(f"unknown sequence spec kind {kind!r}")


def _cmd_bau(config, rng, tol):
    tup = _load_tuple(config)
    ctx = tup.context
    x = _load_x(config, ctx, rng, psd_required=False)
    seq = _seq_from_params(config, tup.d)
    box = tuple(max(n[i] for n in seq.indices) for i in range(tup.d))
    alpha = _load_alpha(config, box, rng) if "sequence" in config.inputs \
        else WeightSequence.constant(box, 1.0)
    eps = float(config.params.get("epsilon", 0.25))
    tol_conv = config.params.get("tol_conv")
    cert = conv_mod.bau_limit_estimate(
        tup, alpha, x, seq, eps,
        tol_conv=None if tol_conv is None else float(tol_conv))
    report = cert.to_report()
    out = config.output
    if out:
        fileio.save_matrix(out + ".witness.json", cert.projection.entries,
                           tau=ctx.trace_weights)
        fileio.write_tail_csv(out + ".tail.csv", cert.tail_profile)
        report.metadata["witness_file"] = out + ".witness.json"
        report.metadata["tail_profile_file"] = out + ".tail.csv"
    return [report]


def _cmd_bww(config, rng, tol):
    phi = fileio.load_operator(config.inputs["operator"])
    ctx = phi.context
    x = _load_x(config, ctx, rng, psd_required=False)
    family_paths = config.inputs.get("family", [])
    family_paths = family_paths if isinstance(family_paths, list) else [family_paths]
    family = [fileio.load_sequence(p) for p in family_paths]
    horizon = int(config.params.get("horizon", 64))
    eps = float(config.params.get("epsilon", 0.25))
    tol_conv = config.params.get("tol_conv")
    return [conv_mod.bww_membership_check(
        phi, x, family, eps, horizon=horizon,
        tol_conv=None if tol_conv is None else float(tol_conv))]


def _cmd_besicovitch(config, rng, tol):
    params = config.params
    if "sequence" in config.inputs:
        with open(config.inputs["sequence"]) as fh:
            doc = json.load(fh)
        if doc.get("kind") != "rotation":
            raise FormatError("besicovitch needs a rotation-kind sequence file")
        mu = fileio._complex_in(doc["mu"])
        lam = fileio._complex_in(doc["lambda"])
        coeffs = [(int(j), fileio._complex_in(c)) for j, c in doc["coeffs"]]
        length = int(doc["length"])
    else:
        mu = fileio._complex_in(params["mu"])
        lam = fileio._complex_in(params.get("lambda", 1.0))
        coeffs = [(int(j), fileio._complex_in(c)) for j, c in params["coeffs"]]
        length = int(params.get("length", 4096))
    q = float(params.get("q", 2.0))
    tail_start = int(params.get("tail_start", max(1, length // 4)))
    seq, poly = besicovitch_generate(coeffs, mu, lam, length)
    dist = besicovitch_distance(seq, poly, q, tail_start)
    bound = float(params.get("distance_bound", 1e-10))
    return [CertificateReport.from_bounds(
        "besicovitch-identity", bound, dist, 0.0,
        q=q, length=length, tail_start=tail_start, terms=len(poly.terms))]


def _cmd_hartman(config, rng, tol):
    alpha = fileio.load_sequence(config.inputs["sequence"])
    lam = fileio._complex_in(config.params.get("lambda", 1.0))
    horizon = config.params.get("horizon")
    limit, osc = hartman_estimate(alpha, lam,
                                  None if horizon is None else int(horizon))
    bound = float(config.params.get("oscillation_bound", 1e-2))
    return [CertificateReport.from_bounds(
        "hartman-cesaro", bound, osc, 0.0,
        limit=limit, lam=lam, horizon=alpha.horizon[0])]


def _cmd_seminorm(config, rng, tol):
    alpha = fileio.load_sequence(config.inputs["sequence"])
    q = float(config.params.get("q", 2.0))
    C = float(config.params.get("C", 1.0))
    tail_start = int(config.params.get("tail_start", 1))
    est = wq_seminorm_estimate(alpha, q, tail_start)
    sect = sector_sup_seminorm(alpha, q, SectorSpec(C, alpha.d))
    rep = finiteness_transfer_check(alpha, q, C)
    rep.metadata["wq_estimate"] = est
    rep.metadata["sector_seminorm"] = sect
    rep.metadata["tail_start"] = tail_start
    return [rep]


_HANDLERS = {
    "counterexample": _cmd_counterexample,
    "verify-ds": _cmd_verify_ds,
    "holder": _cmd_holder,
    "yeadon": _cmd_yeadon,
    "weak-type": _cmd_weak_type,
    "uem": _cmd_uem,
    "brunel": _cmd_brunel,
    "bau": _cmd_bau,
    "bww": _cmd_bww,
    "besicovitch": _cmd_besicovitch,
    "hartman": _cmd_hartman,
    "seminorm": _cmd_seminorm,
}


def run(config: ExperimentConfig, seed_override=None, tol_override=None,
        out_override=None):
    """Execute one config; returns (exit_code, reports)."""
    rng = _rng(config, seed_override)
    tol = _tol(config, tol_override)
    try:
        reports = _HANDLERS[config.command](config, rng, tol)
    except (FormatError, FileNotFoundError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"ncerg: {config.command}: {exc}\n")
        return 2, []
    except ValueError as exc:
        sys.stderr.write(f"ncerg: {config.command}: invalid input: {exc}\n")
        return 2, []
    out = out_override or config.output
    header = {
        "type": "header",
        "command": config.command,
        "seed": int(config.params.get("seed", 0) if seed_override is None
                    else seed_override),
        "tolerance": tol,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    lines = [json.dumps(header)]
    lines += [json.dumps(r.to_json_dict()) for r in reports]
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return (0 if all(r.passed for r in reports) else 1), reports


def batch(configs: list, jobs: int = 1, seed_override=None, tol_override=None):
    """Run many configs; returns (exit_code, summary dict)."""
    results = [None] * len(configs)

    def _one(i):
        return run(configs[i], seed_override=seed_override, tol_override=tol_override)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for i, res in enumerate(pool.map(_one, range(len(configs)))):
                results[i] = res
    else:
        for i in range(len(configs)):
            results[i] = _one(i)

    worst_margin = 0.0
    failing = []
    passed = 0
    code = 0
    for i, (rc, reports) in enumerate(results):
        code = max(code, rc)
        ok = rc == 0
        passed += ok
        if not ok:
            failing.append({"index": i, "command": configs[i].command,
                            "output": configs[i].output, "exit_code": rc})
        for r in reports:
            if np.isfinite(r.achieved):
                worst_margin = max(worst_margin, r.achieved - r.claimed_bound)
    summary = {
        "count": len(configs),
        "passed": passed,
        "failed": len(configs) - passed,
        "failing": failing,
        "worst_margin": worst_margin,
    }
    return code, summary


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ncerg",
        description="Run certificate checks from JSON experiment configs.")
    parser.add_argument("--config", required=True,
                        help="config file (object) or batch file (list of objects)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the seed of every config")
    parser.add_argument("--tol", type=float, default=None,
                        help="override certificate tolerance")
    parser.add_argument("--out", default=None,
                        help="override the report output path (single config) "
                             "or write the batch summary there")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for batch runs")
    args = parser.parse_args(argv)

    tol = args.tol
    env_tol = os.environ.get(TOL_ENV)
    if env_tol is not None:
        warnings.warn(f"{TOL_ENV} overrides tolerance to {env_tol}")
        tol = float(env_tol)

    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"ncerg: cannot read config: {exc}\n")
        return 2

    try:
        if isinstance(doc, list) or (isinstance(doc, dict) and "configs" in doc):
            raw = doc if isinstance(doc, list) else doc["configs"]
            configs = [ExperimentConfig.from_dict(d) for d in raw]
            code, summary = batch(configs, jobs=args.jobs,
                                  seed_override=args.seed, tol_override=tol)
            text = json.dumps(summary, indent=2) + "\n"
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return code
        config = ExperimentConfig.from_dict(doc)
    except FormatError as exc:
        sys.stderr.write(f"ncerg: bad config: {exc}\n")
        return 2

    code, _ = run(config, seed_override=args.seed, tol_override=tol,
                  out_override=args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
