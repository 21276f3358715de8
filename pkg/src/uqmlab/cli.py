"""Command-line interface.

Exit codes: 0 success, 1 a check exceeded its tolerance, 2 bad input data,
3 bad configuration.
"""

import argparse
import datetime
import json
import os
import sys

import numpy as np

from . import __version__, coherent, cpmap, disentangle, io, qstate, tomography
from .errors import NotCompletelyPositiveError, UQMError
from .experiment import validate
from .parallel import sample_chunked

EXIT_OK, EXIT_CHECK_FAILED, EXIT_BAD_INPUT, EXIT_BAD_CONFIG = 0, 1, 2, 3


class ConfigError(Exception):
    pass


class InputError(Exception):
    pass


def _check(check_id, value, tolerance, passed=None, **extra):
    passed = bool(value <= tolerance) if passed is None else bool(passed)
    out = {"id": check_id, "value": float(value), "tolerance": float(tolerance), "passed": passed}
    out.update(extra)
    return out


def _require_file(path, flag):
    if not path:
        raise ConfigError(f"{flag} is required")
    if not os.path.isfile(path):
        raise ConfigError(f"{flag}: no such file {path!r}")
    return path


def _load_state(args, dim=None):
    path = _require_file(args.state, "--state")
    try:
        w = io.load_state(path, args.tol)
    except (UQMError, OSError) as exc:
        raise InputError(f"{path}: invalid state ({exc})") from exc
    if dim is not None and w.shape[0] != dim:
        raise ConfigError(f"state dimension {w.shape[0]} does not match configured dimension {dim}")
    return w


def _samples(args):
    if args.samples is None or args.samples < 1:
        raise ConfigError("--samples must be at least 1")
    return args.samples


def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return cfg


def _veronese_config(args, required=True):
    if args.spin is not None:
        if args.base_dim not in (None, 2) or args.degree is not None:
            raise ConfigError("--spin cannot be combined with --degree or a base dimension other than 2")
        try:
            return coherent.VeroneseConfig.spin(args.spin)
        except UQMError as exc:
            raise ConfigError(str(exc)) from exc
    if args.degree is None:
        if required:
            raise ConfigError("--degree (with --base-dim) or --spin is required")
        return None
    try:
        return coherent.VeroneseConfig(2 if args.base_dim is None else args.base_dim, args.degree)
    except UQMError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_tomography(args):
    N = _samples(args)
    w = _load_state(args)
    n = w.shape[0]
    exp = tomography.tomographic_experiment(n)
    pts, dens, proposed = sample_chunked(exp, w, args.seed, N, args.threads)
    run = tomography.UQMRun(w, pts, dens, seed=args.seed, proposals=proposed)
    if args.csv_samples:
        io.write_samples_csv(args.csv_samples, pts, dens)
    body = tomography.run_report(run)
    tol = 5 * np.sqrt(n / N)
    body["checks"] = [
        _check("ensemble-dilution-law", body["trace_distance_ensemble_to_expected"], tol),
    ]
    return body, ["ensemble-dilution-law", "linear-inversion-reconstruction"]


def cmd_disentangle(args):
    N = _samples(args)
    if not args.dims:
        raise ConfigError("--dims is required (e.g. --dims 2,2)")
    try:
        system = disentangle.FactorizedSystem.parse(args.dims)
    except UQMError as exc:
        raise ConfigError(str(exc)) from exc
    w = _load_state(args, system.total_dim)
    exp = disentangle.disentangling_experiment(system)
    pts, dens, proposed = sample_chunked(exp, w, args.seed, N, args.threads)
    factors = system.split(pts)
    xis = system.embed(pts)
    residual = max(disentangle.bipartition_residual(x, system.dims) for x in xis[: min(N, 2000)])
    total = exp.total_probability(w, N, qstate.as_rng([args.seed, 1]))
    body = {
        "dims": list(system.dims),
        "n_samples": N,
        "acceptance_rate": N / proposed,
        "mean_factor_projectors": [
            {"mean": io.matrix_to_json(m), "std_error": io.matrix_to_json(se)}
            for m, se in disentangle.mean_factor_projectors(factors)
        ],
        "mean_density": float(np.mean(dens)),
        "total_probability": {"value": float(total.value), "std_error": float(total.std_error)},
        "seed": args.seed,
    }
    if len(system.dims) == 2 and system.dims[0] == system.dims[1]:
        body["aligned_fraction"] = float(np.mean(disentangle.factor_overlap(*factors) > 0.99))
    if args.csv_samples:
        io.write_samples_csv(args.csv_samples, pts, dens, factor_dims=system.dims)
    body["checks"] = [
        _check("product-state-posteriors", residual, 1e-10),
        _check("total-probability", abs(total.value - 1) / max(total.std_error, 1e-12), 5.0),
    ]
    return body, ["segre-product-posteriors", "law-of-total-probability"]


def cmd_coherent(args):
    N = _samples(args)
    cfg = _veronese_config(args)
    w = _load_state(args, cfg.sym_dim)
    exp = coherent.coherent_experiment(cfg)
    pts, dens, proposed = sample_chunked(exp, w, args.seed, N, args.threads)
    cohs = coherent.veronese_embed(pts, cfg)
    residual = max(coherent.veronese_residual(c, cfg) for c in cohs[: min(N, 2000)])
    total = exp.total_probability(w, N, qstate.as_rng([args.seed, 1]))
    if args.csv_samples:
        io.write_samples_csv(args.csv_samples, pts, dens)
    body = {
        "base_dim": cfg.base_dim,
        "degree": cfg.degree,
        "sym_dim": cfg.sym_dim,
        "n_samples": N,
        "acceptance_rate": N / proposed,
        "mean_direction_projector": io.matrix_to_json(np.einsum("ma,mb->ab", pts, pts.conj()) / N),
        "mean_density": float(np.mean(dens)),
        "total_probability": {"value": float(total.value), "std_error": float(total.std_error)},
        "seed": args.seed,
    }
    body["checks"] = [
        _check("coherent-posteriors", residual, 1e-10),
        _check("total-probability", abs(total.value - 1) / max(total.std_error, 1e-12), 5.0),
    ]
    return body, ["veronese-posteriors", "law-of-total-probability"]


def _load_map(args):
    path = _require_file(args.map, "--map")
    try:
        obj = io.load_json(path)
        if isinstance(obj, dict) and "outcomes" in obj:
            return "experiment", io.experiment_from_json(obj)
        return io.map_from_json(obj)
    except (UQMError, OSError) as exc:
        raise InputError(f"{path}: invalid map ({exc})") from exc


def cmd_choi_decompose(args):
    kind, phi = _load_map(args)
    if kind == "experiment":
        raise ConfigError("choi-decompose expects a map file, not an experiment")
    C = cpmap.choi_from_kraus(phi) if kind == "kraus" else phi
    try:
        C = qstate.hermitian_part(C, args.tol)
    except UQMError as exc:
        raise InputError(f"Choi matrix is not Hermitian ({exc})") from exc
    n = int(round(np.sqrt(C.shape[0])))
    body = {"dim": n, "input_kind": kind, "seed": args.seed}
    try:
        K = cpmap.kraus_from_choi(C, args.tol)
    except NotCompletelyPositiveError as exc:
        verdict = cpmap.certify_positive(C, trials=64, rng=args.seed)
        body.update(
            verdict="NotCompletelyPositive",
            min_choi_eigenvalue=exc.min_eigenvalue,
            positivity=verdict.kind.value,
            biquadratic_minimum=verdict.witness_value,
        )
        if verdict.witness is not None:
            body["witness"] = {"X": io.vector_to_json(verdict.witness[0]),
                               "Y": io.vector_to_json(verdict.witness[1])}
        return body, ["choi-positivity", "biquadratic-positivity"]
    rng = qstate.as_rng(args.seed)
    probes = [qstate.random_density(n, rng=rng) for _ in range(20)]
    roundtrip = max(
        float(np.max(np.abs(cpmap.apply_kraus(K, r) - cpmap.apply_choi(C, r)))) for r in probes
    )
    choi_err = float(np.max(np.abs(cpmap.choi_from_kraus(K) - C)))
    body.update(
        verdict="CompletelyPositive",
        min_choi_eigenvalue=float(np.linalg.eigvalsh(C)[0]),
        n_kraus=len(K),
        kraus=[io.matrix_to_json(k) for k in K],
        roundtrip_error=roundtrip,
        choi_reconstruction_error=choi_err,
    )
    body["checks"] = [_check("choi-kraus-roundtrip", max(roundtrip, choi_err), 1e-10)]
    return body, ["choi-positivity", "choi-kraus-roundtrip"]


def cmd_validate_map(args):
    kind, obj = _load_map(args)
    if kind == "experiment":
        rep = validate(obj, probe_states=16, rng=args.seed, tol=args.tol)
        body = {"input_kind": "experiment", **rep.to_dict(), "seed": args.seed}
        body["violations"] = [{k: (str(v) if k == "outcome" else v) for k, v in viol.items()}
                              for viol in rep.violations]
        body["checks"] = [_check("experiment-axioms", len(rep.violations), 0)]
        return body, ["complete-positivity", "trace-reducing", "law-of-total-probability"]
    C = cpmap.choi_from_kraus(obj) if kind == "kraus" else obj
    try:
        C = qstate.hermitian_part(C, args.tol)
    except UQMError as exc:
        raise InputError(f"Choi matrix is not Hermitian ({exc})") from exc
    verdict = cpmap.certify_positive(C, trials=64, rng=args.seed, tol=args.tol)
    tc = cpmap.check_trace_condition(C, args.tol)
    body = {
        "input_kind": kind,
        "positivity": verdict.kind.value,
        "min_choi_eigenvalue": verdict.min_choi_eigenvalue,
        "biquadratic_minimum": verdict.witness_value,
        "is_trace_reducing": tc.is_trace_reducing,
        "is_trace_preserving": tc.is_trace_preserving,
        "max_dual_eigenvalue": tc.max_eigenvalue,
        "seed": args.seed,
    }
    if verdict.witness is not None:
        body["witness"] = {"X": io.vector_to_json(verdict.witness[0]),
                           "Y": io.vector_to_json(verdict.witness[1])}
    body["checks"] = [
        _check("completely-positive", -verdict.min_choi_eigenvalue, args.tol),
        _check("trace-reducing", tc.max_eigenvalue, 1 + args.tol),
    ]
    return body, ["choi-positivity", "biquadratic-positivity", "trace-reducing"]


def cmd_identity_check(args):
    N = _samples(args)
    n = 2 if args.base_dim is None else args.base_dim
    if n < 1:
        raise ConfigError("--base-dim must be at least 1")
    from .projective import check_quadratic_identity

    results = [check_quadratic_identity(n, N, qstate.as_rng([args.seed, 0]))]
    ids = ["fs-quadratic-delta-identity"]
    cfg = _veronese_config(args, required=False)
    if cfg is not None:
        results.append(coherent.check_coherent_resolution(cfg, N, qstate.as_rng([args.seed, 1])))
        ids.append("veronese-resolution-of-identity")
    body = {
        "results": [r.to_dict() for r in results],
        "max_deviation_se": max(r.max_deviation_se for r in results),
        "seed": args.seed,
    }
    body["checks"] = [_check(i, r.max_deviation_se, args.max_se) for i, r in zip(ids, results)]
    return body, ids


COMMANDS = {
    "tomography": cmd_tomography,
    "disentangle": cmd_disentangle,
    "coherent": cmd_coherent,
    "choi-decompose": cmd_choi_decompose,
    "validate-map": cmd_validate_map,
    "identity-check": cmd_identity_check,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="64-bit seed (random if omitted)")
    common.add_argument("--samples", type=int, default=100_000)
    common.add_argument("--state", help="JSON state file")
    common.add_argument("--map", help="JSON map or experiment file")
    common.add_argument("--dims", help='factor dimensions, e.g. "2,2"')
    common.add_argument("--base-dim", type=int, default=None)
    common.add_argument("--degree", type=int, default=None)
    common.add_argument("--spin", type=float, default=None)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--max-se", type=float, default=5.0,
                        help="identity-check threshold in standard errors")
    common.add_argument("--out", help="report path (stdout if omitted)")
    common.add_argument("--csv-samples", help="write per-sample CSV here")
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="uqmlab", description="Universal quantum measurement laboratory")
    parser.add_argument("--version", action="version", version=f"uqmlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_CONFIG if exc.code not in (0, None) else EXIT_OK
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().entropy % (1 << 64))
    if not 0 <= args.seed < (1 << 64):
        print("error: --seed must be a 64-bit unsigned integer", file=sys.stderr)
        return EXIT_BAD_CONFIG
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_BAD_CONFIG
    try:
        body, checks_performed = COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    report = {
        "tool": "uqmlab",
        "version": __version__,
        "command": args.command,
        "config": _config(args),
        "seed": args.seed,
        "checks_performed": checks_performed,
        **body,
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    failed = [c["id"] for c in body.get("checks", []) if not c["passed"]]
    if failed:
        print(f"checks failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
