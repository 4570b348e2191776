"""Batch front end: JSON job configs in, machine-readable reports out.

Usage:  kb <command> --config <file.json> [--seed N] [--out path] [--format json|csv]

Commands: validate, factorize, gaussian-sample, clark, renorm,
morphism-check, verify-all.  Configs are validated strictly against the
shipped JSON schema (unknown fields rejected).  Exit code 0 when every
check passes, 2 on a check failure, 1 on a config or domain error.
Reports are deterministic for a fixed (config, seed) apart from the
timing field.  Set KB_LOG=debug|info|warning for verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from importlib import resources

import jsonschema
import numpy as np

from . import __version__, clark, factorization, gaussian, kernels, measures, rkhs, selfcheck
from .errors import ConfigError, KernelBoundaryError

log = logging.getLogger("kboundary")

COMMANDS = (
    "validate",
    "factorize",
    "gaussian-sample",
    "clark",
    "renorm",
    "morphism-check",
    "verify-all",
)

DEFAULT_TOLERANCES = {"psd_tol": 1e-10, "fact_tol": 1e-9, "rank_tol": None}


def load_schema() -> dict:
    with resources.files("kboundary.schema").joinpath("job_config.schema.json").open() as fh:
        return json.load(fh)


def _to_complex(obj) -> complex:
    return complex(float(obj["re"]), float(obj.get("im", 0.0)))


def _to_cnum(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _matrix_to_json(mat: np.ndarray) -> list:
    m = np.atleast_2d(np.asarray(mat, dtype=complex))
    return [[_to_cnum(z) for z in row] for row in m]


def _parse_points(raw) -> kernels.PointSet:
    if not raw:
        raise ConfigError("points must be a nonempty list")
    scalar = isinstance(raw[0], dict)
    if any(isinstance(entry, dict) != scalar for entry in raw):
        raise ConfigError("points must be all scalars or all coordinate tuples")
    if scalar:
        coords = [_to_complex(entry) for entry in raw]
    else:
        dims = {len(entry) for entry in raw}
        if len(dims) != 1:
            raise ConfigError("all point tuples must share one dimension")
        coords = [[_to_complex(z) for z in entry] for entry in raw]
    return kernels.PointSet.from_points(coords)


def _parse_circle_measure(raw) -> measures.CircleMeasure:
    return measures.CircleMeasure(atoms=raw["atoms"], weights=raw["weights"])


def _parse_discrete_measure(raw) -> measures.DiscreteMeasure:
    return measures.DiscreteMeasure(
        atoms=tuple(raw["atoms"]), weights=raw["weights"], normalized=False
    )


def _parse_kernel(raw) -> kernels.KernelSpec:
    variant = raw["variant"]
    if variant == "szego":
        return kernels.KernelSpec.szego()
    if variant == "polydisk-szego":
        return kernels.KernelSpec.polydisk(int(raw.get("dim", 1)))
    if variant == "debranges-rovnyak":
        if "measure" not in raw:
            raise ConfigError("debranges-rovnyak kernel requires a measure")
        return kernels.KernelSpec.debranges_rovnyak(_parse_circle_measure(raw["measure"]))
    if "table" not in raw:
        raise ConfigError("table kernel requires a table")
    table = np.array([[_to_complex(z) for z in row] for row in raw["table"]])
    return kernels.KernelSpec.from_table(table)


@dataclasses.dataclass
class JobConfig:
    command: str
    kernel: kernels.KernelSpec | None = None
    points: kernels.PointSet | None = None
    measure: measures.CircleMeasure | None = None
    morphism: dict | None = None
    psd_tol: float = 1e-10
    fact_tol: float = 1e-9
    rank_tol: float | None = None
    seed: int = 0
    sample_count: int | None = None
    output_path: str | None = None
    output_format: str = "json"


def parse_config(data: dict, command: str | None = None) -> JobConfig:
    """Strict parse of a raw config dict; unknown fields are rejected."""
    try:
        jsonschema.validate(instance=data, schema=load_schema())
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config does not match schema: {exc.message}") from exc

    cfg_command = data.get("command")
    if command is not None and cfg_command is not None and command != cfg_command:
        raise ConfigError(
            f"command line says {command!r} but config says {cfg_command!r}"
        )
    resolved = command or cfg_command
    if resolved is None:
        raise ConfigError("no command given")

    try:
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(data.get("tolerances", {}))
        out = data.get("output", {})
        return JobConfig(
            command=resolved,
            kernel=_parse_kernel(data["kernel"]) if "kernel" in data else None,
            points=_parse_points(data["points"]) if "points" in data else None,
            measure=_parse_circle_measure(data["measure"]) if "measure" in data else None,
            morphism=data.get("morphism"),
            psd_tol=float(tol["psd_tol"]),
            fact_tol=float(tol["fact_tol"]),
            rank_tol=None if tol["rank_tol"] is None else float(tol["rank_tol"]),
            seed=int(data.get("seed", 0)),
            sample_count=data.get("sample_count"),
            output_path=out.get("path"),
            output_format=out.get("format", "json"),
        )
    except KernelBoundaryError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


def _require(cfg: JobConfig, field: str):
    value = getattr(cfg, field)
    if value is None:
        raise ConfigError(f"command {cfg.command!r} requires {field!r} in the config")
    return value


def _build_kernel(cfg: JobConfig) -> kernels.FiniteKernel:
    spec = _require(cfg, "kernel")
    if cfg.points is None and spec.variant == "table":
        n = spec.table.shape[0]
        points = kernels.PointSet.from_points(np.arange(n, dtype=complex))
    else:
        points = _require(cfg, "points")
    return kernels.assemble_gram(spec, points)


def _run_validate(cfg: JobConfig):
    K = _build_kernel(cfg)
    report = kernels.check_positive_definite(K, tol=cfg.psd_tol)
    checks = [
        {
            "name": "positive-definite",
            "passed": report.is_psd,
            "min_eigenvalue": report.min_eigenvalue,
            "max_eigenvalue": report.max_eigenvalue,
            "tolerance": cfg.psd_tol,
        }
    ]
    return checks, {"gram": K.gram}, {"seed": cfg.seed}


def _run_factorize(cfg: JobConfig):
    K = _build_kernel(cfg)
    frame = rkhs.parseval_factorize(K, rank_tol=cfg.rank_tol)
    residual = rkhs.verify_parseval(frame, seed=cfg.seed)
    tight = rkhs.tightness_test(frame)
    checks = [
        {
            "name": "parseval-reconstruction",
            "passed": residual <= cfg.fact_tol,
            "residual": residual,
            "tolerance": cfg.fact_tol,
            "retained_rank": frame.retained_rank,
        },
        {"name": "tightness", "passed": tight},
    ]
    return checks, {"frame": frame.frame}, {"seed": cfg.seed}


def _run_gaussian_sample(cfg: JobConfig):
    K = _build_kernel(cfg)
    n_draws = int(cfg.sample_count or 10000)
    realization = gaussian.realize(K, seed=cfg.seed)
    batch = gaussian.sample(realization, n_draws)
    emp = gaussian.empirical_covariance(batch)
    deviation = float(np.abs(emp - K.gram).max())
    g_max = max(float(np.abs(K.gram).max()), 1e-300)
    cov_bound = 4.0 * g_max / np.sqrt(n_draws)
    means = batch.draws.mean(axis=0)
    mean_bounds = 5.0 * np.sqrt(np.maximum(np.diag(K.gram).real, 0.0) / n_draws)
    mean_ok = bool(np.all(np.abs(means) <= mean_bounds + 1e-300))
    checks = [
        {
            "name": "covariance-deviation",
            "passed": deviation <= cov_bound,
            "deviation": deviation,
            "bound": cov_bound,
            "n_draws": n_draws,
        },
        {
            "name": "mean-zero",
            "passed": mean_ok,
            "max_mean_modulus": float(np.abs(means).max()),
        },
    ]
    return checks, {"empirical_covariance": emp}, batch.seed_record


def _clark_points(cfg: JobConfig) -> np.ndarray:
    if cfg.points is not None:
        if cfg.points.dim != 1:
            raise ConfigError("clark pipelines need 1-dim complex points")
        return cfg.points.coords[:, 0]
    rng = np.random.default_rng([cfg.seed, 100])
    count = int(cfg.sample_count or 50)
    radius = 0.9 * np.sqrt(rng.uniform(0.0, 1.0, size=count))
    angle = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return radius * np.exp(1j * angle)


def _run_clark(cfg: JobConfig):
    mu = _require(cfg, "measure")
    zs = _clark_points(cfg)
    b = clark.InnerFunctionB(measure=mu)
    F = clark.build_kb_factorization(b, zs)
    residual = factorization.verify_factorization(F)
    minimal = factorization.minimality_test(F, rank_tol=cfg.rank_tol)
    herglotz_worst = max(
        clark.herglotz_poisson_check(b, z)["abs_error"] for z in zs
    )
    grid = (np.arange(64) + 0.5) / 64.0
    gaps = np.abs(grid[:, None] - mu.atoms[None, :])
    gaps = np.minimum(gaps, 1.0 - gaps)
    grid = grid[gaps.min(axis=1) >= 2e-3]
    modulus_dev = clark.inner_modulus_check(b, grid, 1.0 - 1e-6)
    expect_minimal = len(zs) >= mu.size
    checks = [
        {
            "name": "factorization-residual",
            "passed": residual <= cfg.fact_tol,
            "residual": residual,
            "tolerance": cfg.fact_tol,
        },
        {
            "name": "minimality",
            "passed": minimal["is_minimal"] or not expect_minimal,
            "feature_rank": minimal["feature_rank"],
            "atoms": mu.size,
        },
        {
            "name": "poisson-herglotz",
            "passed": herglotz_worst <= 1e-10,
            "max_abs_error": float(herglotz_worst),
        },
        {
            "name": "inner-modulus",
            "passed": modulus_dev <= 1e-3,
            "max_deviation": float(modulus_dev),
        },
    ]
    return checks, {"gram": F.kernel.gram}, {"seed": cfg.seed, "n_points": len(zs)}


def _run_renorm(cfg: JobConfig):
    mu = _require(cfg, "measure")
    zs = _clark_points(cfg)
    F = clark.build_szego_factorization(mu, zs)
    ctx = clark.renormalize(F)
    residual = factorization.verify_factorization(ctx.kren_factorization())
    psd = kernels.check_positive_definite(ctx.kren_kernel(), tol=cfg.psd_tol)
    b = clark.InnerFunctionB(measure=mu)
    bvals = np.array([clark.b_eval(b, z) for z in zs])
    cross = float(np.abs(1.0 / ctx.expectations - (1.0 - bvals)).max())
    checks = [
        {
            "name": "renormalized-identity",
            "passed": residual <= cfg.fact_tol,
            "residual": residual,
            "tolerance": cfg.fact_tol,
        },
        {
            "name": "renormalized-psd",
            "passed": psd.is_psd,
            "min_eigenvalue": psd.min_eigenvalue,
        },
        {
            "name": "inverse-mean-matches-b",
            "passed": cross <= 1e-12,
            "max_abs_error": cross,
        },
    ]
    return checks, {"kren_gram": ctx.kren_gram}, {"seed": cfg.seed, "n_points": len(zs)}


def _run_morphism_check(cfg: JobConfig):
    raw = _require(cfg, "morphism")
    source = _parse_discrete_measure(raw["source"])
    target = _parse_discrete_measure(raw["target"])
    morphism = factorization.MeasureMorphism(
        source=source, target=target, map=dict(raw["map"])
    )
    target_features = np.array(
        [[_to_complex(z) for z in row] for row in raw["target_features"]]
    )
    if target_features.ndim != 2 or target_features.shape[1] != target.size:
        raise ConfigError("target_features must be n_points x n_target_atoms")
    gram = kernels._hermitian_mirror(
        (target_features * target.weights[None, :]) @ np.conj(target_features).T
    )
    pts = kernels.PointSet.from_points(np.arange(target_features.shape[0], dtype=complex))
    kern = kernels.FiniteKernel(points=pts, gram=gram)
    F1 = factorization.BoundaryFactorization(
        kernel=kern, measure=target, features=target_features
    )
    if "source_features" in raw:
        source_features = np.array(
            [[_to_complex(z) for z in row] for row in raw["source_features"]]
        )
        F2 = factorization.BoundaryFactorization(
            kernel=kern, measure=source, features=source_features
        )
    else:
        F2 = factorization.pullback(F1, morphism)
    verdicts = factorization.check_morphism(morphism, F1, F2)
    rng = np.random.default_rng([cfg.seed, 200])
    worst_iso = 0.0
    for _ in range(10):
        f = rng.standard_normal(target.size) + 1j * rng.standard_normal(target.size)
        worst_iso = max(worst_iso, factorization.pullback_isometry_residual(morphism, f))
    checks = [
        {"name": "pushforward", "passed": verdicts["pushforward_ok"]},
        {"name": "sigma-algebra", "passed": verdicts["sigma_ok"]},
        {"name": "diagram", "passed": verdicts["diagram_ok"]},
        {
            "name": "pullback-isometry",
            "passed": (not verdicts["pushforward_ok"]) or worst_iso <= 1e-12,
            "max_residual": worst_iso,
        },
    ]
    return checks, {}, {"seed": cfg.seed}


def _run_verify_all(cfg: JobConfig):
    checks = []
    for result in selfcheck.run_all(seed=cfg.seed):
        entry = {"name": result.key, "passed": result.passed}
        for key, value in result.details.items():
            if key == "elapsed_seconds":
                continue  # wall time is not part of the deterministic payload
            if isinstance(value, (bool, int, str)):
                entry[key] = value
            elif isinstance(value, float):
                entry[key] = float(value)
            elif isinstance(value, (list, dict)):
                entry[key] = value
        checks.append(entry)
    return checks, {}, {"seed": cfg.seed}


PIPELINES = {
    "validate": _run_validate,
    "factorize": _run_factorize,
    "gaussian-sample": _run_gaussian_sample,
    "clark": _run_clark,
    "renorm": _run_renorm,
    "morphism-check": _run_morphism_check,
    "verify-all": _run_verify_all,
}


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def run(cfg: JobConfig) -> tuple[dict, int]:
    """Dispatch to the named pipeline and assemble the report.

    Exit code 0 iff all checks pass, 2 on check failure; config and
    domain errors raise and map to exit code 1 in main().
    """
    if cfg.command not in PIPELINES:
        raise ConfigError(f"unknown command {cfg.command!r}")
    log.info("running %s", cfg.command)
    started = time.perf_counter()
    checks, matrices, seed_record = PIPELINES[cfg.command](cfg)
    elapsed = time.perf_counter() - started
    passed = all(entry["passed"] for entry in checks)
    report = {
        "command": cfg.command,
        "version": __version__,
        "seed_record": _json_safe(seed_record),
        "passed": bool(passed),
        "checks": _json_safe(checks),
        "matrices": {name: _matrix_to_json(mat) for name, mat in sorted(matrices.items())},
        "timing": {"seconds": elapsed},
    }
    return report, 0 if passed else 2


def emit(report: dict, fmt: str = "json") -> bytes:
    """Serialize a report; JSON has stable key order, CSV flattens matrices
    row-major under an \"i,j,re,im\" header."""
    if fmt == "json":
        return (json.dumps(report, sort_keys=True, indent=2) + "\n").encode()
    if fmt != "csv":
        raise ConfigError(f"unknown output format {fmt!r}")
    lines = [f"# kb report command={report['command']} version={report['version']}"]
    for name, rows in sorted(report.get("matrices", {}).items()):
        n_rows = len(rows)
        n_cols = len(rows[0]) if rows else 0
        lines.append(f"# matrix {name} rows={n_rows} cols={n_cols}")
        lines.append("i,j,re,im")
        for i, row in enumerate(rows):
            for j, entry in enumerate(row):
                lines.append(f"{i},{j},{entry['re']!r},{entry['im']!r}")
    return ("\n".join(lines) + "\n").encode()


def parse_report(blob: bytes) -> dict:
    return json.loads(blob.decode())


def main(argv=None) -> int:
    level = os.environ.get("KB_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))

    parser = argparse.ArgumentParser(
        prog="kb",
        description="Kernel boundary factorization and verification pipelines",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="path to the JSON job config")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), dest="fmt")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            try:
                with open(args.config, "r", encoding="utf-8") as fh:
                    data = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        else:
            data = {"command": args.command}
        cfg = parse_config(data, command=args.command)
        if args.seed is not None:
            cfg.seed = int(args.seed)
        if args.out is not None:
            cfg.output_path = args.out
        if args.fmt is not None:
            cfg.output_format = args.fmt

        report, code = run(cfg)
        blob = emit(report, cfg.output_format)
        if cfg.output_path:
            try:
                with open(cfg.output_path, "wb") as fh:
                    fh.write(blob)
            except OSError as exc:
                raise ConfigError(f"cannot write report: {exc}") from exc
        else:
            try:
                sys.stdout.buffer.write(blob)
                sys.stdout.buffer.flush()
            except BrokenPipeError:
                pass  # reader went away; the exit code still stands
        return code
    except ConfigError as exc:
        print(f"kb: config error: {exc}", file=sys.stderr)
        return 1
    except KernelBoundaryError as exc:
        print(f"kb: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
