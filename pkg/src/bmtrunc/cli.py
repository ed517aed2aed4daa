"""Batch front end: validate models, certify, bound, compare, couple.

Exit codes: 0 success, 2 validation failure, 3 certified bound or coupling
ordering violated (soundness alarm), 4 I/O error. Identical configuration and
seed produce byte-identical output.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .block_matrix import (
    BlockStochasticMatrix,
    MultipleClosedClassesError,
    PhaseStructureError,
    _closed_classes,
    is_block_monotone,
    lcb_truncate,
)
from .coupling import (
    CoupledEnsemble,
    OrderingViolationError,
    run_coupled_dominance_batch,
    run_coupled_monotone_batch,
)
from .drift_bounds import (
    BoundReport,
    BoundViolationError,
    ReferenceNotConvergedError,
    compare_against_oracle,
    optimize_m,
)
from .gig1 import GIG1Model, certificate_for_model, find_alpha, mean_drift
from .model_io import (
    ModelSchemaError,
    load_model,
    render_json,
    reports_to_csv,
    reports_to_json,
)

__all__ = ["RunConfig", "main", "cmd_validate", "cmd_bound", "cmd_compare", "cmd_couple"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BOUND_VIOLATED = 3
EXIT_IO = 4

COUPLE_PATHS = 32
COUPLE_STEPS = 500

PATH_MONOTONE_TRUNCATION = "monotone-truncation"
PATH_DOMINANCE_REQUIRED = "dominance-required"
PATH_NONE = "none"


def parse_n_spec(spec: str) -> list[int]:
    """Truncation levels from "10,20,50" or "10:50:20" (inclusive ranges)."""
    values: list[int] = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            raise ValueError("empty entry in --n")
        if ":" in token:
            parts = token.split(":")
            if len(parts) not in (2, 3):
                raise ValueError(f"range {token!r} is not START:STOP[:STEP]")
            start, stop = int(parts[0]), int(parts[1])
            step = int(parts[2]) if len(parts) == 3 else 1
            if step < 1 or stop < start:
                raise ValueError(f"range {token!r} is empty or has step < 1")
            values.extend(range(start, stop + 1, step))
        else:
            values.append(int(token))
    if not values or min(values) < 1:
        raise ValueError("--n values must be >= 1")
    return values


def thread_count() -> int:
    raw = os.environ.get("BMTRUNC_THREADS", "1")
    try:
        threads = int(raw)
    except ValueError:
        raise ValueError(f"BMTRUNC_THREADS={raw!r} is not an integer") from None
    if threads < 1:
        raise ValueError("BMTRUNC_THREADS must be >= 1")
    return threads


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation, fully determining the output bytes."""

    model_path: str
    command: str
    n_values: list[int] = field(default_factory=lambda: [10, 20, 50])
    m_max: int | None = None
    reference_level: int | None = None
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    threads: int = 1

    def __post_init__(self):
        if not self.n_values or min(self.n_values) < 1:
            raise ValueError("n values must be >= 1")
        if self.reference_level is not None and self.reference_level <= max(self.n_values):
            raise ValueError("reference level must exceed every requested n")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")

    @property
    def resolved_reference_level(self) -> int:
        if self.reference_level is not None:
            return self.reference_level
        return 8 * max(self.n_values)


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _gig1_drift_section(model: GIG1Model, data) -> dict:
    if data is not None:
        point = data.spectral
        gamma_prime, b_prime, K = data.gamma_prime, data.b_prime, data.K
    else:
        _, point = find_alpha(model)
        gamma_prime, b_prime, K = None, None, 0
    return {
        "alpha": point.z,
        "delta": point.delta,
        "mu": point.mu,
        "v": point.v,
        "k_star": model.k_star,
        "gamma_prime": gamma_prime,
        "b_prime": b_prime,
        "K": K,
    }


def _validate_gig1(model: GIG1Model) -> dict:
    monotone = model.is_block_monotone()
    drift = mean_drift(model)
    report = {
        "kind": "gig1",
        "d": model.d,
        "checks": {
            "stochastic": True,
            "phase_irreducible": True,
            "block_monotone": monotone,
            "skip_free_pattern": not model.mg1_pattern_mismatches(),
            "mean_drift": drift,
        },
        "path": PATH_NONE,
        "certificate": None,
        "drift": None,
        "note": None,
    }
    if not monotone:
        report["note"] = (
            "no certificate available: model is not block-monotone; "
            "certify a block-monotone dominating chain instead"
        )
        return report
    if drift >= 0.0:
        report["note"] = "no certificate available: mean drift is non-negative"
        return report
    path, data, cert = certificate_for_model(model)
    report["path"] = path
    report["certificate"] = {"gamma": cert.gamma, "b": cert.b, "K": cert.K}
    report["drift"] = _gig1_drift_section(model, data)
    return report


def _validate_finite(P: BlockStochasticMatrix) -> dict:
    monotone = is_block_monotone(P)
    closed = len(_closed_classes(P.values > 0)) if P.square else None
    report = {
        "kind": "finite",
        "d": P.d,
        "checks": {
            "stochastic": True,
            "square": P.square,
            "block_monotone": monotone,
            "closed_classes": closed,
        },
        "path": PATH_MONOTONE_TRUNCATION if monotone else PATH_DOMINANCE_REQUIRED,
        "certificate": None,
        "drift": None,
        "note": None,
    }
    if not monotone:
        report["note"] = (
            "no certificate available: pair with a certified block-monotone "
            "dominating chain to bound truncation error"
        )
    return report


def cmd_validate(config: RunConfig) -> int:
    model = load_model(config.model_path)
    if isinstance(model, GIG1Model):
        report = _validate_gig1(model)
    else:
        report = _validate_finite(model)
    _emit(render_json(report), config.out)
    return EXIT_OK


def _certified(config: RunConfig):
    model = load_model(config.model_path)
    if not isinstance(model, GIG1Model):
        raise ValueError(
            "this command needs a gig1 model: finite corners carry no drift certificate"
        )
    path, data, cert = certificate_for_model(model)
    return model, path, cert


def _render_reports(reports: list[BoundReport], fmt: str) -> str:
    return reports_to_csv(reports) if fmt == "csv" else reports_to_json(reports)


def cmd_bound(config: RunConfig) -> int:
    _, _, cert = _certified(config)
    ns = sorted(set(config.n_values))

    def one(n: int) -> BoundReport:
        m_star, value = optimize_m(cert, n, config.m_max, which="bound2")
        return BoundReport(n=n, m=m_star, bound2=value)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            reports = list(pool.map(one, ns))
    else:
        reports = [one(n) for n in ns]
    _emit(_render_reports(reports, config.format), config.out)
    return EXIT_OK


def cmd_compare(config: RunConfig) -> int:
    model, _, cert = _certified(config)
    check = model.verify_drift(cert)
    if not check.ok:
        raise ValueError(
            f"certificate verification failed with {len(check.violations)} violating rows; "
            "refusing to compare against an unverified certificate"
        )
    reports = compare_against_oracle(
        model,
        sorted(set(config.n_values)),
        cert,
        m_max=config.m_max,
        reference_level=config.resolved_reference_level,
        max_workers=config.threads,
    )
    _emit(_render_reports(reports, config.format), config.out)
    return EXIT_OK


def _trajectory_csv(ensemble: CoupledEnsemble, path: int = 0) -> str:
    traj = ensemble.trajectory(path)
    lines = ["step,phase,level_low,level_high"]
    for step in range(traj.steps + 1):
        lines.append(
            f"{step},{int(traj.phases[step])},{int(traj.levels_low[step])},"
            f"{int(traj.levels_high[step])}"
        )
    return "\n".join(lines) + "\n"


def _dominance_dump_path(out: str) -> str:
    stem, dot, ext = out.rpartition(".")
    if not dot:
        return out + "_dominance"
    return f"{stem}_dominance.{ext}"


def cmd_couple(config: RunConfig) -> int:
    model = load_model(config.model_path)
    n_top = max(config.n_values)
    corner = lcb_truncate(model, n_top)
    if not is_block_monotone(corner):
        raise ValueError("coupling needs a block-monotone model")
    n_small = max(1, n_top // 2)
    small = lcb_truncate(model, n_small)

    monotone = run_coupled_monotone_batch(
        corner, 0, n_top, j0=0, T=COUPLE_STEPS, seed=config.seed, paths=COUPLE_PATHS
    )
    dominance = run_coupled_dominance_batch(
        small, corner, 0, 0, j0=0, T=COUPLE_STEPS, seed=config.seed + 1, paths=COUPLE_PATHS
    )

    if config.out is not None:
        _emit(_trajectory_csv(monotone), config.out)
        _emit(_trajectory_csv(dominance), _dominance_dump_path(config.out))

    summary = {
        "corner_level": n_top,
        "dominated_level": n_small,
        "paths": COUPLE_PATHS,
        "steps": COUPLE_STEPS,
        "seed": config.seed,
        "monotone": {"ordering_ok": True, "hit_top": monotone.hit_top},
        "dominance": {"ordering_ok": True, "hit_top": dominance.hit_top},
    }
    sys.stdout.write(render_json(summary))
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "bound": cmd_bound,
    "compare": cmd_compare,
    "couple": cmd_couple,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bmtrunc",
        description=(
            "Certified truncation error bounds for block-monotone Markov chains: "
            "validate a model, build its drift certificate, bound the stationary "
            "truncation error, compare against a converged reference, or run "
            "coupled ordering simulations."
        ),
    )
    parser.add_argument("--model", required=True, help="model JSON file")
    parser.add_argument(
        "--command", required=True, choices=sorted(_COMMANDS), help="what to run"
    )
    parser.add_argument(
        "--n",
        default="10,20,50",
        help="truncation levels: comma list and/or START:STOP[:STEP] ranges",
    )
    parser.add_argument("--m-max", type=int, default=None, help="cap for the m scan")
    parser.add_argument(
        "--reference-level",
        type=int,
        default=None,
        help="oracle truncation level (default: 8 * max n)",
    )
    parser.add_argument("--seed", type=int, default=0, help="coupling seed")
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        model_path=args.model,
        command=args.command,
        n_values=parse_n_spec(args.n),
        m_max=args.m_max,
        reference_level=args.reference_level,
        seed=args.seed,
        out=args.out,
        format=args.format,
        threads=thread_count(),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        return _COMMANDS[config.command](config)
    except (BoundViolationError, OrderingViolationError) as exc:
        print(f"soundness violation: {exc}", file=sys.stderr)
        return EXIT_BOUND_VIOLATED
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (
        ModelSchemaError,
        MultipleClosedClassesError,
        PhaseStructureError,
        ReferenceNotConvergedError,
        ValueError,
    ) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
