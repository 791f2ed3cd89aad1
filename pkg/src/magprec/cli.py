"""Command-line interface: precision reports, scans, optimization, figure tables, bounds and checks."""

import argparse
import json
import logging
import sys
import tomllib
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import ValidationError

from magprec.analysis.figures import FIGURES, render_table
from magprec.analysis.optimizer import (
    SearchDomain,
    optimize_precision,
    scan,
    schedule_a,
    schedule_b,
)
from magprec.config import RunConfig, Settings, get_settings, resolve_run_config
from magprec.errors import (
    ConventionMismatchError,
    DegenerateSignalError,
    DomainError,
    NoFinitePointError,
    VerificationError,
)
from magprec.physics.bounds import (
    asymptote_intersection,
    c_x,
    c_z,
    crossover_estimate,
    depolarizing_floor,
    ghz_qfi_bound,
    mixed_noise_floor,
)
from magprec.physics.ghz import ghz_precision
from magprec.physics.metrology import msqe, precision
from magprec.physics.probes import Geometry, ProbeSpec, mu_from_db, squeezing_db
from magprec.verification.suite import run_checks

logger = logging.getLogger(__name__)

# ===== Exit codes =====

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_VERIFICATION = 4

# Reference scale of the aligned-probe schedule: t0 = SCHEDULE_A_T0/γ, μ0 = SCHEDULE_A_MU0
SCHEDULE_A_T0 = 10.0
SCHEDULE_A_MU0 = 2.0

RULE = "=" * 60

_RUN_FLAGS = (
    "gamma",
    "alpha",
    "epsilon",
    "t1",
    "t2",
    "omega",
    "n",
    "geometry",
    "mu",
    "db",
    "t",
    "schedule",
    "output_format",
    "out",
    "seed",
)


# ===== Helpers =====


def _banner(title: str) -> None:
    print(RULE)
    print(title)
    print(RULE)


def _echo_config(config: RunConfig) -> None:
    print("Resolved configuration:")
    print(json.dumps(config.model_dump(mode="json"), indent=2))
    print()


def _parse_range(text: str) -> np.ndarray:
    """``start:stop:count`` as a log-spaced grid, or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"range {text!r} must look like start:stop:count")
    start, stop, count = float(parts[0]), float(parts[1]), int(float(parts[2]))
    if not 0.0 < start <= stop or count < 1:
        raise ValueError(f"invalid range {text!r}")
    return np.geomspace(start, stop, count)


def _operating_point(config: RunConfig, n: int) -> tuple[float, float]:
    """(t, μ) for one particle number."""
    noise = config.noise_model()
    squeezed = config.geometry.is_squeezed
    if config.schedule == "b":
        t, mu = schedule_b(n, noise.gamma, config.omega)
        return t, mu if squeezed else 0.0
    exponent = config.schedule_exponent
    if exponent is not None:
        if not noise.gamma > 0.0:
            raise DomainError("schedule a needs gamma > 0")
        t, mu = schedule_a(n, exponent, SCHEDULE_A_T0 / noise.gamma, SCHEDULE_A_MU0)
        return t, mu if squeezed else 0.0

    if config.t is None:
        raise DomainError("no interrogation time given")
    if not squeezed:
        return config.t, 0.0
    if config.mu is not None:
        return config.t, config.mu
    return config.t, mu_from_db(n, config.db if config.db is not None else 0.0)


def _emit(frame: pd.DataFrame, config: RunConfig) -> None:
    text = render_table(frame, config.output_format)
    if config.out is None:
        print(text, end="")
        return
    config.out.parent.mkdir(parents=True, exist_ok=True)
    config.out.write_text(text, encoding="utf-8")
    print(f"✓ Wrote {len(frame)} rows to {config.out}")


# ===== Commands =====


def cmd_precision(config: RunConfig, args: argparse.Namespace, settings: Settings) -> int:
    """Δ²ω·T and CSS gain at each particle number."""
    _banner("Precision report")
    _echo_config(config)
    noise = config.noise_model()
    rows: list[dict[str, Any]] = []
    for n in config.n:
        t, mu = _operating_point(config, n)
        if config.geometry is Geometry.GHZ:
            value = ghz_precision(n, noise, config.omega, t)
            reference = msqe(ProbeSpec(n_particles=n, geometry=Geometry.CSS_X), noise, config.omega, t)
            gain = reference / value
            level = 0.0
        else:
            probe = ProbeSpec(n_particles=n, geometry=config.geometry, mu=mu)
            result = precision(probe, noise, config.omega, t)
            value, gain = result.msqe_times_T, result.gain_vs_css
            level = squeezing_db(n, mu) if config.geometry.is_squeezed else 0.0
        print(f"  N={n:.4g}  t={t:.6g} s  mu={mu:.6g} ({level:.3f} dB)")
        print(f"    Δ²ω·T = {value:.6e} 1/s   gain vs CSS = {gain:.4f}")
        rows.append(
            {
                "n": n,
                "geometry": config.geometry.value,
                "t": t,
                "mu": mu,
                "squeezing_db": level,
                "msqe_times_T": value,
                "gain_vs_css": gain,
            }
        )
    if config.out is not None:
        _emit(pd.DataFrame(rows), config)
    return EXIT_OK


def _objective(config: RunConfig, n: int) -> Callable[[float, float], float]:
    noise = config.noise_model()
    geometry = config.geometry

    def objective(t: float, mu: float) -> float:
        if geometry is Geometry.GHZ:
            return ghz_precision(n, noise, config.omega, t)
        return msqe(ProbeSpec(n_particles=n, geometry=geometry, mu=mu), noise, config.omega, t)

    return objective


def cmd_scan(config: RunConfig, args: argparse.Namespace, settings: Settings) -> int:
    """Dense (t, μ) grid of Δ²ω·T for every particle number."""
    frames = []
    for n in config.n:
        t, default_mu = _operating_point(config, n)
        times = _parse_range(args.t_range) if args.t_range is not None else np.array([t])
        mus = _parse_range(args.mu_range) if args.mu_range is not None else np.array([default_mu])
        if not config.geometry.is_squeezed:
            mus = np.array([0.0])
        frame = scan(_objective(config, n), times, mus, settings.optimizer_workers)
        frame.insert(0, "n", n)
        frames.append(frame)
    table = pd.concat(frames, ignore_index=True)
    failed = int((table["error"] != "").sum())
    print(f"✓ Scanned {len(table)} points ({failed} degenerate)", file=sys.stderr)
    _emit(table, config)
    return EXIT_OK


def cmd_optimize(config: RunConfig, args: argparse.Namespace, settings: Settings) -> int:
    """Best interrogation time (and squeezing) at each particle number."""
    _banner("Optimization report")
    _echo_config(config)
    noise = config.noise_model()
    if not noise.gamma > 0.0:
        raise DomainError("optimization needs gamma > 0")
    domain = SearchDomain.for_rate(noise.gamma, optimize_mu=config.geometry.is_squeezed)
    rows: list[dict[str, Any]] = []
    for n in config.n:
        best = optimize_precision(
            config.geometry, noise, config.omega, n, domain, settings.optimizer_workers
        )
        row: dict[str, Any] = {
            "n": n,
            "geometry": config.geometry.value,
            "t_star": best.t_star,
            "mu_star": best.mu_star,
            "msqe_times_T": best.msqe_times_T,
            "evaluations": best.evaluations,
            "converged": best.converged,
        }
        marker = "✓" if best.converged else "✗"
        print(f"  {marker} N={n:.4g}  t*={best.t_star:.6g} s  mu*={best.mu_star:.6g}")
        print(f"      Δ²ω·T = {best.msqe_times_T:.6e} 1/s  ({best.evaluations} evaluations)")
        if config.geometry is Geometry.SCENARIO_B:
            t_b, mu_b = schedule_b(n, noise.gamma, config.omega)
            at_schedule = msqe(
                ProbeSpec(n_particles=n, geometry=Geometry.SCENARIO_B, mu=mu_b),
                noise,
                config.omega,
                t_b,
            )
            row["msqe_schedule_b"] = at_schedule
            print(f"      schedule b gives {at_schedule:.6e} 1/s")
        rows.append(row)
    if config.out is not None:
        _emit(pd.DataFrame(rows), config)
    return EXIT_OK


def _figure_overrides(name: str, args: argparse.Namespace, config: RunConfig) -> dict[str, Any]:
    given = {key: getattr(args, key) for key in ("gamma", "omega", "epsilon") if getattr(args, key) is not None}
    if name == "fig3":
        return given
    if name.startswith("fig2"):
        overrides = {key: value for key, value in given.items() if key != "epsilon"}
        if args.n is not None:
            overrides["n"] = config.n[0]
        if name == "fig2-squeezing" and args.t is not None:
            overrides["t"] = args.t
        if name == "fig2-time" and args.db is not None:
            overrides["squeezing_db"] = args.db
        return overrides
    return {}


def cmd_figure(config: RunConfig, args: argparse.Namespace, settings: Settings) -> int:
    """Regenerate one figure table."""
    name = args.name
    overrides = _figure_overrides(name, args, config)
    if name in ("fig2-time", "fig3", "fig4"):
        overrides["workers"] = settings.optimizer_workers
    print(f"Generating {name} with {overrides or 'default parameters'}...", file=sys.stderr)
    frame = FIGURES[name](**overrides)
    if config.out is None:
        default = settings.output_dir / f"{name}.{config.output_format}"
        config = config.model_copy(update={"out": default})
    _emit(frame, config)
    return EXIT_OK


def cmd_bounds(config: RunConfig, args: argparse.Namespace, settings: Settings) -> int:
    """No-go coefficients, floors and crossover for the configured noise."""
    _banner("Bounds report")
    _echo_config(config)
    noise = config.noise_model()
    mixed = config.mixed_noise()
    gamma = noise.gamma
    epsilon = mixed.epsilon if mixed is not None else noise.alpha_z
    t = config.t if config.t is not None else _operating_point(config, config.n[0])[0]

    print(f"  γ = {gamma:.6g} 1/s   ε = {epsilon:.6g}")
    if config.t1 is not None:
        print(f"  spin-relaxation floor 8/(3T₁) = {8.0 / (3.0 * config.t1):.6g} 1/s")
    if mixed is not None:
        print(f"  mixed-noise floor 2γε = {mixed_noise_floor(mixed):.6g} 1/s")
    print(f"  depolarizing floor 4γ/3 = {depolarizing_floor(gamma):.6g} 1/s")
    print(f"  c_z(γ, t={t:.4g}) = {c_z(gamma, t):.6g} 1/s")
    print(f"  c_x(γ, ω, t={t:.4g}) = {c_x(gamma, config.omega, t):.6g} 1/s")
    for n in config.n:
        print(f"  GHZ bound at N={n:.4g}: {ghz_qfi_bound(n, gamma, config.omega):.6e} 1/s")
    if epsilon > 0.0 and gamma > 0.0 and config.omega != 0.0:
        estimate = crossover_estimate(gamma, config.omega, epsilon)
        intersection = asymptote_intersection(gamma, config.omega, epsilon)
        print(f"  crossover N* ≈ {estimate:.6e} (asymptote intersection {intersection:.6e})")
    return EXIT_OK


def cmd_check(config: RunConfig, args: argparse.Namespace, settings: Settings) -> int:
    """Randomized closed-form vs dense-oracle suite."""
    _banner(f"Equivalence checks ({args.depth})")
    report = run_checks(args.depth, config.seed, settings)
    for result in report.results:
        marker = "✓" if result.passed else "✗"
        print(f"  {marker} {result.name:<28} worst {result.worst:.3e}  (tolerance {result.tolerance:.0e})")
    print(RULE)
    if report.passed:
        print(f"✓ All checks passed ({report.draws} draws, seed {report.seed})")
        return EXIT_OK
    print(f"✗ Some checks failed ({report.draws} draws, seed {report.seed})")
    return EXIT_VERIFICATION


COMMANDS: dict[str, Callable[[RunConfig, argparse.Namespace, Settings], int]] = {
    "precision": cmd_precision,
    "scan": cmd_scan,
    "optimize": cmd_optimize,
    "figure": cmd_figure,
    "bounds": cmd_bounds,
    "check": cmd_check,
}


# ===== Argument parsing =====


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    noise = parser.add_argument_group("noise")
    noise.add_argument("--gamma", type=float, help="Dephasing rate γ in 1/s")
    noise.add_argument("--alpha", help="Direction weights 'ax,ay,az' summing to 1")
    noise.add_argument("--epsilon", type=float, help="Parallel-noise fraction ε")
    noise.add_argument("--t1", type=float, help="Longitudinal relaxation time T₁ in s")
    noise.add_argument("--t2", type=float, help="Transverse relaxation time T₂ in s")

    probe = parser.add_argument_group("probe")
    probe.add_argument("--omega", type=float, help="Signal frequency ω in 1/s")
    probe.add_argument("--n", help="Particle number, list 'a,b,c' or log range 'start:stop:count'")
    probe.add_argument("--geometry", choices=[g.value for g in Geometry])
    squeezing = probe.add_mutually_exclusive_group()
    squeezing.add_argument("--mu", type=float, help="Twisting strength μ")
    squeezing.add_argument("--db", type=float, help="Squeezing in dB (<= 0)")
    timing = probe.add_mutually_exclusive_group()
    timing.add_argument("--t", type=float, help="Interrogation time in s")
    timing.add_argument("--schedule", help="'b' or 'a:<s>' with s > 1")

    output = parser.add_argument_group("output")
    output.add_argument("--out", type=Path, help="Output file (CSV or JSON)")
    output.add_argument("--format", dest="output_format", choices=["csv", "json"])
    output.add_argument("--config", type=Path, help="TOML file with [defaults] and per-command sections")
    output.add_argument("--seed", type=int, help="Seed for randomized draws")
    output.add_argument("--verbose", action="store_true", help="Debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magprec",
        description="Precision of noisy frequency estimation with coherent, squeezed and GHZ probes.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("precision", "Δ²ω·T and gain vs CSS (columns n, geometry, t, mu, squeezing_db, msqe_times_T, gain_vs_css)"),
        ("optimize", "optimize t (and μ) per N (columns n, geometry, t_star, mu_star, msqe_times_T, ...)"),
        ("bounds", "bound coefficients, floors and crossover for the configured noise"),
    ):
        _add_run_flags(commands.add_parser(name, help=help_text))

    scan_parser = commands.add_parser("scan", help="grid of Δ²ω·T (columns n, t, mu, msqe, error)")
    _add_run_flags(scan_parser)
    scan_parser.add_argument("--t-range", help="Log range 'start:stop:count' of t")
    scan_parser.add_argument("--mu-range", help="Log range 'start:stop:count' of μ")

    figure_parser = commands.add_parser("figure", help="regenerate a figure table")
    figure_parser.add_argument("name", choices=sorted(FIGURES))
    _add_run_flags(figure_parser)

    check_parser = commands.add_parser("check", help="closed forms vs dense oracle")
    check_parser.add_argument("--depth", choices=["fast", "full"], default="fast")
    _add_run_flags(check_parser)
    return parser


def _configure_logging(settings: Settings, verbose: bool) -> None:
    level = "DEBUG" if verbose or settings.debug else settings.log_level
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the ``magprec`` command.

    Returns:
        Exit code: 0 ok, 2 configuration error, 3 degenerate signal or other numerical
        failure, 4 verification failure.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    _configure_logging(settings, args.verbose)

    flags = {key: getattr(args, key, None) for key in _RUN_FLAGS}
    try:
        config = resolve_run_config(args.command, flags, args.config, settings)
        return COMMANDS[args.command](config, args, settings)
    except (DegenerateSignalError, NoFinitePointError) as e:
        print(f"✗ Degenerate signal: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (VerificationError, ConventionMismatchError) as e:
        print(f"✗ Verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFICATION
    except ArithmeticError as e:
        print(f"✗ Numerical failure: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValidationError, DomainError, tomllib.TOMLDecodeError, ValueError, OSError) as e:
        print(f"✗ Invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
