"""
Command-line front end.

    qlangevin <command> (--model PATH | --random-model D N) --out PATH [options]

Exit codes: 0 success, 2 input or validation error, 3 tolerance or numerical
quality failure, 4 resource guard.
"""

import argparse
import json
import sys

import numpy as np

from qlangevin import __version__, chain, dynamics, gns, noise, numkit
from qlangevin.config import LOG_LEVELS, get_settings
from qlangevin.errors import (
    NumericalQualityError,
    QLangevinError,
    ResourceGuardError,
    ToleranceError,
    ValidationError,
)
from qlangevin.logs import get_logger, set_level
from qlangevin.model import ModelSpec, gibbs_state, random_model
from qlangevin.modelfile import load_model
from qlangevin.reports import run_metadata, write_csv, write_json

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_TOLERANCE = 3
EXIT_GUARD = 4

DEFAULT_COEFF_TAUS = [2.0**-n for n in range(8, 15)]
DEFAULT_CONVERGE_TAUS = [0.02, 0.01, 0.005, 0.0025]
INVARIANT_TOL = 1e-10
ORACLE_TOL = 1e-10
ITO_TOL = 1e-12
SPECTRUM_ZERO_TOL = 1e-9
INITIAL_STATES = ("ground", "excited", "mixed", "random")


def initial_state(kind: str, d: int, rng: np.random.Generator) -> np.ndarray:
    if kind == "ground":
        rho = np.zeros((d, d), dtype=np.complex128)
        rho[0, 0] = 1.0
    elif kind == "excited":
        rho = np.zeros((d, d), dtype=np.complex128)
        rho[-1, -1] = 1.0
    elif kind == "mixed":
        rho = np.eye(d, dtype=np.complex128) / d
    elif kind == "random":
        rho = numkit.random_density_matrix(d, rng)
    else:
        raise ValidationError(f"unknown initial state {kind!r}")
    return rho


def resolve_model(args: argparse.Namespace, rng: np.random.Generator) -> ModelSpec:
    if args.model is not None:
        return load_model(args.model)
    d, n_channels = args.random_model
    model = random_model(rng, d, n_channels, coupling_scale=args.coupling_scale)
    logger.info(f"Drew random model d={d}, N={n_channels} with seed {args.seed}")
    return model


def _params(args: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("handler", "command")}


def cmd_coeffs(args: argparse.Namespace, model: ModelSpec, rng: np.random.Generator) -> None:
    limits = gns.empirical_limits(model, args.taus)
    rows = [
        (
            *entry.index,
            entry.epsilon,
            entry.residual,
            entry.extrapolated_residual,
            entry.fitted_order,
        )
        for entry in limits.entries
    ]
    footer = {
        "max_residual": limits.max_residual,
        "max_extrapolated_residual": max(e.extrapolated_residual for e in limits.entries),
        "tau_min": float(limits.taus[-1]),
    }
    header = ["i", "j", "k", "l", "epsilon", "residual_at_smallest_tau"]
    header += ["extrapolated_residual", "fitted_order"]
    write_csv(
        args.out,
        header,
        rows,
        footer,
        meta=run_metadata(args.command, _params(args), args.seed),
    )
    if not limits.max_residual <= args.tol:
        raise ToleranceError(
            f"max coefficient residual {limits.max_residual:.3e} exceeds {args.tol}"
        )


def cmd_converge(args: argparse.Namespace, model: ModelSpec, rng: np.random.Generator) -> None:
    rho0 = initial_state(args.rho0, model.d, rng)
    study = dynamics.convergence_study(model, rho0, args.t, args.taus)
    rows = [(row.tau, row.n_steps, row.trace_distance) for row in study.rows]
    write_csv(
        args.out,
        ["tau", "n_steps", "trace_distance"],
        rows,
        {"slope": study.slope},
        meta=run_metadata(args.command, _params(args), args.seed),
    )
    if not study.slope >= args.min_slope:
        raise ToleranceError(f"convergence slope {study.slope:.3f} below {args.min_slope}")


def cmd_evolve(args: argparse.Namespace, model: ModelSpec, rng: np.random.Generator) -> None:
    generator = dynamics.lindblad_schrodinger(model)
    stationary = dynamics.stationary_states(generator)[0]
    rho0 = initial_state(args.rho0, model.d, rng)
    d = model.d
    upper = [(a, b) for a in range(d) for b in range(a + 1, d)]
    header = ["t"] + [f"p_{a}" for a in range(d)]
    for a, b in upper:
        header += [f"re_rho_{a}{b}", f"im_rho_{a}{b}"]
    header.append("trace_distance_to_stationary")

    rows = []
    for t in np.linspace(0.0, args.t_max, args.steps + 1):
        rho = dynamics.evolve(generator, rho0, t)
        row = [t, *np.diag(rho).real]
        for a, b in upper:
            row += [rho[a, b].real, rho[a, b].imag]
        row.append(numkit.trace_distance(rho, stationary))
        rows.append(row)
    write_csv(args.out, header, rows, meta=run_metadata(args.command, _params(args), args.seed))


def cmd_thermalize(args: argparse.Namespace, model: ModelSpec, rng: np.random.Generator) -> None:
    generator = dynamics.lindblad_schrodinger(model)
    states = dynamics.stationary_states(generator)
    if model.bath.beta is not None:
        target = gibbs_state(model.system.H_S, model.bath.beta)
    else:
        target = states[0]
    invariant_residual = numkit.trace_norm(generator.apply(target))

    jumps = list(model.system.V)
    with_h, without_h = dynamics.commutant_dims(model.system.H_S, jumps)
    gap = dynamics.spectral_gap(generator)

    fitted_rate = final_distance = None
    if len(states) == 1:
        rho0 = initial_state(args.rho0, model.d, rng)
        t_max = args.t_max if args.t_max is not None else 20.0 / (gap if gap > 0 else 1.0)
        run = dynamics.return_to_equilibrium(
            model, rho0, np.linspace(0.0, t_max, args.steps + 1)
        )
        fitted_rate = run.rate
        final_distance = run.rows[-1].trace_distance

    report = {
        "invariant_residual": invariant_residual,
        "stationary_count": len(states),
        "commutant_dim_with_H": with_h,
        "commutant_dim_without_H": without_h,
        "spectral_gap": gap,
        "fitted_rate": fitted_rate,
        "final_distance": final_distance,
        "meta": run_metadata(args.command, _params(args), args.seed),
    }
    write_json(args.out, report)

    if invariant_residual > INVARIANT_TOL:
        raise ToleranceError(f"invariant residual {invariant_residual:.3e} exceeds {INVARIANT_TOL}")
    if len(states) != 1:
        raise ToleranceError(f"{len(states)} independent stationary states")
    if with_h != without_h:
        raise ToleranceError(f"commutant dimensions differ: {with_h} with H, {without_h} without")


def cmd_oracle(args: argparse.Namespace, model: ModelSpec, rng: np.random.Generator) -> None:
    rho0 = initial_state(args.rho0, model.d, rng)
    chain.check_chain_size(model.d, model.N + 1, args.k)
    channel = dynamics.interaction_map(model, args.tau)
    deviations = []
    for k in range(args.k + 1):
        exact = chain.reduced_state_after(model, args.tau, rho0, k)
        deviations.append(numkit.max_abs(exact - dynamics.iterate_map(channel, rho0, k)))
    max_deviation = max(deviations)
    write_json(
        args.out,
        {
            "k": args.k,
            "tau": args.tau,
            "deviations": deviations,
            "max_deviation": max_deviation,
            "meta": run_metadata(args.command, _params(args), args.seed),
        },
    )
    if max_deviation > ORACLE_TOL:
        raise ToleranceError(f"chain oracle deviation {max_deviation:.3e} exceeds {ORACLE_TOL}")


def cmd_ito_check(args: argparse.Namespace, model: ModelSpec, rng: np.random.Generator) -> None:
    ratios = noise.ThermalRatios.from_model(model)
    f_norms = np.ones(model.N) if args.f_norms is None else np.asarray(args.f_norms, dtype=float)
    weyl = noise.weyl_vacuum_variance(model, f_norms)
    couplings = dynamics.thermal_couplings(model)
    h_s = model.system.H_S

    k00, k_plus, k_minus = noise.thermal_langevin_coefficients(h_s, couplings, ratios)
    thermal = noise.thermal_unitarity(k00, k_plus, k_minus, ratios)
    du = noise.langevin_differential(k00, k_plus, k_minus)
    table = noise.thermal_table(ratios)
    symbolic_defect = max(
        noise.isometry_defect(du, table).max_abs(), noise.coisometry_defect(du, table).max_abs()
    )

    zero_ratios = noise.ThermalRatios.zero_temperature(model.N)
    zero_coefficients = noise.thermal_langevin_coefficients(h_s, couplings, zero_ratios)
    zero_thermal = noise.thermal_unitarity(*zero_coefficients, zero_ratios)
    zero_hp = noise.hp_unitarity(noise.zero_temperature_table(h_s, couplings))

    rows = []
    for i in range(1, model.N + 1):
        amp_plus, amp_minus = noise.thermal_to_doubled_fock(ratios, i)
        g_inner = np.zeros(model.N, dtype=np.complex128)
        g_inner[i - 1] = 1.0
        ccr = noise.ccr_check(np.eye(model.N)[i - 1], g_inner, ratios)
        rows.append(
            (
                i,
                ratios.plus[i - 1],
                ratios.minus[i - 1],
                amp_plus,
                amp_minus,
                weyl.coth_factors[i - 1],
                weyl.residuals[i - 1],
                abs(ccr - 1.0),
            )
        )
    footer = {
        "weyl_variance": weyl.value,
        "max_coth_residual": weyl.max_residual,
        "thermal_unitary": thermal.unitary,
        "symbolic_unitarity_defect": symbolic_defect,
        "zero_temperature_thermal_unitary": zero_thermal.unitary,
        "zero_temperature_hp_unitary": zero_hp.unitary,
    }
    write_csv(
        args.out,
        [
            "channel",
            "r_plus",
            "r_minus",
            "amp_plus",
            "amp_minus",
            "coth_factor",
            "coth_residual",
            "ccr_residual",
        ],
        rows,
        footer,
        meta=run_metadata(args.command, _params(args), args.seed),
    )
    if weyl.max_residual > ITO_TOL or symbolic_defect > ITO_TOL:
        raise ToleranceError(
            f"Ito identities off: coth residual {weyl.max_residual:.3e}, "
            f"symbolic defect {symbolic_defect:.3e}"
        )
    if not (thermal and zero_thermal and zero_hp):
        failed = thermal.failed or zero_thermal.failed or zero_hp.failed
        raise ToleranceError(f"unitarity check failed: {failed}")


def cmd_spectrum(args: argparse.Namespace, model: ModelSpec, rng: np.random.Generator) -> None:
    generator = dynamics.lindblad_schrodinger(model)
    eigenvalues = dynamics.generator_spectrum(generator)
    gap = dynamics.spectral_gap(generator)
    rows = [(n, mu.real, mu.imag) for n, mu in enumerate(eigenvalues)]
    write_csv(
        args.out,
        ["index", "re", "im"],
        rows,
        {"spectral_gap": gap},
        meta=run_metadata(args.command, _params(args), args.seed),
    )
    threshold = SPECTRUM_ZERO_TOL * numkit.spectral_norm(generator.matrix)
    if not np.any(np.abs(eigenvalues) <= threshold):
        raise NumericalQualityError(
            "generator spectrum has no zero eigenvalue",
            {"smallest_modulus": float(np.min(np.abs(eigenvalues)))},
        )


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", help="JSON model file")
    source.add_argument(
        "--random-model",
        nargs=2,
        type=int,
        metavar=("D", "N"),
        help="Draw a seeded random model with system dimension D and N bath channels",
    )
    common.add_argument("--out", required=True, help="Output file path")
    common.add_argument("--seed", type=int, default=settings.seed, help="Random seed")
    common.add_argument(
        "--coupling-scale",
        type=float,
        default=0.25,
        help="Spectral norm of each coupling of a random model (default: 0.25)",
    )
    common.add_argument("--log-level", choices=LOG_LEVELS)
    initial = argparse.ArgumentParser(add_help=False)
    initial.add_argument("--rho0", choices=INITIAL_STATES, default="random", help="Initial state")

    parser = argparse.ArgumentParser(
        prog="qlangevin",
        description="Repeated quantum interactions and their thermal Langevin limits",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    coeffs = subparsers.add_parser("coeffs", parents=[common], help="GNS coefficient limits")
    coeffs.add_argument("--taus", type=float, nargs="+", default=DEFAULT_COEFF_TAUS)
    coeffs.add_argument("--tol", type=float, default=5e-3, help="Residual tolerance")
    coeffs.set_defaults(handler=cmd_coeffs)

    converge = subparsers.add_parser(
        "converge", parents=[common, initial], help="Repeated interactions vs the Lindblad limit"
    )
    converge.add_argument("--t", type=float, default=1.0, help="Comparison time (default: 1)")
    converge.add_argument("--taus", type=float, nargs="+", default=DEFAULT_CONVERGE_TAUS)
    converge.add_argument("--min-slope", type=float, default=0.7, help="Minimum fitted slope")
    converge.set_defaults(handler=cmd_converge)

    evolve = subparsers.add_parser("evolve", parents=[common, initial], help="Semigroup evolution")
    evolve.add_argument("--t-max", type=float, default=10.0)
    evolve.add_argument("--steps", type=int, default=50)
    evolve.set_defaults(handler=cmd_evolve)

    thermalize = subparsers.add_parser(
        "thermalize", parents=[common, initial], help="Invariant state and return to equilibrium"
    )
    thermalize.add_argument("--t-max", type=float, default=None, help="Default: 20 / gap")
    thermalize.add_argument("--steps", type=int, default=200)
    thermalize.set_defaults(handler=cmd_thermalize)

    oracle = subparsers.add_parser(
        "oracle", parents=[common, initial], help="Exact chain vs iterated one-step map"
    )
    oracle.add_argument("--k", type=int, default=4, help="Number of interactions")
    oracle.add_argument("--tau", type=float, default=0.1, help="Interaction time")
    oracle.set_defaults(handler=cmd_oracle)

    ito = subparsers.add_parser("ito-check", parents=[common], help="Thermal Ito identities")
    ito.add_argument("--f-norms", type=float, nargs="+", help="Squared channel norms of f")
    ito.set_defaults(handler=cmd_ito_check)

    spectrum = subparsers.add_parser("spectrum", parents=[common], help="Generator eigenvalues")
    spectrum.set_defaults(handler=cmd_spectrum)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        settings = get_settings()
        parser = build_parser()
    except ValidationError as e:
        logger.error(f"Invalid settings: {e}")
        return EXIT_INVALID
    args = parser.parse_args(argv)
    set_level(args.log_level or settings.log_level)
    if args.seed < 0:
        logger.error("Seed must be non-negative")
        return EXIT_INVALID

    rng = np.random.default_rng(args.seed)
    try:
        model = resolve_model(args, rng)
        args.handler(args, model, rng)
    except ResourceGuardError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_GUARD
    except (ToleranceError, NumericalQualityError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_TOLERANCE
    except (QLangevinError, OSError, json.JSONDecodeError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_INVALID
    logger.info(f"{args.command} finished")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
