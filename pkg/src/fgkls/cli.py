"""Batch front end: run the perturbative solver and both oracles from a JSON config.

Subcommands
    pointer   perturbative pointer family only
    exact     Liouvillian null-space oracle only
    evolve    time-domain integration from seeded random initial states
    compare   all three, with distances and the residual-scaling table

Each run writes `report.json` (machine readable, byte-stable across reruns)
and `report.txt` (human readable, includes timing) into the output directory,
plus `trajectory_<seed>.csv` files when trajectories are integrated.  Exit
codes: 0 success, 1 config error, 2 scheme failure (no solution at some
order), 3 comparison thresholds exceeded.  The environment variable LP_SEED
overrides the configured random seeds.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from .core import (
    DensityMatrix,
    EnergySpectrum,
    classify_pairs,
    default_tol_degen,
    random_density_matrix,
    stationarity_residual,
    vectorize_liouvillian,
    weak_coupling_ratio,
)
from .exact import (
    SteadyStateSet,
    hermitian_affine_distance,
    integrate_trajectory,
    point_to_affine_distance,
    steady_state_basis,
)
from .models import OscillatorSpinConfig, SigmaPlus, SigmaXY, build_oscillator_spin, build_two_level
from .perturbation import PointerFamily, SchemeFailure, run_pointer_scheme

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NO_SOLUTION = 2
EXIT_THRESHOLD = 3

DEFAULT_FAMILY_DISTANCE_MAX = 1e-8
DEFAULT_ENDPOINT_DISTANCE_MAX = 1e-6


class ConfigError(ValueError):
    """Invalid configuration; the message is anchored to the offending location."""


@dataclass
class EvolveConfig:
    t_end: float
    n_steps: int | None
    seeds: list[int]
    seed_source: str


@dataclass
class RunConfig:
    model: str
    spectrum: EnergySpectrum
    jumps: list[np.ndarray]
    max_order: int
    lambda_values: list[float]
    tol_degen: float | None
    tol_rank: float | None
    tol_kernel: float | None
    evolve: EvolveConfig | None
    family_distance_max: float
    endpoint_distance_max: float
    oscillator: OscillatorSpinConfig | None
    echo: dict


def _ctx(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _get(d: dict, key: str, path: str, required: bool = True, default=None):
    if key not in d:
        if required:
            raise ConfigError(f"config error at {_ctx(path, key)}: missing key")
        return default
    return d[key]


def _as_complex(value, where: str) -> complex:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(x, (int, float)) for x in value)):
        raise ConfigError(f"config error at {where}: complex numbers are [re, im] pairs")
    return complex(value[0], value[1])


def _as_matrix(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"config error at {where}: expected a matrix (list of rows)")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != len(value):
            raise ConfigError(f"config error at {where}[{i}]: matrix must be square")
        rows.append([_as_complex(z, f"{where}[{i}][{j}]") for j, z in enumerate(row)])
    return np.array(rows, dtype=complex)


def _build_model(cfg: dict) -> tuple[str, EnergySpectrum, list[np.ndarray], OscillatorSpinConfig | None]:
    model = _get(cfg, "model", "")
    if model == "two_level":
        sub = _get(cfg, "two_level", "")
        eps1 = float(_get(sub, "eps1", "two_level"))
        eps2 = float(_get(sub, "eps2", "two_level"))
        l12 = _as_complex(_get(sub, "l12", "two_level"), "two_level.l12")
        l21 = _as_complex(_get(sub, "l21", "two_level"), "two_level.l21")
        try:
            spectrum, jumps = build_two_level(eps1, eps2, l12, l21)
        except ValueError as err:
            raise ConfigError(f"config error at two_level: {err}") from err
        return model, spectrum, jumps, None
    if model == "oscillator_spin":
        sub = _get(cfg, "oscillator_spin", "")
        jump = _get(sub, "jump", "oscillator_spin")
        variant_name = _get(jump, "variant", "oscillator_spin.jump")
        if variant_name == "sigma_plus":
            variant = SigmaPlus(lam=_as_complex(_get(jump, "lam", "oscillator_spin.jump"),
                                                "oscillator_spin.jump.lam"))
        elif variant_name == "sigma_xy":
            variant = SigmaXY(
                gamma1=_as_complex(_get(jump, "gamma1", "oscillator_spin.jump"),
                                   "oscillator_spin.jump.gamma1"),
                gamma2=_as_complex(_get(jump, "gamma2", "oscillator_spin.jump"),
                                   "oscillator_spin.jump.gamma2"),
            )
        else:
            raise ConfigError(
                "config error at oscillator_spin.jump.variant: expected "
                "'sigma_plus' or 'sigma_xy'"
            )
        try:
            osc = OscillatorSpinConfig(
                n_levels=int(_get(sub, "n_levels", "oscillator_spin")),
                omega=float(_get(sub, "omega", "oscillator_spin")),
                delta=float(_get(sub, "delta", "oscillator_spin")),
                jump_variant=variant,
            )
        except ValueError as err:
            raise ConfigError(f"config error at oscillator_spin: {err}") from err
        spectrum, jumps = build_oscillator_spin(osc)
        return model, spectrum, jumps, osc
    if model == "custom":
        sub = _get(cfg, "custom", "")
        energies = _get(sub, "energies", "custom")
        if not isinstance(energies, list) or not energies:
            raise ConfigError("config error at custom.energies: expected a list of reals")
        spectrum = EnergySpectrum(np.array(energies, dtype=float))
        raw_jumps = _get(sub, "jumps", "custom")
        if not isinstance(raw_jumps, list):
            raise ConfigError("config error at custom.jumps: expected a list of matrices")
        jumps = [_as_matrix(mat, f"custom.jumps[{k}]") for k, mat in enumerate(raw_jumps)]
        for k, L in enumerate(jumps):
            if L.shape != (spectrum.dim, spectrum.dim):
                raise ConfigError(f"config error at custom.jumps[{k}]: shape {L.shape} "
                                  f"does not match dimension {spectrum.dim}")
        return model, spectrum, jumps, None
    raise ConfigError("config error at model: expected 'two_level', 'oscillator_spin' or 'custom'")


def load_config(path: str, max_order_override: int | None = None,
                tol_degen_override: float | None = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as err:
        raise ConfigError(f"{path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from err
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}:1: top-level value must be an object")

    model, spectrum, jumps, osc = _build_model(cfg)

    max_order = int(_get(cfg, "max_order", "", required=False, default=3))
    if max_order_override is not None:
        max_order = max_order_override
    if max_order < 0:
        raise ConfigError("config error at max_order: must be nonnegative")

    lambda_values = _get(cfg, "lambda_values", "", required=False, default=[1.0])
    if (not isinstance(lambda_values, list) or not lambda_values
            or any(not isinstance(x, (int, float)) or x <= 0 for x in lambda_values)):
        raise ConfigError("config error at lambda_values: expected a non-empty list of positive reals")

    tols = _get(cfg, "tolerances", "", required=False, default={})
    for key, val in tols.items():
        if key not in ("tol_degen", "tol_rank", "tol_kernel"):
            raise ConfigError(f"config error at tolerances.{key}: unknown tolerance")
        if not isinstance(val, (int, float)) or val <= 0:
            raise ConfigError(f"config error at tolerances.{key}: must be positive")
    tol_degen = tols.get("tol_degen")
    if tol_degen_override is not None:
        tol_degen = tol_degen_override

    evolve = None
    if "evolve" in cfg:
        sub = cfg["evolve"]
        t_end = float(_get(sub, "t_end", "evolve"))
        if t_end <= 0:
            raise ConfigError("config error at evolve.t_end: must be positive")
        n_steps = sub.get("n_steps")
        if n_steps is not None:
            n_steps = int(n_steps)
            if n_steps < 1:
                raise ConfigError("config error at evolve.n_steps: must be at least 1")
        seeds = _get(sub, "seeds", "evolve", required=False, default=[0])
        if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
            raise ConfigError("config error at evolve.seeds: expected a list of integers")
        seed_source = "config"
        env_seed = os.environ.get("LP_SEED")
        if env_seed is not None:
            try:
                seeds = [int(env_seed)]
            except ValueError as err:
                raise ConfigError(f"LP_SEED: not an integer ({env_seed!r})") from err
            seed_source = "env:LP_SEED"
        evolve = EvolveConfig(t_end=t_end, n_steps=n_steps, seeds=seeds, seed_source=seed_source)

    thresholds = _get(cfg, "thresholds", "", required=False, default={})
    family_max = float(thresholds.get("family_distance", DEFAULT_FAMILY_DISTANCE_MAX))
    endpoint_max = float(thresholds.get("endpoint_distance", DEFAULT_ENDPOINT_DISTANCE_MAX))

    return RunConfig(
        model=model, spectrum=spectrum, jumps=jumps, max_order=max_order,
        lambda_values=[float(x) for x in lambda_values], tol_degen=tol_degen,
        tol_rank=tols.get("tol_rank"), tol_kernel=tols.get("tol_kernel"),
        evolve=evolve, family_distance_max=family_max,
        endpoint_distance_max=endpoint_max, oscillator=osc, echo=cfg,
    )


def _cx(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _encode_matrix(mat: np.ndarray) -> list:
    return [[_cx(z) for z in row] for row in np.asarray(mat, dtype=complex)]


def _jumps_all_zero(jumps) -> bool:
    return all(np.max(np.abs(L)) < 1e-15 for L in jumps) if jumps else True


def _family_report(family: PointerFamily) -> dict:
    orders = []
    for oc, dirs, rep in zip(family.orders, family.free_directions, family.rank_reports):
        orders.append({
            "order": oc.order,
            "coefficients": _encode_matrix(oc.coeff),
            "trace": float(oc.coeff.trace().real),
            "free_direction_count": len(dirs),
            "free_directions": [_encode_matrix(v) for v in dirs],
            "rank": rep.rank,
            "rank_augmented": rep.rank_augmented,
            "singular_values": [float(s) for s in rep.singular_values],
        })
    return {
        "branch": family.branch,
        "max_order": family.max_order,
        "orders": orders,
    }


def _oscillator_structure_notes(config: RunConfig, family: PointerFamily) -> list[str]:
    notes = []
    n = config.oscillator.n_levels
    members = [oc.coeff for oc in family.orders]
    members += [v for dirs in family.free_directions for v in dirs]
    eq_pop = max(
        float(np.max(np.abs([m[2 * k, 2 * k] - m[2 * k + 1, 2 * k + 1] for k in range(n)])))
        for m in members
    )
    down_pop = max(
        float(np.max(np.abs([m[2 * k + 1, 2 * k + 1] for k in range(n)])))
        for m in members
    )
    if down_pop < 1e-12:
        notes.append("pointer structure: spin-down populations vanish (f_mm11 = 0)")
    elif eq_pop < 1e-12:
        notes.append("pointer structure: f_mm00 = f_mm11 in every family member "
                     "(spin populations equalized)")
    return notes


def _solve_family(config: RunConfig):
    partition = classify_pairs(config.spectrum, config.tol_degen)
    result = run_pointer_scheme(config.spectrum, config.jumps, partition,
                                max_order=config.max_order, tol_rank=config.tol_rank)
    return partition, result


def _base_report(command: str, config: RunConfig) -> dict:
    report = {
        "command": command,
        "model": config.echo,
        "dimension": config.spectrum.dim,
        "energies": [float(e) for e in config.spectrum.energies],
        "weak_coupling_ratio": weak_coupling_ratio(config.spectrum, config.jumps),
        "notes": [],
    }
    if _jumps_all_zero(config.jumps):
        report["notes"].append("Liouville regime, no unique pointer")
    if config.oscillator is not None:
        report["degeneracy_parameter_q"] = config.oscillator.q
        report["q_is_integer"] = config.oscillator.q_is_integer
    return report


def _pointer_into_report(config: RunConfig, report: dict):
    """Solve the family, fill the report; returns (exit_code, family-or-None)."""
    partition, result = _solve_family(config)
    report["degeneracy_classes"] = [list(c) for c in partition.classes]
    if isinstance(result, SchemeFailure):
        report["scheme_failure"] = {
            "order": result.order,
            "reason": result.reason,
            "rank": result.rank_report.rank if result.rank_report else None,
            "rank_augmented": result.rank_report.rank_augmented if result.rank_report else None,
        }
        return EXIT_NO_SOLUTION, None
    report["pointer_family"] = _family_report(result)
    if config.oscillator is not None:
        report["notes"].extend(_oscillator_structure_notes(config, result))
    return EXIT_OK, result


def cmd_pointer(config: RunConfig) -> tuple[int, dict]:
    report = _base_report("pointer", config)
    code, _ = _pointer_into_report(config, report)
    return code, report


def _exact_for_lambda(config: RunConfig, lam: float) -> SteadyStateSet:
    jumps = [lam * L for L in config.jumps]
    superop = vectorize_liouvillian(config.spectrum, jumps)
    return steady_state_basis(superop, tol_kernel=config.tol_kernel)


def cmd_exact(config: RunConfig) -> tuple[int, dict]:
    report = _base_report("exact", config)
    steady = _exact_for_lambda(config, 1.0)
    residual = stationarity_residual(config.spectrum, config.jumps, steady.physical_member)
    report["exact"] = {
        "kernel_dim": steady.kernel_dim,
        "physical_member": _encode_matrix(steady.physical_member),
        "physical_direction_count": len(steady.physical_directions),
        "physical_member_residual": residual,
        "smallest_singular_values": [float(s) for s in steady.singular_values[-min(8, steady.singular_values.size):]],
    }
    return EXIT_OK, report


def _run_trajectories(config: RunConfig) -> list[dict]:
    results = []
    for seed in config.evolve.seeds:
        rng = np.random.default_rng(seed)
        rho0 = random_density_matrix(config.spectrum.dim, rng)
        n_steps = config.evolve.n_steps
        record = 1
        if n_steps is not None and n_steps > 1000:
            record = n_steps // 1000
        traj = integrate_trajectory(config.spectrum, config.jumps, rho0,
                                    t_end=config.evolve.t_end, n_steps=n_steps,
                                    record_every=record)
        results.append({"seed": seed, "trajectory": traj})
    return results


def _trajectory_csv(traj) -> str:
    d = traj.states[0].dim
    header = ["t"]
    header += [f"re(rho_{m}{n})" for m in range(d) for n in range(d)]
    header += [f"im(rho_{m}{n})" for m in range(d) for n in range(d)]
    lines = [",".join(header)]
    for t, state in zip(traj.times, traj.states):
        flat = state.matrix.ravel()
        row = [repr(float(t))]
        row += [repr(float(x)) for x in flat.real]
        row += [repr(float(x)) for x in flat.imag]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def cmd_evolve(config: RunConfig) -> tuple[int, dict]:
    if config.evolve is None:
        raise ConfigError("config error at evolve: the 'evolve' block is required for this command")
    report = _base_report("evolve", config)
    runs = _run_trajectories(config)
    entries = []
    for run in runs:
        traj = run["trajectory"]
        final = traj.final_state.matrix
        entries.append({
            "seed": run["seed"],
            "t_end": float(traj.times[-1]),
            "step_size": traj.step_size,
            "final_state": _encode_matrix(final),
            "final_residual": stationarity_residual(config.spectrum, config.jumps, final),
            "trace_drift": abs(float(final.trace().real) - 1.0),
        })
    report["evolve"] = {
        "seed_source": config.evolve.seed_source,
        "seeds": list(config.evolve.seeds),
        "trajectories": entries,
    }
    report["_trajectories"] = runs
    return EXIT_OK, report


def cmd_compare(config: RunConfig) -> tuple[int, dict]:
    report = _base_report("compare", config)
    code, family = _pointer_into_report(config, report)
    if code != EXIT_OK:
        return code, report

    comparisons = []
    family_dirs = family.affine_directions()
    worst_family = 0.0
    for lam in config.lambda_values:
        steady = _exact_for_lambda(config, lam)
        member = family.evaluate(lam)
        dist = hermitian_affine_distance(member, family_dirs,
                                         steady.physical_member,
                                         list(steady.physical_directions))
        worst_family = max(worst_family, dist)
        comparisons.append({
            "lambda": lam,
            "kernel_dim": steady.kernel_dim,
            "family_vs_exact_distance": dist,
        })
    report["oracle_comparison"] = comparisons

    scaling = []
    for lam in config.lambda_values:
        scaled = [lam * L for L in config.jumps]
        scaling.append({
            "lambda": lam,
            "residual": stationarity_residual(config.spectrum, scaled, family.evaluate(lam)),
        })
    report["residual_scaling"] = scaling

    worst_endpoint = 0.0
    if config.evolve is not None:
        steady_full = _exact_for_lambda(config, 1.0)
        runs = _run_trajectories(config)
        endpoints = []
        for run in runs:
            final = run["trajectory"].final_state.matrix
            d_exact = point_to_affine_distance(final, steady_full.physical_member,
                                               list(steady_full.physical_directions))
            d_family = point_to_affine_distance(final, family.evaluate(1.0), family_dirs)
            worst_endpoint = max(worst_endpoint, d_exact, d_family)
            endpoints.append({
                "seed": run["seed"],
                "endpoint_vs_exact": d_exact,
                "endpoint_vs_family": d_family,
                "final_residual": stationarity_residual(config.spectrum, config.jumps, final),
            })
        report["endpoints"] = endpoints
        report["_trajectories"] = runs

    within = (worst_family <= config.family_distance_max
              and worst_endpoint <= config.endpoint_distance_max)
    report["thresholds"] = {
        "family_distance_max": config.family_distance_max,
        "endpoint_distance_max": config.endpoint_distance_max,
        "worst_family_distance": worst_family,
        "worst_endpoint_distance": worst_endpoint,
        "within_thresholds": within,
    }
    return (EXIT_OK if within else EXIT_THRESHOLD), report


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_report_")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _text_report(report: dict, elapsed: float) -> str:
    lines = [f"fgkls {report['command']} report", "=" * 40]
    lines.append(f"dimension: {report['dimension']}")
    lines.append(f"energies: {report['energies']}")
    lines.append(f"weak-coupling ratio ||L||^2/||H||: {report['weak_coupling_ratio']:.6g}")
    if "degeneracy_parameter_q" in report:
        lines.append(f"q = 2*delta/omega: {report['degeneracy_parameter_q']:.6g} "
                     f"(integer: {report['q_is_integer']})")
    if "scheme_failure" in report:
        sf = report["scheme_failure"]
        lines.append(f"SCHEME FAILURE at order {sf['order']}: {sf['reason']}")
    if "pointer_family" in report:
        fam = report["pointer_family"]
        lines.append(f"branch: {fam['branch']}")
        lines.append("order | free dirs | rank | rank(aug)")
        for o in fam["orders"]:
            lines.append(f"{o['order']:5d} | {o['free_direction_count']:9d} | "
                         f"{o['rank']:4d} | {o['rank_augmented']:9d}")
    if "exact" in report:
        ex = report["exact"]
        lines.append(f"exact kernel dimension: {ex['kernel_dim']}")
        lines.append(f"physical member residual: {ex['physical_member_residual']:.3e}")
    if "oracle_comparison" in report:
        lines.append("lambda | kernel dim | family-vs-exact distance")
        for row in report["oracle_comparison"]:
            lines.append(f"{row['lambda']:<6g} | {row['kernel_dim']:10d} | "
                         f"{row['family_vs_exact_distance']:.3e}")
    if "residual_scaling" in report:
        lines.append("lambda | truncated-member residual")
        for row in report["residual_scaling"]:
            lines.append(f"{row['lambda']:<6g} | {row['residual']:.6e}")
    if "evolve" in report:
        lines.append(f"seeds ({report['evolve']['seed_source']}): {report['evolve']['seeds']}")
        for tr in report["evolve"]["trajectories"]:
            lines.append(f"seed {tr['seed']}: final residual {tr['final_residual']:.3e}, "
                         f"trace drift {tr['trace_drift']:.3e}")
    if "endpoints" in report:
        lines.append("seed | endpoint vs exact | endpoint vs family")
        for row in report["endpoints"]:
            lines.append(f"{row['seed']:4d} | {row['endpoint_vs_exact']:.3e} | "
                         f"{row['endpoint_vs_family']:.3e}")
    if "thresholds" in report:
        th = report["thresholds"]
        lines.append(f"within thresholds: {th['within_thresholds']} "
                     f"(family {th['worst_family_distance']:.3e} <= {th['family_distance_max']:g}, "
                     f"endpoint {th['worst_endpoint_distance']:.3e} <= {th['endpoint_distance_max']:g})")
    for note in report["notes"]:
        lines.append(f"note: {note}")
    lines.append(f"elapsed seconds: {elapsed:.3f}")
    return "\n".join(lines) + "\n"


COMMANDS = {
    "pointer": cmd_pointer,
    "exact": cmd_exact,
    "evolve": cmd_evolve,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fgkls",
        description="Pointer states of the FGKLS equation: perturbative solver and exact oracles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("pointer", "run the perturbative pointer scheme"),
        ("exact", "compute the exact steady-state set from the Liouvillian null space"),
        ("evolve", "integrate trajectories from seeded random initial states"),
        ("compare", "run solver and oracles and report distances"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", help="path to the JSON run configuration")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--max-order", type=int, default=None, help="override max_order")
        p.add_argument("--tol-degen", type=float, default=None, help="override tol_degen")
        p.add_argument("--json-only", action="store_true",
                       help="write report.json only (no text report, no CSV)")
    args = parser.parse_args(argv)

    start = time.perf_counter()
    try:
        config = load_config(args.config, max_order_override=args.max_order,
                             tol_degen_override=args.tol_degen)
    except (ConfigError, TypeError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code, report = COMMANDS[args.command](config)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    elapsed = time.perf_counter() - start

    os.makedirs(args.out, exist_ok=True)
    trajectories = report.pop("_trajectories", None)
    _atomic_write(os.path.join(args.out, "report.json"),
                  json.dumps(report, sort_keys=True, indent=2) + "\n")
    if not args.json_only:
        _atomic_write(os.path.join(args.out, "report.txt"), _text_report(report, elapsed))
        if trajectories:
            for run in trajectories:
                name = f"trajectory_{run['seed']}.csv"
                _atomic_write(os.path.join(args.out, name), _trajectory_csv(run["trajectory"]))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
