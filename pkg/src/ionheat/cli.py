"""Command-line interface.

Verbs:
  run         one ensemble from a config file (or the desk-scale default)
  profile     temperature-profile preset over several aspect ratios
  flux-sweep  axial heat flux vs aspect ratio
  spectrum    single-trajectory coordinate spectra of the central ion
  statics     equilibrium configurations and the critical aspect ratio
  validate    quick invariant battery

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 steady-state
criterion unmet (outputs are still written).
"""

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import statics
from .errors import (BlowUpError, CheckpointError, ConvergenceError,
                     InvalidParameterError, SingularityError)
from .harness import (desk_scale_config, load_config, paper_scale_config,
                      preset_flux_sweep, preset_temperature_profile,
                      run_ensemble, write_profile_csv, _with_alpha, _write_csv,
                      derive_seed)
from .integrator import simulate_trajectory
from .spectra import dominant_peak, motion_spectrum, save_spectrum, spectral_entropy
from .statics import initial_conditions
from .thermostat import build_bath_map

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_NOT_STEADY = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ionheat",
        description="Heat transport in laser-cooled trapped-ion chains",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML config file")
    common.add_argument("--seed", type=int, default=None, metavar="U64",
                        help="master seed (overrides config)")
    common.add_argument("--workers", type=int, default=1, metavar="N")
    common.add_argument("--out", default=".", metavar="DIR")
    common.add_argument("--paper-scale", action="store_true",
                        help="full-scale protocol (machine-months of CPU)")
    common.add_argument("--resume", metavar="PATH",
                        help="checkpoint file to resume from / write to")

    sub.add_parser("run", parents=[common], help="run one ensemble")
    p = sub.add_parser("profile", parents=[common],
                       help="temperature-profile preset")
    p.add_argument("--alphas", type=float, nargs="*",
                   default=[13.0, 11.0, 9.0, 7.0])
    p = sub.add_parser("flux-sweep", parents=[common],
                       help="heat flux vs aspect ratio")
    p.add_argument("--alphas", type=float, nargs="*",
                   default=[7.0, 9.0, 11.0, 13.0])
    p = sub.add_parser("spectrum", parents=[common],
                       help="central-ion coordinate spectra")
    p.add_argument("--alphas", type=float, nargs="*", default=[13.0, 7.0])
    p = sub.add_parser("statics", parents=[common],
                       help="equilibria and critical aspect ratio")
    p.add_argument("--alphas", type=float, nargs="*",
                   default=[13.0, 12.0, 11.0, 7.0])
    sub.add_parser("validate", parents=[common], help="invariant battery")
    return parser


def _base_config(args):
    if args.config:
        config = load_config(args.config, output_dir=args.out,
                             master_seed=args.seed)
    elif args.paper_scale:
        config = paper_scale_config(master_seed=args.seed or 0,
                                    output_dir=args.out)
    else:
        config = desk_scale_config(master_seed=args.seed or 0,
                                   output_dir=args.out)
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    return config


def _cmd_run(args):
    config = _base_config(args)
    result = run_ensemble(config, workers=args.workers,
                          checkpoint_path=args.resume,
                          resume_from=args.resume if args.resume and
                          os.path.exists(args.resume) else None)
    write_profile_csv(os.path.join(args.out, "ensemble_profile.csv"), result)
    s = result.statistics
    print(f"trajectories: {s.n_trajectories} ok, {len(result.failed_indices)} lost")
    print(f"Jx direct  = {s.flux_direct[0]:.6g} +- {s.flux_direct_err[0]:.2g}")
    print(f"Jx novikov = {s.flux_novikov[0]:.6g} +- {s.flux_novikov_err[0]:.2g}")
    if not s.steady_state_ok():
        print("steady-state criterion NOT met; outputs written anyway")
        return EXIT_NOT_STEADY
    return EXIT_OK


def _cmd_profile(args):
    config = _base_config(args)
    results = preset_temperature_profile(args.alphas, base_config=config,
                                         workers=args.workers, out_dir=args.out)
    code = EXIT_OK
    for alpha, result in results.items():
        ok = result.statistics.steady_state_ok()
        print(f"alpha={alpha:g}: steady={ok} "
              f"T(center)={result.statistics.temperature[config.params.n_ions // 2]:.4g}")
        if not ok:
            code = EXIT_NOT_STEADY
    return code


def _cmd_flux_sweep(args):
    config = _base_config(args)
    results = preset_flux_sweep(args.alphas, base_config=config,
                                workers=args.workers, out_dir=args.out)
    code = EXIT_OK
    for alpha, result in results.items():
        s = result.statistics
        print(f"alpha={alpha:g}: Jx={s.flux_direct[0]:.6g} "
              f"(novikov {s.flux_novikov[0]:.6g})")
        if not s.steady_state_ok():
            code = EXIT_NOT_STEADY
    return code


def _cmd_spectrum(args):
    config = _base_config(args)
    rows = []
    for alpha in args.alphas:
        cfg = replace(_with_alpha(config, alpha), preset="spectrum")
        p = cfg.params
        baths = build_bath_map(cfg.beams, p)
        initial = initial_conditions(p.n_ions, cfg.jitter,
                                     seed=derive_seed(cfg.master_seed, 1))
        schedule = replace(cfg.schedule, seed=derive_seed(cfg.master_seed, 0))
        record = simulate_trajectory(initial, alpha, baths, schedule)
        ion = p.n_ions // 2
        for axis in ("x", "y"):
            spec = motion_spectrum(record, ion, axis, window=cfg.window)
            path = os.path.join(args.out, f"spectrum_alpha{alpha:g}_{axis}.txt")
            save_spectrum(spec, path)
            freq, power = dominant_peak(spec)
            rows.append([f"{alpha:g}", axis, f"{freq:.6g}", f"{power:.6g}",
                         f"{spectral_entropy(spec):.6g}"])
            print(f"alpha={alpha:g} {axis}: peak {freq:.4g} cycles/t~ "
                  f"entropy {spectral_entropy(spec):.3g}")
    _write_csv(os.path.join(args.out, "spectrum_summary.csv"), config,
               ["alpha", "axis", "peak_freq", "peak_power", "entropy"], rows)
    return EXIT_OK


def _cmd_statics(args):
    config = _base_config(args)
    n = config.params.n_ions
    rows = []
    ac0 = statics.critical_alpha(0.0, n)
    print(f"N={n}: analytic alpha_c(0) = {ac0:.4g}")
    for alpha in args.alphas:
        eq = statics.relax_equilibrium(n, alpha)
        rows.append([f"{alpha:g}", eq.phase, f"{eq.transverse_amplitude:.6g}",
                     f"{eq.half_length:.6g}", f"{eq.residual_force_norm:.3g}"])
        print(f"alpha={alpha:g}: {eq.phase} "
              f"(max|y|={eq.transverse_amplitude:.3g}, L={eq.half_length:.4g})")
    _write_csv(os.path.join(args.out, "statics.csv"), config,
               ["alpha", "phase", "max_abs_y", "half_length", "residual"],
               rows, extra_header=[f"alpha_c0={ac0!r}"])
    return EXIT_OK


def _cmd_validate(args):
    """Fast invariant battery (a smoke test, not the full pytest suite)."""
    from . import potential
    from .potential import ChainState

    rng = np.random.Generator(np.random.Philox(key=42))
    checks = []

    pos = rng.normal(scale=2.0, size=(5, 2))
    mom = rng.normal(size=(5, 2))
    state = ChainState(pos, mom)
    f = potential.forces(state, 3.0)
    h = 1e-6
    num = np.empty_like(f)
    for i in range(5):
        for c in range(2):
            plus, minus = pos.copy(), pos.copy()
            plus[i, c] += h
            minus[i, c] -= h
            num[i, c] = -(potential.potential_energy(ChainState(plus, mom), 3.0)
                          - potential.potential_energy(ChainState(minus, mom), 3.0)) / (2 * h)
    checks.append(("force vs finite differences",
                   np.max(np.abs(f - num)) / np.max(np.abs(f)) < 1e-6))

    total = sum(potential.local_energy(state, 3.0, i) for i in range(5))
    checks.append(("local energies sum to H",
                   abs(total - potential.total_energy(state, 3.0)) < 1e-10))
    j = potential.pair_current_matrix(pos, mom)
    checks.append(("pair-current antisymmetry", np.allclose(j, -j.T, atol=1e-14)))
    eq = statics.relax_equilibrium(2, 5.0)
    checks.append(("two-ion separation 2^(1/3)",
                   abs(eq.positions[1, 0] - eq.positions[0, 0] - 2 ** (1 / 3)) < 1e-6))

    failed = [name for name, ok in checks if not ok]
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if not failed else EXIT_NUMERICAL


def main(argv=None):
    args = _build_parser().parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    handlers = {
        "run": _cmd_run,
        "profile": _cmd_profile,
        "flux-sweep": _cmd_flux_sweep,
        "spectrum": _cmd_spectrum,
        "statics": _cmd_statics,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.verb](args)
    except (InvalidParameterError, CheckpointError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, SingularityError, ConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
