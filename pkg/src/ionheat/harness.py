"""Experiment configuration, seeded ensembles, checkpoints and presets.

A run is fully determined by (config, master seed): trajectory i draws its
noise from a seed derived from the master by a SplitMix64 finalizer (a
64-bit bijection, so indices never collide), and its initial jitter from a
companion stream.  Summaries are reduced in trajectory-index order, so the
statistics do not depend on how many workers produced them.
"""

import csv
import hashlib
import json
import math
import os
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BlowUpError, CheckpointError, InvalidParameterError
from .integrator import SimulationSchedule, simulate_trajectory
from .observables import (EnsembleStatistics, TrajectorySummary,
                          reduce_summaries, summarize_trajectory, tail_window)
from .statics import initial_conditions
from .thermostat import LaserBeam, build_bath_map, edge_beams
from .units import PhysicalParameters, magnesium_24

CHECKPOINT_VERSION = 1

_MASK64 = (1 << 64) - 1


def derive_seed(master, index):
    """Deterministic 64-bit per-trajectory seed (SplitMix64 finalizer).

    Injective in `index` for a fixed master, so seeds never collide.
    """
    if index < 0:
        raise InvalidParameterError("trajectory index must be >= 0")
    z = (master + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one ensemble run."""

    params: PhysicalParameters
    beams: tuple
    schedule: SimulationSchedule
    ensemble_size: int
    jitter: float = 1e-3
    window: tuple = None
    output_dir: str = "."
    preset: str = "custom"
    master_seed: int = 0

    def __post_init__(self):
        if self.ensemble_size < 1:
            raise InvalidParameterError("ensemble size must be >= 1")
        if self.jitter < 0:
            raise InvalidParameterError("jitter must be >= 0")
        if self.window is None:
            object.__setattr__(self, "window", tail_window(self.schedule.t_end))
        lo, hi = self.window
        if not (0.0 <= lo < hi <= self.schedule.t_end + 1e-12):
            raise InvalidParameterError("window must lie inside [0, t_end]")

    def canonical_dict(self):
        """Physics + numerics as plain types; excludes output routing."""
        p = self.params
        return {
            "ion_mass": p.ion_mass,
            "ion_charge": p.ion_charge,
            "axial_freq": p.axial_freq,
            "aspect_ratio": p.aspect_ratio,
            "transition_freq": p.transition_freq,
            "linewidth": p.linewidth,
            "n_ions": p.n_ions,
            # sorted: the bath map does not depend on beam order
            "beams": sorted([b.target_ion, b.axis, b.intensity, b.detuning]
                            for b in self.beams),
            "dt": self.schedule.dt,
            "t_end": self.schedule.t_end,
            "sample_stride": self.schedule.sample_stride,
            "ensemble_size": self.ensemble_size,
            "jitter": self.jitter,
            "window": list(self.window),
            "master_seed": self.master_seed,
        }

    def config_hash(self):
        blob = json.dumps(self.canonical_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def desk_scale_config(n_ions=10, alpha=13.0, ensemble_size=100, t_end=1000.0,
                      dt=1e-4, sample_stride=50, master_seed=0,
                      detuning_left=-0.02, detuning_right=-0.1,
                      intensity=0.08, jitter=1e-3, window=None,
                      output_dir=".", preset="desk"):
    """Scaled-down default: short run, modest ensemble, last-30% window."""
    params = magnesium_24(aspect_ratio=alpha, n_ions=n_ions)
    beams = tuple(edge_beams(n_ions, intensity=intensity,
                             detuning_left=detuning_left,
                             detuning_right=detuning_right))
    schedule = SimulationSchedule(dt=dt, t_end=t_end, sample_stride=sample_stride)
    if window is None:
        window = (0.7 * t_end, t_end)
    return ExperimentConfig(params=params, beams=beams, schedule=schedule,
                            ensemble_size=ensemble_size, jitter=jitter,
                            window=window, output_dir=output_dir,
                            preset=preset, master_seed=master_seed)


def paper_scale_config(alpha=13.0, master_seed=0, output_dir=".", **kwargs):
    """The full-scale protocol: N=30, >=500 trajectories, 13 ms runs.

    This takes machine-months of CPU; it exists for completeness and is
    gated behind an explicit flag in the CLI.
    """
    warnings.warn("paper-scale protocol: expect machine-months of CPU time")
    params = magnesium_24(aspect_ratio=alpha, n_ions=30)
    t_end = params.axial_freq * 13e-3
    window = (params.axial_freq * 10e-3, t_end)
    schedule = SimulationSchedule(dt=1e-4, t_end=t_end, sample_stride=100)
    return ExperimentConfig(
        params=params, beams=tuple(edge_beams(30)), schedule=schedule,
        ensemble_size=kwargs.get("ensemble_size", 500), jitter=1e-3,
        window=window, output_dir=output_dir, preset="paper-scale",
        master_seed=master_seed)


def load_config(path, output_dir=None, master_seed=None):
    """Read an ExperimentConfig from a TOML file.

    Frequencies are plain Hz, detunings in units of the linewidth,
    intensities as I/I0, beam ion indices 1-based.  Schedule entries may be
    given in seconds (dt_s, t_end_s, window_s), which take precedence over
    their dimensionless twins.
    """
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib

    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise InvalidParameterError(f"cannot read config {path}: {exc}") from exc
    try:
        chain = raw["chain"]
        trap = raw["trap"]
        trans = raw.get("transition", {})
        sched = raw["schedule"]
        ens = raw.get("ensemble", {})
        two_pi = 2.0 * math.pi
        from . import constants as const

        params = PhysicalParameters(
            ion_mass=chain["mass_number"] * const.ATOMIC_MASS,
            ion_charge=chain.get("charge", 1) * const.ELEMENTARY_CHARGE,
            axial_freq=two_pi * trap["axial_freq_hz"],
            aspect_ratio=trap["aspect_ratio"],
            transition_freq=two_pi * trans.get("freq_hz", 1069e12),
            linewidth=two_pi * trans.get("linewidth_hz", 41.296e6),
            n_ions=chain["n_ions"],
        )
        nu = params.axial_freq
        beams = []
        for b in raw.get("beams", []):
            for ion in b["ions"]:
                for axis in b.get("axes", ["x", "y"]):
                    beams.append(LaserBeam(ion - 1, axis, b["intensity"],
                                           b["detuning"]))
        dt = nu * sched["dt_s"] if "dt_s" in sched else sched["dt"]
        t_end = nu * sched["t_end_s"] if "t_end_s" in sched else sched["t_end"]
        schedule = SimulationSchedule(dt=dt, t_end=t_end,
                                      sample_stride=sched.get("sample_stride", 50))
        if "window_s" in ens:
            window = tuple(nu * w for w in ens["window_s"])
        elif "window" in ens:
            window = tuple(ens["window"])
        else:
            frac = ens.get("window_fraction", 0.3)
            window = ((1.0 - frac) * t_end, t_end)
        return ExperimentConfig(
            params=params,
            beams=tuple(beams),
            schedule=schedule,
            ensemble_size=ens.get("size", 100),
            jitter=ens.get("jitter", 1e-3),
            window=window,
            output_dir=output_dir or raw.get("output", {}).get("dir", "."),
            preset=raw.get("preset", "custom"),
            master_seed=master_seed if master_seed is not None
            else ens.get("seed", 0),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParameterError):
            raise
        raise InvalidParameterError(f"bad config {path}: {exc}") from exc


def _run_one(config, index):
    """Simulate and summarize trajectory `index`; None marks a blow-up."""
    p = config.params
    noise_seed = derive_seed(config.master_seed, 2 * index)
    init_seed = derive_seed(config.master_seed, 2 * index + 1)
    initial = initial_conditions(p.n_ions, config.jitter, seed=init_seed)
    baths = build_bath_map(config.beams, p)
    schedule = replace(config.schedule, seed=noise_seed)
    try:
        record = simulate_trajectory(initial, p.aspect_ratio, baths, schedule)
    except BlowUpError:
        return index, None
    return index, summarize_trajectory(record, p.aspect_ratio, config.window)


@dataclass
class EnsembleResult:
    statistics: EnsembleStatistics
    failed_indices: list
    summaries: list
    config: ExperimentConfig


# ---------------------------------------------------------------------------
# checkpointing

_SUMMARY_FIELDS = ("mean_p2", "mean_q", "mean_p2q", "mean_pair", "mean_flux")


def checkpoint_save(path, config, done):
    """Atomically persist completed trajectory summaries.

    `done` maps trajectory index -> TrajectorySummary or None (blow-up).
    """
    ok = sorted(i for i, s in done.items() if s is not None)
    failed = sorted(i for i, s in done.items() if s is None)
    payload = {
        "version": np.array(CHECKPOINT_VERSION),
        "config_hash": np.array(config.config_hash()),
        "master_seed": np.array(config.master_seed, dtype=np.uint64),
        "completed": np.array(ok, dtype=np.int64),
        "failed": np.array(failed, dtype=np.int64),
    }
    if ok:
        ref = done[ok[0]]
        payload["n_samples"] = np.array([done[i].n_samples for i in ok])
        payload["window"] = np.array(ref.window)
        for name in _SUMMARY_FIELDS:
            payload[name] = np.stack([getattr(done[i], name) for i in ok])
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)),
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, **payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def checkpoint_load(path, config):
    """Load a checkpoint, validating version and config hash."""
    try:
        with np.load(path, allow_pickle=False) as data:
            if int(data["version"]) != CHECKPOINT_VERSION:
                raise CheckpointError("checkpoint version mismatch")
            if str(data["config_hash"]) != config.config_hash():
                raise CheckpointError("checkpoint was written by a different config")
            done = {}
            for i in data["failed"]:
                done[int(i)] = None
            completed = data["completed"]
            n = config.params.n_ions
            for k, i in enumerate(completed):
                done[int(i)] = TrajectorySummary(
                    n_ions=n,
                    n_samples=int(data["n_samples"][k]),
                    window=tuple(data["window"]),
                    mean_p2=data["mean_p2"][k],
                    mean_q=data["mean_q"][k],
                    mean_p2q=data["mean_p2q"][k],
                    mean_pair=data["mean_pair"][k],
                    mean_flux=data["mean_flux"][k],
                )
            return done
    except CheckpointError:
        raise
    except Exception as exc:
        raise CheckpointError(f"cannot parse checkpoint {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# ensemble driver

def run_ensemble(config, workers=1, checkpoint_path=None, resume_from=None,
                 checkpoint_every=10, progress=None):
    """Run (or finish) an ensemble and reduce it to EnsembleStatistics.

    Blow-ups are skipped, counted and reported; remaining trajectories
    still contribute.  With a checkpoint path, partial results are saved
    atomically every `checkpoint_every` trajectories.
    """
    m = config.ensemble_size
    done = {}
    if resume_from is not None:
        done = checkpoint_load(resume_from, config)
    pending = [i for i in range(m) if i not in done]

    def _note(i):
        if progress:
            progress(len(done), m)

    if workers <= 1 or len(pending) <= 1:
        since_save = 0
        for i in pending:
            _, summary = _run_one(config, i)
            done[i] = summary
            since_save += 1
            _note(i)
            if checkpoint_path and since_save >= checkpoint_every:
                checkpoint_save(checkpoint_path, config, done)
                since_save = 0
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            since_save = 0
            for i, summary in pool.map(_run_one, [config] * len(pending), pending):
                done[i] = summary
                since_save += 1
                _note(i)
                if checkpoint_path and since_save >= checkpoint_every:
                    checkpoint_save(checkpoint_path, config, done)
                    since_save = 0
    if checkpoint_path:
        checkpoint_save(checkpoint_path, config, done)

    failed = sorted(i for i in range(m) if done.get(i) is None)
    summaries = [done[i] for i in range(m) if done[i] is not None]
    if not summaries:
        raise BlowUpError("every trajectory in the ensemble blew up")
    if failed:
        warnings.warn(f"{len(failed)} of {m} trajectories blew up and were dropped")
    baths = build_bath_map(config.beams, config.params)
    stats = reduce_summaries(summaries, baths)
    return EnsembleResult(statistics=stats, failed_indices=failed,
                          summaries=summaries, config=config)


# ---------------------------------------------------------------------------
# presets and CSV emission

def _csv_header_lines(config, extra=()):
    lines = [
        f"preset={config.preset}",
        f"config_hash={config.config_hash()}",
        f"master_seed={config.master_seed}",
        f"n_ions={config.params.n_ions} alpha={config.params.aspect_ratio}"
        f" ensemble={config.ensemble_size} t_end={config.schedule.t_end:g}",
    ]
    lines.extend(extra)
    return lines


def _write_csv(path, config, columns, rows, extra_header=()):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in _csv_header_lines(config, extra_header):
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


def write_profile_csv(path, result):
    """Per-ion temperature profile table for one aspect ratio."""
    from .units import temperature_to_kelvin

    stats = result.statistics
    config = result.config
    rows = []
    for n in range(stats.n_ions):
        rows.append([
            n + 1,
            f"{stats.mean_position[n, 0]:.8g}",
            f"{stats.mean_position[n, 1]:.8g}",
            f"{stats.temperature[n]:.8g}",
            f"{stats.temperature_err[n]:.3g}",
            f"{temperature_to_kelvin(config.params, stats.temperature[n]):.8g}",
            f"{stats.residual[n]:.4g}",
            f"{stats.residual_err[n]:.3g}",
        ])
    _write_csv(path, config,
               ["ion", "mean_x", "mean_y", "T_dimless", "T_err",
                "T_kelvin", "residual", "residual_err"],
               rows,
               extra_header=[f"steady_state_ok={stats.steady_state_ok()}"])


def preset_temperature_profile(alphas, base_config=None, workers=1, out_dir="."):
    """Temperature-profile tables over a list of aspect ratios.

    Returns {alpha: EnsembleResult}; writes one CSV per alpha.
    """
    results = {}
    for alpha in alphas:
        config = _with_alpha(base_config or desk_scale_config(), alpha)
        config = replace(config, preset="profile", output_dir=out_dir)
        result = run_ensemble(config, workers=workers)
        write_profile_csv(os.path.join(out_dir, f"profile_alpha{alpha:g}.csv"),
                          result)
        results[alpha] = result
    return results


def preset_flux_sweep(alphas, base_config=None, workers=1, out_dir=".",
                      filename="flux_sweep.csv"):
    """Axial heat flux vs aspect ratio, both estimators. Returns results
    keyed by alpha and writes a single CSV."""
    results = {}
    rows = []
    config = None
    for alpha in alphas:
        config = _with_alpha(base_config or desk_scale_config(), alpha)
        config = replace(config, preset="flux-sweep", output_dir=out_dir)
        result = run_ensemble(config, workers=workers)
        s = result.statistics
        rows.append([
            f"{alpha:g}",
            f"{s.flux_direct[0]:.8g}", f"{s.flux_direct_err[0]:.3g}",
            f"{s.flux_novikov[0]:.8g}", f"{s.flux_novikov_err[0]:.3g}",
            str(s.steady_state_ok()),
        ])
        results[alpha] = result
    if config is not None:
        _write_csv(os.path.join(out_dir, filename), config,
                   ["alpha", "Jx_direct", "Jx_direct_err",
                    "Jx_novikov", "Jx_novikov_err", "steady_state_ok"],
                   rows)
    return results


def _with_alpha(config, alpha):
    return replace(config, params=replace(config.params, aspect_ratio=alpha))
