"""Temperatures, energy currents and heat fluxes from sampled trajectories.

Each trajectory is reduced to a small window-averaged summary (second
moments, pair-current means, flux means); ensembles are then reduced over
those summaries, so stderr always comes from trajectory-to-trajectory
scatter.  Summaries merge associatively, and the ensemble reduction is a
plain ordered sum, which keeps results bit-identical for any degree of
parallelism.

Two total-flux estimators are carried side by side: the direct one (time
average of the instantaneous flux, convective + conductive parts) and the
Novikov one built from bath-weighted second moments; their agreement is
part of the steady-state criterion.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .potential import pair_current_matrix

WINDOW_TAIL_FRACTION = 3.0 / 13.0  # final stretch used for steady averages


def tail_window(t_end, fraction=WINDOW_TAIL_FRACTION):
    """(start, end) covering the final `fraction` of a run of length t_end."""
    return ((1.0 - fraction) * t_end, t_end)


def _mean_stderr(values, axis=0):
    """Mean and standard error across trajectories (0 stderr for one)."""
    values = np.asarray(values, dtype=float)
    m = values.shape[axis]
    mean = values.mean(axis=axis)
    if m < 2:
        return mean, np.zeros_like(mean)
    return mean, values.std(axis=axis, ddof=1) / np.sqrt(m)


def window_average(times, values, window):
    """Mean and standard error of a series restricted to a time window."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    lo, hi = window
    mask = (times >= lo) & (times <= hi)
    if not np.any(mask):
        raise InvalidParameterError("empty averaging window")
    sel = values[mask]
    mean = sel.mean(axis=0)
    if sel.shape[0] < 2:
        return mean, np.zeros_like(mean)
    return mean, sel.std(axis=0, ddof=1) / np.sqrt(sel.shape[0])


def local_energies(positions, momenta, alpha):
    """Per-ion energy density h_n for (S, N, 2) sample stacks: kinetic +
    on-site trap + half of every shared Coulomb pair term."""
    pos = np.asarray(positions, dtype=float)
    mom = np.asarray(momenta, dtype=float)
    squeeze = pos.ndim == 2
    if squeeze:
        pos, mom = pos[None], mom[None]
    h = 0.5 * np.sum(mom**2, axis=-1)
    h += 0.5 * (pos[..., 0] ** 2 + alpha**2 * pos[..., 1] ** 2)
    d = pos[:, :, None, :] - pos[:, None, :, :]
    r = np.sqrt(np.sum(d * d, axis=-1))
    np.einsum("sii->si", r)[:] = np.inf
    h += 0.5 * np.sum(1.0 / r, axis=-1)
    return h[0] if squeeze else h


def total_heat_flux(positions, momenta, alpha):
    """Instantaneous total heat flux (2 components) on fixed ion labels.

    J = sum_n h_n p_n + sum_{pairs} (q_a - q_l) j_{a,l}; the conductive sum
    runs over all label pairs a > l.
    """
    pos = np.asarray(positions, dtype=float)
    mom = np.asarray(momenta, dtype=float)
    squeeze = pos.ndim == 2
    if squeeze:
        pos, mom = pos[None], mom[None]
    h = local_energies(pos, mom, alpha)
    convective = np.sum(h[..., None] * mom, axis=1)
    j = pair_current_matrix(pos, mom)
    d = pos[:, :, None, :] - pos[:, None, :, :]
    # (q_a - q_l) j_{a,l} is symmetric under a <-> l, so sum all and halve
    conductive = 0.5 * np.sum(d * j[..., None], axis=(1, 2))
    out = convective + conductive
    return out[0] if squeeze else out


def total_heat_flux_instant(state, alpha):
    """Instantaneous flux from a single ChainState."""
    return total_heat_flux(state.positions, state.momenta, alpha)


@dataclass(frozen=True)
class TrajectorySummary:
    """Window means of one trajectory, sufficient for all steady-state
    observables.  Arrays are per-ion with axis columns where applicable."""

    n_ions: int
    n_samples: int
    window: tuple
    mean_p2: np.ndarray      # (N, 2)  <p_mu,n^2>
    mean_q: np.ndarray       # (N, 2)  <q_n>
    mean_p2q: np.ndarray     # (N, 2, 2)  <p_mu,n^2 q_n>, axes (ion, mu, component)
    mean_pair: np.ndarray    # (N, N)  <j_{n,l}>
    mean_flux: np.ndarray    # (2,)  direct estimator time average

    def temperatures(self):
        return 0.5 * np.sum(self.mean_p2, axis=1)

    def bath_currents(self, baths):
        return np.sum(-baths.eta * self.mean_p2 + baths.diff, axis=1)

    def balance_residuals(self, baths):
        incoming = np.sum(np.tril(self.mean_pair, k=-1), axis=1)
        outgoing = np.sum(np.tril(self.mean_pair, k=-1), axis=0)
        return incoming + self.bath_currents(baths) - outgoing

    def novikov_flux(self, baths):
        # sum_{n,mu} (eta <p^2 q> - D <q>), a 2-vector
        term = np.einsum("nm,nmc->c", baths.eta, self.mean_p2q)
        term -= np.einsum("nm,nc->c", baths.diff, self.mean_q)
        return term


def summarize_trajectory(record, alpha, window):
    """Reduce a TrajectoryRecord to window means of all needed moments."""
    times = record.times
    lo, hi = window
    mask = (times >= lo) & (times <= hi)
    if not np.any(mask):
        raise InvalidParameterError("empty averaging window")
    pos = record.positions()[mask]
    mom = record.momenta()[mask]
    p2 = mom**2
    mean_p2 = p2.mean(axis=0)
    mean_q = pos.mean(axis=0)
    mean_p2q = np.einsum("snm,snc->nmc", p2, pos) / pos.shape[0]
    mean_pair = pair_current_matrix(pos, mom).mean(axis=0)
    mean_flux = total_heat_flux(pos, mom, alpha).mean(axis=0)
    return TrajectorySummary(
        n_ions=record.n_ions,
        n_samples=int(pos.shape[0]),
        window=(float(lo), float(hi)),
        mean_p2=mean_p2,
        mean_q=mean_q,
        mean_p2q=mean_p2q,
        mean_pair=mean_pair,
        mean_flux=mean_flux,
    )


@dataclass(frozen=True)
class EnsembleStatistics:
    """Trajectory-ensemble averages with standard errors."""

    n_ions: int
    n_trajectories: int
    n_samples: int
    window: tuple
    temperature: np.ndarray          # (N,)
    temperature_err: np.ndarray
    mean_position: np.ndarray        # (N, 2)
    bath_current: np.ndarray         # (N,)
    bath_current_err: np.ndarray
    residual: np.ndarray             # (N,)
    residual_err: np.ndarray
    flux_direct: np.ndarray          # (2,)
    flux_direct_err: np.ndarray
    flux_novikov: np.ndarray         # (2,)
    flux_novikov_err: np.ndarray

    def steady_state_ok(self, abs_floor=1e-6, sigma=3.0):
        """Steady-state criterion: every balance residual consistent with
        zero and the two flux estimators in agreement."""
        res_ok = np.all(
            np.abs(self.residual) < np.maximum(sigma * self.residual_err, abs_floor)
        )
        comb = np.hypot(self.flux_direct_err, self.flux_novikov_err)
        flux_ok = np.all(
            np.abs(self.flux_direct - self.flux_novikov)
            <= np.maximum(sigma * comb, abs_floor)
        )
        return bool(res_ok and flux_ok)


def reduce_summaries(summaries, baths):
    """Combine per-trajectory summaries into ensemble statistics.

    The reduction is a fixed-order mean over the given sequence; callers
    must present summaries in trajectory-index order for bit reproducibility.
    """
    summaries = list(summaries)
    if not summaries:
        raise InvalidParameterError("no trajectory summaries to reduce")
    n = summaries[0].n_ions
    temps = np.array([s.temperatures() for s in summaries])
    baths_j = np.array([s.bath_currents(baths) for s in summaries])
    resid = np.array([s.balance_residuals(baths) for s in summaries])
    flux_d = np.array([s.mean_flux for s in summaries])
    flux_n = np.array([s.novikov_flux(baths) for s in summaries])
    mean_pos = np.array([s.mean_q for s in summaries]).mean(axis=0)

    t_mean, t_err = _mean_stderr(temps)
    b_mean, b_err = _mean_stderr(baths_j)
    r_mean, r_err = _mean_stderr(resid)
    fd_mean, fd_err = _mean_stderr(flux_d)
    fn_mean, fn_err = _mean_stderr(flux_n)
    return EnsembleStatistics(
        n_ions=n,
        n_trajectories=len(summaries),
        n_samples=sum(s.n_samples for s in summaries),
        window=summaries[0].window,
        temperature=t_mean,
        temperature_err=t_err,
        mean_position=mean_pos,
        bath_current=b_mean,
        bath_current_err=b_err,
        residual=r_mean,
        residual_err=r_err,
        flux_direct=fd_mean,
        flux_direct_err=fd_err,
        flux_novikov=fn_mean,
        flux_novikov_err=fn_err,
    )


def local_temperatures(summaries):
    """Per-ion kinetic temperature with stderr over an ensemble."""
    return _mean_stderr(np.array([s.temperatures() for s in summaries]))


def bath_current_mean(summaries, baths):
    """Per-ion Novikov bath current with stderr over an ensemble."""
    return _mean_stderr(np.array([s.bath_currents(baths) for s in summaries]))


def balance_residuals(summaries, baths):
    """Per-ion steady-state balance residuals with stderr."""
    return _mean_stderr(np.array([s.balance_residuals(baths) for s in summaries]))


def novikov_total_flux(summaries, baths):
    """Ensemble Novikov total-flux estimate (2 components) with stderr."""
    return _mean_stderr(np.array([s.novikov_flux(baths) for s in summaries]))
