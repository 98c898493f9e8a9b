"""Weak order-2.0 Platen integration of the chain Langevin dynamics.

The 4N phase-space variables are flattened in the order
(qx_1..N, qy_1..N, px_1..N, py_1..N).  One step of the scheme reads

    Gamma = Y + A(Y) dt + B dW
    Y'    = Y + (1/2)[A(Gamma) + A(Y)] dt + B dW

with the same noise increment B dW = sqrt(2 D) sqrt(dt) G in predictor and
corrector, G a fresh standard normal per momentum slot per step; position
slots receive no noise.  B is state independent, which is what makes the
scheme this simple.

Randomness comes from numpy's Philox 4x64 counter-based bit generator keyed
by the trajectory seed, with normals drawn by Generator.standard_normal
(ziggurat); for a fixed numpy version the stream is identical across
platforms, so a (state, seed) pair reproduces a trajectory bit-for-bit.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import BlowUpError, InvalidParameterError
from .potential import ChainState

DT_DEFAULT_MAX = 1e-4
BLOWUP_LIMIT = 1e9
_BLOCK_TARGET = 4096  # steps per numba call, rounded to the sample stride


@dataclass(frozen=True)
class SimulationSchedule:
    """Step size, duration, sampling stride and noise seed (dimensionless)."""

    dt: float
    t_end: float
    sample_stride: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise InvalidParameterError("dt and t_end must be positive")
        if self.sample_stride < 1:
            raise InvalidParameterError("sample stride must be >= 1")
        if self.dt > DT_DEFAULT_MAX:
            warnings.warn(
                f"dt={self.dt:g} exceeds the recommended bound {DT_DEFAULT_MAX:g}; "
                "weak-order bias grows as dt^2",
                stacklevel=2,
            )

    @property
    def n_steps(self):
        return int(np.floor(self.t_end / self.dt + 1e-9))


def pack_state(state):
    """ChainState -> flat (4N,) vector in (qx, qy, px, py) block order."""
    n = state.n_ions
    y = np.empty(4 * n)
    y[0:n] = state.positions[:, 0]
    y[n:2 * n] = state.positions[:, 1]
    y[2 * n:3 * n] = state.momenta[:, 0]
    y[3 * n:4 * n] = state.momenta[:, 1]
    return y


def unpack_state(y, time=0.0):
    """Flat (4N,) vector -> ChainState."""
    n = y.shape[0] // 4
    pos = np.column_stack((y[0:n], y[n:2 * n]))
    mom = np.column_stack((y[2 * n:3 * n], y[3 * n:4 * n]))
    return ChainState(pos, mom, time)


def _flatten_baths(baths):
    """(eta, sqrt(2 D)) in the (x-block, y-block) momentum-slot order."""
    eta = np.concatenate((baths.eta[:, 0], baths.eta[:, 1]))
    broot = np.sqrt(2.0 * np.concatenate((baths.diff[:, 0], baths.diff[:, 1])))
    return eta, broot


# numpy error model: a collision gives inf instead of ZeroDivisionError, so
# it surfaces through the blow-up check rather than crashing the kernel
@njit(cache=True, error_model="numpy")
def _drift_flat(y, alpha, eta, out):
    n = y.shape[0] // 4
    a2 = alpha * alpha
    for i in range(n):
        out[i] = y[2 * n + i]
        out[n + i] = y[3 * n + i]
        out[2 * n + i] = -y[i] - eta[i] * y[2 * n + i]
        out[3 * n + i] = -a2 * y[n + i] - eta[n + i] * y[3 * n + i]
    for i in range(n):
        xi = y[i]
        yi = y[n + i]
        for j in range(i + 1, n):
            dx = xi - y[j]
            dy = yi - y[n + j]
            r2 = dx * dx + dy * dy
            inv_r3 = 1.0 / (r2 * np.sqrt(r2))
            fx = dx * inv_r3
            fy = dy * inv_r3
            out[2 * n + i] += fx
            out[3 * n + i] += fy
            out[2 * n + j] -= fx
            out[3 * n + j] -= fy


@njit(cache=True, error_model="numpy")
def _integrate_block(y, dt, gaussians, alpha, eta, broot, stride, out_states):
    """Advance y in place over gaussians.shape[0] steps, recording a sample
    every `stride` steps.  Returns the 1-based step index at which a sample
    went non-finite/huge, or 0 on success."""
    n4 = y.shape[0]
    n2 = n4 // 2
    nsteps = gaussians.shape[0]
    sqdt = np.sqrt(dt)
    a0 = np.empty(n4)
    a1 = np.empty(n4)
    gamma = np.empty(n4)
    row = 0
    for k in range(nsteps):
        _drift_flat(y, alpha, eta, a0)
        for i in range(n4):
            gamma[i] = y[i] + a0[i] * dt
        for i in range(n2):
            gamma[n2 + i] += broot[i] * sqdt * gaussians[k, i]
        _drift_flat(gamma, alpha, eta, a1)
        for i in range(n4):
            y[i] += 0.5 * (a0[i] + a1[i]) * dt
        for i in range(n2):
            y[n2 + i] += broot[i] * sqdt * gaussians[k, i]
        if (k + 1) % stride == 0:
            ok = True
            for i in range(n4):
                v = y[i]
                if not np.isfinite(v) or abs(v) > BLOWUP_LIMIT:
                    ok = False
            if not ok:
                return k + 1
            for i in range(n4):
                out_states[row, i] = y[i]
            row += 1
    return 0


def drift(y, alpha, baths):
    """Deterministic part A(Y) of the equations of motion."""
    eta, _ = _flatten_baths(baths)
    out = np.empty_like(y)
    _drift_flat(np.asarray(y, dtype=np.float64), alpha, eta, out)
    return out


def platen_step(y, dt, gaussians, alpha, baths):
    """One weak order-2.0 step.  `gaussians` must hold exactly 2N draws."""
    y = np.array(y, dtype=np.float64)
    n2 = y.shape[0] // 2
    gaussians = np.asarray(gaussians, dtype=np.float64)
    if gaussians.shape != (n2,):
        raise InvalidParameterError(f"need exactly {n2} gaussian draws")
    eta, broot = _flatten_baths(baths)
    out = np.empty((1, y.shape[0]))
    bad = _integrate_block(y, dt, gaussians[None, :], alpha, eta, broot, 1, out)
    if bad:
        raise BlowUpError("platen step produced a non-finite state", step=bad)
    return out[0]


@dataclass
class TrajectoryRecord:
    """Sampled time series of one stochastic trajectory.

    states[j] is the flat state at times[j]; row 0 is the initial state.
    final_y/final_time carry the end of integration, which trails the last
    sample when the step count is not a multiple of the stride.
    """

    schedule: SimulationSchedule
    n_ions: int
    times: np.ndarray
    states: np.ndarray
    final_y: np.ndarray
    final_time: float

    def positions(self):
        """(S, N, 2) position samples."""
        n = self.n_ions
        return np.stack((self.states[:, 0:n], self.states[:, n:2 * n]), axis=-1)

    def momenta(self):
        """(S, N, 2) momentum samples."""
        n = self.n_ions
        return np.stack((self.states[:, 2 * n:3 * n], self.states[:, 3 * n:4 * n]), axis=-1)

    def chain_state(self, j):
        return unpack_state(self.states[j], self.times[j])


def simulate_trajectory(initial, alpha, baths, schedule):
    """Integrate one seeded trajectory and return its sampled record.

    Deterministic: identical (initial, alpha, baths, schedule) give a
    bit-identical record.  Raises BlowUpError (with the last good time) if
    the state leaves the sane region.
    """
    if baths.n_ions != initial.n_ions:
        raise InvalidParameterError("bath map and state disagree on N")
    y = pack_state(initial)
    eta, broot = _flatten_baths(baths)
    n2 = 2 * initial.n_ions
    dt, stride = schedule.dt, schedule.sample_stride
    steps = schedule.n_steps
    n_samples = steps // stride

    rng = np.random.Generator(np.random.Philox(key=schedule.seed))
    states = np.empty((n_samples + 1, 4 * initial.n_ions))
    states[0] = y
    times = initial.time + dt * stride * np.arange(n_samples + 1)

    block = stride * max(1, _BLOCK_TARGET // stride)
    done = 0
    row = 1
    full = n_samples * stride
    while done < full:
        k = min(block, full - done)
        g = rng.standard_normal((k, n2))
        out = states[row:row + k // stride]
        bad = _integrate_block(y, dt, g, alpha, eta, broot, stride, out)
        if bad:
            step = done + bad
            last_good_row = row - 1 + max(bad // stride - 1, 0)
            raise BlowUpError(
                f"trajectory blew up near step {step} (t={initial.time + step * dt:g})",
                step=step,
                last_good_time=times[last_good_row],
            )
        done += k
        row += k // stride
    leftover = steps - full
    if leftover:
        g = rng.standard_normal((leftover, n2))
        scratch = np.empty((0, 4 * initial.n_ions))
        _integrate_block(y, dt, g, alpha, eta, broot, leftover + 1, scratch)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP_LIMIT:
            raise BlowUpError(
                "trajectory blew up in the trailing partial stride",
                step=steps,
                last_good_time=times[-1],
            )
    return TrajectoryRecord(
        schedule=schedule,
        n_ions=initial.n_ions,
        times=times,
        states=states,
        final_y=y.copy(),
        final_time=initial.time + steps * dt,
    )
