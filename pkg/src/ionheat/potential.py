"""Trap + Coulomb potential of the planar ion chain, in dimensionless form.

V~ = (1/2) sum_n (qx_n^2 + alpha^2 qy_n^2) + sum_{n<l} 1/|q_n - q_l|

with alpha the transverse/axial trap-frequency aspect ratio.  Forces use
direct O(N^2) pair summation; chains of interest have N <= a few hundred.
"""

import numpy as np
from numba import njit

from .errors import SingularityError, InvalidParameterError

# Below this pairwise separation the run is treated as a collision (an
# integration failure), not as physics to be regularized.
MIN_PAIR_DISTANCE = 1e-9


class ChainState:
    """Dimensionless positions and momenta of N ions in the trap plane.

    positions, momenta : (N, 2) arrays, columns are the axial (x) and
    transverse (y) components.
    """

    __slots__ = ("positions", "momenta", "time")

    def __init__(self, positions, momenta, time=0.0):
        positions = np.asarray(positions, dtype=np.float64)
        momenta = np.asarray(momenta, dtype=np.float64)
        if positions.shape != momenta.shape or positions.ndim != 2 or positions.shape[1] != 2:
            raise InvalidParameterError("positions and momenta must both be (N, 2)")
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(momenta))):
            raise InvalidParameterError("state entries must be finite")
        self.positions = positions
        self.momenta = momenta
        self.time = float(time)

    @property
    def n_ions(self):
        return self.positions.shape[0]

    @classmethod
    def at_rest(cls, positions, time=0.0):
        positions = np.asarray(positions, dtype=np.float64)
        return cls(positions, np.zeros_like(positions), time)

    def copy(self):
        return ChainState(self.positions.copy(), self.momenta.copy(), self.time)


@njit(cache=True)
def _potential_energy(pos, alpha):
    n = pos.shape[0]
    v = 0.0
    for i in range(n):
        v += 0.5 * (pos[i, 0] * pos[i, 0] + alpha * alpha * pos[i, 1] * pos[i, 1])
    min_r = 1e300
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            r = np.sqrt(dx * dx + dy * dy)
            if r < min_r:
                min_r = r
            if r >= MIN_PAIR_DISTANCE:
                v += 1.0 / r
    return v, min_r


@njit(cache=True)
def _forces(pos, alpha, out):
    n = pos.shape[0]
    min_r = 1e300
    for i in range(n):
        out[i, 0] = -pos[i, 0]
        out[i, 1] = -alpha * alpha * pos[i, 1]
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            r2 = dx * dx + dy * dy
            r = np.sqrt(r2)
            if r < min_r:
                min_r = r
            if r < MIN_PAIR_DISTANCE:
                continue
            inv_r3 = 1.0 / (r2 * r)
            fx = dx * inv_r3
            fy = dy * inv_r3
            out[i, 0] += fx
            out[i, 1] += fy
            out[j, 0] -= fx
            out[j, 1] -= fy
    return min_r


def _check_separation(min_r, n_ions):
    if n_ions > 1 and min_r < MIN_PAIR_DISTANCE:
        raise SingularityError(
            f"pairwise ion distance {min_r:.3e} below guard {MIN_PAIR_DISTANCE:.0e}"
        )


def potential_energy(state, alpha):
    """Dimensionless potential energy of the chain."""
    v, min_r = _potential_energy(state.positions, alpha)
    _check_separation(min_r, state.n_ions)
    return v


def kinetic_energy(state):
    """Dimensionless kinetic energy (1/2) sum p^2."""
    return 0.5 * float(np.sum(state.momenta**2))


def total_energy(state, alpha):
    return kinetic_energy(state) + potential_energy(state, alpha)


def forces(state, alpha):
    """Force array (N, 2): minus the gradient of the potential."""
    out = np.empty_like(state.positions)
    min_r = _forces(state.positions, alpha, out)
    _check_separation(min_r, state.n_ions)
    return out


def local_energy(state, alpha, n):
    """Energy density of ion n: kinetic + trap + half of each shared pair term.

    Summing over all ions recovers the total Hamiltonian exactly.
    """
    n_ions = state.n_ions
    if not 0 <= n < n_ions:
        raise IndexError(f"ion index {n} out of range for N={n_ions}")
    pos, mom = state.positions, state.momenta
    h = 0.5 * (mom[n, 0] ** 2 + mom[n, 1] ** 2)
    h += 0.5 * (pos[n, 0] ** 2 + alpha**2 * pos[n, 1] ** 2)
    if n_ions > 1:
        d = pos - pos[n]
        r = np.sqrt(np.sum(d * d, axis=1))
        r[n] = np.inf
        _check_separation(float(np.min(r)), n_ions)
        h += 0.5 * float(np.sum(1.0 / r))
    return h


def pair_current(state, n, l):
    """Instantaneous energy current from ion l into ion n.

    j_{n,l} = -(1/2) sum_mu dU(r_nl)/dq_{mu,n} * (p_{mu,n} + p_{mu,l})
    with U(r) = 1/r.  Antisymmetric under n <-> l.
    """
    if n == l:
        raise InvalidParameterError("pair current needs two distinct ions")
    n_ions = state.n_ions
    if not (0 <= n < n_ions and 0 <= l < n_ions):
        raise IndexError("ion index out of range")
    pos, mom = state.positions, state.momenta
    d = pos[n] - pos[l]
    r = float(np.hypot(d[0], d[1]))
    _check_separation(r, n_ions)
    # dU/dq_{mu,n} = -(q_{mu,n} - q_{mu,l}) / r^3
    grad = -d / r**3
    return -0.5 * float(np.dot(grad, mom[n] + mom[l]))


def pair_current_matrix(positions, momenta):
    """All pair currents j[n, l] at once (vectorized, diagonal zero).

    Accepts (N, 2) arrays or (S, N, 2) sample stacks; returns (N, N) or
    (S, N, N).
    """
    pos = np.asarray(positions, dtype=np.float64)
    mom = np.asarray(momenta, dtype=np.float64)
    squeeze = pos.ndim == 2
    if squeeze:
        pos, mom = pos[None], mom[None]
    d = pos[:, :, None, :] - pos[:, None, :, :]           # (S, N, N, 2)
    r2 = np.sum(d * d, axis=-1)
    np.einsum("sii->si", r2)[:] = np.inf
    psum = mom[:, :, None, :] + mom[:, None, :, :]
    j = 0.5 * np.sum(d * psum, axis=-1) / r2**1.5
    return j[0] if squeeze else j
