"""Equilibrium chain configurations and the linear-zigzag transition point.

Equilibria are minima of the dimensionless potential.  The analytic
critical aspect ratio for the transition,

    alpha_c(x) = sqrt(7 zeta(3) / 2) * n(x)^{3/2}

(with the linear ion density n(x) measured in ions per characteristic
length), is largest at the chain center, so the buckling starts there as
the transverse confinement is lowered.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .constants import ZETA_3
from .errors import ConvergenceError, InvalidParameterError
from .potential import ChainState, _forces, _potential_energy

PHASE_LINEAR = "linear"
PHASE_ZIGZAG = "zigzag"
DEFAULT_TOLERANCE = 1e-10
DEFAULT_JITTER = 1e-3


@dataclass(frozen=True)
class EquilibriumConfiguration:
    """A relaxed chain: positions sorted by x, with phase classification."""

    positions: np.ndarray
    residual_force_norm: float
    phase: str
    transverse_amplitude: float

    @property
    def half_length(self):
        return float(np.max(np.abs(self.positions[:, 0])))


def _energy_and_grad(flat, alpha, n_ions):
    pos = flat.reshape(n_ions, 2)
    v, _ = _potential_energy(pos, alpha)
    f = np.empty_like(pos)
    _forces(pos, alpha, f)
    return v, -f.reshape(-1)


def _grad_inf_norm(flat, alpha, n_ions):
    return float(np.max(np.abs(_energy_and_grad(flat, alpha, n_ions)[1])))


def _newton_polish(flat, alpha, n_ions, tolerance, max_iter=60):
    """Drive the gradient infinity-norm below tolerance with damped Newton
    steps on a finite-difference Hessian of the analytic gradient."""
    h = 1e-6
    dim = flat.size
    for _ in range(max_iter):
        _, g = _energy_and_grad(flat, alpha, n_ions)
        gnorm = np.max(np.abs(g))
        if gnorm < tolerance:
            return flat
        hess = np.empty((dim, dim))
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = h
            gp = _energy_and_grad(flat + e, alpha, n_ions)[1]
            gm = _energy_and_grad(flat - e, alpha, n_ions)[1]
            hess[:, i] = (gp - gm) / (2 * h)
        hess = 0.5 * (hess + hess.T)
        lam = 0.0
        for _ in range(12):
            try:
                step = np.linalg.solve(hess + lam * np.eye(dim), -g)
            except np.linalg.LinAlgError:
                lam = max(10 * lam, 1e-10)
                continue
            trial = flat + step
            if np.max(np.abs(_energy_and_grad(trial, alpha, n_ions)[1])) < gnorm:
                flat = trial
                break
            lam = max(10 * lam, 1e-10)
        else:
            break
    if np.max(np.abs(_energy_and_grad(flat, alpha, n_ions)[1])) < tolerance:
        return flat
    raise ConvergenceError(
        f"equilibrium polish stalled at |grad|_inf = {_grad_inf_norm(flat, alpha, n_ions):.3e}"
    )


def _default_guess(n_ions):
    """Roughly uniformly spaced chain with a small alternating transverse
    kick so either symmetry-broken branch is reachable."""
    idx = np.arange(n_ions) - 0.5 * (n_ions - 1)
    spacing = 2.0 * n_ions ** (-1.0 / 3.0) if n_ions > 1 else 1.0
    pos = np.zeros((n_ions, 2))
    pos[:, 0] = spacing * idx
    pos[:, 1] = 1e-3 * (-1.0) ** np.arange(n_ions)
    return pos


def classify_phase(positions, threshold=1e-3):
    """Zigzag iff the largest transverse excursion strictly exceeds threshold."""
    positions = np.asarray(positions)
    if not np.all(np.isfinite(positions)):
        raise InvalidParameterError("positions must be finite")
    return PHASE_ZIGZAG if np.max(np.abs(positions[:, 1])) > threshold else PHASE_LINEAR


def relax_equilibrium(n_ions, alpha, initial_guess=None, tolerance=DEFAULT_TOLERANCE):
    """Find a local minimum of the chain potential.

    Quasi-Newton descent followed by a Newton polish; the returned
    configuration has |grad V|_inf < tolerance and positions sorted by x.
    """
    if n_ions < 1:
        raise InvalidParameterError("need at least one ion")
    if n_ions == 1:
        return EquilibriumConfiguration(
            np.zeros((1, 2)), 0.0, PHASE_LINEAR, 0.0)
    guess = _default_guess(n_ions) if initial_guess is None else np.asarray(initial_guess, float)
    res = minimize(
        _energy_and_grad,
        guess.reshape(-1),
        args=(alpha, n_ions),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": 20000, "ftol": 1e-18, "gtol": 1e-12},
    )
    flat = _newton_polish(res.x, alpha, n_ions, tolerance)
    pos = flat.reshape(n_ions, 2)
    pos = pos[np.argsort(pos[:, 0])]
    residual = _grad_inf_norm(pos.reshape(-1), alpha, n_ions)
    return EquilibriumConfiguration(
        positions=pos,
        residual_force_norm=residual,
        phase=classify_phase(pos),
        transverse_amplitude=float(np.max(np.abs(pos[:, 1]))),
    )


@lru_cache(maxsize=64)
def _relaxed_linear_cached(n_ions, tolerance):
    """Relax with the transverse coordinates pinned to zero (pure 1D chain)."""
    if n_ions == 1:
        return np.zeros((1, 2))

    def f(x):
        pos = np.zeros((n_ions, 2))
        pos[:, 0] = x
        v, g = _energy_and_grad(pos.reshape(-1), 1.0, n_ions)
        return v, g.reshape(n_ions, 2)[:, 0]

    x0 = _default_guess(n_ions)[:, 0]
    res = minimize(f, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": 20000, "ftol": 1e-18, "gtol": 1e-12})
    x = res.x
    # 1D Newton polish on the axial coordinates only
    h = 1e-6
    for _ in range(60):
        g = f(x)[1]
        if np.max(np.abs(g)) < tolerance:
            break
        hess = np.empty((n_ions, n_ions))
        for i in range(n_ions):
            e = np.zeros(n_ions)
            e[i] = h
            hess[:, i] = (f(x + e)[1] - f(x - e)[1]) / (2 * h)
        x = x + np.linalg.solve(0.5 * (hess + hess.T), -g)
    else:
        raise ConvergenceError("linear-chain relaxation did not reach tolerance")
    pos = np.zeros((n_ions, 2))
    pos[:, 0] = np.sort(x)
    return pos


def relaxed_linear_positions(n_ions, tolerance=DEFAULT_TOLERANCE):
    """Equilibrium of the chain constrained to the trap axis (y = 0)."""
    return _relaxed_linear_cached(n_ions, tolerance).copy()


def half_length(n_ions):
    """Half-length L = max |x| of the relaxed linear chain."""
    return float(np.max(np.abs(relaxed_linear_positions(n_ions)[:, 0])))


def linear_density(x, n_ions, length):
    """Equilibrium linear density n(x) = (3N/4L)[1 - (x/L)^2], ions per unit
    length; integrates to N over [-L, L]."""
    if length <= 0:
        raise InvalidParameterError("half-length must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > length):
        raise InvalidParameterError("position outside the chain extent")
    out = (3.0 * n_ions / (4.0 * length)) * (1.0 - (x / length) ** 2)
    return out if out.ndim else float(out)


def critical_alpha(x, n_ions, length=None):
    """Analytic critical aspect ratio alpha_c(x) (dimensionless form).

    alpha_c = sqrt(7 zeta(3)/2) * n(x)^{3/2} with n in ions per
    characteristic length; L defaults to the relaxed linear chain's
    half-length.
    """
    if length is None:
        length = half_length(n_ions)
    dens = linear_density(x, n_ions, length)
    return np.sqrt(3.5 * ZETA_3) * dens**1.5


def initial_conditions(n_ions, jitter=DEFAULT_JITTER, seed=0):
    """Chain at rest near the linear configuration, with uniform positional
    jitter on both axes to break the transverse symmetry."""
    if jitter < 0:
        raise InvalidParameterError("jitter must be >= 0")
    pos = relaxed_linear_positions(n_ions)
    if jitter > 0:
        rng = np.random.Generator(np.random.Philox(key=seed))
        pos = pos + rng.uniform(-jitter, jitter, size=pos.shape)
    return ChainState.at_rest(pos)
