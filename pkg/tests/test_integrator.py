import numpy as np
import pytest
from scipy.linalg import solve_discrete_lyapunov

from ionheat.errors import BlowUpError, InvalidParameterError
from ionheat.integrator import (SimulationSchedule, drift, pack_state,
                                platen_step, simulate_trajectory,
                                unpack_state)
from ionheat.potential import ChainState, total_energy
from ionheat.statics import initial_conditions, relax_equilibrium
from ionheat.thermostat import BathMap


def test_pack_unpack_roundtrip():
    rng = np.random.default_rng(0)
    state = ChainState(rng.normal(size=(4, 2)), rng.normal(size=(4, 2)), 1.5)
    y = pack_state(state)
    assert y.shape == (16,)
    # ordering: qx block, qy block, px block, py block
    assert np.array_equal(y[0:4], state.positions[:, 0])
    assert np.array_equal(y[4:8], state.positions[:, 1])
    assert np.array_equal(y[8:12], state.momenta[:, 0])
    assert np.array_equal(y[12:16], state.momenta[:, 1])
    back = unpack_state(y, 1.5)
    assert np.array_equal(back.positions, state.positions)
    assert np.array_equal(back.momenta, state.momenta)


class TestDrift:
    def test_two_ion_equilibrium_is_fixed_point(self):
        eq = relax_equilibrium(2, 5.0)
        y = pack_state(ChainState.at_rest(eq.positions))
        a = drift(y, 5.0, BathMap.empty(2))
        assert np.max(np.abs(a)) < 1e-9

    def test_free_drift(self):
        state = ChainState(np.zeros((1, 2)), np.array([[1.0, 0.0]]))
        a = drift(pack_state(state), 3.0, BathMap.empty(1))
        assert np.array_equal(a, [1.0, 0.0, 0.0, 0.0])

    def test_pure_friction(self):
        state = ChainState(np.zeros((1, 2)), np.array([[1.0, 0.0]]))
        baths = BathMap.from_values(1, {(0, "x"): (0.5, 0.0)})
        a = drift(pack_state(state), 3.0, baths)
        assert a[2] == pytest.approx(-0.5, rel=1e-15)


class TestPlatenStep:
    def test_deterministic_heun_scalar_decay(self):
        # dp/dt = -p realized on the transverse axis with alpha = 0
        state = ChainState(np.zeros((1, 2)), np.array([[0.0, 1.0]]))
        baths = BathMap.from_values(1, {(0, "y"): (1.0, 0.0)})
        y1 = platen_step(pack_state(state), 0.1, np.zeros(2), 0.0, baths)
        assert y1[3] == pytest.approx(0.905, rel=1e-15)

    def test_force_free_advection(self):
        # alpha = 0 kills the transverse trap force; y motion is free
        state = ChainState(np.zeros((1, 2)), np.array([[0.0, 2.0]]))
        y1 = platen_step(pack_state(state), 0.1, np.zeros(2), 0.0, BathMap.empty(1))
        assert y1[1] == pytest.approx(0.2, rel=1e-15)  # q advanced by p dt
        assert y1[3] == 2.0                            # p unchanged

    def test_no_direct_noise_on_positions(self):
        # from rest, the position response to noise is O(dt^1.5) through the
        # corrector drift: q' = (dt/2) p' exactly, never sqrt(dt) G directly
        state = ChainState(np.zeros((1, 2)), np.zeros((1, 2)))
        baths = BathMap.from_values(1, {(0, "y"): (0.0, 1.0)})
        dt = 0.01
        y1 = platen_step(pack_state(state), dt, np.array([0.0, 3.0]), 0.0, baths)
        assert y1[3] == pytest.approx(np.sqrt(2 * dt) * 3.0, rel=1e-15)
        assert y1[1] == pytest.approx(0.5 * dt * y1[3], rel=1e-15)
        assert y1[0] == 0.0 and y1[2] == 0.0

    def test_wrong_gaussian_count_rejected(self):
        state = ChainState(np.zeros((2, 2)), np.zeros((2, 2)))
        with pytest.raises(InvalidParameterError):
            platen_step(pack_state(state), 0.1, np.zeros(3), 1.0, BathMap.empty(2))

    def test_noise_shared_by_predictor_and_corrector(self):
        # for a linear problem the step is affine in G; the coefficient of G
        # on the momentum slot must be sqrt(2 D dt) * (1 - eta dt / 2)
        baths = BathMap.from_values(1, {(0, "y"): (1.0, 1.0)})
        dt = 1e-3
        y0 = np.zeros(4)
        g = np.array([0.0, 1.0])
        dy = platen_step(y0, dt, g, 0.0, baths) - platen_step(y0, dt, 0 * g, 0.0, baths)
        assert dy[3] == pytest.approx(np.sqrt(2 * dt) * (1 - dt / 2), rel=1e-12)


def ou_step_maps(dt, eta=1.0, diff=1.0, alpha=1.0):
    """One-step affine maps (state matrix, noise matrix) of the integrator
    on a single thermostatted ion, extracted numerically."""
    baths = BathMap.from_values(1, {(0, "x"): (eta, diff)})
    m = np.zeros((4, 4))
    l = np.zeros((4, 2))
    base = platen_step(np.zeros(4), dt, np.zeros(2), alpha, baths)
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        m[:, i] = platen_step(e, dt, np.zeros(2), alpha, baths) - base
    for i in range(2):
        g = np.zeros(2)
        g[i] = 1.0
        l[:, i] = platen_step(np.zeros(4), dt, g, alpha, baths) - base
    return m, l


def stationary_p2(dt, **kwargs):
    m, l = ou_step_maps(dt, **kwargs)
    cov = solve_discrete_lyapunov(m, l @ l.T)
    return cov[2, 2]


def test_weak_order_two_stationary_bias():
    # thermostatted harmonic ion, continuum <p^2> = D/eta = 1; the scheme's
    # exact discrete stationary moment must approach it at second order
    b_coarse = stationary_p2(2e-3) - 1.0
    b_fine = stationary_p2(1e-3) - 1.0
    assert 3.0 < b_coarse / b_fine < 5.0


def test_simulated_moment_matches_discrete_stationary_value():
    # Monte Carlo through the real integrator agrees with the discrete-exact
    # stationary moment of its own one-step map
    import warnings

    dt = 2e-3
    baths = BathMap.from_values(1, {(0, "x"): (1.0, 1.0)})
    per_traj = []
    for seed in range(60):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            sched = SimulationSchedule(dt=dt, t_end=60.0, sample_stride=250,
                                       seed=seed)
        rec = simulate_trajectory(
            ChainState(np.zeros((1, 2)), np.zeros((1, 2))), 1.0, baths, sched)
        mask = rec.times >= 20.0
        per_traj.append(np.mean(rec.momenta()[mask, 0, 0] ** 2))
    per_traj = np.array(per_traj)
    mean = per_traj.mean()
    err = per_traj.std(ddof=1) / np.sqrt(per_traj.size)
    exact = stationary_p2(dt)
    assert abs(mean - exact) < 4 * err
    assert abs(mean - 1.0) < 4 * err + 1e-4


class TestSimulateTrajectory:
    def test_bit_identical_under_same_seed(self):
        init = initial_conditions(3, jitter=1e-3, seed=5)
        baths = BathMap.from_values(3, {(0, "x"): (0.1, 0.01),
                                        (2, "y"): (0.2, 0.02)})
        sched = SimulationSchedule(dt=1e-4, t_end=2.0, sample_stride=100, seed=99)
        a = simulate_trajectory(init, 5.0, baths, sched)
        b = simulate_trajectory(init, 5.0, baths, sched)
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.final_y, b.final_y)
        c = simulate_trajectory(
            init, 5.0, baths,
            SimulationSchedule(dt=1e-4, t_end=2.0, sample_stride=100, seed=100))
        assert not np.array_equal(a.states, c.states)

    def test_energy_conservation_without_baths(self):
        init = initial_conditions(5, jitter=1e-2, seed=2)
        init = ChainState(init.positions,
                          0.05 * np.random.default_rng(1).normal(size=(5, 2)))
        sched = SimulationSchedule(dt=1e-4, t_end=10.0, sample_stride=1000, seed=0)
        rec = simulate_trajectory(init, 5.0, BathMap.empty(5), sched)
        e = np.array([total_energy(rec.chain_state(j), 5.0)
                      for j in range(rec.times.size)])
        assert np.max(np.abs(e - e[0])) / abs(e[0]) < 1e-8

    def test_sample_layout(self):
        init = initial_conditions(2, jitter=0.0, seed=0)
        sched = SimulationSchedule(dt=1e-4, t_end=0.05, sample_stride=70, seed=3)
        rec = simulate_trajectory(init, 5.0, BathMap.empty(2), sched)
        steps = sched.n_steps
        assert steps == 500
        assert rec.times.size == steps // 70 + 1
        assert np.array_equal(rec.states[0], pack_state(init))
        assert rec.times[1] - rec.times[0] == pytest.approx(70 * 1e-4)
        assert rec.final_time == pytest.approx(0.05)

    def test_blow_up_detected(self):
        # strong anti-damping pumps the momentum exponentially
        init = ChainState(np.zeros((1, 2)), np.array([[1.0, 0.0]]))
        baths = BathMap.from_values(1, {(0, "x"): (-20.0, 0.0)})
        sched = SimulationSchedule(dt=1e-4, t_end=10.0, sample_stride=100, seed=0)
        with pytest.raises(BlowUpError) as info:
            simulate_trajectory(init, 1.0, baths, sched)
        assert info.value.step is not None
        assert info.value.last_good_time is not None

    def test_coincident_ions_raise_blow_up(self):
        # a collision makes the force non-finite; it must surface as a
        # blow-up, not a low-level arithmetic error
        init = ChainState(np.zeros((2, 2)), np.zeros((2, 2)))
        sched = SimulationSchedule(dt=1e-4, t_end=0.1, sample_stride=10, seed=0)
        with pytest.raises(BlowUpError):
            simulate_trajectory(init, 1.0, BathMap.empty(2), sched)

    def test_schedule_validation(self):
        with pytest.raises(InvalidParameterError):
            SimulationSchedule(dt=0.0, t_end=1.0)
        with pytest.raises(InvalidParameterError):
            SimulationSchedule(dt=1e-4, t_end=-1.0)
        with pytest.raises(InvalidParameterError):
            SimulationSchedule(dt=1e-4, t_end=1.0, sample_stride=0)
        with pytest.warns(UserWarning):
            SimulationSchedule(dt=1e-3, t_end=1.0)
