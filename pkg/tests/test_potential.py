import numpy as np
import pytest

from ionheat.errors import InvalidParameterError, SingularityError
from ionheat.potential import (ChainState, forces, kinetic_energy,
                               local_energy, pair_current,
                               pair_current_matrix, potential_energy,
                               total_energy)

TWO_ION_X = 2.0 ** (-2.0 / 3.0)  # analytic two-ion equilibrium +-x


def two_ion_state(momenta=None):
    pos = np.array([[-TWO_ION_X, 0.0], [TWO_ION_X, 0.0]])
    mom = np.zeros_like(pos) if momenta is None else np.asarray(momenta, float)
    return ChainState(pos, mom)


def random_state(n, seed, scale=2.0):
    rng = np.random.default_rng(seed)
    pos = rng.normal(scale=scale, size=(n, 2))
    mom = rng.normal(size=(n, 2))
    return ChainState(pos, mom)


def numerical_gradient(state, alpha, h=1e-6):
    grad = np.zeros_like(state.positions)
    for i in range(state.n_ions):
        for c in range(2):
            plus = state.positions.copy()
            minus = state.positions.copy()
            plus[i, c] += h
            minus[i, c] -= h
            grad[i, c] = (potential_energy(ChainState(plus, state.momenta), alpha)
                          - potential_energy(ChainState(minus, state.momenta), alpha)) / (2 * h)
    return grad


class TestPotentialEnergy:
    def test_two_ion_equilibrium_value(self):
        v = potential_energy(two_ion_state(), 5.0)
        assert v == pytest.approx(2.0 ** (-4.0 / 3.0) + 2.0 ** (-1.0 / 3.0), rel=1e-14)
        assert v == pytest.approx(1.19055, abs=1e-5)

    def test_single_ion_origin(self):
        state = ChainState(np.zeros((1, 2)), np.zeros((1, 2)))
        assert potential_energy(state, 3.0) == 0.0

    def test_single_ion_transverse(self):
        state = ChainState(np.array([[0.0, 1.0]]), np.zeros((1, 2)))
        assert potential_energy(state, 2.0) == pytest.approx(2.0, rel=1e-15)

    def test_momenta_do_not_enter(self):
        a = two_ion_state()
        b = two_ion_state(momenta=[[3.0, -1.0], [0.5, 2.0]])
        assert potential_energy(a, 4.0) == potential_energy(b, 4.0)

    def test_coincident_ions_raise(self):
        pos = np.array([[0.0, 0.0], [0.0, 0.0]])
        with pytest.raises(SingularityError):
            potential_energy(ChainState(pos, np.zeros_like(pos)), 3.0)

    def test_coulomb_translation_invariance(self):
        state = random_state(6, 1)
        shifted = ChainState(state.positions + [0.5, 0.0], state.momenta)
        alpha = 3.0
        trap = lambda pos: 0.5 * np.sum(pos[:, 0] ** 2 + alpha**2 * pos[:, 1] ** 2)
        dv = potential_energy(shifted, alpha) - potential_energy(state, alpha)
        dtrap = trap(shifted.positions) - trap(state.positions)
        assert dv == pytest.approx(dtrap, rel=1e-12)


class TestForces:
    def test_two_ion_equilibrium_forces_vanish(self):
        f = forces(two_ion_state(), 5.0)
        assert np.max(np.abs(f)) < 1e-12

    def test_single_ion_pure_trap(self):
        state = ChainState(np.array([[0.7, 0.0]]), np.zeros((1, 2)))
        f = forces(state, 3.0)
        assert f[0, 0] == pytest.approx(-0.7, rel=1e-15)
        assert f[0, 1] == 0.0

    @pytest.mark.parametrize("n,seed", [(2, 0), (5, 1), (5, 2), (8, 3), (10, 4)])
    def test_matches_finite_differences(self, n, seed):
        state = random_state(n, seed)
        f = forces(state, 3.0)
        num = -numerical_gradient(state, 3.0)
        assert np.max(np.abs(f - num)) / np.max(np.abs(f)) < 1e-6

    def test_newtons_third_law_coulomb_part(self):
        state = random_state(4, 9)
        alpha = 2.5
        f = forces(state, alpha)
        trap = np.column_stack((-state.positions[:, 0],
                                -alpha**2 * state.positions[:, 1]))
        coulomb = f - trap
        assert np.allclose(np.sum(coulomb, axis=0), 0.0, atol=1e-13)


class TestLocalEnergy:
    def test_sums_to_hamiltonian(self):
        for seed in range(4):
            state = random_state(6, seed)
            total = sum(local_energy(state, 3.0, i) for i in range(6))
            assert total == pytest.approx(total_energy(state, 3.0), rel=1e-13)

    def test_single_resting_ion(self):
        state = ChainState(np.zeros((1, 2)), np.zeros((1, 2)))
        assert local_energy(state, 3.0, 0) == 0.0

    def test_two_ion_equilibrium_split(self):
        state = two_ion_state()
        expected = 0.5 * 2.0 ** (-4.0 / 3.0) + 0.5 * 2.0 ** (-1.0 / 3.0)
        for i in range(2):
            assert local_energy(state, 5.0, i) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.59527, abs=1e-5)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            local_energy(two_ion_state(), 3.0, 2)


class TestPairCurrent:
    def test_zero_momenta_zero_current(self):
        state = two_ion_state()
        assert pair_current(state, 0, 1) == 0.0

    def test_antisymmetry_random_states(self):
        for seed in range(4):
            state = random_state(5, seed)
            for n in range(5):
                for l in range(n):
                    assert pair_current(state, n, l) == pytest.approx(
                        -pair_current(state, l, n), rel=1e-14, abs=1e-16)

    def test_two_ion_hand_value(self):
        state = two_ion_state(momenta=[[1.0, 0.0], [1.0, 0.0]])
        # right ion receiving from left: j = 2^(-2/3)
        assert pair_current(state, 1, 0) == pytest.approx(2.0 ** (-2.0 / 3.0), rel=1e-14)
        assert pair_current(state, 1, 0) == pytest.approx(0.62996, abs=1e-5)

    def test_same_ion_rejected(self):
        with pytest.raises(InvalidParameterError):
            pair_current(two_ion_state(), 1, 1)

    def test_matrix_matches_scalar(self):
        state = random_state(5, 12)
        j = pair_current_matrix(state.positions, state.momenta)
        for n in range(5):
            for l in range(5):
                if n != l:
                    assert j[n, l] == pytest.approx(pair_current(state, n, l),
                                                    rel=1e-13, abs=1e-16)
        assert np.all(np.diag(j) == 0.0)


def test_kinetic_energy():
    state = random_state(3, 7)
    assert kinetic_energy(state) == pytest.approx(
        0.5 * np.sum(state.momenta**2), rel=1e-15)


def test_state_validation():
    with pytest.raises(InvalidParameterError):
        ChainState(np.zeros((2, 2)), np.zeros((3, 2)))
    bad = np.zeros((2, 2))
    bad[0, 0] = np.nan
    with pytest.raises(InvalidParameterError):
        ChainState(bad, np.zeros((2, 2)))
