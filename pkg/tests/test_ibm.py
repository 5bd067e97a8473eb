"""Stochastic engine tests: exact laws, expectations, determinism."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phenocoevo import (
    ConfigurationError,
    ModelParams,
    PhenotypeGrid,
    PopulationState,
    TimeStepError,
    birth_death_step,
    fate_probabilities,
    initial_densities,
    initialize_counts,
    phenotype_move_step,
    run_ibm,
)

GRID = PhenotypeGrid(1.0, 1500)


class _CountingRng:
    """Wraps a real generator and counts binomial calls."""

    def __init__(self, seed):
        self.rng = np.random.default_rng(seed)
        self.calls = 0

    def binomial(self, n, p):
        self.calls += 1
        return self.rng.binomial(n, p)


class _ScriptedRng:
    """Plays back a list of functions of (n, p) as binomial results."""

    def __init__(self, script):
        self.script = list(script)

    def binomial(self, n, p):
        return self.script.pop(0)(np.asarray(n), p)


def _count_state(tumour, ctl, step=1.0):
    return PopulationState(0.0, np.asarray(tumour), np.asarray(ctl), "count", step)


class TestInitialProfiles:
    def test_unperturbed_counts(self):
        state = initialize_counts(GRID, amplitude=0.0, wavenumber=5.0)
        # densities 1e4 and 2e4 per unit trait, step = 2/1499
        assert np.all(state.tumour == 13)
        assert np.all(state.ctl == 27)
        assert state.mode == "count"
        assert state.t == 0.0

    def test_perturbed_counts_span_full_range(self):
        state = initialize_counts(GRID, amplitude=1.0, wavenumber=5.0)
        assert state.tumour.min() == 0          # trough of 1e4*(1 + cos)
        assert state.tumour.max() == 27         # crest reaches 2e4
        assert state.ctl.min() == 13            # trough of 2e4 + 1e4*cos
        assert state.ctl.max() == 40

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            initialize_counts(GRID, amplitude=-0.1, wavenumber=5.0)
        with pytest.raises(ConfigurationError):
            initialize_counts(GRID, amplitude=1.5, wavenumber=5.0)
        with pytest.raises(ConfigurationError):
            initialize_counts(GRID, amplitude=0.5, wavenumber=0.0)

    def test_density_profile_matches_cosine(self):
        state = initial_densities(GRID, amplitude=0.4, wavenumber=5.0)
        bump = 0.4 * np.cos(5.0 * GRID.sites)
        assert np.allclose(state.tumour, 1e4 * (1.0 + bump), rtol=1e-14)
        assert np.allclose(state.ctl, 2e4 + 1e4 * bump, rtol=1e-14)
        assert state.mode == "density"

    def test_counts_are_rounded_densities(self):
        counts = initialize_counts(GRID, 0.7, 5.0)
        dens = initial_densities(GRID, 0.7, 5.0)
        assert np.array_equal(counts.tumour, np.rint(dens.tumour * GRID.step))
        assert np.array_equal(counts.ctl, np.rint(dens.ctl * GRID.step))


class TestMoveStep:
    def test_uses_exactly_two_binomial_draws(self):
        rng = _CountingRng(0)
        state = _count_state([5, 5, 5], [1, 1, 1])
        phenotype_move_step(state, 0.5, rng)
        assert rng.calls == 2

    def test_zero_rate_is_identity(self):
        state = _count_state([4, 0, 9], [2, 3, 4])
        out = phenotype_move_step(state, 0.0, np.random.default_rng(1))
        assert np.array_equal(out.tumour, [4, 0, 9])
        assert np.array_equal(out.ctl, [2, 3, 4])

    def test_ctl_population_never_moves(self):
        state = _count_state([50, 50, 50, 50], [7, 0, 3, 9])
        out = phenotype_move_step(state, 1.0, np.random.default_rng(2))
        assert np.array_equal(out.ctl, [7, 0, 3, 9])

    def test_all_left_aborts_at_wall(self):
        # every cell moves, every mover goes left; the wall column stays put
        rng = _ScriptedRng([lambda n, p: n.copy(), lambda n, p: n.copy()])
        out = phenotype_move_step(_count_state([4, 3, 2], [0, 0, 0]), 1.0, rng)
        assert np.array_equal(out.tumour, [7, 2, 0])

    def test_all_right_aborts_at_wall(self):
        rng = _ScriptedRng([lambda n, p: n.copy(), lambda n, p: np.zeros_like(n)])
        out = phenotype_move_step(_count_state([4, 3, 2], [0, 0, 0]), 1.0, rng)
        assert np.array_equal(out.tumour, [0, 4, 5])

    @given(
        counts=st.lists(st.integers(0, 500), min_size=2, max_size=40),
        lam=st.floats(0.0, 1.0),
        seed=st.integers(0, 2**31 - 1),
    )
    def test_total_count_conserved(self, counts, lam, seed):
        state = _count_state(counts, [0] * len(counts))
        out = phenotype_move_step(state, lam, np.random.default_rng(seed))
        assert out.tumour.sum() == sum(counts)
        assert np.all(out.tumour >= 0)

    def test_mean_matches_transport_stencil(self):
        # one-step expectation against the exact transport rule
        # m_0 = (1-l/2) n_0 + l/2 n_1, interior l/2, 1-l, l/2, mirrored end
        counts = np.array([9, 6, 3])
        lam = 0.5
        expected = np.array([
            (1 - lam / 2) * 9 + lam / 2 * 6,
            lam / 2 * 9 + (1 - lam) * 6 + lam / 2 * 3,
            lam / 2 * 6 + (1 - lam / 2) * 3,
        ])
        rng = np.random.default_rng(42)
        reps = 20000
        acc = np.zeros(3)
        acc2 = np.zeros(3)
        state = _count_state(counts, [0, 0, 0])
        for _ in range(reps):
            out = phenotype_move_step(state, lam, rng).tumour
            acc += out
            acc2 += out.astype(float) ** 2
        mean = acc / reps
        se = np.sqrt((acc2 / reps - mean**2) / reps)
        assert np.all(np.abs(mean - expected) <= 3.5 * se + 1e-9)

    def test_requires_count_mode(self):
        dens = PopulationState(0.0, np.ones(3), np.ones(3), "density", 1.0)
        with pytest.raises(ValueError):
            phenotype_move_step(dens, 0.5, np.random.default_rng(0))


class TestFateProbabilities:
    def test_tumour_birth_is_constant(self):
        state = initialize_counts(GRID, 0.0, 5.0)
        tum, _ = fate_probabilities(state, ModelParams(gamma=2.0), GRID)
        assert np.allclose(tum.birth, 0.05 * 1.5)   # tau * alpha_C

    def test_two_cell_death_probability_exact(self):
        # one tumour cell and one CTL at the centre, full-domain radii:
        # K_C = J_C = 1/2, so p = tau*(mu_C + zeta_C*gamma)/2
        grid = PhenotypeGrid(1.0, 3)
        state = _count_state([0, 1, 0], [0, 1, 0], step=grid.step)
        params = ModelParams(gamma=1.0, eta=2.0, theta_C=2.0, theta_T=2.0)
        tum, ctl = fate_probabilities(state, params, grid)
        assert tum.death[1] == pytest.approx(1.625e-7, rel=1e-12)
        assert ctl.birth[1] == pytest.approx(0.05 * (0.05 + 3e-5 * 0.5), rel=1e-12)
        assert ctl.death[1] == pytest.approx(0.05 * 5e-6 * 0.5, rel=1e-12)

    def test_probabilities_close_to_one(self):
        state = initialize_counts(GRID, 0.0, 5.0)
        tum, ctl = fate_probabilities(state, ModelParams(gamma=2.0), GRID)
        for fates in (tum, ctl):
            total = fates.birth + fates.death + fates.quiescent
            assert np.allclose(total, 1.0, rtol=0, atol=1e-12)
            assert np.all(fates.quiescent >= 0)

    def test_death_above_one_raises_with_location(self):
        grid = PhenotypeGrid(1.0, 3)
        state = _count_state([10**6] * 3, [0, 0, 0], step=grid.step)
        params = ModelParams(gamma=0.0, mu_C=1e-3, theta_C=2.0)
        with pytest.raises(TimeStepError) as err:
            fate_probabilities(state, params, grid)
        assert err.value.population == "tumour death"
        assert err.value.site == 0
        assert err.value.value > 1.0

    def test_birth_above_one_raises(self):
        grid = PhenotypeGrid(1.0, 3)
        state = _count_state([1, 1, 1], [0, 0, 0], step=grid.step)
        with pytest.raises(TimeStepError) as err:
            fate_probabilities(state, ModelParams(gamma=0.0, alpha_C=30.0), grid)
        assert err.value.population == "tumour birth"

    def test_birth_plus_death_above_one_raises(self):
        grid = PhenotypeGrid(1.0, 3)
        state = _count_state([10**6] * 3, [0, 0, 0], step=grid.step)
        # each term stays below 1 but the sum does not
        params = ModelParams(gamma=0.0, alpha_C=10.0, mu_C=8e-6, theta_C=2.0)
        with pytest.raises(TimeStepError) as err:
            fate_probabilities(state, params, grid)
        assert err.value.population == "tumour birth+death"

    def test_unoccupied_sites_not_constrained(self):
        # CTL pressure would push the tumour death probability above one,
        # but no tumour cell exists to draw that fate
        grid = PhenotypeGrid(1.0, 3)
        state = _count_state([0, 0, 0], [10**6] * 3, step=grid.step)
        params = ModelParams(gamma=1.0, zeta_C=1e-3, eta=2.0, theta_T=2.0)
        tum, _ = fate_probabilities(state, params, grid)
        assert np.all(tum.death > 1.0)   # would have raised if occupied


class TestBirthDeathStep:
    def test_uses_exactly_four_binomial_draws(self):
        from phenocoevo.ibm import FateProbabilities
        rng = _CountingRng(0)
        state = _count_state([5, 5], [5, 5])
        fates = FateProbabilities(np.full(2, 0.1), np.full(2, 0.1))
        birth_death_step(state, fates, fates, rng)
        assert rng.calls == 4

    def test_certain_death_empties(self):
        from phenocoevo.ibm import FateProbabilities
        state = _count_state([10, 20], [5, 5])
        dead = FateProbabilities(np.zeros(2), np.ones(2))
        keep = FateProbabilities(np.zeros(2), np.zeros(2))
        out = birth_death_step(state, dead, keep, np.random.default_rng(0))
        assert np.array_equal(out.tumour, [0, 0])
        assert np.array_equal(out.ctl, [5, 5])

    def test_certain_birth_doubles(self):
        from phenocoevo.ibm import FateProbabilities
        state = _count_state([10, 20], [7, 0])
        double = FateProbabilities(np.ones(2), np.zeros(2))
        out = birth_death_step(state, double, double, np.random.default_rng(0))
        assert np.array_equal(out.tumour, [20, 40])
        assert np.array_equal(out.ctl, [14, 0])

    def test_mean_matches_branching_law(self):
        # E[N'] = N * (1 + p_birth - p_death)
        from phenocoevo.ibm import FateProbabilities
        n0, pb, pd = 1000, 0.3, 0.2
        fates = FateProbabilities(np.array([pb]), np.array([pd]))
        state = _count_state([n0], [0])
        rng = np.random.default_rng(7)
        reps = 10000
        acc = acc2 = 0.0
        for _ in range(reps):
            out = float(birth_death_step(state, fates, fates, rng).tumour[0])
            acc += out
            acc2 += out * out
        mean = acc / reps
        se = np.sqrt((acc2 / reps - mean**2) / reps)
        assert abs(mean - n0 * (1 + pb - pd)) <= 3.5 * se


class TestRunIbm:
    def _quiet_params(self):
        # no births or deaths at all: only the phenotype walk acts
        return ModelParams(
            gamma=0.0, alpha_C=0.0, alpha_T=0.0, mu_C=0.0, mu_T=0.0,
            zeta_C=0.0, zeta_T=0.0, lambda_C=0.5, tau=0.1, t_final=2.0,
        )

    def test_zero_rates_conserve_both_populations(self):
        grid = PhenotypeGrid(1.0, 11)
        init = _count_state([30] * 11, [17] * 11, step=grid.step)
        traj = run_ibm(self._quiet_params(), grid, init, seed=5,
                       snapshot_times=(2.0,))
        assert np.all(traj.rho_C == 330)
        assert np.all(traj.rho_T == 187)
        assert traj.terminal == "completed"
        # CTLs do not even move
        assert np.array_equal(traj.snapshots[2.0][1], init.ctl)

    def test_time_base_and_lengths(self):
        grid = PhenotypeGrid(1.0, 11)
        init = _count_state([30] * 11, [17] * 11, step=grid.step)
        traj = run_ibm(self._quiet_params(), grid, init, seed=5)
        assert traj.times.shape == (21,)
        assert traj.times[0] == 0.0
        assert traj.times[-1] == pytest.approx(2.0)
        assert traj.tau == 0.1
        assert traj.seed == 5

    def test_same_seed_bitwise_reproducible(self):
        grid = PhenotypeGrid(1.0, 101)
        params = ModelParams(gamma=2.0, t_final=1.0)
        init = initialize_counts(grid, 0.0, 5.0)
        a = run_ibm(params, grid, init, seed=123, snapshot_times=(1.0,))
        b = run_ibm(params, grid, init, seed=123, snapshot_times=(1.0,))
        assert np.array_equal(a.rho_C, b.rho_C)
        assert np.array_equal(a.rho_T, b.rho_T)
        assert np.array_equal(a.snapshots[1.0][0], b.snapshots[1.0][0])
        c = run_ibm(params, grid, init, seed=124)
        assert not np.array_equal(a.rho_C, c.rho_C)

    def test_tumour_extinction_recorded_and_run_continues(self):
        grid = PhenotypeGrid(1.0, 5)
        init = _count_state([5] * 5, [10] * 5, step=grid.step)
        # constant CTL pressure kills the tumour within a few steps:
        # p_death = tau * zeta_C * gamma * J_C = 0.05*0.7*25 = 0.875
        params = ModelParams(
            gamma=1.0, alpha_C=0.0, alpha_T=0.0, mu_C=0.0, mu_T=0.0,
            zeta_C=0.7, zeta_T=0.0, eta=2.0, theta_C=2.0, theta_T=2.0,
            tau=0.05, t_final=5.0,
        )
        traj = run_ibm(params, grid, init, seed=3)
        assert traj.terminal == "tumour_extinct"
        assert traj.times.shape == (101,)            # ran to t_final
        assert traj.rho_C[-1] == 0
        assert np.isinf(traj.immune_score[-1])
        assert np.all(traj.rho_T == 50)              # CTLs untouched

        short = run_ibm(params, grid, init, seed=3, stop_on_extinction=True)
        assert short.terminal == "tumour_extinct"
        assert short.times.shape[0] < 101
        assert short.rho_C[-1] == 0

    def test_ctl_extinction_flagged(self):
        grid = PhenotypeGrid(1.0, 5)
        init = _count_state([5] * 5, [1, 0, 0, 0, 0], step=grid.step)
        # the lone CTL dies of crowding almost surely; tumour is inert
        params = ModelParams(
            gamma=0.0, alpha_C=0.0, alpha_T=0.0, mu_C=0.0, mu_T=36.0,
            zeta_C=0.0, zeta_T=0.0, eta=2.0, theta_C=2.0, theta_T=2.0,
            tau=0.05, t_final=5.0,
        )
        traj = run_ibm(params, grid, init, seed=8)
        assert traj.terminal == "ctl_extinct"
        assert traj.rho_T[-1] == 0
        assert traj.rho_C[-1] == 25

    def test_requires_matching_grid(self):
        grid = PhenotypeGrid(1.0, 5)
        init = _count_state([1] * 4, [1] * 4)
        with pytest.raises(ValueError):
            run_ibm(ModelParams(gamma=1.0), grid, init, seed=0)

    def test_snapshot_times_rounded_to_steps(self):
        grid = PhenotypeGrid(1.0, 5)
        init = _count_state([3] * 5, [3] * 5, step=grid.step)
        traj = run_ibm(self._quiet_params(), grid, init, seed=0,
                       snapshot_times=(0.0, 1.0, 99.0))
        assert set(traj.snapshots) == {0.0, 1.0}     # 99 is past t_final
        assert np.array_equal(traj.snapshots[0.0][0], init.tumour)
