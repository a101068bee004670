import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from givetake import (
    BetaIntFirst,
    BetaOneZ,
    ChainSpec,
    Constant,
    DomainError,
    Indicator,
    Linear,
    Mixture,
    PiecewiseConstant,
    Polynomial,
    SearchForm,
    apply_jump,
    draw_proportions,
    sample_proportion,
    simulate,
    spawn_streams,
    step,
)


class TestSampleProportion:
    @pytest.mark.parametrize("z, u, expected", [(1.0, 0.42, 0.42), (2.0, 0.75, 0.5), (5.0, 0.0, 0.0)])
    def test_beta_one_z(self, z, u, expected):
        assert sample_proportion(BetaOneZ(z), u) == pytest.approx(expected, abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            sample_proportion(BetaOneZ(1.0), 1.5)

    @given(st.floats(0.0, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_mixture_composition_in_range(self, u):
        v = sample_proportion(Mixture(((0.5, 1.0), (1.0, 2.0))), u)
        assert 0.0 <= v <= 1.0

    @pytest.mark.parametrize(
        "law",
        [BetaOneZ(3.0), BetaIntFirst(2, 3.0), BetaIntFirst(3, 0.5), Mixture(((0.5, 1.0), (1.0, 2.0))), Mixture(((1.5, 1.0), (-1.0, 2.0)))],
        ids=repr,
    )
    def test_draws_follow_law(self, law):
        rng = np.random.default_rng(11)
        sample = draw_proportions(law, rng, 20_000)
        assert stats.kstest(sample, law.cdf).pvalue > 1e-3


class TestStep:
    def test_zero_stays_when_going_left(self):
        rng = np.random.default_rng(0)
        assert step(ChainSpec(Constant(1.0), BetaOneZ(2), BetaOneZ(2)), 0.0, rng) == 0.0

    def test_one_stays_when_going_right(self):
        rng = np.random.default_rng(0)
        assert step(ChainSpec(Constant(0.0), BetaOneZ(2), BetaOneZ(2)), 1.0, rng) == 1.0

    def test_jump_arithmetic(self):
        assert apply_jump(0.5, True, 0.4) == pytest.approx(0.3)
        assert apply_jump(0.5, False, 0.4) == pytest.approx(0.7)

    def test_domain(self):
        with pytest.raises(DomainError):
            step(ChainSpec(Constant(0.5), BetaOneZ(1), BetaOneZ(1)), 1.1, np.random.default_rng(0))


FUZZ_SPECS = [
    ChainSpec(Linear(1.0, 1.0), BetaOneZ(0.3), BetaOneZ(7.0)),
    ChainSpec(Polynomial((0.1, 0.5, 0.3)), BetaIntFirst(2, 2.0), BetaOneZ(0.5)),
    ChainSpec(PiecewiseConstant((0, 0.3, 1), (0.0, 1.0)), Mixture(((0.5, 1.0), (1.0, 2.0))), BetaIntFirst(3, 0.7)),
    ChainSpec(Indicator(0.2), BetaOneZ(3.0), BetaOneZ(3.0), x0=0.0),
    ChainSpec(SearchForm(0.2, 0.7), BetaOneZ(50.0), BetaOneZ(0.05), x0=1.0),
]


class TestSimulate:
    def test_zero_steps(self):
        traj = simulate(FUZZ_SPECS[0], 0, seed=3)
        assert traj.states.tolist() == [0.5]

    def test_always_left_is_nonincreasing(self):
        traj = simulate(ChainSpec(Constant(1.0), BetaOneZ(2), BetaOneZ(2)), 50, seed=1)
        assert np.all(np.diff(traj.states) <= 0.0)

    @pytest.mark.parametrize("spec", FUZZ_SPECS, ids=lambda s: type(s.p).__name__)
    def test_states_in_unit_interval(self, spec):
        states = simulate(spec, 200_000, seed=5).states
        assert states[0] == spec.x0
        assert np.all((states >= 0.0) & (states <= 1.0))

    def test_fuzz_million_steps(self):
        states = simulate(FUZZ_SPECS[2], 1_000_000, seed=9).states
        assert np.all((states >= 0.0) & (states <= 1.0))

    def test_deterministic(self):
        a = simulate(FUZZ_SPECS[1], 5_000, seed=2**64 - 1).states
        b = simulate(FUZZ_SPECS[1], 5_000, seed=2**64 - 1).states
        c = simulate(FUZZ_SPECS[1], 5_000, seed=2**64 - 2).states
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_seed_sequence_accepted_and_unchanged(self):
        ss = np.random.SeedSequence(42)
        a = simulate(FUZZ_SPECS[0], 100, ss).states
        b = simulate(FUZZ_SPECS[0], 100, ss).states
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("seed", [-1, 2**64, 1.5, True])
    def test_seed_domain(self, seed):
        with pytest.raises(DomainError):
            simulate(FUZZ_SPECS[0], 10, seed)

    def test_right_law_does_not_perturb_other_streams(self):
        # always moving left: the right law is never used, so only its own stream may differ
        base = ChainSpec(Constant(1.0), BetaOneZ(2.0), BetaOneZ(2.0))
        other = ChainSpec(Constant(1.0), BetaOneZ(2.0), BetaIntFirst(3, 4.0))
        assert np.array_equal(simulate(base, 500, 8).states, simulate(other, 500, 8).states)

    def test_streams_are_independent_generators(self):
        g = spawn_streams(123)
        draws = [gen.random(4) for gen in g]
        assert len({tuple(d) for d in draws}) == 3

    def test_uniform_mean(self, uniform_chain):
        states = simulate(uniform_chain, 1_000_000, seed=0).states
        assert 0.49 <= states.mean() <= 0.51

    def test_uniform_ks(self, uniform_chain):
        states = simulate(uniform_chain, 1_000_000, seed=0).states[-500_000:]
        assert stats.kstest(states, "uniform").pvalue > 1e-3

    def test_csv(self, tmp_path):
        traj = simulate(FUZZ_SPECS[0], 3, seed=1)
        path = traj.to_csv(tmp_path / "t.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "step,x"
        assert len(lines) == 5
        assert [float(l.split(",")[1]) for l in lines[1:]] == traj.states.tolist()
