import numpy as np
import pytest

from icans.gradients import exact_gradient
from icans.optimizers import (
    ICANS,
    CANS,
    SOFF,
    SPSA,
    Adam,
    AdamState,
    CansState,
    GradientDescent,
    IcansState,
    SpsaState,
    adam_step,
    cans_update,
    clip_shots,
    expected_gain_per_shot,
    fit_sinusoid,
    gd_step,
    icans2_learning_rates,
    icans_run,
    icans_update,
    make_optimizer,
    recommended_shots,
    soff_coordinate,
    soff_sweep,
    spsa_gradient,
    spsa_step,
)
from icans.problems import CompilingProblem, ObservableProblem, VqeProblem
from icans.quantum import AnsatzCircuit, Gate, PauliObservable


def exact_evaluator(f):
    def evaluate(rows, shots):
        return np.array([f(r) for r in rows]), 0
    return evaluate


class ExactProblem(ObservableProblem):
    """Deterministic derivative samples: every shot returns the exact cost."""

    def sample(self, thetas, shots, noise=None, rng=None):
        values = self.exact_batch(np.atleast_2d(thetas))
        return [np.full(int(s), v) for v, s in zip(values, shots)], int(np.sum(shots))


def small_exact_problem():
    gates = (Gate("rotation", (0,), "y", 0), Gate("rotation", (0,), "z", 1),
             Gate("rotation", (1,), "y", 2), Gate("cz", (0, 1)))
    obs = PauliObservable.from_terms([(1.0, "ZI"), (0.5, "XX"), (0.3, "IZ")])
    return ExactProblem(AnsatzCircuit(2, 0, gates, 3), obs)


class TestGainAndShots:
    def test_gain_example(self):
        assert expected_gain_per_shot(0.1, 1.0, 1.0, 0.0, 2) == pytest.approx(0.0475, abs=1e-15)

    def test_zero_gradient_negative_gain(self):
        assert expected_gain_per_shot(0.1, 1.0, 0.0, 0.5, 3) < 0

    def test_learning_rate_bound_equality_zero_gain(self):
        # alpha = 2 g^2 / (L (g^2 + S/s)) makes the bracket vanish
        g, S, s, L = 0.7, 2.0, 5, 3.0
        alpha = 2 * g**2 / (L * (g**2 + S / s))
        assert expected_gain_per_shot(alpha, L, g, S, s) == pytest.approx(0.0, abs=1e-15)

    def test_per_component_check_keeps_gain_nonnegative(self):
        rng = np.random.default_rng(0)
        chi = rng.normal(size=200)
        xi = rng.exponential(size=200) * 5
        s = rng.integers(2, 50, size=200)
        L = 2.0
        lr = icans2_learning_rates(0.5, L, chi, xi, s)
        assert np.all(lr <= 0.5)
        assert np.all(expected_gain_per_shot(lr, L, chi, xi, s) >= -1e-12)

    def test_checked_rate_at_bound_gives_half_the_first_term(self):
        # alpha' = g^2/(L(g^2+S/s)) leaves gamma = alpha' g^2 / (2 s)
        g, S, s, L = 0.4, 1.0, 4, 1.0
        lr = icans2_learning_rates(0.9, L, g, S, s)
        assert lr == pytest.approx(g**2 / (L * (g**2 + S / s)))
        assert expected_gain_per_shot(lr, L, g, S, s) == pytest.approx(lr * g**2 / (2 * s))

    def test_recommended_shots_examples(self):
        assert recommended_shots(0.1, 1.0, 4.0, 0.5, 0.0, 0.99, 0) == 2
        assert recommended_shots(0.1, 1.0, 1.0, 0.0, 1e-6, 0.99, 0) == 105264
        assert recommended_shots(0.1, 1.0, 0.0, 0.3, 1e-6, 0.99, 5) == 0

    def test_recommended_shots_vectorized(self):
        out = recommended_shots(0.1, 1.0, np.array([4.0, 0.0]), np.array([0.5, 0.5]), 0.0, 0.99, 0)
        assert out.tolist() == [2, 0]

    def test_recommended_shots_requires_small_rate(self):
        with pytest.raises(ValueError):
            recommended_shots(1.0, 2.0, 1.0, 1.0, 1e-6, 0.99, 0)

    def test_clip_example(self):
        clipped, s_max = clip_shots([10, 4, 50], [0.1, 0.5, 0.2], 2)
        assert s_max == 4
        assert clipped.tolist() == [4, 4, 4]

    def test_clip_raises_zero_to_minimum(self):
        clipped, _ = clip_shots([0, 0, 7], [0.3, 0.1, 0.2], 2)
        assert clipped.tolist() == [2, 2, 2]

    def test_clip_tie_goes_to_first(self):
        clipped, s_max = clip_shots([3, 9], [0.5, 0.5], 2)
        assert s_max == 3 and clipped.tolist() == [3, 3]


class TestIcansUpdate:
    def test_one_update_by_hand(self):
        st = IcansState.start(np.zeros(2), alpha=0.1, L=1.0, mu=0.5, b=1e-6, s_min=2)
        rep = icans_update(st, np.array([1.0, -2.0]), np.array([4.0, 0.0]), variant=1)
        assert rep.shots_spent == 8
        np.testing.assert_allclose(st.theta, [-0.1, 0.2])
        np.testing.assert_allclose(st.chi, [0.5, -1.0])
        np.testing.assert_allclose(st.xi, [2.0, 0.0])
        # ceil(0.2/1.9 * 2 / (0.25 + 1e-6)) = 1 and 0, clipped up to s_min
        assert st.s.tolist() == [2, 2]
        assert st.k == 1 and st.s_tot == 8

    def test_running_average_recurrence(self):
        rng = np.random.default_rng(0)
        st = IcansState.start(np.zeros(3), alpha=0.1, L=1.0, mu=0.9, b=1e-6, s_min=2)
        chi = np.zeros(3)
        xi = np.zeros(3)
        for _ in range(6):
            g = rng.normal(size=3)
            S = rng.exponential(size=3)
            icans_update(st, g, S)
            chi = 0.9 * chi + 0.1 * g
            xi = 0.9 * xi + 0.1 * S
        np.testing.assert_allclose(st.chi, chi)
        np.testing.assert_allclose(st.xi, xi)

    def test_bad_hyperparameters(self):
        for kw in (dict(alpha=0.0), dict(L=30.0), dict(mu=1.0), dict(b=0.0), dict(s_min=1)):
            hyper = dict(alpha=0.1, L=1.0, mu=0.99, b=1e-6, s_min=2) | kw
            with pytest.raises(ValueError):
                IcansState.start(np.zeros(2), **hyper)

    def test_ceiling(self):
        st = IcansState.start(np.zeros(2), alpha=0.1, L=1.0, s_ceiling=50)
        icans_update(st, np.array([1e-5, 1e-5]), np.array([10.0, 10.0]))
        assert st.s.max() <= 50

    def test_deterministic_gradients_fall_to_minimum(self):
        p = small_exact_problem()
        opt = ICANS(p, 1, alpha=0.5, L=1.0, rng=np.random.default_rng(0))
        trace = opt.run(np.array([0.3, 0.2, 0.1]), 300)
        costs = [r.exact_cost for r in trace.records]
        assert all(b <= a + 1e-12 for a, b in zip(costs, costs[1:]))
        assert all(np.all(r.shots == 2) for r in trace.iterations)


class TestCans:
    def test_shared_shot_formula(self):
        st = CansState.start(np.zeros(2), alpha=0.1, L=1.0, mu=0.5, b=1e-300)
        # after one update with mu = 0.5: xi = 4, chi = (0.5, 0) -> ceil(1.684) = 2
        cans_update(st, np.array([1.0, 0.0]), np.array([4.0, 4.0]))
        assert st.xi == pytest.approx(4.0)
        assert st.s == 2

    def test_deterministic_oracle_keeps_minimum(self):
        p = small_exact_problem()
        trace = CANS(p, alpha=0.5, L=1.0, rng=np.random.default_rng(0)).run(np.array([0.3, 0.2, 0.1]), 200)
        assert all(r.shots == 2 for r in trace.iterations)

    def test_first_step_matches_icans_with_equal_shots(self):
        p = VqeProblem()
        theta0 = np.random.default_rng(5).uniform(0, 2 * np.pi, p.n_params)
        a = ICANS(p, 1, rng=np.random.default_rng(11))
        b = CANS(p, rng=np.random.default_rng(11))
        a.initialize(theta0)
        b.initialize(theta0)
        np.testing.assert_array_equal(a.step().theta, b.step().theta)


class TestBaselines:
    def test_gd_zero_gradient(self):
        assert gd_step([1.0, 2.0], [0.0, 0.0], 0.1).theta.tolist() == [1.0, 2.0]

    def test_gd_arithmetic(self):
        assert gd_step([1.0], [2.0], 0.1).theta[0] == pytest.approx(0.8)

    def test_gd_quadratic_contracts(self):
        theta = np.array([1.0, -2.0])
        f = [float(theta @ theta)]
        for _ in range(10):
            theta = gd_step(theta, 2 * theta, 0.1, L=2.0).theta
            f.append(float(theta @ theta))
        np.testing.assert_allclose(f[1:], np.array(f[:-1]) * 0.64)

    def test_gd_warns_on_large_rate(self):
        with pytest.warns(UserWarning):
            gd_step([1.0], [1.0], 1.5, L=2.0)

    def test_adam_first_step_size(self):
        st = AdamState.zeros(3, alpha=0.1)
        rep = adam_step(st, np.zeros(3), np.array([3.0, -0.2, 50.0]))
        np.testing.assert_allclose(np.abs(rep.theta), 0.1, atol=1e-8)

    def test_adam_two_steps(self):
        st = AdamState.zeros(1, alpha=0.1)
        t1 = adam_step(st, [0.0], [1.0]).theta
        t2 = adam_step(st, t1, [1.0]).theta
        assert t1[0] == pytest.approx(-0.1, abs=1e-6)
        assert t2[0] - t1[0] == pytest.approx(-0.1, abs=1e-6)

    def test_adam_zero_gradient(self):
        st = AdamState.zeros(2)
        theta = np.array([0.5, 0.6])
        for _ in range(3):
            theta = adam_step(st, theta, np.zeros(2)).theta
        assert theta.tolist() == [0.5, 0.6]

    @pytest.mark.parametrize("delta", [1.0, -1.0])
    def test_spsa_gradient_example(self, delta):
        st = SpsaState(a=0.1, A=0.0, c=0.1, gamma_exp=0.101)
        captured = {}

        def f(rows, shots):
            captured["rows"] = rows
            return np.array([r[0] ** 2 for r in rows]), 0

        spsa_step(st, [1.0], f, 10, None, delta=np.array([delta]))
        plus, minus = (r[0] ** 2 for r in captured["rows"])
        assert spsa_gradient(plus, minus, 0.1, [delta])[0] == pytest.approx(2.0)

    def test_spsa_constant_cost(self):
        g = spsa_gradient(0.3, 0.3, 0.05, np.array([1.0, -1.0, 1.0]))
        assert g.tolist() == [0.0, 0.0, 0.0]

    def test_spsa_schedules(self):
        st = SpsaState(a=1.0, A=9.0, c=0.2)
        assert st.alpha_t() == pytest.approx(10**-0.602)
        assert st.c_t() == pytest.approx(0.2)
        st.t = 4
        assert st.c_t() == pytest.approx(0.2 / 5**0.101)

    def test_spsa_calibration_charged(self):
        p = VqeProblem(depth=1)
        opt = SPSA(p, shots=10, rng=np.random.default_rng(0))
        opt.initialize(p.initial_point(np.random.default_rng(1)))
        opt.prepare(10_000)
        assert opt.step().shots_spent == 2 * 10 + 2 * 10 * 4
        assert opt.step().shots_spent == 20

    def test_sinusoid_example(self):
        fit = fit_sinusoid(0.0, 3.0, 2.0, 2.0)
        assert (fit.offset, fit.amplitude, fit.phase) == pytest.approx((2.0, 1.0, 0.0))
        new, value, _, _ = soff_coordinate([0.0], 0, 3.0, exact_evaluator(lambda r: 2 + np.cos(r[0])), 5)
        assert new[0] == pytest.approx(np.pi)
        assert value == pytest.approx(1.0)

    def test_soff_flat_direction_unchanged(self):
        rep = soff_sweep([0.4, 1.1], [0, 1], exact_evaluator(lambda r: 2.0 + np.cos(r[0])), 3)
        assert rep.theta[1] == 1.1
        assert rep.notes["flat"] == [1]

    def test_soff_sweep_consumption(self):
        rep = soff_sweep([0.4, 1.1], [0, 1], exact_evaluator(lambda r: np.cos(r[0]) * np.cos(r[1])), 7)
        assert rep.shots_spent == 7 + 2 * 2 * 7

    def test_soff_local_optimality(self):
        rng = np.random.default_rng(2)
        p = CompilingProblem.random(rng, 3, 2)
        theta = rng.uniform(0, 2 * np.pi, p.n_params)
        f0 = p.exact(theta)
        for i in range(p.n_params):
            theta, f0, _, _ = soff_coordinate(theta, i, f0, exact_evaluator(p.exact), 1)
            assert abs(exact_gradient(p, theta)[i]) < 1e-6
            assert f0 == pytest.approx(p.exact(theta), abs=1e-12)

    def test_soff_first_iteration_costs_three_evaluations(self):
        p = VqeProblem(depth=1)
        trace = SOFF(p, shots=10, rng=np.random.default_rng(0)).run(np.zeros(p.n_params), 100)
        assert [r.consumed for r in trace.iterations[:3]] == [30, 20, 20]


class TestBudget:
    @pytest.mark.parametrize("name,shots", [("icans1", None), ("icans2", None), ("cans", None),
                                            ("gd", 10), ("adam", 10), ("spsa", 10), ("soff", 10)])
    def test_accounting(self, name, shots):
        rng = np.random.default_rng(3)
        p = VqeProblem(depth=1)
        opt = make_optimizer(name, p, shots=shots, rng=rng)
        trace = opt.run(p.initial_point(rng), 2000)
        consumed = [r.consumed for r in trace.iterations]
        assert sum(consumed) == trace.s_tot
        assert trace.s_tot >= 2000
        assert trace.s_tot - consumed[-1] < 2000
        s_tots = [r.s_tot for r in trace.records]
        assert all(b > a for a, b in zip(s_tots, s_tots[1:]))

    def test_icans_budget_example(self):
        rng = np.random.default_rng(0)
        p = VqeProblem()
        trace = icans_run(p, 1, 1000, rng)
        assert trace.records[1].consumed == 2 * 2 * 42
        assert trace.s_tot >= 1000
        assert trace.s_tot - trace.records[-1].consumed < 1000

    def test_checkpoint_absent_when_first_iteration_too_expensive(self):
        p = VqeProblem(depth=1)
        trace = SOFF(p, shots=1000, rng=np.random.default_rng(0)).run(np.zeros(p.n_params), 1000)
        assert trace.checkpoint(1000) is None
        assert trace.checkpoint(3000) is not None

    def test_resume_continues(self):
        p = VqeProblem(depth=1)
        opt = GradientDescent(p, shots=5, rng=np.random.default_rng(0))
        opt.initialize(np.zeros(p.n_params))
        opt.advance(100)
        first = opt.s_tot
        opt.advance(400)
        assert opt.s_tot >= 400 > first - 1

    def test_registry_errors(self):
        p = VqeProblem(depth=1)
        with pytest.raises(ValueError):
            make_optimizer("powell", p)
        with pytest.raises(ValueError):
            make_optimizer("adam", p)
        with pytest.raises(ValueError):
            make_optimizer("icans1", p, shots=10)

    def test_same_seed_same_trace(self):
        p = VqeProblem(depth=1)
        runs = []
        for _ in range(2):
            opt = make_optimizer("icans2", p, rng=np.random.default_rng(4))
            runs.append([r.exact_cost for r in opt.run(np.ones(p.n_params), 3000).records])
        assert runs[0] == runs[1]


class TestIcans2Guarantee:
    def test_logged_gains_nonnegative(self):
        rng = np.random.default_rng(6)
        p = CompilingProblem.random(rng, 2, 2)
        opt = ICANS(p, 2, rng=rng)
        trace = opt.run(p.initial_point(rng), 20_000)
        gains = np.concatenate([r.gain for r in trace.iterations])
        assert gains.min() >= -1e-12

    def test_icans1_can_go_negative(self):
        # with a large rate and noisy estimates the fixed-step variant has no such floor
        st = IcansState.start(np.zeros(1), alpha=0.1, L=19.0)
        rep = icans_update(st, np.array([0.01]), np.array([5.0]), variant=1)
        assert rep.gain[0] < 0
