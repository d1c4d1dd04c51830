import io
import math

import numpy as np
import pytest

from signet.dynamics import (
    VERDICT_BIPARTITE,
    VERDICT_STABLE,
    VERDICT_UNDETERMINED,
    classify,
    estimate_rate,
    predicted_limit,
    simulate,
    stationary_vector,
)
from signet.errors import NotConvergedError, PreconditionError
from signet.graph import build_graph
from signet.switching import GraphLibrary, build_signal, check_ssb
from signet.transition import unsigned_transition
from signet.verify import ScenarioSpec, generate_scenario


def fixed_signal(graph, horizon=60.0):
    return build_signal(
        GraphLibrary((graph,)), [(0.0, 1)], tau_min=1.0, horizon=horizon
    )


def antagonistic_digon():
    return build_graph(2, [(1, 2, -1.0), (2, 1, -1.0)])


def conflicting_digon():
    return build_graph(2, [(1, 2, 1.0), (2, 1, -1.0)])


class TestSimulate:
    def test_zero_initial_state(self):
        s = fixed_signal(antagonistic_digon(), horizon=10.0)
        trajectory = simulate(s, [0.0, 0.0], 0.0, 10.0, 0.5)
        assert np.abs(trajectory.states).max() == 0.0

    def test_antagonistic_digon_closed_form(self):
        s = fixed_signal(antagonistic_digon(), horizon=20.0)
        trajectory = simulate(s, [1.0, 0.0], 0.0, 20.0, 0.25)
        for t, state in zip(trajectory.times, trajectory.states):
            e = math.exp(-2.0 * t)
            expected = 0.5 * np.array([1 + e, -1 + e])
            assert np.abs(state - expected).max() < 1e-12
        assert np.abs(trajectory.states[-1] - [0.5, -0.5]).max() < 1e-12

    def test_rotation_decay(self):
        s = fixed_signal(conflicting_digon(), horizon=20.0)
        trajectory = simulate(s, [1.0, 0.0], 0.0, 20.0, 0.5)
        for t, state in zip(trajectory.times, trajectory.states):
            expected = math.exp(-t) * np.array([math.cos(t), math.sin(t)])
            assert np.abs(state - expected).max() < 1e-12

    def test_switch_instants_are_sampled(self):
        lib = GraphLibrary((antagonistic_digon(), conflicting_digon()))
        s = build_signal(
            lib, {"pattern": [(0.7, 1), (0.7, 2)], "repeats": 3}, tau_min=0.5
        )
        trajectory = simulate(s, [1.0, 0.0], 0.0, s.horizon, 0.5)
        for tk in s.switch_times:
            assert np.any(np.isclose(trajectory.times, tk, atol=0.0))

    def test_dimension_mismatch(self):
        s = fixed_signal(antagonistic_digon())
        with pytest.raises(ValueError):
            simulate(s, [1.0, 0.0, 0.0], 0.0, 5.0, 0.5)

    def test_uniform_stability_bound(self):
        for seed in range(15):
            library, signal = generate_scenario(
                ScenarioSpec(seed=seed, sign_policy="free", horizon=10.0)
            )
            rng = np.random.default_rng(seed)
            x0 = rng.uniform(-2, 2, size=library.n)
            trajectory = simulate(signal, x0, signal.t0, signal.horizon, 0.5)
            assert np.abs(trajectory.states).max() <= np.abs(x0).max() + 1e-9

    def test_csv_output(self):
        s = fixed_signal(antagonistic_digon(), horizon=2.0)
        trajectory = simulate(s, [1.0, 0.0], 0.0, 2.0, 1.0)
        buffer = io.StringIO()
        trajectory.write_csv(buffer)
        lines = buffer.getvalue().strip().splitlines()
        assert lines[0] == "t,x1,x2"
        assert len(lines) == len(trajectory.times) + 1


class TestStationaryVector:
    def test_symmetric_digon(self):
        g = build_graph(2, [(1, 2, 1.0), (2, 1, 1.0)])
        nu = stationary_vector(fixed_signal(g), 0.0, 40.0)
        assert np.abs(nu - [0.5, 0.5]).max() < 1e-12

    def test_weighted_digon(self):
        # Unsigned weights 2 and 1 give stationary shares 1/3 and 2/3.
        g = build_graph(2, [(2, 1, 2.0), (1, 2, 1.0)])
        nu = stationary_vector(fixed_signal(g), 0.0, 50.0)
        assert np.abs(nu - [1.0 / 3.0, 2.0 / 3.0]).max() < 1e-10

    def test_single_node(self):
        g = build_graph(1, [])
        nu = stationary_vector(fixed_signal(g, horizon=5.0), 0.0, 3.0)
        assert nu.tolist() == [1.0]

    def test_sums_to_one_exactly(self):
        for seed in range(10):
            library, signal = generate_scenario(
                ScenarioSpec(seed=seed, sign_policy="free", horizon=200.0)
            )
            nu = stationary_vector(signal, signal.t0, signal.horizon, tol=1e-6)
            assert nu.min() >= 0.0
            assert nu.sum() == 1.0

    def test_not_converged_carries_spread(self):
        g = build_graph(2, [(1, 2, 1.0), (2, 1, 1.0)])
        s = fixed_signal(g, horizon=60.0)
        with pytest.raises(NotConvergedError) as exc:
            stationary_vector(s, 0.0, 0.5, tol=1e-12)
        spread = float(np.ptp(unsigned_transition(s, 0.0, 0.5), axis=0).max())
        assert exc.value.spread == pytest.approx(spread)

    def test_precondition_failure(self):
        s = fixed_signal(build_graph(2, [(1, 2, 1.0)]), horizon=30.0)
        with pytest.raises(PreconditionError):
            stationary_vector(s, 0.0, 20.0)


class TestPredictedLimit:
    def test_balanced_digon(self):
        limit = predicted_limit(fixed_signal(antagonistic_digon()), 0.0, 40.0)
        assert np.abs(limit - np.array([[0.5, -0.5], [-0.5, 0.5]])).max() < 1e-12

    def test_conflicting_digon_gives_zero(self):
        limit = predicted_limit(fixed_signal(conflicting_digon()), 0.0, 40.0)
        assert np.array_equal(limit, np.zeros((2, 2)))

    def test_nonnegative_graph_is_plain_mixing(self):
        g = build_graph(2, [(1, 2, 1.0), (2, 1, 1.0)])
        limit = predicted_limit(fixed_signal(g), 0.0, 40.0)
        assert np.abs(limit - 0.5 * np.ones((2, 2))).max() < 1e-12

    def test_absent_when_disconnected(self):
        s = fixed_signal(build_graph(2, [(1, 2, 1.0)]), horizon=30.0)
        assert predicted_limit(s, 0.0) is None


class TestEstimateRate:
    def test_mixing_rate_two(self):
        s = fixed_signal(antagonistic_digon(), horizon=20.0)
        limit = np.array([[0.5, -0.5], [-0.5, 0.5]])
        fit = estimate_rate(s, 0.0, limit, np.linspace(0.5, 14.0, 30))
        assert abs(fit.rate - 2.0) < 1e-3
        assert fit.r_squared > 0.999

    def test_rotation_rate_one(self):
        s = fixed_signal(conflicting_digon(), horizon=40.0)
        fit = estimate_rate(s, 0.0, np.zeros((2, 2)), np.linspace(0.1, 30.0, 301))
        assert abs(fit.rate - 1.0) < 0.01

    def test_rejects_when_at_floor(self):
        s = fixed_signal(antagonistic_digon(), horizon=60.0)
        limit = np.array([[0.5, -0.5], [-0.5, 0.5]])
        with pytest.raises(ValueError):
            estimate_rate(s, 0.0, limit, [40.0, 45.0, 50.0])


class TestClassify:
    def test_balanced_digon(self):
        report = classify(
            fixed_signal(antagonistic_digon(), horizon=30.0),
            0.0,
            t_long=20.0,
            x0=[1.0, 0.0],
        )
        assert report.verdict == VERDICT_BIPARTITE
        assert report.graph_verdict == VERDICT_BIPARTITE
        assert report.inconsistency is None
        assert report.gauge.signs.tolist() == [1.0, -1.0]
        assert np.abs(report.nu - [0.5, 0.5]).max() < 1e-10
        assert report.c == pytest.approx(0.5, abs=1e-10)
        assert abs(report.rate - 2.0) < 0.05

    def test_conflicting_digon_is_stable(self):
        report = classify(fixed_signal(conflicting_digon(), horizon=60.0), 0.0, t_long=40.0)
        assert report.verdict == VERDICT_STABLE
        assert report.residual < 1e-6
        assert abs(report.rate - 1.0) < 0.05

    def test_empty_graph_undetermined(self):
        report = classify(fixed_signal(build_graph(2, []), horizon=30.0), 0.0)
        assert report.verdict == VERDICT_UNDETERMINED
        assert "strongly connected" in report.reason

    def test_default_horizon_pilot(self):
        report = classify(fixed_signal(antagonistic_digon(), horizon=80.0), 0.0)
        assert report.verdict == VERDICT_BIPARTITE

    def test_single_agent_keeps_its_opinion(self):
        report = classify(
            fixed_signal(build_graph(1, []), horizon=10.0), 0.0, x0=[0.75]
        )
        assert report.verdict == VERDICT_BIPARTITE
        assert report.nu.tolist() == [1.0]
        assert report.c == pytest.approx(0.75)
        assert np.array_equal(report.phi_limit, np.ones((1, 1)))

    def test_json_dict_round_trips(self):
        import json

        report = classify(
            fixed_signal(antagonistic_digon(), horizon=30.0), 0.0, x0=[1.0, 0.0]
        )
        doc = json.loads(json.dumps(report.to_json_dict()))
        assert doc["verdict"] == VERDICT_BIPARTITE
        assert doc["gauge"] == [1, -1]

    def test_classifier_matches_ground_truth(self):
        for policy, expected in (
            ("balanced-forced", VERDICT_BIPARTITE),
            ("unbalanced-forced", VERDICT_STABLE),
        ):
            for seed in range(10):
                library, signal = generate_scenario(
                    ScenarioSpec(
                        seed=seed,
                        sign_policy=policy,
                        connectivity="strong-union",
                        n_range=(2, 5),
                        weight_range=(1.0, 3.0),
                        tau_min=0.4,
                        dwell_range=(0.4, 1.0),
                        horizon=400.0,
                    )
                )
                report = classify(signal, signal.t0)
                assert report.verdict == expected, (policy, seed)
                assert report.inconsistency is None


class TestGaugeCovariance:
    def test_signed_trajectory_is_gauged_unsigned(self):
        for seed in range(12):
            library, signal = generate_scenario(
                ScenarioSpec(
                    seed=seed,
                    sign_policy="balanced-forced",
                    horizon=10.0,
                )
            )
            gauge = check_ssb(library)
            assert gauge is not None
            unsigned_graphs = tuple(
                build_graph(
                    g.n,
                    [
                        (j + 1, i + 1, abs(g.adj[i, j]))
                        for i in range(g.n)
                        for j in range(g.n)
                        if g.adj[i, j] != 0.0
                    ],
                )
                for g in library.graphs
            )
            unsigned_signal = build_signal(
                GraphLibrary(unsigned_graphs),
                [(float(t), int(i) + 1) for t, i in zip(signal.switch_times, signal.indices)],
                tau_min=signal.tau_min,
                horizon=signal.horizon,
            )
            rng = np.random.default_rng(seed)
            x0 = rng.uniform(-1, 1, size=library.n)
            signed = simulate(signal, x0, signal.t0, signal.horizon, 0.7)
            unsigned = simulate(
                unsigned_signal, gauge.signs * x0, signal.t0, signal.horizon, 0.7
            )
            assert np.abs(
                gauge.signs[None, :] * unsigned.states - signed.states
            ).max() < 1e-9
