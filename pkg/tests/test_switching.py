import itertools

import numpy as np
import pytest

from signet.errors import ScheduleError
from signet.graph import build_graph, weak_components
from signet.switching import (
    GraphLibrary,
    assumption_window,
    block_unions,
    build_signal,
    check_recurrence,
    check_ssb,
    graph_at,
    jointly_strongly_connected,
    lift,
    lifted_jointly_strongly_connected,
)


def edge_a():
    return build_graph(2, [(1, 2, 1.0)])


def edge_b():
    return build_graph(2, [(2, 1, 1.0)])


def alternating_signal(horizon=2.0, dwell=1.0):
    lib = GraphLibrary((edge_a(), edge_b()))
    repeats = int(horizon / (2 * dwell))
    schedule = {"pattern": [(dwell, 1), (dwell, 2)], "repeats": repeats}
    return build_signal(lib, schedule, tau_min=dwell)


def brute_force_common_gauge(library):
    n = library.n
    for signs in itertools.product((1.0, -1.0), repeat=n - 1):
        d = np.array((1.0,) + signs)
        if all(
            np.all(d[:, None] * g.adj * d[None, :] >= 0.0) for g in library.graphs
        ):
            return d
    return None


class TestBuildSignal:
    def test_valid_alternation(self):
        lib = GraphLibrary((edge_a(), edge_b()))
        s = build_signal(lib, [(0.0, 1), (1.0, 2)], tau_min=1.0, horizon=2.0)
        assert s.t0 == 0.0 and s.horizon == 2.0
        assert s.indices.tolist() == [0, 1]

    def test_dwell_violation_names_entry(self):
        lib = GraphLibrary((edge_a(), edge_b()))
        with pytest.raises(ScheduleError) as exc:
            build_signal(lib, [(0.0, 1), (0.5, 2)], tau_min=1.0, horizon=2.0)
        assert exc.value.interval == 1

    def test_fixed_topology_single_entry(self):
        lib = GraphLibrary((edge_a(),))
        s = build_signal(lib, [(0.0, 1)], tau_min=1.0, horizon=10.0)
        assert s.interval_count() == 1
        assert graph_at(s, 7.3) is lib.graphs[0]

    def test_index_out_of_range(self):
        lib = GraphLibrary((edge_a(),))
        with pytest.raises(ScheduleError):
            build_signal(lib, [(0.0, 2)], tau_min=1.0, horizon=2.0)
        with pytest.raises(ScheduleError):
            build_signal(lib, [(0.0, 0)], tau_min=1.0, horizon=2.0)

    def test_periodic_shorthand_matches_explicit(self):
        lib = GraphLibrary((edge_a(), edge_b()))
        periodic = build_signal(
            lib, {"pattern": [(1.0, 1), (1.5, 2)], "repeats": 2}, tau_min=1.0
        )
        explicit = build_signal(
            lib,
            [(0.0, 1), (1.0, 2), (2.5, 1), (3.5, 2)],
            tau_min=1.0,
            horizon=5.0,
        )
        assert np.array_equal(periodic.switch_times, explicit.switch_times)
        assert np.array_equal(periodic.indices, explicit.indices)
        assert periodic.horizon == explicit.horizon

    def test_horizon_must_exceed_last_switch(self):
        lib = GraphLibrary((edge_a(),))
        with pytest.raises(ScheduleError):
            build_signal(lib, [(0.0, 1), (1.0, 1)], tau_min=1.0, horizon=1.0)

    def test_truncated_final_dwell_is_allowed(self):
        lib = GraphLibrary((edge_a(), edge_b()))
        s = build_signal(lib, [(0.0, 1), (1.0, 2)], tau_min=1.0, horizon=1.25)
        assert s.horizon == 1.25


class TestGraphAt:
    def test_right_continuous_at_switch(self):
        s = alternating_signal()
        assert graph_at(s, 1.0) is s.library.graphs[1]

    def test_inside_interval(self):
        s = alternating_signal()
        assert graph_at(s, 0.25) is s.library.graphs[0]
        assert graph_at(s, 2.0) is s.library.graphs[1]

    def test_out_of_range(self):
        s = alternating_signal()
        with pytest.raises(ValueError):
            graph_at(s, -0.1)
        with pytest.raises(ValueError):
            graph_at(s, 2.1)


class TestRecurrence:
    def test_window_two_sees_both(self):
        s = alternating_signal(horizon=8.0)
        assert check_recurrence(s, 2.0)

    def test_half_window_fails(self):
        s = alternating_signal(horizon=8.0)
        assert not check_recurrence(s, 0.5)

    def test_fixed_topology_any_window(self):
        lib = GraphLibrary((edge_a(),))
        s = build_signal(lib, [(0.0, 1)], tau_min=1.0, horizon=10.0)
        for window in (0.01, 1.0, 9.99):
            assert check_recurrence(s, window)

    def test_rejects_undecidable_window(self):
        s = alternating_signal(horizon=8.0)
        with pytest.raises(ValueError):
            check_recurrence(s, 8.5)
        with pytest.raises(ValueError):
            check_recurrence(s, 0.0)

    def test_assumption_window_is_tight(self):
        s = alternating_signal(horizon=8.0)
        window = assumption_window(s)
        assert check_recurrence(s, window)
        assert not check_recurrence(s, window * 0.45)

    def test_missing_graph_has_no_window(self):
        lib = GraphLibrary((edge_a(), edge_b()))
        s = build_signal(lib, [(0.0, 1)], tau_min=1.0, horizon=5.0)
        assert assumption_window(s) is None


class TestSimultaneousBalance:
    def test_negative_digon_family(self):
        lib = GraphLibrary(
            (
                build_graph(2, [(1, 2, -1.0), (2, 1, -1.0)]),
                build_graph(2, [(2, 1, -2.0)]),
            )
        )
        oracle = brute_force_common_gauge(lib)
        assert oracle is not None and oracle.tolist() == [1.0, -1.0]
        gauge = check_ssb(lib)
        assert gauge is not None and gauge.signs.tolist() == [1.0, -1.0]

    def test_pair_with_both_signs(self):
        lib = GraphLibrary(
            (
                build_graph(2, [(1, 2, 1.0), (2, 1, 1.0)]),
                build_graph(2, [(1, 2, -1.0), (2, 1, -1.0)]),
            )
        )
        assert brute_force_common_gauge(lib) is None
        assert check_ssb(lib) is None

    def test_single_graph_reduces_to_balance(self):
        from signet.graph import check_structural_balance

        g = build_graph(3, [(1, 2, -1.0), (2, 1, -1.0), (2, 3, 1.0)])
        lib = GraphLibrary((g,))
        single = check_structural_balance(g)
        family = check_ssb(lib)
        assert family is not None
        assert np.array_equal(single.signs, family.signs)

    def test_common_gauge_certifies_every_member(self):
        rng = np.random.default_rng(41)
        hits = 0
        for _ in range(200):
            n = int(rng.integers(2, 6))
            m = int(rng.integers(1, 4))
            d = rng.choice([-1.0, 1.0], size=n)
            graphs = []
            for _ in range(m):
                mags = np.abs(rng.normal(size=(n, n)))
                mags[rng.random((n, n)) > 0.5] = 0.0
                np.fill_diagonal(mags, 0.0)
                graphs.append(
                    build_graph(
                        n,
                        [
                            (j + 1, i + 1, mags[i, j] * d[i] * d[j])
                            for i in range(n)
                            for j in range(n)
                            if mags[i, j] != 0.0
                        ],
                    )
                )
            lib = GraphLibrary(tuple(graphs))
            gauge = check_ssb(lib)
            assert gauge is not None
            hits += 1
            for g in lib.graphs:
                assert np.array_equal(gauge.conjugate(g.adj), np.abs(g.adj))
        assert hits == 200

    def test_individually_balanced_but_jointly_not(self):
        # Each graph is a balanced digon, but their gauges disagree.
        lib = GraphLibrary(
            (
                build_graph(2, [(1, 2, -1.0), (2, 1, -1.0)]),
                build_graph(2, [(1, 2, 1.0), (2, 1, 1.0)]),
            )
        )
        from signet.graph import check_structural_balance

        assert all(check_structural_balance(g) is not None for g in lib.graphs)
        assert check_ssb(lib) is None


class TestJointConnectivity:
    def test_alternation_blocks(self):
        s = alternating_signal(horizon=8.0)
        assert jointly_strongly_connected(s, 2)
        assert not jointly_strongly_connected(s, 1)

    def test_fixed_strongly_connected(self):
        digon = build_graph(2, [(1, 2, 1.0), (2, 1, 1.0)])
        s = build_signal(GraphLibrary((digon,)), [(0.0, 1)], tau_min=1.0, horizon=5.0)
        assert jointly_strongly_connected(s, 1)

    def test_rejects_bad_block(self):
        s = alternating_signal()
        with pytest.raises(ValueError):
            jointly_strongly_connected(s, 0)

    def test_window_blocks_cover_whole_library(self):
        # Whenever recurrence holds for a window, blocks of int(T/tau)+1
        # consecutive intervals recover the union of the whole library.
        rng = np.random.default_rng(43)
        for _ in range(50):
            m = int(rng.integers(2, 5))
            n = int(rng.integers(2, 5))
            graphs = []
            for _ in range(m):
                adj = rng.normal(size=(n, n))
                adj[rng.random((n, n)) > 0.4] = 0.0
                np.fill_diagonal(adj, 0.0)
                graphs.append(build_graph(n, [
                    (j + 1, i + 1, adj[i, j])
                    for i in range(n) for j in range(n) if adj[i, j] != 0.0
                ]))
            lib = GraphLibrary(tuple(graphs))
            tau = 0.5
            pattern = [(tau + float(rng.integers(0, 4)) * 0.25, k + 1) for k in rng.permutation(m)]
            s = build_signal(lib, {"pattern": pattern, "repeats": 6}, tau_min=tau)
            window = assumption_window(s)
            assert window is not None and check_recurrence(s, window)
            block = int(window / s.tau_min) + 1
            total = lib.union().support
            for union in block_unions(s, block):
                assert np.array_equal(union.support, total)


class TestLift:
    def test_conflicting_digon_becomes_four_cycle(self):
        g = build_graph(2, [(1, 2, 1.0), (2, 1, -1.0)])
        lifted = lift(g)
        expected = np.array(
            [
                [0.0, 0.0, 0.0, 1.0],
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
            ]
        )
        assert np.array_equal(lifted.adj_lifted, expected)

    def test_nonnegative_graph_block_diagonal(self):
        g = build_graph(3, [(1, 2, 1.0), (2, 3, 2.0), (3, 1, 0.5)])
        lifted = lift(g)
        n = 3
        assert np.array_equal(lifted.adj_lifted[:n, :n], g.adj)
        assert np.array_equal(lifted.adj_lifted[n:, n:], g.adj)
        assert np.all(lifted.adj_lifted[:n, n:] == 0.0)

    def test_zero_graph(self):
        lifted = lift(build_graph(2, []))
        assert np.array_equal(lifted.adj_lifted, np.zeros((4, 4)))

    def test_block_laplacian_identity(self):
        rng = np.random.default_rng(47)
        from signet.graph import SignedDigraph, laplacian_parts

        for _ in range(100):
            n = int(rng.integers(1, 6))
            adj = rng.normal(size=(n, n))
            adj[rng.random((n, n)) > 0.5] = 0.0
            np.fill_diagonal(adj, 0.0)
            g = SignedDigraph(n, adj)
            lifted = lift(g)
            parts = laplacian_parts(g)
            base = parts.base()
            coupling = parts.antagonistic_coupling
            expected = np.block([[base, -coupling], [-coupling, base]])
            assert np.abs(lifted.laplacian() - expected).max() <= 1e-12

    def test_split_support_iff_no_negative_edges(self):
        rng = np.random.default_rng(53)
        for _ in range(100):
            n = int(rng.integers(2, 6))
            adj = rng.normal(size=(n, n))
            adj[rng.random((n, n)) > 0.5] = 0.0
            np.fill_diagonal(adj, 0.0)
            d = rng.choice([-1.0, 1.0], size=n)
            balanced = np.abs(adj) * np.outer(d, d)
            from signet.graph import SignedDigraph

            g = SignedDigraph(n, balanced)
            lifted = lift(g)
            support = lifted.adj_lifted > 0.0
            labels = weak_components(support)
            copies_disconnected = np.all(labels[:n][:, None] != labels[n:][None, :]) or (
                not support[:n, n:].any() and not support[n:, :n].any()
            )
            has_negative = bool((balanced < 0).any())
            assert copies_disconnected == (not has_negative)


class TestLiftedJointConnectivity:
    def test_unbalanced_family_is_jointly_connected_after_lift(self):
        a = build_graph(2, [(1, 2, 1.0), (2, 1, 1.0)])
        b = build_graph(2, [(1, 2, -1.0), (2, 1, -1.0)])
        lib = GraphLibrary((a, b))
        s = build_signal(
            lib, {"pattern": [(1.0, 1), (1.0, 2)], "repeats": 4}, tau_min=1.0
        )
        assert check_ssb(lib) is None
        assert lifted_jointly_strongly_connected(s, 2)

    def test_balanced_family_lift_stays_split(self):
        b = build_graph(2, [(1, 2, -1.0), (2, 1, -1.0)])
        lib = GraphLibrary((b,))
        s = build_signal(lib, [(0.0, 1)], tau_min=1.0, horizon=4.0)
        # One balanced graph: the double cover splits into two components.
        assert not lifted_jointly_strongly_connected(s, 1)
