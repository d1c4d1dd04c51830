import math

import numpy as np
import pytest

from signet._kernels import BACKEND, _fallback, backends


def _random_cases(rng, count):
    for _ in range(count):
        n = int(rng.integers(1, 9))
        yield rng.normal(size=(n, n)) * rng.uniform(0.05, 4.0)


class TestFallbackExpm:
    def test_zero_matrix(self):
        assert np.array_equal(_fallback.expm(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        out = _fallback.expm(np.diag([1.0, -2.0]))
        expected = np.diag([math.e, math.exp(-2.0)])
        assert np.abs(out - expected).max() < 1e-14

    def test_symmetric_closed_form(self):
        # Eigenvalues 0 and -2 give the classic mixing form.
        out = _fallback.expm(-np.array([[1.0, 1.0], [1.0, 1.0]]))
        e = math.exp(-2.0)
        expected = 0.5 * np.array([[1 + e, -1 + e], [-1 + e, 1 + e]])
        assert np.abs(out - expected).max() < 1e-15

    def test_doubling_identity(self):
        rng = np.random.default_rng(0)
        for mat in _random_cases(rng, 100):
            whole = _fallback.expm(mat)
            half = _fallback.expm(mat / 2.0)
            scale = max(1.0, np.abs(whole).max())
            assert np.abs(whole - half @ half).max() / scale < 1e-12

    def test_against_scipy(self):
        scipy_linalg = pytest.importorskip("scipy.linalg")
        rng = np.random.default_rng(1)
        for mat in _random_cases(rng, 100):
            ours = _fallback.expm(mat)
            reference = scipy_linalg.expm(mat)
            scale = max(1.0, np.abs(reference).max())
            assert np.abs(ours - reference).max() / scale < 1e-12


class TestChainProduct:
    def test_matches_sequential(self):
        rng = np.random.default_rng(2)
        gens = rng.normal(size=(5, 3, 3))
        dts = rng.uniform(0.1, 1.0, size=5)
        out = _fallback.chain_product(gens, dts)
        manual = np.eye(3)
        for g, dt in zip(gens, dts):
            manual = _fallback.expm(g * dt) @ manual
        assert np.abs(out - manual).max() < 1e-13

    def test_empty_chain_is_identity(self):
        out = _fallback.chain_product(np.zeros((0, 4, 4)), np.zeros(0))
        assert np.array_equal(out, np.eye(4))


class TestStateStacks:
    def test_forward_backward_consistency(self):
        rng = np.random.default_rng(3)
        steps = np.stack([_fallback.expm(rng.normal(size=(3, 3)) * 0.1) for _ in range(7)])
        forward = _fallback.forward_states(steps, np.eye(3))
        backward = _fallback.backward_states(steps)
        total = forward[-1]
        for j in range(8):
            assert np.abs(backward[j] @ forward[j] - total).max() < 1e-12


@pytest.mark.skipif("compiled" not in backends(), reason="extension not built")
class TestCompiledBackend:
    def test_backend_reported(self):
        assert BACKEND in ("compiled", "python")

    def test_expm_parity(self):
        core = backends()["compiled"]
        rng = np.random.default_rng(4)
        for mat in _random_cases(rng, 200):
            a = _fallback.expm(mat)
            b = core.expm(mat)
            scale = max(1.0, np.abs(a).max())
            assert np.abs(a - b).max() / scale < 1e-13

    def test_stack_parity(self):
        core = backends()["compiled"]
        rng = np.random.default_rng(5)
        m, n = 30, 4
        steps = np.stack([_fallback.expm(-np.abs(rng.normal(size=(n, n))) * 0.1) for _ in range(m)])
        init = np.eye(n)
        assert np.abs(
            _fallback.forward_states(steps, init) - core.forward_states(steps, init)
        ).max() < 1e-13
        assert np.abs(
            _fallback.backward_states(steps) - core.backward_states(steps)
        ).max() < 1e-13

        widths = rng.uniform(1e-3, 1e-2, size=m)
        couplings = np.abs(rng.normal(size=(m, n, n)))
        assert np.abs(
            _fallback.series_levels(steps, widths, couplings, 6)
            - core.series_levels(steps, widths, couplings, 6)
        ).max() < 1e-13
        left = np.abs(rng.normal(size=(m + 1, n, n)))
        right = np.abs(rng.normal(size=(m + 1, n, n)))
        assert np.abs(
            _fallback.trapezoid_triple(left, couplings, right, widths)
            - core.trapezoid_triple(left, couplings, right, widths)
        ).max() < 1e-12

    def test_chain_parity(self):
        core = backends()["compiled"]
        rng = np.random.default_rng(6)
        gens = rng.normal(size=(12, 5, 5))
        dts = rng.uniform(0.05, 0.8, size=12)
        a = _fallback.chain_product(gens, dts)
        b = core.chain_product(gens, dts)
        assert np.abs(a - b).max() / max(1.0, np.abs(a).max()) < 1e-12
