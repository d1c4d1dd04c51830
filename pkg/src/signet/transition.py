"""State transition matrices over switching signed digraphs.

The topology is piecewise constant, so transition matrices are exact
products of matrix exponentials over the dwell intervals, ordered latest on
the left. Four flows share that machinery:

* the signed flow itself,
* its unsigned companion (a stochastic matrix),
* the cooperative "base" flow (nonnegative, substochastic), and
* the nonnegative double-cover flow over 2n nodes, whose top blocks are the
  even and odd parts of the signed transition matrix.

A truncated nested-integral series and a first-kind integral identity are
provided as independent cross-checks of the same quantities; both evaluate
their integrals with the composite trapezoid rule while the required
transition factors stay exact exponential products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InternalConsistencyError
from .graph import laplacian_parts
from .switching import SwitchingSignal, lift

# Extracted double-cover blocks must pair up at least this tightly.
BLOCK_SYMMETRY_TOL = 1e-10

_STOCHASTIC_TOL = 1e-10
_ENTRY_TOL = 1e-12


def norm_inf(matrix: np.ndarray) -> float:
    """Induced infinity norm (maximum absolute row sum)."""
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0.0
    return float(np.abs(matrix).sum(axis=1).max())


def matrix_exponential(matrix) -> np.ndarray:
    """exp of a square real matrix by scaling and squaring."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix exponential of non-finite input")
    return _kernels.expm(matrix)


class FlowGenerators:
    """Per-library generators of the four flows, built once per walk."""

    def __init__(self, signal: SwitchingSignal):
        self.signed = []
        self.unsigned = []
        self.base = []
        self.lifted = []
        self.coupling = []
        for g in signal.library.graphs:
            parts = laplacian_parts(g)
            self.signed.append(-parts.laplacian)
            self.unsigned.append(-parts.laplacian_abs)
            self.base.append(-parts.base())
            self.coupling.append(parts.antagonistic_coupling)
            self.lifted.append(-lift(g).laplacian())

    def family(self, kind: str):
        return {
            "signed": self.signed,
            "unsigned": self.unsigned,
            "base": self.base,
            "lifted": self.lifted,
        }[kind]


def _require_span(s: SwitchingSignal, t0: float, t: float):
    if t < t0:
        raise ValueError(f"reversed time span [{t0}, {t}]")
    if not (s.t0 <= t0 and t <= s.horizon):
        raise ValueError(
            f"span [{t0}, {t}] outside record [{s.t0}, {s.horizon}]"
        )


def _chain(s: SwitchingSignal, t0: float, t: float, gens) -> np.ndarray:
    dim = gens[0].shape[0]
    segs = list(s.segments(t0, t))
    if not segs:
        return np.eye(dim)
    mats = np.stack([gens[idx] for _, idx in segs])
    durations = np.array([dur for dur, _ in segs])
    return _kernels.chain_product(mats, durations)


def transition_matrix(s: SwitchingSignal, t0: float, t: float) -> np.ndarray:
    """Signed-flow transition matrix over [t0, t]."""
    _require_span(s, t0, t)
    return _chain(s, t0, t, FlowGenerators(s).signed)


def unsigned_transition(s: SwitchingSignal, t0: float, t: float) -> np.ndarray:
    """Transition matrix of the unsigned companion flow; rows sum to one."""
    _require_span(s, t0, t)
    out = _chain(s, t0, t, FlowGenerators(s).unsigned)
    if np.abs(out.sum(axis=1) - 1.0).max() > _STOCHASTIC_TOL:
        raise InternalConsistencyError("unsigned transition lost stochasticity")
    if out.min() < -_ENTRY_TOL:
        raise InternalConsistencyError("unsigned transition went negative")
    return out


@dataclass(frozen=True, eq=False)
class TransitionBundle:
    """All companion transition matrices over one span, plus their residuals.

    ``phi`` is the signed flow, ``phi_even``/``phi_odd`` its nonnegative
    parts read off the double cover, ``phi_abs`` the unsigned flow,
    ``phi_base`` the cooperative part alone, and ``psi`` the full 2n-by-2n
    double-cover matrix.
    """

    t0: float
    t: float
    phi: np.ndarray
    phi_even: np.ndarray
    phi_odd: np.ndarray
    phi_abs: np.ndarray
    psi: np.ndarray
    phi_base: np.ndarray

    def residuals(self) -> dict[str, float]:
        """Named violations of the structural identities; all near zero.

        decomposition: phi vs even minus odd
        sum:           even plus odd vs the unsigned flow
        envelope:      entrywise excess of |phi| over the unsigned flow
        norm:          excess of the infinity norm of phi over one
        block_symmetry: mismatch between paired double-cover blocks
        """
        n = self.phi.shape[0]
        top_left = self.psi[:n, :n]
        top_right = self.psi[:n, n:]
        bottom_left = self.psi[n:, :n]
        bottom_right = self.psi[n:, n:]
        return {
            "decomposition": norm_inf(self.phi - (self.phi_even - self.phi_odd)),
            "sum": norm_inf(self.phi_even + self.phi_odd - self.phi_abs),
            "envelope": float(
                max(0.0, (np.abs(self.phi) - self.phi_abs).max())
            ),
            "norm": max(0.0, norm_inf(self.phi) - 1.0),
            "block_symmetry": max(
                norm_inf(top_left - bottom_right),
                norm_inf(top_right - bottom_left),
            ),
        }

    def to_report(self) -> dict:
        """JSON-ready dict: matrices as row-major nested lists plus residuals."""
        return {
            "t0": self.t0,
            "t": self.t,
            "phi": self.phi.tolist(),
            "phi_even": self.phi_even.tolist(),
            "phi_odd": self.phi_odd.tolist(),
            "phi_abs": self.phi_abs.tolist(),
            "psi": self.psi.tolist(),
            "phi_base": self.phi_base.tolist(),
            "residuals": self.residuals(),
        }


def bundle_from_parts(
    t0: float,
    t: float,
    phi: np.ndarray,
    psi: np.ndarray,
    phi_abs: np.ndarray,
    phi_base: np.ndarray,
) -> TransitionBundle:
    """Assemble a bundle, reading the even/odd parts off the double cover.

    The double-cover blocks stay pairwise equal under products and
    exponentials; extraction verifies that to BLOCK_SYMMETRY_TOL and fails
    loudly rather than returning silently skewed parts.
    """
    n = phi.shape[0]
    skew = max(
        norm_inf(psi[:n, :n] - psi[n:, n:]), norm_inf(psi[:n, n:] - psi[n:, :n])
    )
    if skew > BLOCK_SYMMETRY_TOL:
        raise InternalConsistencyError(f"double-cover blocks diverged by {skew:.3e}")
    return TransitionBundle(
        t0=float(t0),
        t=float(t),
        phi=phi,
        phi_even=psi[:n, :n].copy(),
        phi_odd=psi[:n, n:].copy(),
        phi_abs=phi_abs,
        psi=psi,
        phi_base=phi_base,
    )


def lifted_transition(s: SwitchingSignal, t0: float, t: float) -> TransitionBundle:
    """Full bundle over [t0, t], with the even/odd parts from the double cover."""
    _require_span(s, t0, t)
    gens = FlowGenerators(s)
    return bundle_from_parts(
        t0,
        t,
        phi=_chain(s, t0, t, gens.signed),
        psi=_chain(s, t0, t, gens.lifted),
        phi_abs=_chain(s, t0, t, gens.unsigned),
        phi_base=_chain(s, t0, t, gens.base),
    )


def _quadrature_grid(s: SwitchingSignal, t0: float, t: float, dt: float):
    """Step widths and library positions of a switch-aligned trapezoid grid.

    Each dwell segment intersecting [t0, t] is subdivided uniformly into
    steps no longer than about ``dt``, so no step straddles a switch and the
    integrands stay smooth inside every step. Returns (widths, positions),
    one entry per step.
    """
    widths: list[float] = []
    positions: list[int] = []
    for dur, idx in s.segments(t0, t):
        pieces = max(1, int(round(dur / dt)))
        widths.extend([dur / pieces] * pieces)
        positions.extend([idx] * pieces)
    return np.array(widths), positions


def _grid_propagators(widths, positions, gens) -> np.ndarray:
    """One exponential per step; equal steps of one segment share it."""
    dim = gens[0].shape[0]
    steps = np.empty((len(widths), dim, dim))
    cache: dict[tuple[int, float], np.ndarray] = {}
    for j, (width, idx) in enumerate(zip(widths, positions)):
        key = (idx, float(width))
        if key not in cache:
            cache[key] = _kernels.expm(gens[idx] * width)
        steps[j] = cache[key]
    return steps


def peano_baker_truncated(
    s: SwitchingSignal, t0: float, t: float, order: int, dt: float
):
    """Truncated nested-integral series for the signed flow and its parts.

    Returns (phi_k, even_k, odd_k): the alternating sum of the series levels
    up to ``order``, and the sums of its even and odd levels. Level zero is
    the cooperative base flow; each deeper level integrates the previous one
    against the antagonistic coupling. Intended as an independent oracle for
    lifted_transition on short spans; cost grows linearly in both ``order``
    and the node count.
    """
    _require_span(s, t0, t)
    if order < 0:
        raise ValueError(f"truncation order must be nonnegative, got {order}")
    if not dt > 0.0:
        raise ValueError(f"quadrature step must be positive, got {dt}")
    gens = FlowGenerators(s)
    n = s.library.n
    widths, positions = _quadrature_grid(s, t0, t, dt)
    if len(widths) == 0:
        levels = np.zeros((order + 1, n, n))
        levels[0] = np.eye(n)
    else:
        steps = _grid_propagators(widths, positions, gens.base)
        coupling = np.stack([gens.coupling[idx] for idx in positions])
        levels = _kernels.series_levels(steps, widths, coupling, order)
    signs = np.where(np.arange(order + 1) % 2 == 0, 1.0, -1.0)
    phi_k = np.einsum("k,kab->ab", signs, levels)
    even_k = levels[0::2].sum(axis=0)
    odd_k = levels[1::2].sum(axis=0)
    return phi_k, even_k, odd_k


def volterra_residual(s: SwitchingSignal, t0: float, t: float, dt: float) -> float:
    """Defect of the first-kind integral identity tying the signed flow to
    its cooperative base, evaluated by the trapezoid rule.

    Exactly zero in theory; the returned value is pure quadrature error and
    shrinks at second order in ``dt``.
    """
    _require_span(s, t0, t)
    if not dt > 0.0:
        raise ValueError(f"quadrature step must be positive, got {dt}")
    gens = FlowGenerators(s)
    n = s.library.n
    widths, positions = _quadrature_grid(s, t0, t, dt)
    if len(widths) == 0:
        return 0.0
    base_steps = _grid_propagators(widths, positions, gens.base)
    signed_steps = _grid_propagators(widths, positions, gens.signed)
    forward = _kernels.forward_states(signed_steps, np.eye(n))
    backward = _kernels.backward_states(base_steps)
    coupling = np.stack([gens.coupling[idx] for idx in positions])
    integral = _kernels.trapezoid_triple(backward, coupling, forward, widths)
    return norm_inf(forward[len(widths)] - backward[0] + integral)


class TransitionAccumulator:
    """Extends a transition matrix incrementally along nondecreasing times.

    Useful when one walk needs the matrix at many sample instants: each call
    multiplies only the exponentials of the newly covered stretch, and equal
    step lengths inside one dwell interval share a cached exponential.
    """

    def __init__(self, signal: SwitchingSignal, t0: float, kind: str = "signed"):
        if not (signal.t0 <= t0 <= signal.horizon):
            raise ValueError(f"start {t0} outside record")
        self._signal = signal
        self._gens = FlowGenerators(signal).family(kind)
        self._t = float(t0)
        self._value = np.eye(self._gens[0].shape[0])
        self._cache: dict[tuple[int, float], np.ndarray] = {}

    @property
    def time(self) -> float:
        return self._t

    def value_at(self, t: float) -> np.ndarray:
        """Transition matrix from the walk's start to t (t nondecreasing)."""
        if t < self._t - 1e-12:
            raise ValueError(
                f"accumulator runs forward only: {t} < current {self._t}"
            )
        for dur, idx in self._signal.segments(self._t, max(t, self._t)):
            key = (idx, dur)
            step = self._cache.get(key)
            if step is None:
                step = _kernels.expm(self._gens[idx] * dur)
                self._cache[key] = step
            self._value = step @ self._value
        self._t = max(t, self._t)
        return self._value.copy()
