"""Switching signals over a finite graph family.

A recorded signal covers a finite span [t0, horizon]; all verdicts offered
here (recurrence, joint connectivity, simultaneous balance) are therefore
"on record". The graph active on [t_k, t_{k+1}) is the one scheduled at t_k,
so signals are right-continuous at switch instants, and the final interval
runs through the horizon (a record may truncate its last dwell, so only the
gaps between switches are held to the dwell floor).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import ScheduleError
from .graph import (
    GaugeVector,
    SignedDigraph,
    UnionGraph,
    gauge_from_sign_constraints,
    sign_split,
    strongly_connected_support,
    union_graphs,
)


@dataclass(frozen=True, eq=False)
class GraphLibrary:
    """Ordered finite family of same-order signed digraphs."""

    graphs: tuple[SignedDigraph, ...]

    def __post_init__(self):
        graphs = tuple(self.graphs)
        if not graphs:
            raise ScheduleError("graph library may not be empty")
        n = graphs[0].n
        for g in graphs:
            if g.n != n:
                raise ScheduleError(f"library mixes node counts {g.n} and {n}")
        object.__setattr__(self, "graphs", graphs)

    @property
    def n(self) -> int:
        return self.graphs[0].n

    @property
    def size(self) -> int:
        return len(self.graphs)

    def union(self) -> UnionGraph:
        return union_graphs(self.graphs)


@dataclass(frozen=True, eq=False)
class SwitchingSignal:
    """Dwell-time schedule over a graph library.

    ``switch_times[k]`` starts interval k, which uses
    ``library.graphs[indices[k]]`` (0-based positions; the public builders
    accept the 1-based labels used in scenario files). The last interval
    extends to ``horizon``.
    """

    library: GraphLibrary
    t0: float
    switch_times: np.ndarray
    indices: np.ndarray
    tau_min: float
    horizon: float

    def __post_init__(self):
        times = np.array(self.switch_times, dtype=np.float64)
        idx = np.array(self.indices, dtype=np.int64)
        times.flags.writeable = False
        idx.flags.writeable = False
        object.__setattr__(self, "switch_times", times)
        object.__setattr__(self, "indices", idx)

    def interval_count(self) -> int:
        return len(self.switch_times)

    def intervals(self):
        """Yield (start, end, library position) over the whole record."""
        times = self.switch_times
        for k in range(len(times)):
            end = self.horizon if k + 1 == len(times) else times[k + 1]
            yield float(times[k]), float(end), int(self.indices[k])

    def segments(self, a: float, b: float):
        """Yield (duration, library position) covering [a, b] in time order."""
        if not (self.t0 <= a <= b <= self.horizon):
            raise ValueError(
                f"span [{a}, {b}] outside record [{self.t0}, {self.horizon}]"
            )
        for start, end, idx in self.intervals():
            lo, hi = max(start, a), min(end, b)
            if hi > lo:
                yield hi - lo, idx

    def position_at(self, t: float) -> int:
        if not (self.t0 <= t <= self.horizon):
            raise ValueError(f"time {t} outside record [{self.t0}, {self.horizon}]")
        return int(self.indices[bisect_right(self.switch_times, t) - 1])


@dataclass(frozen=True, eq=False)
class LiftedGraph:
    """Nonnegative double-cover companion of a signed digraph.

    The cooperative weights connect like nodes of the two copies while the
    antagonistic magnitudes cross between copies, giving the block layout
    [[plus, minus_abs], [minus_abs, plus]].
    """

    n2: int
    adj_lifted: np.ndarray

    def __post_init__(self):
        lifted = np.array(self.adj_lifted, dtype=np.float64)
        n = self.n2 // 2
        if lifted.shape != (self.n2, self.n2) or self.n2 != 2 * n:
            raise ValueError("lifted adjacency must be 2n by 2n")
        if np.any(lifted < 0.0):
            raise ValueError("lifted adjacency must be nonnegative")
        if not np.array_equal(lifted[:n, :n], lifted[n:, n:]) or not np.array_equal(
            lifted[:n, n:], lifted[n:, :n]
        ):
            raise ValueError("lifted adjacency blocks must pair up")
        lifted.flags.writeable = False
        object.__setattr__(self, "adj_lifted", lifted)

    def laplacian(self) -> np.ndarray:
        """Laplacian of the lifted adjacency (zero row sums)."""
        return np.diag(self.adj_lifted.sum(axis=1)) - self.adj_lifted


def lift(g: SignedDigraph) -> LiftedGraph:
    """Double-cover a signed digraph into a nonnegative one."""
    plus, minus = sign_split(g)
    abs_minus = np.abs(minus)
    top = np.hstack([plus, abs_minus])
    bottom = np.hstack([abs_minus, plus])
    return LiftedGraph(n2=2 * g.n, adj_lifted=np.vstack([top, bottom]))


def _expand_periodic(pattern, repeats: int, t0: float):
    if repeats < 1:
        raise ScheduleError("periodic schedule needs at least one repeat")
    pattern = [(float(d), int(i)) for d, i in pattern]
    if not pattern:
        raise ScheduleError("periodic pattern may not be empty")
    for d, _ in pattern:
        if not (d > 0.0 and np.isfinite(d)):
            raise ScheduleError(f"pattern dwell {d} must be positive and finite")
    schedule = []
    t = float(t0)
    for _ in range(repeats):
        for dwell, index in pattern:
            schedule.append((t, index))
            t += dwell
    return schedule, t


def build_signal(library: GraphLibrary, schedule, tau_min: float, horizon=None) -> SwitchingSignal:
    """Validate a switching schedule into a signal.

    ``schedule`` is either an explicit list of (time, label) pairs with
    1-based library labels, or a periodic shorthand
    ``{"pattern": [(dwell, label), ...], "repeats": k, "t0": 0.0}`` that is
    expanded before validation. For the shorthand the horizon defaults to the
    end of the last repeat.
    """
    if not (tau_min > 0.0 and np.isfinite(tau_min)):
        raise ScheduleError(f"dwell floor must be positive, got {tau_min}")
    if isinstance(schedule, dict):
        expanded, pattern_end = _expand_periodic(
            schedule["pattern"], schedule["repeats"], schedule.get("t0", 0.0)
        )
        schedule = expanded
        if horizon is None:
            horizon = pattern_end
    schedule = [(float(t), int(i)) for t, i in schedule]
    if not schedule:
        raise ScheduleError("schedule may not be empty")
    if horizon is None:
        raise ScheduleError("horizon is required for explicit schedules")
    horizon = float(horizon)

    times = [t for t, _ in schedule]
    labels = [i for _, i in schedule]
    for k, label in enumerate(labels):
        if not (1 <= label <= library.size):
            raise ScheduleError(
                f"entry {k} uses label {label}, valid labels are 1..{library.size}",
                interval=k,
            )
    for k in range(1, len(times)):
        gap = times[k] - times[k - 1]
        if gap <= 0.0:
            raise ScheduleError(
                f"switch times must strictly increase at entry {k}", interval=k
            )
        if gap < tau_min:
            raise ScheduleError(
                f"dwell {gap} before entry {k} is below the floor {tau_min}",
                interval=k,
            )
    if horizon <= times[-1]:
        raise ScheduleError(
            f"horizon {horizon} must exceed the last switch time {times[-1]}"
        )
    return SwitchingSignal(
        library=library,
        t0=times[0],
        switch_times=np.array(times),
        indices=np.array(labels, dtype=np.int64) - 1,
        tau_min=float(tau_min),
        horizon=horizon,
    )


def graph_at(s: SwitchingSignal, t: float) -> SignedDigraph:
    """The graph active at time t; switch instants belong to the new interval."""
    return s.library.graphs[s.position_at(t)]


def _activation_spans(s: SwitchingSignal):
    """Merged active time spans per library position."""
    spans: list[list[tuple[float, float]]] = [[] for _ in range(s.library.size)]
    for start, end, idx in s.intervals():
        bucket = spans[idx]
        if bucket and bucket[-1][1] == start:
            bucket[-1] = (bucket[-1][0], end)
        else:
            bucket.append((start, end))
    return spans


def check_recurrence(s: SwitchingSignal, window: float) -> bool:
    """Does every library graph appear in every length-``window`` span on record?

    Sufficient anchors for a piecewise-constant record are the interval
    starts plus the latest span start, horizon - window.
    """
    record = s.horizon - s.t0
    if not (window > 0.0):
        raise ValueError(f"window must be positive, got {window}")
    if window > record:
        raise ValueError(
            f"window {window} exceeds the record length {record}; undecidable"
        )
    spans = _activation_spans(s)
    if any(not bucket for bucket in spans):
        return False
    anchors = [float(t) for t in s.switch_times if t + window <= s.horizon]
    anchors.append(s.horizon - window)
    for anchor in anchors:
        hi = anchor + window
        for bucket in spans:
            # Active spans are half-open on the right; anchors sit strictly
            # below the horizon, so [anchor, hi] meets [lo_p, hi_p) iff:
            if not any(lo_p <= hi and anchor < hi_p for lo_p, hi_p in bucket):
                return False
    return True


def assumption_window(s: SwitchingSignal):
    """Smallest recurrence window verifiable on record, or None.

    None means some library graph never shows up, or the record is too short
    for any window to be conclusive.
    """
    spans = _activation_spans(s)
    worst = 0.0
    for bucket in spans:
        if not bucket:
            return None
        # A window may end exactly at an activation start (the instant is
        # active), but one anchored after the last deactivation must be
        # strictly shorter than the remaining record, hence the bump.
        gaps = [bucket[0][0] - s.t0]
        for (_, prev_end), (next_start, _) in zip(bucket, bucket[1:]):
            gaps.append(next_start - prev_end)
        if bucket[-1][1] < s.horizon:
            gaps.append((s.horizon - bucket[-1][1]) * (1.0 + 1e-9) + 1e-12)
        worst = max(worst, max(gaps))
    if worst > s.horizon - s.t0:
        return None
    return max(worst, s.tau_min * 1e-9)


def check_ssb(library: GraphLibrary) -> GaugeVector | None:
    """One constant gauge balancing every library member, or None.

    A pair observed with both signs anywhere across the family already rules
    a common gauge out; otherwise the union's sign constraints decide.
    """
    combined = library.union()
    if np.any(combined.sign_conflicts()):
        return None
    constraints = []
    rows, cols = np.nonzero(combined.support)
    for i, j in zip(rows.tolist(), cols.tolist()):
        constraints.append((i, j, bool(combined.has_negative[i, j])))
    return gauge_from_sign_constraints(library.n, constraints)


def block_unions(s: SwitchingSignal, block: int):
    """Unions of consecutive interval blocks of the given length.

    Only complete blocks are yielded; when the record holds fewer intervals
    than one block, the union of everything recorded stands in.
    """
    positions = [idx for _, _, idx in s.intervals()]
    if len(positions) < block:
        yield union_graphs([s.library.graphs[i] for i in positions])
        return
    for start in range(0, len(positions) - block + 1, block):
        chunk = positions[start : start + block]
        yield union_graphs([s.library.graphs[i] for i in chunk])


def jointly_strongly_connected(s: SwitchingSignal, block: int) -> bool:
    """Are all consecutive ``block``-interval unions strongly connected on record?"""
    if block < 1:
        raise ValueError(f"block length must be at least 1, got {block}")
    return all(
        strongly_connected_support(u.support) for u in block_unions(s, block)
    )


def lifted_jointly_strongly_connected(s: SwitchingSignal, block: int) -> bool:
    """Joint strong connectivity of the double-cover schedule, per block."""
    if block < 1:
        raise ValueError(f"block length must be at least 1, got {block}")
    supports = [lift(g).adj_lifted > 0.0 for g in s.library.graphs]
    positions = [idx for _, _, idx in s.intervals()]
    chunks = (
        [positions]
        if len(positions) < block
        else [
            positions[start : start + block]
            for start in range(0, len(positions) - block + 1, block)
        ]
    )
    n2 = 2 * s.library.n
    for chunk in chunks:
        combined = np.zeros((n2, n2), dtype=bool)
        for idx in chunk:
            combined |= supports[idx]
        if not strongly_connected_support(combined):
            return False
    return True
