"""Opinion-state simulation and asymptotic classification.

States evolve as x(t) = transition_matrix(t, t0) @ x0. Under a recurrent
schedule with strongly connected union, the flow settles either into a
polarized profile c * (plus or minus ones pattern) when one constant gauge
balances every library graph, or to zero when none does. The classifier
reports that verdict from the numerics, cross-checked against the graph-side
analysis, and never silently reconciles the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, NotConvergedError, PreconditionError
from .graph import GaugeVector, strongly_connected_support
from .switching import SwitchingSignal, assumption_window, check_ssb
from .transition import (
    TransitionAccumulator,
    norm_inf,
    transition_matrix,
    unsigned_transition,
)

VERDICT_BIPARTITE = "BipartiteConsensus"
VERDICT_STABLE = "Stable"
VERDICT_UNDETERMINED = "Undetermined"

# Uniform stability gives |x(t)| <= |x0| exactly; allow this much rounding.
_STABILITY_SLACK = 1e-9

_RESIDUAL_FLOOR = 1e2 * np.finfo(np.float64).eps


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled opinion states; switch instants are always included."""

    times: np.ndarray
    states: np.ndarray
    x0: np.ndarray

    def write_csv(self, fh):
        """CSV with header t,x1..xn at 17 significant digits."""
        n = self.states.shape[1]
        fh.write("t," + ",".join(f"x{i + 1}" for i in range(n)) + "\n")
        for t, row in zip(self.times, self.states):
            fh.write(
                format(t, ".17g") + "," + ",".join(format(v, ".17g") for v in row) + "\n"
            )


@dataclass(frozen=True, eq=False)
class RateFit:
    """Exponential decay fit: residual ~ exp(-rate * t)."""

    rate: float
    r_squared: float
    samples_used: int


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    """Outcome of classify: verdict plus the evidence behind it.

    ``verdict`` is the numeric call; ``graph_verdict`` is what the structural
    analysis predicts (None when its hypotheses fail on record). When the two
    disagree, ``inconsistency`` describes the clash. ``nu`` is the stationary
    weight vector of the unsigned flow, ``c`` the polarization level reached
    from the supplied initial state, ``rate`` the fitted decay exponent.
    """

    verdict: str
    gauge: GaugeVector | None
    nu: np.ndarray | None
    c: float | None
    phi_limit: np.ndarray | None
    rate: float | None
    residual: float | None
    graph_verdict: str | None = None
    reason: str | None = None
    inconsistency: str | None = None
    rate_r_squared: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "graph_verdict": self.graph_verdict,
            "gauge": None if self.gauge is None else [int(v) for v in self.gauge.signs],
            "nu": None if self.nu is None else self.nu.tolist(),
            "c": self.c,
            "phi_limit": None if self.phi_limit is None else self.phi_limit.tolist(),
            "rate": self.rate,
            "rate_r_squared": self.rate_r_squared,
            "residual": self.residual,
            "reason": self.reason,
            "inconsistency": self.inconsistency,
        }


def verified_preconditions(s: SwitchingSignal) -> tuple[bool, str | None]:
    """Check the convergence hypotheses on record: recurrence of every
    library graph in bounded windows, and a strongly connected union."""
    if not strongly_connected_support(s.library.union().support):
        return False, "library union is not strongly connected"
    if assumption_window(s) is None:
        return False, "not every library graph recurs within the record"
    return True, None


def simulate(
    s: SwitchingSignal, x0, t0: float, tf: float, sample_dt: float
) -> Trajectory:
    """Sample x(t) over [t0, tf], inserting switch instants as extra samples.

    The transition matrix is extended incrementally between samples, so one
    walk costs one exponential per dwell interval plus one cached
    exponential per distinct step length.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (s.library.n,):
        raise ValueError(
            f"initial state has length {x0.shape}, graph order is {s.library.n}"
        )
    if not sample_dt > 0.0:
        raise ValueError(f"sample step must be positive, got {sample_dt}")
    if tf < t0:
        raise ValueError(f"reversed time span [{t0}, {tf}]")
    grid = list(np.arange(t0, tf, sample_dt)) + [tf]
    grid += [float(tk) for tk in s.switch_times if t0 < tk < tf]
    times = np.unique(np.array(grid))
    acc = TransitionAccumulator(s, t0, kind="signed")
    states = np.empty((len(times), len(x0)))
    for i, t in enumerate(times):
        states[i] = acc.value_at(float(t)) @ x0
    bound = float(np.abs(x0).max(initial=0.0))
    worst = np.abs(states).max() if states.size else 0.0
    if worst > bound + _STABILITY_SLACK:
        raise InternalConsistencyError(
            f"trajectory magnitude {worst} escaped the initial bound {bound}"
        )
    return Trajectory(times=times, states=states, x0=x0)


def stationary_vector(
    s: SwitchingSignal, t0: float, t_long: float, tol: float = 1e-9
) -> np.ndarray:
    """Common-row limit of the unsigned flow, renormalized to sum one.

    Requires the convergence hypotheses to hold on record; raises
    NotConvergedError (carrying the row spread) when the rows have not
    collapsed to the given tolerance by ``t_long``.
    """
    ok, reason = verified_preconditions(s)
    if not ok:
        raise PreconditionError(reason)
    stochastic = unsigned_transition(s, t0, t_long)
    spread = float(np.ptp(stochastic, axis=0).max())
    if spread >= tol:
        raise NotConvergedError(
            f"rows of the unsigned flow still differ by {spread:.3e} at t={t_long}",
            spread=spread,
        )
    nu = stochastic.mean(axis=0)
    nu[nu < 0.0] = 0.0  # clip rounding noise, entries are nonnegative in theory
    nu = nu / nu.sum()
    # One division leaves the sum an ulp off; push the defect into the
    # largest entry until the total is float-exact.
    for _ in range(3):
        defect = 1.0 - nu.sum()
        if defect == 0.0:
            break
        nu[int(np.argmax(nu))] += defect
    return nu


def predicted_limit(
    s: SwitchingSignal, t0: float, t_long: float | None = None, tol: float = 1e-9
) -> np.ndarray | None:
    """Asymptotic transition matrix implied by the graph-side analysis.

    With a common gauge: the rank-one polarized projector built from the
    gauge and the stationary vector. Without one: the zero matrix. None when
    the hypotheses cannot be verified on record.
    """
    ok, _ = verified_preconditions(s)
    if not ok:
        return None
    n = s.library.n
    gauge = check_ssb(s.library)
    if gauge is None:
        return np.zeros((n, n))
    nu = stationary_vector(s, t0, s.horizon if t_long is None else t_long, tol)
    return np.outer(gauge.signs, nu * gauge.signs)


def estimate_rate(s: SwitchingSignal, t0: float, limit: np.ndarray, samples) -> RateFit:
    """Least-squares decay exponent of the distance to ``limit``.

    Residuals at or below one hundred machine epsilons are discarded; fewer
    than three surviving samples is an error.
    """
    times = [float(t) for t in samples]
    if sorted(times) != times:
        times = sorted(times)
    acc = TransitionAccumulator(s, t0, kind="signed")
    limit = np.asarray(limit, dtype=np.float64)
    ts, logs = [], []
    for t in times:
        residual = norm_inf(acc.value_at(t) - limit)
        if residual > _RESIDUAL_FLOOR:
            ts.append(t)
            logs.append(np.log(residual))
    if len(ts) < 3:
        raise ValueError(
            f"only {len(ts)} samples above the noise floor; need at least 3"
        )
    ts = np.array(ts)
    logs = np.array(logs)
    design = np.vstack([ts, np.ones_like(ts)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, logs, rcond=None)
    fitted = design @ np.array([slope, intercept])
    ss_res = float(((logs - fitted) ** 2).sum())
    ss_tot = float(((logs - logs.mean()) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(rate=-float(slope), r_squared=r_squared, samples_used=len(ts))


def _pilot_horizon(s: SwitchingSignal, t0: float) -> float:
    """Default observation time: long enough for sixty e-foldings of the
    mixing estimated from a half-record pilot, capped by the record."""
    span = s.horizon - t0
    t_a = t0 + 0.25 * span
    t_b = t0 + 0.5 * span
    spread_a = float(np.ptp(unsigned_transition(s, t0, t_a), axis=0).max())
    spread_b = float(np.ptp(unsigned_transition(s, t0, t_b), axis=0).max())
    if spread_a <= _RESIDUAL_FLOOR or spread_b <= _RESIDUAL_FLOOR:
        return t_b
    guess = np.log(spread_a / spread_b) / (t_b - t_a)
    if guess <= 0.0:
        return s.horizon
    return min(s.horizon, t0 + 60.0 / guess)


def classify(
    s: SwitchingSignal,
    t0: float,
    t_long: float | None = None,
    tol_limit: float = 1e-6,
    tol_zero: float = 1e-6,
    x0=None,
    rate_samples: int = 30,
) -> ConvergenceReport:
    """Classify the asymptotic behavior observed at ``t_long``.

    Stable means the transition matrix itself fell below ``tol_zero``;
    BipartiteConsensus means it reached the graph-side polarized projector
    within ``tol_limit``. Everything else stays Undetermined with a reason.
    A clash between the numeric verdict and the graph-side prediction is
    reported in ``inconsistency``.
    """
    if t_long is None:
        t_long = _pilot_horizon(s, t0)
    if not (s.t0 <= t0 <= t_long <= s.horizon):
        raise ValueError(f"observation span [{t0}, {t_long}] outside record")

    ok_pre, reason_pre = verified_preconditions(s)
    gauge = check_ssb(s.library) if ok_pre else None
    if ok_pre:
        graph_verdict = VERDICT_BIPARTITE if gauge is not None else VERDICT_STABLE
    else:
        graph_verdict = None

    phi_long = transition_matrix(s, t0, t_long)
    n = s.library.n

    verdict = VERDICT_UNDETERMINED
    nu = None
    limit = None
    residual = None
    reason = None
    if norm_inf(phi_long) < tol_zero:
        verdict = VERDICT_STABLE
        limit = np.zeros((n, n))
        residual = norm_inf(phi_long)
        gauge = None
    elif gauge is not None:
        try:
            # The stationary estimate only needs to be an order tighter than
            # the verdict tolerance it feeds.
            nu = stationary_vector(s, t0, t_long, tol=max(1e-9, 0.1 * tol_limit))
            limit = np.outer(gauge.signs, nu * gauge.signs)
            residual = norm_inf(phi_long - limit)
            if residual < tol_limit:
                verdict = VERDICT_BIPARTITE
            else:
                reason = (
                    f"distance {residual:.3e} to the polarized projector "
                    f"still exceeds {tol_limit:.1e} at t={t_long}"
                )
        except NotConvergedError as exc:
            reason = str(exc)
    else:
        reason = reason_pre or (
            f"transition matrix norm {norm_inf(phi_long):.3e} has not reached "
            f"{tol_zero:.1e} and no common gauge exists"
        )

    inconsistency = None
    if graph_verdict is not None and verdict != VERDICT_UNDETERMINED:
        if verdict != graph_verdict:
            inconsistency = (
                f"numeric verdict {verdict} contradicts graph-side "
                f"prediction {graph_verdict}"
            )

    rate = None
    r_squared = None
    if limit is not None and verdict != VERDICT_UNDETERMINED:
        span = t_long - t0
        sample_times = np.linspace(t0 + 0.05 * span, t_long, rate_samples)
        try:
            fit = estimate_rate(s, t0, limit, sample_times)
            rate = fit.rate
            r_squared = fit.r_squared
        except ValueError:
            pass

    c = None
    if verdict == VERDICT_BIPARTITE and x0 is not None and nu is not None:
        c = float(nu @ (gauge.signs * np.asarray(x0, dtype=np.float64)))

    return ConvergenceReport(
        verdict=verdict,
        gauge=gauge,
        nu=nu,
        c=c,
        phi_limit=limit,
        rate=rate,
        residual=residual,
        graph_verdict=graph_verdict,
        reason=reason,
        inconsistency=inconsistency,
        rate_r_squared=r_squared,
    )
