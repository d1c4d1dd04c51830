"""Randomized scenarios and the executable check harness.

Every convergence statement and algebraic identity in the toolkit is bound
to a named check here. Checks are hypothesis-gated: when a statement's
premises fail on a scenario, the result is a skip that names the failed
premise, never a vacuous pass. Scenarios are reproducible: generation is
driven entirely by a counter-based 64-bit-keyed generator (Philox), one key
per scenario, so identical specs give byte-identical scenarios on any
platform.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._jsonfmt import dumps
from .dynamics import (
    VERDICT_BIPARTITE,
    VERDICT_STABLE,
    classify,
    stationary_vector,
    verified_preconditions,
)
from .errors import GenerationError, SignetError
from .graph import (
    SignedDigraph,
    laplacian_parts,
    strongly_connected_support,
)
from .switching import (
    GraphLibrary,
    SwitchingSignal,
    assumption_window,
    block_unions,
    build_signal,
    check_ssb,
    lifted_jointly_strongly_connected,
)
from .transition import (
    TransitionAccumulator,
    bundle_from_parts,
    lifted_transition,
    norm_inf,
    peano_baker_truncated,
    transition_matrix,
    volterra_residual,
)

# Weights live on a dyadic lattice so sums of a few of them are exact and the
# additive Laplacian split holds bitwise on generated scenarios.
_LATTICE = 2 ** 20

SIGN_POLICIES = ("balanced-forced", "unbalanced-forced", "free")
CONNECTIVITY_POLICIES = ("strong-union", "free")


@dataclass(frozen=True)
class ScenarioSpec:
    """Reproducible recipe for one random scenario.

    The schedule is periodic: each period visits every library graph once in
    a shuffled order, dwelling a random time in ``dwell_range`` (never below
    ``tau_min``), and periods repeat until ``horizon`` is covered.
    """

    seed: int
    n_range: tuple[int, int] = (2, 6)
    m_range: tuple[int, int] = (1, 4)
    weight_range: tuple[float, float] = (0.5, 3.0)
    sign_policy: str = "free"
    connectivity: str = "strong-union"
    edge_prob: float = 0.35
    tau_min: float = 0.3
    dwell_range: tuple[float, float] = (0.3, 1.0)
    horizon: float = 10.0

    def __post_init__(self):
        if self.sign_policy not in SIGN_POLICIES:
            raise ValueError(f"unknown sign policy {self.sign_policy!r}")
        if self.connectivity not in CONNECTIVITY_POLICIES:
            raise ValueError(f"unknown connectivity policy {self.connectivity!r}")


@dataclass
class Scenario:
    """A generated scenario plus its recipe and per-scenario work cache.

    ``period`` is the schedule's repetition length; long-run walks sample at
    its multiples so products over whole periods compare like for like.
    """

    spec: ScenarioSpec
    library: GraphLibrary
    signal: SwitchingSignal
    planted_gauge: np.ndarray | None = None
    period: float | None = None
    memo: dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True, eq=False)
class CheckResult:
    check_id: str
    seed: int
    residuals: dict
    tolerances: dict
    passed: bool
    skipped: bool = False
    skip_reason: str | None = None
    error: str | None = None
    elapsed: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "check": self.check_id,
            "seed": self.seed,
            "passed": self.passed,
            "skipped": self.skipped,
            "skip_reason": self.skip_reason,
            "error": self.error,
            "residuals": self.residuals,
            "tolerances": self.tolerances,
            "elapsed": self.elapsed,
        }


def _rng(seed: int, salt: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(int(seed) << 16) + salt))


def _draw_weight(rng, lo: float, hi: float) -> float:
    lo_k = int(np.ceil(lo * _LATTICE))
    hi_k = int(np.floor(hi * _LATTICE))
    return float(rng.integers(max(lo_k, 1), hi_k + 1)) / _LATTICE


def _plant_conflict(rng, adjs, spec):
    """Make simultaneous balance impossible, one of three ways."""
    n = adjs[0].shape[0]
    lo, hi = spec.weight_range
    i, j = rng.choice(n, size=2, replace=False)
    mode = int(rng.integers(3))
    if mode == 2 and n >= 3:
        # A cycle whose sign constraints multiply to minus one.
        k = int(rng.choice([v for v in range(n) if v not in (i, j)]))
        g = adjs[int(rng.integers(len(adjs)))]
        g[j, i] = _draw_weight(rng, lo, hi)
        g[k, j] = _draw_weight(rng, lo, hi)
        g[i, k] = -_draw_weight(rng, lo, hi)
    elif mode == 1 and len(adjs) >= 2:
        # The same ordered pair with opposite signs in two family members.
        p, q = rng.choice(len(adjs), size=2, replace=False)
        adjs[p][i, j] = _draw_weight(rng, lo, hi)
        adjs[q][i, j] = -_draw_weight(rng, lo, hi)
    else:
        # A reciprocal pair with opposite signs in one member.
        g = adjs[int(rng.integers(len(adjs)))]
        g[i, j] = _draw_weight(rng, lo, hi)
        g[j, i] = -_draw_weight(rng, lo, hi)


def _draw_library(rng, spec: ScenarioSpec):
    n = int(rng.integers(spec.n_range[0], spec.n_range[1] + 1))
    m = int(rng.integers(spec.m_range[0], spec.m_range[1] + 1))
    lo, hi = spec.weight_range
    planted = None
    if spec.sign_policy == "balanced-forced":
        planted = rng.choice([-1.0, 1.0], size=n)

    def signed(mag: float, i: int, j: int) -> float:
        if planted is not None:
            return mag * planted[i] * planted[j]
        return mag * float(rng.choice([-1.0, 1.0]))

    adjs = []
    for _ in range(m):
        adj = np.zeros((n, n))
        mask = rng.random((n, n)) < spec.edge_prob
        np.fill_diagonal(mask, False)
        for i, j in zip(*np.nonzero(mask)):
            adj[i, j] = signed(_draw_weight(rng, lo, hi), int(i), int(j))
        adjs.append(adj)

    if spec.connectivity == "strong-union":
        # Spread a random closed tour over the family so the union of all
        # supports is strongly connected by construction.
        order = rng.permutation(n)
        for a, b in zip(order, np.roll(order, -1)):
            target = adjs[int(rng.integers(m))]
            target[int(b), int(a)] = signed(_draw_weight(rng, lo, hi), int(b), int(a))

    if spec.sign_policy == "unbalanced-forced":
        _plant_conflict(rng, adjs, spec)

    graphs = tuple(SignedDigraph(n=n, adj=a) for a in adjs)
    return GraphLibrary(graphs), planted


def _draw_schedule(rng, spec: ScenarioSpec, m: int):
    lo, hi = spec.dwell_range
    lo = max(lo, spec.tau_min)
    hi = max(hi, lo)
    pattern = []
    for idx in rng.permutation(m):
        dwell = round(float(rng.uniform(lo, hi)) * 1024.0) / 1024.0
        dwell = max(dwell, spec.tau_min)
        pattern.append((dwell, int(idx) + 1))
    period = sum(d for d, _ in pattern)
    repeats = max(1, int(np.ceil(spec.horizon / period)))
    return {"pattern": pattern, "repeats": repeats, "t0": 0.0}


def generate(spec: ScenarioSpec) -> Scenario:
    """Draw the scenario for a spec, with full diagnostics retained."""
    rng = _rng(spec.seed)
    failures = {"balance_rejects": 0, "connectivity_rejects": 0}
    for _ in range(1000):
        library, planted = _draw_library(rng, spec)
        if spec.sign_policy == "unbalanced-forced" and check_ssb(library) is not None:
            failures["balance_rejects"] += 1
            continue
        if spec.connectivity == "strong-union" and not strongly_connected_support(
            library.union().support
        ):
            failures["connectivity_rejects"] += 1
            continue
        schedule = _draw_schedule(rng, spec, library.size)
        signal = build_signal(library, schedule, tau_min=spec.tau_min)
        return Scenario(
            spec=spec,
            library=library,
            signal=signal,
            planted_gauge=planted,
            period=sum(d for d, _ in schedule["pattern"]),
        )
    raise GenerationError(
        f"policy {spec.sign_policy}/{spec.connectivity} unsatisfied after 1000 draws",
        diagnostics=failures,
    )


def generate_scenario(spec: ScenarioSpec) -> tuple[GraphLibrary, SwitchingSignal]:
    """Public generation surface: the graph family and its switching signal."""
    scn = generate(spec)
    return scn.library, scn.signal


# ---------------------------------------------------------------------------
# Checks


class _Skip(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _bundle_times(scn: Scenario):
    s = scn.signal
    span = s.horizon - s.t0
    return [s.t0, s.t0 + 0.31 * span, s.t0 + 0.68 * span, s.horizon]


def _bundles(scn: Scenario):
    """Bundles at the standard sample times, one shared walk per flow."""
    if "bundles" not in scn.memo:
        s = scn.signal
        accs = {
            kind: TransitionAccumulator(s, s.t0, kind=kind)
            for kind in ("signed", "unsigned", "base", "lifted")
        }
        bundles = []
        for t in _bundle_times(scn):
            bundles.append(
                bundle_from_parts(
                    s.t0,
                    t,
                    phi=accs["signed"].value_at(t),
                    psi=accs["lifted"].value_at(t),
                    phi_abs=accs["unsigned"].value_at(t),
                    phi_base=accs["base"].value_at(t),
                )
            )
        scn.memo["bundles"] = bundles
    return scn.memo["bundles"]


def _check_split_identity(scn: Scenario, params):
    recompose = 0.0
    row_sums = 0.0
    offdiag = 0.0
    for g in scn.library.graphs:
        parts = laplacian_parts(g)
        total = parts.cooperative + parts.antagonistic_degree + parts.antagonistic_coupling
        recompose = max(recompose, float(np.abs(parts.laplacian - total).max()))
        row_sums = max(row_sums, float(np.abs(parts.laplacian_abs.sum(axis=1)).max()))
        base = parts.base()
        off = base - np.diag(np.diag(base))
        offdiag = max(offdiag, float(max(0.0, off.max())))
        dominance = np.diag(base) - np.abs(off).sum(axis=1)
        offdiag = max(offdiag, float(max(0.0, -dominance.min())))
    return {"recompose": recompose, "abs_row_sums": row_sums, "base_structure": offdiag}


def _check_decomposition(scn, params):
    return {"decomposition": max(b.residuals()["decomposition"] for b in _bundles(scn))}


def _check_sum(scn, params):
    return {"sum": max(b.residuals()["sum"] for b in _bundles(scn))}


def _check_envelope(scn, params):
    return {"envelope": max(b.residuals()["envelope"] for b in _bundles(scn))}


def _check_norm_bound(scn, params):
    return {"norm": max(b.residuals()["norm"] for b in _bundles(scn))}


def _check_substochastic(scn, params):
    negativity = 0.0
    row_excess = 0.0
    stochastic_defect = 0.0
    for b in _bundles(scn):
        for part in (b.phi_even, b.phi_odd, b.phi_base):
            negativity = max(negativity, float(max(0.0, -part.min())))
            row_excess = max(row_excess, float(max(0.0, part.sum(axis=1).max() - 1.0)))
        stochastic_defect = max(
            stochastic_defect, float(np.abs(b.phi_abs.sum(axis=1) - 1.0).max())
        )
    return {
        "negativity": negativity,
        "row_excess": row_excess,
        "stochastic_defect": stochastic_defect,
    }


def _check_block_symmetry(scn, params):
    return {"block_symmetry": max(b.residuals()["block_symmetry"] for b in _bundles(scn))}


def _check_semigroup(scn, params):
    s = scn.signal
    rng = _rng(scn.spec.seed, salt=1)
    span = s.horizon - s.t0
    mids = [s.t0 + float(rng.uniform(0.2, 0.8)) * span]
    if len(s.switch_times) > 1:
        mids.append(float(s.switch_times[len(s.switch_times) // 2]))
    worst = 0.0
    whole = transition_matrix(s, s.t0, s.horizon)
    for t1 in mids:
        left = transition_matrix(s, t1, s.horizon)
        right = transition_matrix(s, s.t0, t1)
        worst = max(worst, norm_inf(whole - left @ right))
    return {"semigroup": worst}


def _check_derivative_identities(scn, params):
    """Centered differences of the double-cover blocks against their flow
    equations, at interior times where the topology is locally constant."""
    s = scn.signal
    h = params.get("step", 1e-5)
    rng = _rng(scn.spec.seed, salt=2)
    intervals = list(s.intervals())
    centers = []
    for _ in range(5):
        start, end, _idx = intervals[int(rng.integers(len(intervals)))]
        if end - start > 4 * h:
            centers.append(float(rng.uniform(start + 2 * h, end - 2 * h)))
        else:
            centers.append(0.5 * (start + end))
    acc = TransitionAccumulator(s, s.t0, kind="lifted")
    values = {}
    for t in sorted(t + off for t in centers for off in (-h, 0.0, h)):
        values[t] = acc.value_at(t)
    n = s.library.n
    worst_even = 0.0
    worst_odd = 0.0
    for t in centers:
        lo, mid, hi = values[t - h], values[t], values[t + h]
        even_dot = (hi[:n, :n] - lo[:n, :n]) / (2 * h)
        odd_dot = (hi[:n, n:] - lo[:n, n:]) / (2 * h)
        parts = laplacian_parts(s.library.graphs[s.position_at(t)])
        base = parts.base()
        coupling = parts.antagonistic_coupling
        worst_even = max(
            worst_even,
            norm_inf(even_dot - (-base @ mid[:n, :n] + coupling @ mid[:n, n:])),
        )
        worst_odd = max(
            worst_odd,
            norm_inf(odd_dot - (-base @ mid[:n, n:] + coupling @ mid[:n, :n])),
        )
    return {"even": worst_even, "odd": worst_odd}


def _check_gauge_similarity(scn, params):
    gauge = check_ssb(scn.library)
    if gauge is None:
        raise _Skip("no common gauge balances the family")
    worst = 0.0
    for b in _bundles(scn):
        worst = max(worst, norm_inf(b.phi - gauge.conjugate(b.phi_abs)))
    return {"gauge": worst}


def _check_series_oracle(scn, params):
    s = scn.signal
    span = min(params.get("span", 0.5), s.horizon - s.t0)
    order = params.get("order", 12)
    dt = params.get("dt", 1e-3)
    t = s.t0 + span
    phi_k, even_k, odd_k = peano_baker_truncated(s, s.t0, t, order, dt)
    bundle = lifted_transition(s, s.t0, t)
    return {
        "phi": norm_inf(phi_k - bundle.phi),
        "even": norm_inf(even_k - bundle.phi_even),
        "odd": norm_inf(odd_k - bundle.phi_odd),
    }


def _check_volterra(scn, params):
    s = scn.signal
    span = min(params.get("span", 1.0), s.horizon - s.t0)
    dt = params.get("dt", 1e-3)
    return {"volterra": volterra_residual(s, s.t0, s.t0 + span, dt)}


def _require_hypotheses(scn: Scenario):
    ok, reason = verified_preconditions(scn.signal)
    if not ok:
        raise _Skip(reason)


def _fit_decay(times, residuals, samples_per_period: int):
    """Least-squares decay exponent of a residual series.

    Switching makes the log-residual a line plus a bounded periodic
    modulation (stepwise contraction within a period, rotation from complex
    modes across periods). A centered geometric-mean window spanning at
    least one modulation cycle preserves the slope exactly and cancels the
    modulation, so the fit quality reflects genuine non-exponential
    behavior rather than the modulation.
    """
    keep = [(t, r) for t, r in zip(times, residuals) if r > 1e-13]
    drop = max(1, len(keep) // 10)
    keep = keep[drop:]
    if len(keep) < 3:
        return None, None
    ts = np.array([t for t, _ in keep])
    logs = np.log(np.array([r for _, r in keep]))
    window = max(3, samples_per_period + 1)
    window += 1 - window % 2  # centered window must be odd
    if len(keep) >= window + 2:
        kernel = np.ones(window) / window
        logs = np.convolve(logs, kernel, mode="valid")
        half = window // 2
        ts = ts[half:-half]
    design = np.vstack([ts, np.ones_like(ts)]).T
    coeffs, *_ = np.linalg.lstsq(design, logs, rcond=None)
    fitted = design @ coeffs
    ss_res = float(((logs - fitted) ** 2).sum())
    ss_tot = float(((logs - logs.mean()) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return -float(coeffs[0]), r_squared


def _convergence(scn: Scenario):
    """Shared long-run walk: residuals of all limit formulas plus a rate fit."""
    if "convergence" in scn.memo:
        return scn.memo["convergence"]
    _require_hypotheses(scn)
    s = scn.signal
    n = s.library.n
    gauge = check_ssb(s.library)
    nu = stationary_vector(s, s.t0, s.horizon, tol=1e-8)
    ones = np.ones(n)
    mixing = np.outer(ones, nu)
    if gauge is None:
        even_lim = odd_lim = 0.5 * mixing
        phi_lim = np.zeros((n, n))
    else:
        polarized = np.outer(gauge.signs, nu * gauge.signs)
        even_lim = 0.5 * (mixing + polarized)
        odd_lim = 0.5 * (mixing - polarized)
        phi_lim = polarized
    psi_lim = np.block([[even_lim, odd_lim], [odd_lim, even_lim]])

    target = 5e-7
    period = scn.period if scn.period else max(s.tau_min, (s.horizon - s.t0) / 512.0)

    def walk(stride):
        lifted = TransitionAccumulator(s, s.t0, kind="lifted")
        signed = TransitionAccumulator(s, s.t0, kind="signed")
        times, phi_res = [], []
        t = s.t0
        reached = None
        final_psi = None
        converged_residual = None
        while t < s.horizon:
            t = min(t + stride, s.horizon)
            psi_t = lifted.value_at(t)
            phi_t = signed.value_at(t)
            times.append(t)
            phi_res.append(norm_inf(phi_t - phi_lim))
            if reached is None and (
                norm_inf(psi_t - psi_lim) < target or t >= s.horizon
            ):
                reached = t
                final_psi = psi_t.copy()
                converged_residual = phi_res[-1]
            # Keep sampling past the convergence target so the decay fit
            # spans enough decades to pin the exponent down.
            if reached is not None and phi_res[-1] < 1e-11:
                break
        return times, phi_res, reached, final_psi, converged_residual

    times, phi_res, reached, final_psi, converged_residual = walk(period)
    samples_per_period = 1
    usable = sum(1 for r in phi_res if r > 1e-13)
    if usable < 10:
        # Fast decay leaves too few whole-period samples; refine within the
        # period just for the fit series.
        samples_per_period = 4
        times, phi_res, reached, final_psi, converged_residual = walk(period / 4)
    fit_rate, fit_r2 = _fit_decay(times, phi_res, samples_per_period)
    final_even = final_psi[:n, :n]
    final_odd = final_psi[:n, n:]
    data = {
        "gauge": gauge,
        "nu": nu,
        "phi_limit": phi_lim,
        "t_reached": reached,
        "phi_residual": converged_residual,
        "even_residual": norm_inf(final_even - even_lim),
        "odd_residual": norm_inf(final_odd - odd_lim),
        "rate": fit_rate,
        "r_squared": fit_r2,
    }
    scn.memo["convergence"] = data
    return data


def _check_balanced_limit(scn, params):
    data = _convergence(scn)
    if data["gauge"] is None:
        raise _Skip("no common gauge balances the family")
    return {"limit": data["phi_residual"]}


def _check_unbalanced_decay(scn, params):
    data = _convergence(scn)
    if data["gauge"] is not None:
        raise _Skip("a common gauge balances the family")
    return {"decay": data["phi_residual"]}


def _check_even_odd_limits(scn, params):
    data = _convergence(scn)
    return {"even": data["even_residual"], "odd": data["odd_residual"]}


def _check_rate_fit(scn, params):
    data = _convergence(scn)
    if data["r_squared"] is None:
        return {"fit_defect": 1.0}
    return {"fit_defect": max(0.0, 1.0 - data["r_squared"])}


def _check_classifier_consistency(scn, params):
    _require_hypotheses(scn)
    data = _convergence(scn)
    expected = VERDICT_STABLE if data["gauge"] is None else VERDICT_BIPARTITE
    report = classify(scn.signal, scn.signal.t0)
    mismatch = 0.0 if report.verdict == expected else 1.0
    if report.inconsistency is not None:
        mismatch = 1.0
    return {"mismatch": mismatch}


def _recurrence_block(scn: Scenario) -> int:
    window = assumption_window(scn.signal)
    if window is None:
        raise _Skip("not every library graph recurs within the record")
    return int(window / scn.signal.tau_min) + 1


def _check_window_union(scn, params):
    block = _recurrence_block(scn)
    total = scn.library.union().support
    missing = 0
    for union in block_unions(scn.signal, block):
        if not np.array_equal(union.support, total):
            missing += 1
    return {"missing_blocks": float(missing)}


def _check_lifted_connectivity(scn, params):
    _require_hypotheses(scn)
    if check_ssb(scn.library) is not None:
        raise _Skip("a common gauge balances the family")
    block = _recurrence_block(scn)
    ok = lifted_jointly_strongly_connected(scn.signal, block)
    return {"disconnected": 0.0 if ok else 1.0}


# name -> (runner, default residual tolerances, fixed parameters)
CHECKS = {
    "split-identity": (_check_split_identity, {"recompose": 1e-8, "abs_row_sums": 1e-8, "base_structure": 1e-8}, {}),
    "decomposition": (_check_decomposition, {"decomposition": 1e-8}, {}),
    "even-odd-sum": (_check_sum, {"sum": 1e-8}, {}),
    "envelope-bound": (_check_envelope, {"envelope": 1e-10}, {}),
    "norm-bound": (_check_norm_bound, {"norm": 1e-10}, {}),
    "substochastic": (_check_substochastic, {"negativity": 1e-10, "row_excess": 1e-10, "stochastic_defect": 1e-10}, {}),
    "block-symmetry": (_check_block_symmetry, {"block_symmetry": 1e-10}, {}),
    "semigroup": (_check_semigroup, {"semigroup": 1e-9}, {}),
    "derivative-identities": (_check_derivative_identities, {"even": 1e-4, "odd": 1e-4}, {"step": 1e-5}),
    "gauge-similarity": (_check_gauge_similarity, {"gauge": 1e-9}, {}),
    "series-oracle": (_check_series_oracle, {"phi": 1e-6, "even": 1e-6, "odd": 1e-6}, {"span": 0.5, "order": 12, "dt": 1e-3}),
    "volterra-identity": (_check_volterra, {"volterra": 1e-4}, {"span": 1.0, "dt": 1e-3}),
    "balanced-limit": (_check_balanced_limit, {"limit": 1e-6}, {}),
    "unbalanced-decay": (_check_unbalanced_decay, {"decay": 1e-6}, {}),
    "even-odd-limits": (_check_even_odd_limits, {"even": 1e-5, "odd": 1e-5}, {}),
    "rate-fit": (_check_rate_fit, {"fit_defect": 0.01}, {}),
    "classifier-consistency": (_check_classifier_consistency, {"mismatch": 0.5}, {}),
    "window-union": (_check_window_union, {"missing_blocks": 0.5}, {}),
    "lifted-joint-connectivity": (_check_lifted_connectivity, {"disconnected": 0.5}, {}),
}


def registered_checks() -> list[str]:
    return list(CHECKS)


def _as_scenario(scenario) -> Scenario:
    if isinstance(scenario, Scenario):
        return scenario
    library, signal = scenario
    return Scenario(spec=ScenarioSpec(seed=0), library=library, signal=signal)


def run_check(check_id: str, scenario, tolerances: dict | None = None) -> CheckResult:
    """Execute one named check; unknown names are rejected.

    ``scenario`` is either the rich object from ``generate`` or a plain
    (library, signal) pair. ``tolerances`` overrides the check's
    per-residual limits; the key "default" applies one limit to every
    residual.
    """
    if check_id not in CHECKS:
        raise ValueError(f"unknown check {check_id!r}; known: {sorted(CHECKS)}")
    scenario = _as_scenario(scenario)
    runner, defaults, params = CHECKS[check_id]
    tols = dict(defaults)
    if tolerances:
        if "default" in tolerances:
            tols = {k: tolerances["default"] for k in tols}
        for key, value in tolerances.items():
            if key in tols:
                tols[key] = value
    start = time.perf_counter()
    try:
        residuals = runner(scenario, params)
        passed = all(residuals[name] <= tols[name] for name in residuals)
        return CheckResult(
            check_id=check_id,
            seed=scenario.spec.seed,
            residuals={k: float(v) for k, v in residuals.items()},
            tolerances=tols,
            passed=passed,
            elapsed=time.perf_counter() - start,
        )
    except _Skip as skip:
        return CheckResult(
            check_id=check_id,
            seed=scenario.spec.seed,
            residuals={},
            tolerances=tols,
            passed=True,
            skipped=True,
            skip_reason=skip.reason,
            elapsed=time.perf_counter() - start,
        )
    except SignetError as exc:
        return CheckResult(
            check_id=check_id,
            seed=scenario.spec.seed,
            residuals={},
            tolerances=tols,
            passed=False,
            error=f"{type(exc).__name__}: {exc}",
            elapsed=time.perf_counter() - start,
        )


def _run_spec(args):
    spec, check_ids, tolerances = args
    scenario = generate(spec)
    return [run_check(cid, scenario, tolerances.get(cid)) for cid in check_ids]


def run_suite(
    specs,
    checks=None,
    tolerances: dict | None = None,
    workers: int = 1,
) -> tuple[list[CheckResult], dict]:
    """All requested checks on all specs; deterministic result order.

    ``tolerances`` maps check name to its override dict. ``workers`` above
    one fans scenarios out across processes; results are merged by
    (check, seed) so the report does not depend on scheduling.
    """
    specs = list(specs)
    check_ids = list(checks) if checks is not None else registered_checks()
    for cid in check_ids:
        if cid not in CHECKS:
            raise ValueError(f"unknown check {cid!r}")
    tolerances = tolerances or {}
    tasks = [(spec, check_ids, tolerances) for spec in specs]
    if workers > 1 and len(tasks) > 1:
        try:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                grouped = list(pool.map(_run_spec, tasks))
        except (OSError, PermissionError):
            grouped = [_run_spec(task) for task in tasks]
    else:
        grouped = [_run_spec(task) for task in tasks]
    results = [res for group in grouped for res in group]
    results.sort(key=lambda r: (r.check_id, r.seed))
    summary = {
        "total": len(results),
        "passed": sum(1 for r in results if r.passed and not r.skipped),
        "failed": sum(1 for r in results if not r.passed),
        "skipped": sum(1 for r in results if r.skipped),
        "failures": [
            {"check": r.check_id, "seed": r.seed} for r in results if not r.passed
        ],
    }
    return results, summary


def suite_workers(hint: int | None = None) -> int:
    """Effective worker count: the requested hint (default serial), capped
    by the SIGNET_THREADS environment variable when it is set."""
    requested = hint if hint is not None and hint >= 1 else 1
    env = os.environ.get("SIGNET_THREADS", "")
    if env.isdigit() and int(env) >= 1:
        return min(requested, int(env))
    return requested


def write_results_jsonl(results, summary, fh):
    """One JSON line per result, then one summary line."""
    for result in results:
        fh.write(dumps(result.to_json_dict()) + "\n")
    fh.write(dumps({"summary": summary}) + "\n")
