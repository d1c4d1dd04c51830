"""Scenario files: the single human-editable input format.

One JSON document describes a run: the graph family, the switching
schedule (explicit or periodic shorthand), the dwell floor, the horizon,
an initial state and sampling/tolerance options. Parsing is strict;
unknown keys are rejected so typos fail loudly instead of silently using a
default. Re-serialization is canonical (explicit schedule, defaults filled
in), and parsing the result reproduces the same objects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._jsonfmt import dumps
from .errors import ScenarioFormatError
from .graph import SignedDigraph, build_graph
from .switching import GraphLibrary, SwitchingSignal, build_signal

_SCENARIO_KEYS = {
    "graphs",
    "schedule",
    "tau_min",
    "t0",
    "horizon",
    "x0",
    "sample_dt",
    "tolerances",
}
_TOLERANCE_KEYS = {"tol_limit", "tol_zero", "stationary_tol"}

DEFAULT_TOLERANCES = {"tol_limit": 1e-6, "tol_zero": 1e-6, "stationary_tol": 1e-9}
DEFAULT_SAMPLE_DT = 0.1


@dataclass(eq=False)
class ParsedScenario:
    """A validated scenario with every downstream default filled in."""

    library: GraphLibrary
    signal: SwitchingSignal
    x0: np.ndarray
    sample_dt: float
    tolerances: dict

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParsedScenario):
            return NotImplemented
        return (
            len(self.library.graphs) == len(other.library.graphs)
            and all(
                np.array_equal(a.adj, b.adj)
                for a, b in zip(self.library.graphs, other.library.graphs)
            )
            and np.array_equal(self.signal.switch_times, other.signal.switch_times)
            and np.array_equal(self.signal.indices, other.signal.indices)
            and self.signal.tau_min == other.signal.tau_min
            and self.signal.horizon == other.signal.horizon
            and np.array_equal(self.x0, other.x0)
            and self.sample_dt == other.sample_dt
            and self.tolerances == other.tolerances
        )


def _reject_unknown(mapping: dict, allowed: set, where: str):
    unknown = set(mapping) - allowed
    if unknown:
        raise ScenarioFormatError(
            f"unknown key(s) {sorted(unknown)} in {where}", context=where
        )


def _parse_graph(entry: dict, where: str) -> SignedDigraph:
    _reject_unknown(entry, {"n", "edges"}, where)
    if "n" not in entry:
        raise ScenarioFormatError(f"{where} is missing 'n'", context=where)
    edges = entry.get("edges", [])
    triples = []
    for k, edge in enumerate(edges):
        if len(edge) != 3:
            raise ScenarioFormatError(
                f"{where} edge {k} must be [src, dst, weight]", context=where
            )
        triples.append((int(edge[0]), int(edge[1]), float(edge[2])))
    return build_graph(int(entry["n"]), triples)


def _parse_schedule(entry, where: str):
    if not isinstance(entry, dict):
        raise ScenarioFormatError(f"{where} must be an object", context=where)
    _reject_unknown(entry, {"explicit", "periodic"}, where)
    if ("explicit" in entry) == ("periodic" in entry):
        raise ScenarioFormatError(
            f"{where} needs exactly one of 'explicit' or 'periodic'", context=where
        )
    if "explicit" in entry:
        return [(float(t), int(i)) for t, i in entry["explicit"]]
    periodic = entry["periodic"]
    _reject_unknown(periodic, {"pattern", "repeats"}, f"{where}.periodic")
    return {
        "pattern": [(float(d), int(i)) for d, i in periodic["pattern"]],
        "repeats": int(periodic["repeats"]),
    }


def scenario_from_dict(doc: dict) -> ParsedScenario:
    _reject_unknown(doc, _SCENARIO_KEYS, "scenario")
    for key in ("graphs", "schedule", "tau_min"):
        if key not in doc:
            raise ScenarioFormatError(f"scenario is missing '{key}'", context=key)
    graphs = [
        _parse_graph(g, f"graphs[{i}]") for i, g in enumerate(doc["graphs"])
    ]
    library = GraphLibrary(tuple(graphs))
    schedule = _parse_schedule(doc["schedule"], "schedule")
    t0 = doc.get("t0")
    if isinstance(schedule, dict):
        schedule = dict(schedule, t0=0.0 if t0 is None else float(t0))
    elif t0 is not None and schedule and float(t0) != schedule[0][0]:
        raise ScenarioFormatError(
            f"t0={t0} contradicts the first scheduled time {schedule[0][0]}",
            context="t0",
        )
    signal = build_signal(
        library, schedule, tau_min=float(doc["tau_min"]), horizon=doc.get("horizon")
    )
    n = library.n
    x0 = np.asarray(doc.get("x0", np.ones(n)), dtype=np.float64)
    if x0.shape != (n,):
        raise ScenarioFormatError(
            f"x0 has length {x0.size}, the graphs have {n} nodes", context="x0"
        )
    tolerances = dict(DEFAULT_TOLERANCES)
    overrides = doc.get("tolerances", {})
    _reject_unknown(overrides, _TOLERANCE_KEYS, "tolerances")
    tolerances.update({k: float(v) for k, v in overrides.items()})
    return ParsedScenario(
        library=library,
        signal=signal,
        x0=x0,
        sample_dt=float(doc.get("sample_dt", DEFAULT_SAMPLE_DT)),
        tolerances=tolerances,
    )


def parse_scenario(path) -> ParsedScenario:
    """Load and validate a scenario file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(
                f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}",
                context="json",
            ) from exc
    if not isinstance(doc, dict):
        raise ScenarioFormatError(f"{path}: top level must be an object")
    return scenario_from_dict(doc)


def graph_to_dict(g: SignedDigraph) -> dict:
    edges = []
    for dst in range(g.n):
        for src in range(g.n):
            w = g.adj[dst, src]
            if w != 0.0:
                edges.append([src + 1, dst + 1, float(w)])
    edges.sort(key=lambda e: (e[0], e[1]))
    return {"n": g.n, "edges": edges}


def scenario_to_dict(parsed: ParsedScenario) -> dict:
    """Canonical document: explicit schedule, every default spelled out."""
    signal = parsed.signal
    return {
        "graphs": [graph_to_dict(g) for g in parsed.library.graphs],
        "schedule": {
            "explicit": [
                [float(t), int(i) + 1]
                for t, i in zip(signal.switch_times, signal.indices)
            ]
        },
        "tau_min": signal.tau_min,
        "t0": signal.t0,
        "horizon": signal.horizon,
        "x0": parsed.x0.tolist(),
        "sample_dt": parsed.sample_dt,
        "tolerances": dict(parsed.tolerances),
    }


def write_scenario(parsed: ParsedScenario, fh):
    fh.write(dumps(scenario_to_dict(parsed), indent=2) + "\n")
