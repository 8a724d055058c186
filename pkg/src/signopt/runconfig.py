"""Run configuration: JSON schema, validation, and object building.

Schema (all JSON):
  graph:      {"n": int, "edges": [[i, j, w], ...]}
              | {"ring": {"n": int, "weight": w}}
              | {"ring_random_weights": {"n": int, "seed": int}}
  locals:     [{"abs": {"s": w}} | {"quantile": {"alpha": a, "y": y, "s": s}}
               | {"quadratic": {"a": a, "b": b}}, ...]
  algorithm:  "algo1" | "algo2" | "algo3" | "dgd"
  lambda:     number | "auto"        (auto = 1.05 * critical bound)
  schedule:   {"power": a} | {"constant": r} | {"affine": [a, b]}
  steps:      int
  x0:         [..] | {"zeros": n} | {"spread": [lo, hi]}
  noise:      {"sigma": scalar | per-edge list, "seed": int}     (algo2)
  activation: {"p": "from_weights" | per-edge list, "seed": int} (algo3)
  record_stride: int (optional)
  strict:     bool (optional; validate lambda > critical bound)
  bounds:     [bound names] (optional; verified into the report)
  band_tol:   float (optional; terminal-band summary tolerance)
  outputs:    {"csv": path, "svg": path, "report": path} (optional)
  svg_size:   [width, height] (optional)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algorithms import ALGORITHMS, AffineReciprocal, Constant, PowerLaw, StepSchedule
from .graph import WeightedGraph, is_connected, ring, ring_random_weights
from .objective import (
    AbsDeviation,
    ProblemInstance,
    Quadratic,
    Quantile,
    penalty_lower_bound,
)
from .stochastic import ActivationMatrix, NoiseModel

AUTO_LAMBDA_FACTOR = 1.05


class ConfigError(ValueError):
    """Invalid run configuration; message names the offending field."""

    def __init__(self, fieldname: str, message: str):
        self.fieldname = fieldname
        super().__init__(f"config field {fieldname!r}: {message}")


def _require(cond: bool, fieldname: str, message: str):
    if not cond:
        raise ConfigError(fieldname, message)


def parse_graph(spec) -> WeightedGraph:
    _require(isinstance(spec, dict), "graph", "must be an object")
    if "ring" in spec:
        r = spec["ring"]
        _require(isinstance(r, dict) and "n" in r, "graph.ring", "needs n")
        return ring(int(r["n"]), float(r.get("weight", 1.0)))
    if "ring_random_weights" in spec:
        r = spec["ring_random_weights"]
        _require(isinstance(r, dict) and "n" in r and "seed" in r,
                 "graph.ring_random_weights", "needs n and seed")
        return ring_random_weights(int(r["n"]), int(r["seed"]))
    _require("n" in spec and "edges" in spec, "graph",
             "needs n and edges (or a generator)")
    try:
        return WeightedGraph(int(spec["n"]), tuple(tuple(e) for e in spec["edges"]))
    except ValueError as exc:
        raise ConfigError("graph.edges", str(exc)) from None


def parse_local(spec, idx: int):
    _require(isinstance(spec, dict) and len(spec) == 1, f"locals[{idx}]",
             "must be a single-key object")
    kind, params = next(iter(spec.items()))
    try:
        if kind == "abs":
            return AbsDeviation(float(params["s"]))
        if kind == "quantile":
            return Quantile(float(params["alpha"]), float(params["y"]),
                            float(params["s"]))
        if kind == "quadratic":
            return Quadratic(float(params["a"]), float(params["b"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"locals[{idx}].{kind}", str(exc)) from None
    raise ConfigError(f"locals[{idx}]", f"unknown family {kind!r}")


def parse_schedule(spec) -> StepSchedule:
    _require(isinstance(spec, dict) and len(spec) == 1, "schedule",
             "must be a single-key object")
    kind, params = next(iter(spec.items()))
    try:
        if kind == "power":
            return PowerLaw(float(params))
        if kind == "constant":
            return Constant(float(params))
        if kind == "affine":
            a, b = params
            return AffineReciprocal(float(a), float(b))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"schedule.{kind}", str(exc)) from None
    raise ConfigError("schedule", f"unknown schedule {kind!r}")


def parse_x0(spec, n: int) -> np.ndarray:
    if isinstance(spec, list):
        _require(len(spec) == n, "x0", f"needs {n} entries, got {len(spec)}")
        return np.array([float(v) for v in spec])
    _require(isinstance(spec, dict) and len(spec) == 1, "x0",
             "must be a list or a single-key object")
    kind, params = next(iter(spec.items()))
    if kind == "zeros":
        _require(int(params) == n, "x0.zeros", f"must equal n={n}")
        return np.zeros(n)
    if kind == "spread":
        lo, hi = params
        return np.linspace(float(lo), float(hi), n)
    raise ConfigError("x0", f"unknown form {kind!r}")


@dataclass
class RunConfig:
    """Validated run configuration with built domain objects."""

    problem: ProblemInstance
    algorithm: str
    schedule: StepSchedule
    x0: np.ndarray
    steps: int
    record_stride: int
    noise: NoiseModel | None
    activation: ActivationMatrix | None
    lam_bound: float | None
    strict: bool
    bounds: tuple
    band_tol: float
    outputs: dict
    svg_size: tuple
    raw: dict = field(default_factory=dict)


def parse_config(raw: dict) -> RunConfig:
    _require(isinstance(raw, dict), "<root>", "config must be a JSON object")
    for key in ("graph", "locals", "algorithm", "schedule", "steps", "x0"):
        _require(key in raw, key, "missing")

    g = parse_graph(raw["graph"])
    _require(isinstance(raw["locals"], list), "locals", "must be a list")
    _require(len(raw["locals"]) == g.n, "locals",
             f"needs one entry per node ({g.n}), got {len(raw['locals'])}")
    locs = tuple(parse_local(s, i) for i, s in enumerate(raw["locals"]))

    algorithm = raw["algorithm"]
    _require(algorithm in ALGORITHMS, "algorithm",
             f"must be one of {ALGORITHMS}, got {algorithm!r}")

    if algorithm in ("algo1", "algo2"):
        _require(is_connected(g), "graph", f"{algorithm} needs a connected graph")

    schedule = parse_schedule(raw["schedule"])
    steps = int(raw["steps"])
    _require(steps >= 1, "steps", "must be >= 1")
    x0 = parse_x0(raw["x0"], g.n)

    noise = None
    if algorithm == "algo2":
        _require("noise" in raw, "noise", "algo2 needs a noise spec")
        nspec = raw["noise"]
        _require(isinstance(nspec, dict) and "seed" in nspec, "noise.seed",
                 "algo2 needs an explicit seed")
        sigma = nspec.get("sigma", 0.0)
        if isinstance(sigma, list):
            _require(len(sigma) == g.m, "noise.sigma",
                     f"needs one value per edge ({g.m})")
            sig_edges = tuple(float(s) for s in sigma)
        else:
            sig_edges = (float(sigma),) * g.m
        try:
            noise = NoiseModel(g, sig_edges, int(nspec["seed"]))
        except ValueError as exc:
            raise ConfigError("noise", str(exc)) from None

    activation = None
    if algorithm == "algo3":
        _require("activation" in raw, "activation", "algo3 needs an activation spec")
        aspec = raw["activation"]
        _require(isinstance(aspec, dict) and "seed" in aspec, "activation.seed",
                 "algo3 needs an explicit seed")
        p = aspec.get("p", "from_weights")
        try:
            if p == "from_weights":
                activation = ActivationMatrix.from_weights(g, int(aspec["seed"]))
            else:
                _require(isinstance(p, list) and len(p) == g.m, "activation.p",
                         f"needs one value per edge ({g.m}) or 'from_weights'")
                activation = ActivationMatrix(g, tuple(float(v) for v in p),
                                              int(aspec["seed"]))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("activation", str(exc)) from None

    strict = bool(raw.get("strict", False))
    lam_raw = raw.get("lambda", "auto")
    lam_bound = None
    probe = ProblemInstance(g, locs, 1.0)
    try:
        lam_bound = penalty_lower_bound(probe)
    except ValueError:
        lam_bound = None
    if lam_raw == "auto":
        _require(lam_bound is not None, "lambda",
                 "auto needs a connected graph and bounded-subgradient locals")
        lam = AUTO_LAMBDA_FACTOR * lam_bound
    else:
        lam = float(lam_raw)
        _require(lam > 0.0, "lambda", "must be > 0")
        if strict:
            _require(lam_bound is not None, "lambda",
                     "strict validation needs the critical bound")
            _require(lam > lam_bound, "lambda",
                     f"strict mode needs lambda > {lam_bound:g}, got {lam:g}")
    problem = ProblemInstance(g, locs, lam)

    stride = int(raw.get("record_stride", max(1, steps // 2000)))
    _require(stride >= 1, "record_stride", "must be >= 1")

    bounds = tuple(raw.get("bounds", ()))
    band_tol = float(raw.get("band_tol", 0.05))

    outputs = raw.get("outputs", {})
    _require(isinstance(outputs, dict), "outputs", "must be an object")

    svg_size = tuple(raw.get("svg_size", (900, 540)))
    _require(len(svg_size) == 2, "svg_size", "must be [width, height]")

    return RunConfig(
        problem=problem,
        algorithm=algorithm,
        schedule=schedule,
        x0=x0,
        steps=steps,
        record_stride=stride,
        noise=noise,
        activation=activation,
        lam_bound=lam_bound,
        strict=strict,
        bounds=bounds,
        band_tol=band_tol,
        outputs=dict(outputs),
        svg_size=(int(svg_size[0]), int(svg_size[1])),
        raw=dict(raw),
    )
