"""Experiment configuration: a YAML document of nested key-value blocks.

Schema (all lattice vectors are integer cell offsets along the cone generators)::

    seed: 20261016            # required; no nondeterministic default
    n: 100000                 # default MC sample count
    workers: 1
    output_dir: out           # optional, else $POISSON_CCR_OUT, else ./out
    cone:
      preset: orthant1        # orthant1 | orthant2 | orthant3 | wedge
      # or: dimension: 2, generators: [[1, 1], [-1, 1]], normals: [[1, 1], [-1, 1]]
    grid:
      cells: [16]
      step: [0.25]
      intensity: 1.0
    fibers:
      a: [4]
      b: [4]
      c: [2]
    levy:
      nodes: 16
      measures:
        atom:  {family: atomic, atoms: [1.0], weights: [1.0]}
        exp:   {family: exponential, beta: 1.0, mass: 1.0}
        gamma: {family: gamma, shape: 1.0, rate: 1.0, r_min: 0.1}
    labels:                   # optional named grid functions
      bump: {indicator: {lower: [0], upper: [2]}, value: [0.5, 0.0]}
      pts:  {cells: [[0, 0.5, 0.0], [3, 0.0, -0.2]]}
      osc:  {profile: {amplitude: [0.4, 0.0], wavevector: [0.8], lower: [0], upper: [4]}}
    suites:                   # optional per-suite overrides
      sigma-inner: {n: 50000, pairs: [[bump, osc]]}
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .cone import BUILTIN_CONES, PolyhedralCone
from .corpus import block, profile
from .l2grid import Grid, GridFunction
from .pointproc import LevyMeasure

OUTPUT_ENV = "POISSON_CCR_OUT"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    cone: PolyhedralCone
    grid: Grid
    fibers: dict
    levy: dict
    mark_nodes: int
    labels: dict
    suites: dict
    seed: int
    n: int
    workers: int = 1
    output_dir: str | None = None
    source: str | None = field(default=None)

    def fiber(self, name: str) -> tuple:
        return self.fibers[name]

    def fiber_vector(self, name: str) -> np.ndarray:
        return self.grid.lattice_vector(self.fibers[name])

    def suite_params(self, suite: str) -> dict:
        return dict(self.suites.get(suite) or {})

    def resolve_output_dir(self, override: str | None = None) -> Path:
        return Path(override or self.output_dir or os.environ.get(OUTPUT_ENV) or "out")


def _line_index(node, path=(), out=None) -> dict:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            p = path + (str(key.value),)
            out[p] = key.start_mark.line + 1
            _line_index(value, p, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, value in enumerate(node.value):
            p = path + (str(i),)
            out[p] = value.start_mark.line + 1
            _line_index(value, p, out)
    return out


class _Reader:
    def __init__(self, data: dict, lines: dict, source: str):
        self.data = data
        self.lines = lines
        self.source = source

    def fail(self, path: tuple, msg: str):
        where = ".".join(path) or "<root>"
        line = None
        for i in range(len(path), 0, -1):
            line = self.lines.get(tuple(path[:i]))
            if line is not None:
                break
        loc = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{loc}: field '{where}': {msg}")

    def get(self, path: tuple, default=..., kind=None):
        node = self.data
        for key in path:
            if not isinstance(node, dict) or key not in node:
                if default is ...:
                    self.fail(path, "missing required field")
                return default
            node = node[key]
        if kind is not None:
            try:
                return kind(node)
            except (TypeError, ValueError) as exc:
                self.fail(path, str(exc))
        return node


def _int_vec(x) -> tuple:
    arr = np.atleast_1d(np.asarray(x))
    if arr.ndim != 1 or not np.all(arr == np.round(arr)):
        raise ValueError(f"expected a list of integers, got {x!r}")
    return tuple(int(v) for v in arr)


def _complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError("complex values are written [re, im]")
        return complex(float(x[0]), float(x[1]))
    return complex(float(x))


def _build_cone(r: _Reader) -> PolyhedralCone:
    block_ = r.get(("cone",))
    if not isinstance(block_, dict):
        r.fail(("cone",), "expected a mapping")
    try:
        if "preset" in block_:
            name = block_["preset"]
            if name not in BUILTIN_CONES:
                r.fail(("cone", "preset"), f"unknown preset {name!r}; choose from {sorted(BUILTIN_CONES)}")
            return BUILTIN_CONES[name]()
        return PolyhedralCone(
            int(r.get(("cone", "dimension"))),
            r.get(("cone", "generators")),
            r.get(("cone", "normals")),
            name=str(block_.get("name", "cone")),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        r.fail(("cone",), str(exc))


def _build_label(r: _Reader, name: str, entry, grid: Grid) -> GridFunction:
    path = ("labels", name)
    if not isinstance(entry, dict):
        r.fail(path, "expected a mapping")
    try:
        if "indicator" in entry:
            ind = entry["indicator"]
            return block(grid, _int_vec(ind["lower"]), _int_vec(ind["upper"]), _complex(entry.get("value", 1.0)))
        if "cells" in entry:
            entries = []
            for e in entry["cells"]:
                *idx, re, im = e
                entries.append((*idx, float(re), float(im)))
            return GridFunction.from_cells(grid, entries)
        if "profile" in entry:
            p = entry["profile"]
            return profile(
                grid, _complex(p["amplitude"]), p["wavevector"], _int_vec(p["lower"]), _int_vec(p["upper"])
            )
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        r.fail(path, f"bad label preset: {exc}")
    r.fail(path, "label needs one of: indicator, cells, profile")


def _build_levy(r: _Reader, name: str, entry) -> LevyMeasure:
    path = ("levy", "measures", name)
    if not isinstance(entry, dict) or "family" not in entry:
        r.fail(path, "expected a mapping with a 'family' key")
    fam = entry["family"]
    try:
        if fam == "atomic":
            return LevyMeasure.atomic(entry["atoms"], entry["weights"])
        if fam == "exponential":
            return LevyMeasure.exponential(float(entry["beta"]), float(entry.get("mass", 1.0)))
        if fam == "gamma":
            return LevyMeasure.gamma(float(entry["shape"]), float(entry["rate"]), float(entry["r_min"]))
    except (KeyError, ValueError, TypeError) as exc:
        r.fail(path, f"bad Levy measure: {exc}")
    r.fail(path + ("family",), f"unknown family {fam!r}")


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f":{mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{source}{line}: malformed YAML: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    r = _Reader(data, _line_index(root), source)

    seed = r.get(("seed",), kind=int)
    n = r.get(("n",), 100_000, kind=int)
    if n < 2:
        r.fail(("n",), "need n >= 2")
    workers = r.get(("workers",), 1, kind=int)
    if workers < 1:
        r.fail(("workers",), "need workers >= 1")

    cone = _build_cone(r)
    try:
        grid = Grid(
            cone,
            _int_vec(r.get(("grid", "cells"))),
            tuple(float(h) for h in np.atleast_1d(r.get(("grid", "step")))),
            float(r.get(("grid", "intensity"), 1.0)),
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        r.fail(("grid",), str(exc))

    fibers_raw = r.get(("fibers",))
    if not isinstance(fibers_raw, dict):
        r.fail(("fibers",), "expected a mapping of name -> lattice vector")
    fibers = {}
    for name in ("a", "b"):
        if name not in fibers_raw:
            r.fail(("fibers", name), "missing required field")
    for name, vec in fibers_raw.items():
        try:
            k = _int_vec(vec)
        except ValueError as exc:
            r.fail(("fibers", name), str(exc))
        if len(k) != cone.dimension or min(k) < 0:
            r.fail(("fibers", name), f"need {cone.dimension} nonnegative integers")
        fibers[name] = k
    fibers.setdefault("c", tuple(max(1, v // 2) for v in fibers["a"]))

    levy_raw = r.get(("levy",), {})
    nodes = int(levy_raw.get("nodes", 16)) if isinstance(levy_raw, dict) else 16
    measures = {}
    for name, entry in (levy_raw.get("measures") or {}).items():
        measures[name] = _build_levy(r, name, entry)
    if not measures:
        measures = {
            "atom": LevyMeasure.atomic([1.0], [1.0]),
            "exp": LevyMeasure.exponential(1.0, 1.0),
            "gamma": LevyMeasure.gamma(1.0, 1.0, 0.1),
        }

    labels = {}
    for name, entry in (r.get(("labels",), {}) or {}).items():
        labels[name] = _build_label(r, name, entry, grid)

    suites = r.get(("suites",), {}) or {}
    if not isinstance(suites, dict):
        r.fail(("suites",), "expected a mapping of suite name -> parameters")
    from .suites import SUITES  # local import: suites depends on this module

    for name, params in suites.items():
        if name not in SUITES:
            r.fail(("suites", name), f"unknown suite; choose from {list(SUITES)}")
        if params is not None and not isinstance(params, dict):
            r.fail(("suites", name), "expected a mapping")
        for key in ("labels", "u", "pairs"):
            for ref in _flatten((params or {}).get(key, [])):
                if ref not in labels:
                    r.fail(("suites", name, key), f"unknown label preset {ref!r}")
        if params and "seed" in params:
            r.get(("suites", name, "seed"), kind=int)

    return ExperimentConfig(
        cone=cone,
        grid=grid,
        fibers=fibers,
        levy=measures,
        mark_nodes=nodes,
        labels=labels,
        suites=suites,
        seed=seed,
        n=n,
        workers=workers,
        output_dir=data.get("output_dir"),
        source=source,
    )


def _flatten(x):
    if isinstance(x, (list, tuple)):
        for item in x:
            yield from _flatten(item)
    else:
        yield x


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path))
