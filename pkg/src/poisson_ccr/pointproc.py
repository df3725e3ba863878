"""Stationary Poisson and marked Poisson processes on a bounded window.

Samplers are pure functions of ``(seed, replicate)`` built on the counter-based
uniforms in :mod:`poisson_ccr.rng`, and are evaluated in vectorised batches of
replicates. Monte Carlo means are aggregated with exactly rounded sums, so the
estimate does not depend on how replicates were split across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special, stats

from . import rng
from .l2grid import Grid, GridFunction, Window

__all__ = [
    "Window",
    "LevyMeasure",
    "PointConfiguration",
    "MarkedConfiguration",
    "ConfigurationBatch",
    "PoissonSampler",
    "MarkedSampler",
    "MCEstimate",
    "Box",
    "sample_poisson",
    "sample_marked",
    "eta_count",
    "xi_mass",
    "exp_functional",
    "exp_functional_batch",
    "xi_exponential_batch",
    "master_equation_rhs",
    "compound_laplace_rhs",
    "mc_mean",
    "per_config",
]

_COUNT_STREAM = 0
_COORD_STREAM = 1  # + axis
_MARK_STREAM = 8
_REJECT_STREAM = 16  # + 2 * attempt (+1 for the accept draw)
_MAX_REJECT_ROUNDS = 4096
_DETERMINISTIC_RTOL = 1e-12


# --------------------------------------------------------------------------
# Levy measures
# --------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class LevyMeasure:
    """A measure on (0, inf) with finite total mass.

    Families:
      * ``atomic``: ``sum_k w_k delta_{r_k}``
      * ``exponential``: ``mass * beta * exp(-beta r) dr``
      * ``gamma``: ``shape * exp(-rate r) / r dr`` restricted to ``[r_min, inf)``
    """

    family: str
    atoms: tuple = ()
    weights: tuple = ()
    beta: float = 1.0
    mass: float = 1.0
    shape: float = 1.0
    r_min: float = 0.0

    def __post_init__(self):
        if self.family == "atomic":
            atoms = tuple(float(r) for r in self.atoms)
            weights = tuple(float(w) for w in self.weights)
            if not atoms or len(atoms) != len(weights):
                raise ValueError("atomic Levy measure needs matching non-empty atoms and weights")
            if min(atoms) <= 0 or min(weights) <= 0 or not all(map(math.isfinite, atoms + weights)):
                raise ValueError("atoms must lie in (0, inf) with positive finite weights")
            object.__setattr__(self, "atoms", atoms)
            object.__setattr__(self, "weights", weights)
        elif self.family == "exponential":
            if not (self.beta > 0 and self.mass > 0):
                raise ValueError("exponential density needs beta > 0 and mass > 0")
        elif self.family == "gamma":
            if not (self.shape > 0 and self.beta > 0):
                raise ValueError("gamma-type density needs shape > 0 and rate > 0")
            if not self.r_min > 0:
                raise ValueError("gamma-type measure has infinite mass without a cutoff r_min > 0")
        else:
            raise ValueError(f"unknown Levy family {self.family!r}")

    @classmethod
    def atomic(cls, atoms, weights) -> "LevyMeasure":
        return cls("atomic", atoms=tuple(atoms), weights=tuple(weights))

    @classmethod
    def exponential(cls, beta: float, mass: float = 1.0) -> "LevyMeasure":
        return cls("exponential", beta=beta, mass=mass)

    @classmethod
    def gamma(cls, shape: float, rate: float, r_min: float) -> "LevyMeasure":
        return cls("gamma", shape=shape, beta=rate, r_min=r_min)

    @property
    def total_mass(self) -> float:
        if self.family == "atomic":
            return math.fsum(self.weights)
        if self.family == "exponential":
            return self.mass
        return self.shape * float(special.exp1(self.beta * self.r_min))

    def levy_integral(self) -> float:
        """``int min(r, 1) nu(dr)``, in closed form."""
        if self.family == "atomic":
            return math.fsum(w * min(r, 1.0) for r, w in zip(self.atoms, self.weights))
        b = self.beta
        if self.family == "exponential":
            return self.mass * -math.expm1(-b) / b
        a, r0 = self.shape, self.r_min
        if r0 >= 1.0:
            return a * float(special.exp1(b * r0))
        return a * ((math.exp(-b * r0) - math.exp(-b)) / b + float(special.exp1(b)))

    def discarded_mass(self) -> float:
        """``int_0^{r_min} min(r, 1)`` of the untruncated gamma density (0 for other families)."""
        if self.family != "gamma":
            return 0.0
        a, b, r0 = self.shape, self.beta, self.r_min
        if r0 <= 1.0:
            return a * -math.expm1(-b * r0) / b
        return a * (-math.expm1(-b) / b + float(special.exp1(b)) - float(special.exp1(b * r0)))

    def laplace_exponent(self, t) -> np.ndarray | float:
        """``psi(t) = int (1 - exp(-t r)) nu(dr)``, vectorised over t >= 0."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("laplace exponent needs t >= 0")
        if self.family == "atomic":
            r = np.asarray(self.atoms)
            w = np.asarray(self.weights)
            out = (-np.expm1(-np.multiply.outer(t, r)) * w).sum(axis=-1)
        elif self.family == "exponential":
            out = self.mass * t / (t + self.beta)
        else:
            r0 = self.r_min
            out = self.shape * (special.exp1(self.beta * r0) - special.exp1((self.beta + t) * r0))
        return float(out) if out.ndim == 0 else out

    def density(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.family == "exponential":
            return np.where(r > 0, self.mass * self.beta * np.exp(-self.beta * r), 0.0)
        if self.family == "gamma":
            return np.where(r >= self.r_min, self.shape * np.exp(-self.beta * r) / r, 0.0)
        raise ValueError("atomic measures have no density")

    def quadrature(self, nodes: int = 16) -> tuple[np.ndarray, np.ndarray]:
        """Nodes ``r_k`` and positive weights ``w_k`` with ``sum w_k h(r_k) ~ int h dnu``.

        Atomic measures return their atoms; the continuous families use
        Gauss-Laguerre rules in the variable ``beta * (r - r_min)``.
        """
        if self.family == "atomic":
            return np.asarray(self.atoms), np.asarray(self.weights)
        x, w = np.polynomial.laguerre.laggauss(int(nodes))
        if self.family == "exponential":
            return x / self.beta, self.mass * w
        r = self.r_min + x / self.beta
        return r, self.shape * math.exp(-self.beta * self.r_min) * w / (self.beta * r)

    def discretize(self, nodes: int = 16) -> "LevyMeasure":
        """The finite atomic measure carried by :meth:`quadrature`."""
        if self.family == "atomic":
            return self
        r, w = self.quadrature(nodes)
        return LevyMeasure.atomic(r, w)

    def mean_mark(self) -> float:
        """Mean of the normalised mark distribution ``nu / nu(0, inf)``."""
        if self.family == "atomic":
            return math.fsum(r * w for r, w in zip(self.atoms, self.weights)) / self.total_mass
        if self.family == "exponential":
            return 1.0 / self.beta
        return self.shape * math.exp(-self.beta * self.r_min) / self.beta / self.total_mass

    def _sample_marks(self, seed: int, owner_rep: np.ndarray, index: np.ndarray) -> np.ndarray:
        if len(index) == 0:
            return np.zeros(0)
        if self.family == "atomic":
            u = rng.uniforms(rng.stream_key(seed, owner_rep, _MARK_STREAM), index)
            cdf = np.cumsum(self.weights) / self.total_mass
            k = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
            return np.asarray(self.atoms)[k]
        if self.family == "exponential":
            u = rng.uniforms(rng.stream_key(seed, owner_rep, _MARK_STREAM), index)
            return -np.log(u) / self.beta
        # proposal r_min + Exp(beta); accept with probability r_min / r
        out = np.full(len(index), np.nan)
        pending = np.arange(len(index))
        for attempt in range(_MAX_REJECT_ROUNDS):
            reps, idx = owner_rep[pending], index[pending]
            u = rng.uniforms(rng.stream_key(seed, reps, _REJECT_STREAM + 2 * attempt), idx)
            v = rng.uniforms(rng.stream_key(seed, reps, _REJECT_STREAM + 2 * attempt + 1), idx)
            r = self.r_min - np.log(u) / self.beta
            ok = v * r <= self.r_min
            out[pending[ok]] = r[ok]
            pending = pending[~ok]
            if len(pending) == 0:
                return out
        raise RuntimeError("rejection sampler for gamma marks did not terminate")


# --------------------------------------------------------------------------
# Configurations
# --------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class PointConfiguration:
    points: np.ndarray
    window: Window
    provenance: tuple = (None, None)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).reshape(-1, self.window.dimension)
        if len(p) and not np.all(self.window.contains(p)):
            raise ValueError("configuration has points outside the window")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True, eq=False)
class MarkedConfiguration(PointConfiguration):
    marks: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        super().__post_init__()
        m = np.asarray(self.marks, dtype=float).reshape(-1)
        if len(m) != len(self.points):
            raise ValueError("need exactly one mark per point")
        if len(m) and not np.all(m > 0):
            raise ValueError("marks must be positive")
        m.setflags(write=False)
        object.__setattr__(self, "marks", m)

    @property
    def pairs(self) -> list:
        return list(zip(map(tuple, self.points), self.marks))


@dataclass(frozen=True, eq=False)
class ConfigurationBatch:
    """Replicates ``start .. start + n - 1`` stored as flat arrays.

    ``owner[j]`` is the local replicate (0..n-1) that point j belongs to; points
    of one replicate are contiguous and in generation order.
    """

    points: np.ndarray
    owner: np.ndarray
    counts: np.ndarray
    window: Window
    seed: int
    start: int
    marks: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.counts)

    def configuration(self, i: int) -> PointConfiguration:
        lo = int(self.counts[:i].sum())
        hi = lo + int(self.counts[i])
        prov = (self.seed, self.start + i)
        if self.marks is None:
            return PointConfiguration(self.points[lo:hi], self.window, prov)
        return MarkedConfiguration(self.points[lo:hi], self.window, prov, self.marks[lo:hi])

    def __iter__(self):
        return (self.configuration(i) for i in range(self.n))

    def product(self, factors) -> np.ndarray:
        """Per-replicate product of per-point factors (empty product = 1)."""
        out = np.ones(self.n, dtype=np.result_type(factors, float))
        np.multiply.at(out, self.owner, factors)
        return out

    def total(self, terms) -> np.ndarray:
        """Per-replicate sum of per-point terms."""
        return np.bincount(self.owner, weights=terms, minlength=self.n)


def _draw_points(window: Window, mean_count: float, seed: int, start: int, stop: int):
    reps = np.arange(start, stop, dtype=np.int64)
    u = rng.uniforms(rng.stream_key(seed, reps, _COUNT_STREAM), 0)
    counts = stats.poisson.ppf(u, mean_count).astype(np.int64) if mean_count > 0 else np.zeros(len(reps), np.int64)
    owner = np.repeat(np.arange(len(reps)), counts)
    first = np.concatenate([[0], np.cumsum(counts)[:-1]])
    index = np.arange(len(owner)) - np.repeat(first, counts)
    owner_rep = reps[owner]
    d = window.dimension
    coords = np.empty((len(owner), d))
    for axis in range(d):
        uu = rng.uniforms(rng.stream_key(seed, owner_rep, _COORD_STREAM + axis), index)
        coords[:, axis] = window.lower[axis] + uu * (window.upper[axis] - window.lower[axis])
    # rounding can land a coordinate on the open upper face
    np.minimum(coords, np.nextafter(window.upper, window.lower), out=coords)
    return coords, owner, counts, owner_rep, index


@dataclass(frozen=True, eq=False)
class PoissonSampler:
    """Poisson process with intensity ``intensity * Lebesgue`` restricted to ``window``."""

    window: Window
    intensity: float

    def __post_init__(self):
        if not (self.intensity > 0 and math.isfinite(self.intensity)):
            raise ValueError("intensity must be positive and finite")
        if not math.isfinite(self.intensity * self.window.volume):
            raise ValueError("expected point count must be finite")

    @classmethod
    def on_grid(cls, grid: Grid) -> "PoissonSampler":
        return cls(grid.window(), grid.intensity)

    @property
    def mean_count(self) -> float:
        return self.intensity * self.window.volume

    def sample_batch(self, seed: int, start: int, stop: int) -> ConfigurationBatch:
        coords, owner, counts, _, _ = _draw_points(self.window, self.mean_count, seed, start, stop)
        return ConfigurationBatch(coords, owner, counts, self.window, seed, start)

    def sample(self, seed: int, replicate: int) -> PointConfiguration:
        return self.sample_batch(seed, replicate, replicate + 1).configuration(0)


@dataclass(frozen=True, eq=False)
class MarkedSampler:
    """Poisson process on window x (0, inf) with intensity ``rho0_scale * Lebesgue (x) nu``."""

    window: Window
    rho0_scale: float
    nu: LevyMeasure

    def __post_init__(self):
        if not (self.rho0_scale > 0 and math.isfinite(self.rho0_scale)):
            raise ValueError("rho0_scale must be positive and finite")

    @classmethod
    def on_grid(cls, grid: Grid, nu: LevyMeasure) -> "MarkedSampler":
        return cls(grid.window(), grid.intensity, nu)

    @property
    def mean_count(self) -> float:
        return self.rho0_scale * self.window.volume * self.nu.total_mass

    def sample_batch(self, seed: int, start: int, stop: int) -> ConfigurationBatch:
        coords, owner, counts, owner_rep, index = _draw_points(self.window, self.mean_count, seed, start, stop)
        marks = self.nu._sample_marks(seed, owner_rep, index)
        return ConfigurationBatch(coords, owner, counts, self.window, seed, start, marks)

    def sample(self, seed: int, replicate: int) -> MarkedConfiguration:
        return self.sample_batch(seed, replicate, replicate + 1).configuration(0)


def sample_poisson(window: Window, intensity_scale: float, seed: int, replicate: int) -> PointConfiguration:
    return PoissonSampler(window, intensity_scale).sample(seed, replicate)


def sample_marked(window: Window, rho0_scale: float, nu: LevyMeasure, seed: int, replicate: int) -> MarkedConfiguration:
    return MarkedSampler(window, rho0_scale, nu).sample(seed, replicate)


# --------------------------------------------------------------------------
# Pathwise functionals
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class Box:
    """Half-open box ``[lower, upper)`` usable as a set predicate."""

    lower: tuple
    upper: tuple

    def __call__(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        p = p.reshape(-1, len(np.atleast_1d(self.lower)))
        return np.all((p >= np.asarray(self.lower)) & (p < np.asarray(self.upper)), axis=1)


def _mask(B: Callable, points: np.ndarray) -> np.ndarray:
    if len(points) == 0:
        return np.zeros(0, dtype=bool)
    return np.asarray(B(points), dtype=bool).reshape(len(points))


def eta_count(config: PointConfiguration, B: Callable) -> int:
    """Number of points of the configuration in B."""
    return int(_mask(B, config.points).sum())


def xi_mass(config: MarkedConfiguration, B: Callable) -> float:
    """Compound mass: sum of marks of points in B."""
    return math.fsum(config.marks[_mask(B, config.points)])


def _check_finite(u: GridFunction) -> None:
    if not np.all(np.isfinite(u.values)):
        raise ValueError("u has non-finite values")


def exp_functional(config: PointConfiguration, u: GridFunction) -> complex:
    """``exp(eta(u)) = prod_i exp(u(y_i))``."""
    _check_finite(u)
    return complex(np.prod(np.exp(u.evaluate(config.points))))


def exp_functional_batch(batch: ConfigurationBatch, u: GridFunction) -> np.ndarray:
    return batch.product(np.exp(u.evaluate(batch.points)))


def master_equation_rhs(u: GridFunction, grid: Grid | None = None) -> complex:
    """``exp(int (e^u - 1) d lambda)`` for a grid-simple u."""
    _check_finite(u)
    grid = grid or u.grid
    return complex(np.exp(np.sum(np.expm1(u.values)) * grid.cell_measure))


def compound_laplace_rhs(u: GridFunction, nu: LevyMeasure, grid: Grid | None = None) -> float:
    """``E exp(-xi(u)) = exp(-sum_cells rho0(cell) psi(u(cell)))`` for grid-simple u >= 0."""
    grid = grid or u.grid
    if np.any(np.abs(u.values.imag) > 0) or np.any(u.values.real < 0):
        raise ValueError("compound Laplace functional needs a real u >= 0")
    t = u.values.real
    nz = t > 0
    psi = nu.laplace_exponent(t[nz]) if np.any(nz) else np.zeros(0)
    return float(np.exp(-math.fsum(np.atleast_1d(psi)) * grid.cell_measure))


def xi_exponential_batch(batch: ConfigurationBatch, u: GridFunction) -> np.ndarray:
    """``exp(-xi(u)) = prod_i exp(-r_i u(y_i))`` per replicate."""
    return batch.product(np.exp(-batch.marks * u.evaluate(batch.points).real))


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class MCEstimate:
    mean: complex
    stderr: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("an MC estimate needs n >= 2")
        if not self.stderr >= 0:
            raise ValueError("stderr must be nonnegative")

    def zscore(self, target: complex) -> float:
        """``|mean - target| / stderr``; a deterministic functional (stderr 0) is held to 1e-12 relative."""
        err = abs(complex(self.mean) - complex(target))
        if self.stderr == 0:
            return 0.0 if err <= _DETERMINISTIC_RTOL * max(1.0, abs(complex(target))) else math.inf
        return err / self.stderr

    def agrees(self, target: complex, k: float = 4.0) -> bool:
        return self.zscore(target) <= k


def per_config(fn: Callable[[PointConfiguration], complex]) -> Callable[[ConfigurationBatch], np.ndarray]:
    """Lift a per-configuration functional to a batched one."""

    def batched(batch: ConfigurationBatch) -> np.ndarray:
        return np.array([fn(c) for c in batch], dtype=complex)

    return batched


def _fsum_complex(x: np.ndarray) -> complex:
    return complex(math.fsum(x.real), math.fsum(x.imag))


def mc_mean(
    functional: Callable[[ConfigurationBatch], np.ndarray],
    sampler,
    n: int,
    seed: int,
    workers: int = 1,
    block: int = 16384,
) -> MCEstimate:
    """Mean and standard error of a batched functional over replicates 0..n-1.

    Replicates are cut into fixed blocks independent of ``workers`` and the
    sums are exactly rounded, so the result is bit-identical for any worker
    count.
    """
    n = int(n)
    if n < 2:
        raise ValueError("mc_mean needs n >= 2")
    bounds = [(s, min(s + block, n)) for s in range(0, n, block)]

    def run(bound):
        s, e = bound
        vals = np.asarray(functional(sampler.sample_batch(seed, s, e)), dtype=complex)
        if vals.shape != (e - s,):
            raise ValueError(f"functional returned shape {vals.shape}, expected {(e - s,)}")
        return vals

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    values = np.concatenate(parts)
    mean = _fsum_complex(values) / n
    dev = values - mean
    var = math.fsum((dev.real**2 + dev.imag**2)) / (n - 1)
    return MCEstimate(mean, math.sqrt(var / n), n)
