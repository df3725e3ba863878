"""Grid-simple functions on X = P: a finite-dimensional stand-in for L^2(X, lambda).

Cells are boxes in the lattice spanned by the cone generators (for the orthant,
ordinary axis-aligned boxes). Shifts by lattice multiples are then exact cell
relabelings, so the isometry and semigroup laws hold with zero error.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .cone import InvariantSet, PolyhedralCone, Region, region

_ALIGN_TOL = 1e-9


class GridError(ValueError):
    """Misaligned shift, support overflow or a cell straddling a region boundary."""


@dataclass(frozen=True, eq=False)
class Window:
    """Axis-aligned sampling box ``[lower, upper)``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("window bounds must be d-vectors of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("window bounds must be finite")
        if not np.all(lo < hi):
            raise ValueError("degenerate window: need lower < upper componentwise")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return np.all((p >= self.lower) & (p < self.upper), axis=-1)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform lattice of ``counts`` cells with lattice step ``step`` on X = P.

    Lattice axes are the cone generators, so the cone must be simplicial
    (exactly d generators). ``intensity`` scales Lebesgue measure, giving
    lambda(cell) = intensity * |det generators| * prod(step).
    """

    cone: PolyhedralCone
    counts: tuple
    step: tuple
    intensity: float = 1.0

    def __post_init__(self):
        d = self.cone.dimension
        counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        step = tuple(float(h) for h in np.atleast_1d(self.step))
        if len(step) == 1 and d > 1:
            step = step * d
        if len(counts) == 1 and d > 1:
            counts = counts * d
        if len(counts) != d or len(step) != d:
            raise ValueError("counts and step need one entry per axis")
        if min(counts) < 1 or min(step) <= 0:
            raise ValueError("cell counts and steps must be positive")
        if len(self.cone.generators) != d:
            raise ValueError("lattice grids need a simplicial cone (exactly d generators)")
        if not (self.intensity > 0 and np.isfinite(self.intensity)):
            raise ValueError("intensity must be positive and finite")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "step", step)

    # -- geometry ---------------------------------------------------------
    @property
    def dimension(self) -> int:
        return self.cone.dimension

    @property
    def shape(self) -> tuple:
        return self.counts

    @property
    def ncells(self) -> int:
        return int(np.prod(self.counts))

    @functools.cached_property
    def basis(self) -> np.ndarray:
        """Columns are the cone generators."""
        return self.cone.generators.T.copy()

    @functools.cached_property
    def cell_measure(self) -> float:
        return float(self.intensity * abs(np.linalg.det(self.basis)) * np.prod(self.step))

    @property
    def measures(self) -> np.ndarray:
        return np.full(self.shape, self.cell_measure)

    @functools.cached_property
    def invariant_set(self) -> InvariantSet:
        return InvariantSet(self.cone)

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            self.cone is other.cone
            and self.counts == other.counts
            and self.step == other.step
            and self.intensity == other.intensity
        )

    def to_physical(self, lattice_coords) -> np.ndarray:
        s = np.asarray(lattice_coords, dtype=float) * np.asarray(self.step)
        return s @ self.basis.T

    def lattice_coords(self, points) -> np.ndarray:
        """Continuous lattice coordinates (in units of cells)."""
        p = np.asarray(points, dtype=float)
        s = np.linalg.solve(self.basis, p.reshape(-1, self.dimension).T).T
        return (s / np.asarray(self.step)).reshape(p.shape)

    def window(self) -> Window:
        """Bounding box of the gridded region, used as the sampling window."""
        corners = np.array(list(itertools.product(*[(0, n) for n in self.counts])), dtype=float)
        phys = self.to_physical(corners)
        return Window(phys.min(axis=0), phys.max(axis=0))

    def locate(self, points) -> np.ndarray:
        """Flat cell index of each point, or -1 for points outside the grid."""
        p = np.asarray(points, dtype=float).reshape(-1, self.dimension)
        if len(p) == 0:
            return np.zeros(0, dtype=np.int64)
        idx = np.floor(self.lattice_coords(p)).astype(np.int64)
        inside = np.all((idx >= 0) & (idx < np.asarray(self.counts)), axis=1)
        flat = np.full(len(p), -1, dtype=np.int64)
        flat[inside] = np.ravel_multi_index(tuple(idx[inside].T), self.counts)
        return flat

    def lattice_steps(self, a) -> tuple:
        """Integer cell offsets of a cone element; raises unless lattice-aligned and in P."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        if a.shape != (self.dimension,):
            raise GridError(f"shift has wrong dimension: {a.shape}")
        if not self.cone.contains(a):
            raise GridError(f"shift {a.tolist()} is not in the cone")
        k = self.lattice_coords(a)
        kr = np.round(k)
        if np.any(np.abs(k - kr) > _ALIGN_TOL):
            raise GridError(f"shift {a.tolist()} is not an integer multiple of the lattice step")
        return tuple(int(v) for v in kr)

    def lattice_vector(self, steps) -> np.ndarray:
        """Physical cone element for integer cell offsets."""
        return self.to_physical(np.asarray(steps, dtype=float))

    def _probe_points(self) -> np.ndarray:
        """Cell centre plus the 2^d vertices pulled slightly inward, per cell."""
        idx = np.indices(self.counts).reshape(self.dimension, -1).T.astype(float)
        offsets = [np.full(self.dimension, 0.5)]
        for corner in itertools.product((1e-6, 1 - 1e-6), repeat=self.dimension):
            offsets.append(np.array(corner))
        probes = np.stack([idx + o for o in offsets], axis=1)
        return self.to_physical(probes)

    @functools.lru_cache(maxsize=256)
    def _region_mask(self, lower: tuple, upper: tuple | None) -> np.ndarray:
        probes = self._probe_points()
        lo = self.lattice_vector(lower)
        if upper is None:
            hit = np.asarray(self.invariant_set.contains_shifted(probes, lo))
        else:
            tags = region(self.invariant_set, lo, self.lattice_vector(upper), probes)
            hit = tags == Region.MID
        if np.any(hit.any(axis=1) != hit.all(axis=1)):
            raise GridError("a cell straddles a region boundary")
        mask = hit[:, 0].reshape(self.counts)
        mask.setflags(write=False)
        return mask

    def region_mask(self, lower=None, upper=None) -> np.ndarray:
        """Boolean cell mask of L_{lower, upper}; ``None`` means 0 resp. infinity."""
        lo = self.lattice_steps(lower) if lower is not None else (0,) * self.dimension
        up = self.lattice_steps(upper) if upper is not None else None
        if up is not None and not all(u >= l for u, l in zip(up, lo)):
            raise GridError(f"region needs lower <= upper, got {lo} and {up}")
        return self._region_mask(lo, up)


def _freeze(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A function constant on the cells of ``grid`` (complex values)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", _freeze(v))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    @classmethod
    def constant(cls, grid: Grid, value: complex) -> "GridFunction":
        return cls(grid, np.full(grid.shape, value, dtype=complex))

    @classmethod
    def indicator(cls, grid: Grid, lower, upper, value: complex = 1.0) -> "GridFunction":
        """``value`` on the block of cells with multi-index in ``[lower, upper)``."""
        v = np.zeros(grid.shape, dtype=complex)
        v[tuple(slice(int(lo), int(hi)) for lo, hi in zip(np.atleast_1d(lower), np.atleast_1d(upper)))] = value
        return cls(grid, v)

    @classmethod
    def from_cells(cls, grid: Grid, entries) -> "GridFunction":
        """Build from ``(cell_index, re, im)`` entries; cell_index is an int or a tuple."""
        v = np.zeros(grid.shape, dtype=complex)
        for *idx, re, im in entries:
            idx = tuple(np.atleast_1d(idx[0] if len(idx) == 1 else idx).astype(int))
            if len(idx) == 1 and grid.dimension > 1:
                idx = np.unravel_index(idx[0], grid.shape)
            v[idx] += complex(re, im)
        return cls(grid, v)

    def evaluate(self, points) -> np.ndarray:
        """Values at physical points; zero outside the grid."""
        flat = self.grid.locate(points)
        out = np.zeros(len(flat), dtype=complex)
        inside = flat >= 0
        out[inside] = self.values.ravel()[flat[inside]]
        return out

    def integral(self) -> complex:
        return complex(self.values.sum() * self.grid.cell_measure)

    def norm(self) -> float:
        return float(np.sqrt(inner(self, self).real))

    def support(self) -> np.ndarray:
        return self.values != 0

    def equals(self, other: "GridFunction") -> bool:
        """Exact cell-by-cell equality."""
        return self.grid.same_as(other.grid) and bool(np.array_equal(self.values, other.values))

    def map(self, fn) -> "GridFunction":
        return GridFunction(self.grid, fn(self.values))

    def _check(self, other: "GridFunction") -> None:
        if not self.grid.same_as(other.grid):
            raise ValueError("grid functions live on different grids")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values + other.values)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values - other.values)
        return NotImplemented

    def __mul__(self, scalar):
        if isinstance(scalar, GridFunction):
            self._check(scalar)
            return GridFunction(self.grid, self.values * scalar.values)
        return GridFunction(self.grid, self.values * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __repr__(self) -> str:
        nz = int(np.count_nonzero(self.values))
        return f"GridFunction(shape={self.grid.shape}, nonzero_cells={nz})"


def inner(f: GridFunction, g: GridFunction) -> complex:
    """``sum f * conj(g) * lambda(cell)``: linear in f, conjugate-linear in g."""
    f._check(g)
    prod = (f.values * g.values.conj()).ravel()
    # exactly rounded sums: the value does not depend on where the support sits
    total = complex(math.fsum(prod.real), math.fsum(prod.imag))
    return total * f.grid.cell_measure


def _shifted_slices(steps, counts):
    src = tuple(slice(0, n - k) for k, n in zip(steps, counts))
    dst = tuple(slice(k, n) for k, n in zip(steps, counts))
    return src, dst


def shift(f: GridFunction, a) -> GridFunction:
    """The isometry V_a: ``(V_a f)(y) = f(y - a)`` if ``y - a`` in X, else 0.

    Raises GridError if part of the support would leave the grid.
    """
    grid = f.grid
    k = grid.lattice_steps(a)
    out = np.zeros(grid.shape, dtype=complex)
    if any(ki >= n for ki, n in zip(k, grid.counts)):
        if np.any(f.values != 0):
            raise GridError(f"shift by {k} cells moves the support off the grid")
        return GridFunction(grid, out)
    src, dst = _shifted_slices(k, grid.counts)
    kept = np.zeros(grid.shape, dtype=bool)
    kept[src] = True
    if np.any(f.values[~kept] != 0):
        raise GridError(f"shift by {k} cells moves the support off the grid")
    out[dst] = f.values[src]
    return GridFunction(grid, out)


def adjoint_shift(f: GridFunction, a) -> GridFunction:
    """V_a^*: ``(V_a^* f)(y) = f(y + a)`` for y in X."""
    grid = f.grid
    k = grid.lattice_steps(a)
    out = np.zeros(grid.shape, dtype=complex)
    if all(ki < n for ki, n in zip(k, grid.counts)):
        src, dst = _shifted_slices(k, grid.counts)
        out[src] = f.values[dst]
    return GridFunction(grid, out)


def restrict(f: GridFunction, lower=None, upper=None) -> GridFunction:
    """Multiply by the indicator of ``L_{lower, upper} = (X + lower) minus (X + upper)``.

    ``lower=None`` means 0 and ``upper=None`` means infinity, so
    ``restrict(f, upper=a)`` is the restriction to L_a = X minus (X + a) and
    ``restrict(f, lower=a)`` the restriction to X + a.
    """
    mask = f.grid.region_mask(lower, upper)
    return GridFunction(f.grid, np.where(mask, f.values, 0))


def supported_in(f: GridFunction, lower=None, upper=None) -> bool:
    mask = f.grid.region_mask(lower, upper)
    return not bool(np.any(f.values[~mask] != 0))
