"""Symmetric Fock space over grid functions, in the exponential-vector domain.

A vector is a finite combination ``sum_k c_k e(f_k)`` of exponential vectors;
all inner products reduce to ``<e(f), e(g)> = exp(<f, g>)``, so nothing is
truncated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .l2grid import Grid, GridFunction, inner, shift, supported_in


def _key(f: GridFunction) -> bytes:
    return f.values.tobytes()


@dataclass(frozen=True, eq=False)
class FockVector:
    """``sum_k coefficient_k * e(label_k)`` in the fiber over the cone element ``fiber``.

    Labels must be pairwise distinct and supported in L_fiber = X minus (X + fiber).
    """

    terms: tuple
    fiber: np.ndarray
    grid: Grid

    def __post_init__(self):
        terms = tuple((complex(c), f) for c, f in self.terms)
        seen = set()
        for _, f in terms:
            if not f.grid.same_as(self.grid):
                raise ValueError("label lives on a different grid")
            k = _key(f)
            if k in seen:
                raise ValueError("labels must be pairwise distinct; use FockVector.combine")
            seen.add(k)
        fiber = np.atleast_1d(np.asarray(self.fiber, dtype=float))
        self.grid.lattice_steps(fiber)
        for _, f in terms:
            if not supported_in(f, upper=fiber):
                raise ValueError("label is not supported in L_a for the fiber a")
        fiber.setflags(write=False)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "fiber", fiber)

    @classmethod
    def combine(cls, terms, fiber, grid: Grid) -> "FockVector":
        """Build a vector, merging equal labels by adding their coefficients."""
        merged: dict[bytes, list] = {}
        for c, f in terms:
            k = _key(f)
            if k in merged:
                merged[k][0] += complex(c)
            else:
                merged[k] = [complex(c), f]
        return cls(tuple((c, f) for c, f in merged.values()), fiber, grid)

    @classmethod
    def exponential(cls, f: GridFunction, fiber, coefficient: complex = 1.0) -> "FockVector":
        return cls(((coefficient, f),), fiber, f.grid)

    @classmethod
    def vacuum(cls, grid: Grid, fiber) -> "FockVector":
        return cls.exponential(GridFunction.zeros(grid), fiber)

    @property
    def fiber_steps(self) -> tuple:
        return self.grid.lattice_steps(self.fiber)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=complex)

    @property
    def labels(self) -> list:
        return [f for _, f in self.terms]

    def __len__(self) -> int:
        return len(self.terms)

    def label_map(self) -> dict:
        return {_key(f): c for c, f in self.terms}


def gram(labels, other=None) -> np.ndarray:
    """Matrix ``exp(<f_j, g_k>)`` of exponential-vector inner products."""
    other = labels if other is None else other
    out = np.empty((len(labels), len(other)), dtype=complex)
    for j, f in enumerate(labels):
        for k, g in enumerate(other):
            out[j, k] = inner(f, g)
    return np.exp(out)


def fock_inner(v: FockVector, w: FockVector) -> complex:
    """``sum_jk c_j conj(d_k) exp(<f_j, g_k>)``."""
    if not v.grid.same_as(w.grid):
        raise ValueError("vectors live over different grids")
    if v.fiber_steps != w.fiber_steps:
        raise ValueError(f"fiber mismatch: {v.fiber.tolist()} vs {w.fiber.tolist()}")
    return complex(v.coefficients @ gram(v.labels, w.labels) @ w.coefficients.conj())


def second_quantize(v: FockVector, a) -> FockVector:
    """Apply Gamma(V_a) label-wise; the result sits in the fiber over ``a + fiber``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    terms = tuple((c, shift(f, a)) for c, f in v.terms)
    return FockVector(terms, v.fiber + a, v.grid)


def ccr_product(a, v: FockVector, b, w: FockVector) -> FockVector:
    """Bilinear extension of ``e(f) e(g) = e(f + V_a g)`` into the fiber over ``a + b``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    grid = v.grid
    if not grid.same_as(w.grid):
        raise ValueError("vectors live over different grids")
    if v.fiber_steps != grid.lattice_steps(a) or w.fiber_steps != grid.lattice_steps(b):
        raise ValueError("fiber mismatch in ccr_product")
    shifted = [(d, shift(g, a)) for d, g in w.terms]
    terms = [(c * d, f + vg) for c, f in v.terms for d, vg in shifted]
    return FockVector.combine(terms, a + b, grid)
