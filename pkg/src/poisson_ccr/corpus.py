"""Default families of test functions for a grid and a fiber.

Label families are supported in the block of cells ``[0, k)`` (lattice
coordinates), which lies inside L_a for the fiber a with lattice offsets k.
"""

from __future__ import annotations

import math

import numpy as np

from .l2grid import Grid, GridFunction


def block(grid: Grid, lower, upper, value: complex = 1.0) -> GridFunction:
    return GridFunction.indicator(grid, lower, upper, value)


def profile(grid: Grid, amplitude: complex, wavevector, lower, upper) -> GridFunction:
    """``amplitude * exp(i <wavevector, m>)`` over the cell block ``[lower, upper)``."""
    m = np.indices(grid.shape).astype(float)
    phase = np.tensordot(np.atleast_1d(np.asarray(wavevector, dtype=float)), m, axes=1)
    mask = block(grid, lower, upper).values.real.astype(bool)
    return GridFunction(grid, np.where(mask, amplitude * np.exp(1j * phase), 0))


def _half(k) -> tuple:
    return tuple(max(1, (ki + 1) // 2) for ki in k)


def _last(k) -> tuple:
    return tuple(ki - 1 for ki in k)


def _single(grid: Grid, idx, value: complex) -> GridFunction:
    v = np.zeros(grid.shape, dtype=complex)
    v[tuple(idx)] = value
    return GridFunction(grid, v)


def label_corpus(grid: Grid, k, room=None, seed: int = 0) -> dict:
    """Ten labels supported in L_a for lattice offsets ``k``; none takes the value -1.

    ``room`` bounds the support of the L-shaped member so that shifts used in
    product checks stay on the grid.
    """
    k = tuple(int(v) for v in k)
    zero = (0,) * grid.dimension
    rng = np.random.default_rng(seed)
    rand = np.zeros(grid.shape, dtype=complex)
    box = tuple(slice(0, ki) for ki in k)
    shape = rand[box].shape
    rand[box] = 0.5 * rng.uniform(0, 1, shape) * np.exp(2j * np.pi * rng.uniform(0, 1, shape))
    room = tuple(int(v) for v in (room or k))
    lmask = grid.region_mask(upper=grid.lattice_vector(k)) & block(grid, zero, room).values.real.astype(bool)
    corpus = {
        "zero": GridFunction.zeros(grid),
        "one": block(grid, zero, k, 1.0),
        "cell0": _single(grid, zero, 0.5),
        "last": _single(grid, _last(k), -0.5),
        "cplx": block(grid, zero, k, 0.3 + 0.4j),
        "neg": block(grid, zero, _half(k), -0.7),
        "flip": _single(grid, _last(k), -2.0),
        "wave": profile(grid, 0.5, [0.9] * grid.dimension, zero, k),
        "rand": GridFunction(grid, rand),
        "lshape": GridFunction(grid, np.where(lmask, 0.25 - 0.25j, 0)),
    }
    return corpus


def u_corpus(grid: Grid, k, seed: int = 0) -> dict:
    """Eleven grid-simple exponents for the exponential-moment identity.

    Includes real, imaginary and complex values, and values where
    ``exp(u) - 1`` is negative or has negative real part.
    """
    k = tuple(int(v) for v in k)
    zero = (0,) * grid.dimension
    full = grid.shape
    rng = np.random.default_rng(seed + 1)
    m = np.indices(grid.shape).sum(axis=0)
    rand = 0.4 * rng.uniform(-1, 1, grid.shape) + 0.4j * rng.uniform(-1, 1, grid.shape)
    return {
        "zero": GridFunction.zeros(grid),
        "one_B": block(grid, zero, k, 1.0),
        "ipi_B": block(grid, zero, k, 1j * math.pi),
        "neg_B": block(grid, zero, k, -1.0),
        "cplx_B": block(grid, zero, k, 0.5 + 0.5j),
        "log2_cell": _single(grid, zero, math.log(2.0)),
        "damp_all": block(grid, zero, full, -0.3),
        "halfpi": block(grid, zero, k, 0.5j * math.pi) + block(grid, k, tuple(2 * v for v in k), -0.5j * math.pi),
        "wave": GridFunction(grid, 0.8j * np.cos(m)),
        "rand": GridFunction(grid, rand),
        "neg_mirror": block(grid, zero, k, math.log(0.5) + 1j * math.pi),
    }


SIGMA_PAIRS = [
    ("zero", "zero"),
    ("one", "one"),
    ("cell0", "last"),
    ("cplx", "cplx"),
    ("cplx", "one"),
    ("one", "cplx"),
    ("neg", "neg"),
    ("flip", "flip"),
    ("flip", "one"),
    ("wave", "wave"),
    ("wave", "rand"),
    ("rand", "rand"),
    ("rand", "cplx"),
    ("lshape", "lshape"),
    ("lshape", "one"),
    ("cell0", "cell0"),
    ("neg", "wave"),
    ("zero", "rand"),
]
