"""Polyhedral cones in R^d, the cone order, and the level regions of X = P."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-12


class Region(enum.Enum):
    BELOW = "below"  # outside X + a
    MID = "mid"  # inside X + a, outside X + b
    ABOVE = "above"  # inside X + b


def _rows(vectors, dimension: int, name: str) -> np.ndarray:
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != dimension:
        raise ValueError(f"{name} must be rows of length {dimension}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PolyhedralCone:
    """A closed, spanning, pointed cone ``{x : <n_k, x> >= 0 for all k}``.

    Generators and halfspace normals are both stored; construction checks that
    they describe the same cone on the generators and on random probes.
    """

    dimension: int
    generators: np.ndarray
    halfspace_normals: np.ndarray
    tol: float = DEFAULT_TOL
    name: str = field(default="cone")

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        object.__setattr__(self, "generators", _rows(self.generators, self.dimension, "generators"))
        object.__setattr__(
            self, "halfspace_normals", _rows(self.halfspace_normals, self.dimension, "halfspace_normals")
        )
        self._validate()

    def _validate(self) -> None:
        g = self.generators
        if np.linalg.matrix_rank(g) != self.dimension:
            raise ValueError("generators do not span R^d")
        slack = g @ self.halfspace_normals.T
        if np.any(slack < -self.tol * max(1.0, np.abs(g).max())):
            raise ValueError("a generator violates a halfspace inequality")
        for gen in g:
            if np.any(gen != 0) and self.contains(-gen):
                raise ValueError("cone is not pointed: contains a line through a generator")
        # random probes: x and -x both inside forces x == 0
        probes = np.random.default_rng(0).standard_normal((256, self.dimension))
        both = self.contains(probes) & self.contains(-probes)
        if np.any(both):
            raise ValueError("cone is not pointed: a random probe lies in P and -P")

    def _check_dim(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dimension,):
            raise ValueError(f"expected trailing dimension {self.dimension}, got shape {x.shape}")
        return x

    def contains(self, x) -> np.ndarray | bool:
        """Membership in P; vectorised over leading axes of ``x``."""
        x = self._check_dim(x)
        inside = np.all(x @ self.halfspace_normals.T >= -self.tol, axis=-1)
        return bool(inside) if inside.ndim == 0 else inside

    def leq(self, x, y) -> np.ndarray | bool:
        """``x <= y`` iff ``y - x`` lies in P."""
        x = self._check_dim(x)
        y = self._check_dim(y)
        return self.contains(y - x)

    def interior_direction(self) -> np.ndarray:
        """A unit vector in Int(P): the normalised sum of normalised generators."""
        g = self.generators / np.linalg.norm(self.generators, axis=1, keepdims=True)
        e = g.sum(axis=0)
        return e / np.linalg.norm(e)

    def in_interior(self, x) -> np.ndarray | bool:
        x = self._check_dim(x)
        inside = np.all(x @ self.halfspace_normals.T > self.tol, axis=-1)
        return bool(inside) if inside.ndim == 0 else inside


def orthant(d: int) -> PolyhedralCone:
    if d not in (1, 2, 3):
        raise ValueError("built-in orthants exist for d in {1, 2, 3}")
    eye = np.eye(d)
    return PolyhedralCone(d, eye, eye, name=f"orthant{d}")


def wedge() -> PolyhedralCone:
    """The planar cone generated by (1, 1) and (-1, 1), i.e. ``{(x, y) : y >= |x|}``."""
    return PolyhedralCone(2, [[1.0, 1.0], [-1.0, 1.0]], [[1.0, 1.0], [-1.0, 1.0]], name="wedge")


BUILTIN_CONES = {
    "orthant1": lambda: orthant(1),
    "orthant2": lambda: orthant(2),
    "orthant3": lambda: orthant(3),
    "wedge": wedge,
}


@dataclass(frozen=True, eq=False)
class InvariantSet:
    """The P-invariant set X; fixed to X = P, so ``X + a = a + P``."""

    cone: PolyhedralCone

    @property
    def description(self) -> str:
        return "X = P"

    def contains(self, y) -> np.ndarray | bool:
        return self.cone.contains(y)

    def contains_shifted(self, y, a) -> np.ndarray | bool:
        """Membership of ``y`` in ``X + a``."""
        return self.cone.contains(np.asarray(y, dtype=float) - np.asarray(a, dtype=float))

    def check_invariance(self, n: int = 200, seed: int = 0) -> bool:
        """Sample x in X and a in P and confirm x + a stays in X."""
        rng = np.random.default_rng(seed)
        coef = rng.exponential(size=(n, 2, len(self.cone.generators)))
        x = coef[:, 0] @ self.cone.generators
        a = coef[:, 1] @ self.cone.generators
        return bool(np.all(self.contains(x)) and np.all(self.contains(x + a)))

    def purity_witness(self, z, max_doublings: int = 200) -> float:
        """Return some t > 0 with ``z`` outside ``X + t e`` for the interior direction e."""
        e = self.cone.interior_direction()
        z = np.asarray(z, dtype=float)
        t = 1.0
        for _ in range(max_doublings):
            if not self.contains_shifted(z, t * e):
                return t
            t *= 2.0
        raise RuntimeError("no purity witness found; cone may not be pointed")


def region(inv: InvariantSet, a, b, y) -> Region | np.ndarray:
    """Classify ``y`` into L_{-inf,a}, L_{a,b} or L_{b,inf}.

    Vectorised: with a batch of points returns an object array of Region tags.
    """
    cone = inv.cone
    if not cone.leq(a, b):
        raise ValueError(f"region requires a <= b in the cone order, got a={a}, b={b}")
    above_a = np.asarray(inv.contains_shifted(y, a))
    above_b = np.asarray(inv.contains_shifted(y, b))
    # X + b is contained in X + a when a <= b
    tags = np.where(above_b, 2, np.where(above_a, 1, 0))
    lookup = (Region.BELOW, Region.MID, Region.ABOVE)
    if tags.ndim == 0:
        return lookup[int(tags)]
    return np.array(lookup, dtype=object)[tags]
