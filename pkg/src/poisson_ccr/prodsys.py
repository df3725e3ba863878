"""The Poisson product system on the probability side and its identification.

Multiplicative functionals ``Sigma_f = prod_i (1 + f(y_i)) * exp(-int f dlambda)``
are indexed by grid labels f; the product rule of the product system acts on
labels as ``(a, f)(b, g) -> (a + b, f + V_a g)``. The compound Poisson case is
handled on a product grid (space cells x mark nodes).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fock import FockVector, ccr_product, fock_inner
from .l2grid import Grid, GridFunction, adjoint_shift, inner, restrict, shift, supported_in
from .pointproc import (
    ConfigurationBatch,
    LevyMeasure,
    MarkedConfiguration,
    PointConfiguration,
    PoissonSampler,
    compound_laplace_rhs,
    exp_functional,
    master_equation_rhs,
    mc_mean,
)
from .report import CheckRow


# --------------------------------------------------------------------------
# logarithm and labels
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class MeasurableLog:
    """Principal branch of log with argument in (-pi, pi]."""

    branch: str = "principal, arg in (-pi, pi]"

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if np.any(z == 0):
            raise ValueError("log is undefined at 0")
        arg = np.angle(z)
        # -1 - 0j has angle -pi; the branch cut belongs to the upper side
        arg = np.where(arg == -np.pi, np.pi, arg)
        return np.log(np.abs(z)) + 1j * arg


ell = MeasurableLog()


def _as_vec(a) -> np.ndarray:
    return np.atleast_1d(np.asarray(a, dtype=float))


@dataclass(frozen=True, eq=False)
class SigmaLabel:
    """A grid function f with f != -1 everywhere, supported in L_fiber."""

    f: GridFunction
    fiber: np.ndarray

    def __post_init__(self):
        fiber = _as_vec(self.fiber)
        self.f.grid.lattice_steps(fiber)
        if np.any(self.f.values == -1):
            raise ValueError("label takes the value -1 on some cell")
        if not supported_in(self.f, upper=fiber):
            raise ValueError("label is not supported in L_a for its fiber a")
        fiber.setflags(write=False)
        object.__setattr__(self, "fiber", fiber)

    @classmethod
    def zero(cls, grid: Grid, fiber) -> "SigmaLabel":
        return cls(GridFunction.zeros(grid), fiber)

    @property
    def grid(self) -> Grid:
        return self.f.grid

    @property
    def fiber_steps(self) -> tuple:
        return self.grid.lattice_steps(self.fiber)

    def equals(self, other: "SigmaLabel") -> bool:
        return self.fiber_steps == other.fiber_steps and self.f.equals(other.f)


def u_from_f(f: GridFunction) -> GridFunction:
    """Cellwise ``ell(1 + f)``."""
    if np.any(f.values == -1):
        raise ValueError("u_from_f is undefined where f = -1")
    return GridFunction(f.grid, ell(1 + f.values))


# --------------------------------------------------------------------------
# pathwise evaluation
# --------------------------------------------------------------------------
def _label_of(label) -> GridFunction:
    return label.f if isinstance(label, SigmaLabel) else label


def sigma_eval(label: SigmaLabel, config: PointConfiguration) -> complex:
    f = _label_of(label)
    factors = 1 + f.evaluate(config.points)
    return complex(np.prod(factors) * np.exp(-f.integral()))


def sigma_eval_batch(label: SigmaLabel, batch: ConfigurationBatch) -> np.ndarray:
    f = _label_of(label)
    return batch.product(1 + f.evaluate(batch.points)) * np.exp(-f.integral())


def sigma_eval_exponential(label: SigmaLabel, config: PointConfiguration) -> complex:
    """Same quantity via ``exp(eta(u_f)) / E exp(eta(u_f))``."""
    u = u_from_f(_label_of(label))
    return exp_functional(config, u) / master_equation_rhs(u)


def shifted_sigma_direct(label: SigmaLabel, c, config: PointConfiguration) -> complex:
    """``S_c Sigma_f``: read counts in the translated cells ``B_i + c`` and raise ``1 + f_i`` to them."""
    f = _label_of(label)
    grid = f.grid
    c = _as_vec(c)
    if len(config.points) == 0:
        counts = np.zeros(grid.ncells, dtype=np.int64)
    else:
        cells = grid.locate(config.points - c)
        counts = np.bincount(cells[cells >= 0], minlength=grid.ncells)
    base = 1 + f.values.ravel()
    nz = counts > 0
    return complex(np.prod(base[nz] ** counts[nz]) * np.exp(-f.integral()))


def sigma_inner_mc(fl: SigmaLabel, gl: SigmaLabel, n: int, seed: int, workers: int = 1):
    """MC estimate of ``E(Sigma_f conj(Sigma_g))`` and its closed form ``exp(<f, g>)``."""
    f, g = _label_of(fl), _label_of(gl)
    if not f.grid.same_as(g.grid):
        raise ValueError("labels live on different grids")
    sampler = PoissonSampler.on_grid(f.grid)

    def functional(batch):
        return sigma_eval_batch(f, batch) * np.conj(sigma_eval_batch(g, batch))

    return mc_mean(functional, sampler, n, seed, workers), np.exp(inner(f, g))


# --------------------------------------------------------------------------
# label algebra
# --------------------------------------------------------------------------
def shift_sigma(label: SigmaLabel, c) -> SigmaLabel:
    """Label of ``S_c Sigma_f``, namely ``V_c f`` in the fiber over ``fiber + c``."""
    c = _as_vec(c)
    return SigmaLabel(shift(label.f, c), label.fiber + c)


def sigma_product(a, fl: SigmaLabel, b, gl: SigmaLabel) -> SigmaLabel:
    """``(a, Sigma_f)(b, Sigma_g) = (a + b, Sigma_h)`` with ``h = f + V_a g``."""
    a, b = _as_vec(a), _as_vec(b)
    grid = fl.grid
    if not grid.same_as(gl.grid):
        raise ValueError("labels live on different grids")
    if fl.fiber_steps != grid.lattice_steps(a) or gl.fiber_steps != grid.lattice_steps(b):
        raise ValueError("label fibers do not match the product indices")
    return SigmaLabel(fl.f + shift(gl.f, a), a + b)


def project_Qa(label: SigmaLabel, a) -> SigmaLabel:
    """Conditional expectation onto F_a: ``E{Sigma_f | F_a} = Sigma_{f 1_{L_a}}``."""
    a = _as_vec(a)
    grid = label.grid
    if not grid.cone.leq(a, label.fiber):
        raise ValueError("project_Qa needs a <= fiber")
    return SigmaLabel(restrict(label.f, upper=a), a)


def decompose(a, label: SigmaLabel, b) -> tuple[SigmaLabel, SigmaLabel]:
    """Split a label over ``a`` into labels over ``b`` and ``a - b``.

    ``left = f 1_{L_b}`` and ``right = V_b^*(f 1_{L_{b,a}})``; multiplying them
    back with :func:`sigma_product` returns ``label`` exactly.
    """
    a, b = _as_vec(a), _as_vec(b)
    grid = label.grid
    if label.fiber_steps != grid.lattice_steps(a):
        raise ValueError("label is not in the fiber over a")
    if not grid.cone.leq(b, a):
        raise ValueError("decompose needs b <= a")
    left = SigmaLabel(restrict(label.f, upper=b), b)
    right = SigmaLabel(adjoint_shift(restrict(label.f, lower=b, upper=a), b), a - b)
    return left, right


# --------------------------------------------------------------------------
# theta: exponential vectors -> Sigma functionals
# --------------------------------------------------------------------------
@dataclass
class ThetaReport:
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def theta_check(
    a,
    corpus,
    n: int = 100_000,
    seed: int = 0,
    b=None,
    corpus_b=None,
    workers: int = 1,
    mc: bool = True,
) -> ThetaReport:
    """Compare the Fock side and the Sigma side of ``e(f) -> Sigma_f`` in the fiber over ``a``.

    Rows: exact Gram agreement (Fock inner products vs closed-form Sigma
    pairings), MC Gram agreement, and exact product intertwining of
    ``ccr_product`` with ``sigma_product`` for all pairs from ``corpus`` x ``corpus_b``.
    """
    a = _as_vec(a)
    labels = [c.f if isinstance(c, SigmaLabel) else c for c in corpus]
    sig = [SigmaLabel(f, a) for f in labels]
    report = ThetaReport()
    for j, fj in enumerate(labels):
        for k, fk in enumerate(labels):
            fock = fock_inner(FockVector.exponential(fj, a), FockVector.exponential(fk, a))
            target = np.exp(inner(fj, fk))
            report.rows.append(CheckRow.exact(f"theta/gram-exact/{j},{k}", fock, target))
            if mc:
                est, tgt = sigma_inner_mc(sig[j], sig[k], n, seed + 7919 * (j * len(labels) + k), workers)
                report.rows.append(CheckRow.mc(f"theta/gram-mc/{j},{k}", est, tgt))
    b = a if b is None else _as_vec(b)
    labels_b = labels if corpus_b is None else [c.f if isinstance(c, SigmaLabel) else c for c in corpus_b]
    for j, f in enumerate(labels):
        for k, g in enumerate(labels_b):
            fock_prod = ccr_product(a, FockVector.exponential(f, a), b, FockVector.exponential(g, b))
            (coef, h), = fock_prod.terms
            sig_prod = sigma_product(a, SigmaLabel(f, a), b, SigmaLabel(g, b))
            mismatch = float(np.max(np.abs(h.values - sig_prod.f.values), initial=0.0))
            mismatch += abs(coef - 1)
            report.rows.append(CheckRow.exact(f"theta/intertwine/{j},{k}", mismatch, 0.0, rtol=0.0))
    return report


def sigma_gram_target(labels) -> np.ndarray:
    """``exp(<f_j, f_k>)`` computed pairwise from :func:`inner` (the Sigma-side closed form)."""
    return np.array([[np.exp(inner(f, g)) for g in labels] for f in labels])


# --------------------------------------------------------------------------
# compound Poisson case
# --------------------------------------------------------------------------
def xi_vector_eval(u: GridFunction, marked: MarkedConfiguration, nu: LevyMeasure) -> float:
    """``exp(-xi(u)) / E exp(-xi(u))`` for a grid-simple ``u >= 0``."""
    if np.any(u.values.real < 0) or np.any(u.values.imag != 0):
        raise ValueError("xi_vector_eval needs a real u >= 0")
    num = float(np.prod(np.exp(-marked.marks * u.evaluate(marked.points).real)))
    return num / compound_laplace_rhs(u, nu)


def xi_vector_eval_batch(u: GridFunction, batch: ConfigurationBatch, nu: LevyMeasure) -> np.ndarray:
    num = batch.product(np.exp(-batch.marks * u.evaluate(batch.points).real))
    return num / compound_laplace_rhs(u, nu)


@dataclass(frozen=True, eq=False)
class MarkedGrid:
    """Product grid on X x (0, inf): space cells times mark nodes with nu-weights."""

    space: Grid
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if r.ndim != 1 or r.shape != w.shape or len(r) == 0:
            raise ValueError("nodes and weights must be matching 1-d arrays")
        if np.any(r <= 0) or np.any(w <= 0):
            raise ValueError("nodes and weights must be positive")
        if len(np.unique(r)) != len(r):
            raise ValueError("mark nodes must be distinct")
        order = np.argsort(r)
        object.__setattr__(self, "nodes", r[order])
        object.__setattr__(self, "weights", w[order])

    @classmethod
    def from_levy(cls, space: Grid, nu: LevyMeasure, nodes: int = 16) -> "MarkedGrid":
        r, w = nu.quadrature(nodes)
        return cls(space, r, w)

    @property
    def levy(self) -> LevyMeasure:
        """The atomic Levy measure carried by the mark nodes."""
        return LevyMeasure.atomic(self.nodes, self.weights)

    @property
    def shape(self) -> tuple:
        return self.space.shape + (len(self.nodes),)

    def measures(self) -> np.ndarray:
        """lambda(cell x {r_k}) = rho0(cell) * w_k."""
        return np.broadcast_to(self.space.cell_measure * self.weights, self.shape)

    def node_index(self, marks) -> np.ndarray:
        marks = np.asarray(marks, dtype=float)
        k = np.clip(np.searchsorted(self.nodes, marks), 0, len(self.nodes) - 1)
        if np.any(self.nodes[k] != marks):
            raise ValueError("mark does not sit on a node of the marked grid")
        return k


@dataclass(frozen=True, eq=False)
class MarkedLabel:
    """A label g on the marked product grid, supported in L_fiber x (0, inf).

    ``log_factors`` holds ``ell(1 + g)``. For g0 it is ``-c r`` exactly, so the
    label stays valid (finite logarithm, hence ``1 + g != 0``) even where
    ``exp(-c r)`` underflows and ``g`` itself rounds to -1.
    """

    grid: MarkedGrid
    values: np.ndarray
    fiber: np.ndarray
    log_factors: np.ndarray | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).reshape(self.grid.shape)
        if self.log_factors is None:
            if np.any(v == -1):
                raise ValueError("label takes the value -1 on some cell")
            q = ell(1 + v)
        else:
            q = np.array(self.log_factors, dtype=complex).reshape(self.grid.shape)
        if not np.all(np.isfinite(q)):
            raise ValueError("label takes the value -1 on some cell")
        fiber = _as_vec(self.fiber)
        mask = self.grid.space.region_mask(upper=fiber)
        if np.any(v[~mask] != 0) or np.any(q[~mask] != 0):
            raise ValueError("label is not supported in L_a x (0, inf)")
        v.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "log_factors", q)
        object.__setattr__(self, "fiber", fiber)

    def integral(self) -> complex:
        return complex(np.sum(self.values * self.grid.measures()))

    def _lookup(self, table: np.ndarray, points, marks) -> np.ndarray:
        cells = self.grid.space.locate(points)
        out = np.zeros(len(cells), dtype=complex)
        inside = cells >= 0
        if np.any(inside):
            k = self.grid.node_index(np.asarray(marks)[inside])
            out[inside] = table.reshape(-1, len(self.grid.nodes))[cells[inside], k]
        return out

    def evaluate(self, points, marks) -> np.ndarray:
        return self._lookup(self.values, points, marks)

    def log_factor(self, points, marks) -> np.ndarray:
        """``ell(1 + g)`` at the given (point, mark) pairs."""
        return self._lookup(self.log_factors, points, marks)


def sigma_eval_marked(label: MarkedLabel, config: MarkedConfiguration) -> complex:
    """``prod_i (1 + g(y_i, r_i)) * exp(-int g)``, accumulated in the log domain."""
    logs = label.log_factor(config.points, config.marks)
    return complex(np.exp(np.sum(logs) - label.integral()))


def sigma_eval_marked_batch(label: MarkedLabel, batch: ConfigurationBatch) -> np.ndarray:
    logs = label.log_factor(batch.points, batch.marks)
    total = batch.total(logs.real) + 1j * batch.total(logs.imag)
    return np.exp(total - label.integral())


def embed_g0(c: float, B: GridFunction, marked_grid: MarkedGrid, fiber) -> MarkedLabel:
    """``g0(y, r) = -(1 - exp(-c r)) 1_B(y)`` on the marked product grid.

    ``B`` is a 0/1 indicator grid function; it must lie in L_fiber.
    """
    if not c > 0:
        raise ValueError("embed_g0 needs c > 0")
    indicator = B.values
    if not np.all((indicator == 0) | (indicator == 1)):
        raise ValueError("B must be given as a 0/1 indicator")
    inside = indicator.real[..., None].astype(bool)
    values = np.where(inside, np.expm1(-c * marked_grid.nodes), 0.0)
    logs = np.where(inside, -c * marked_grid.nodes, 0.0)
    return MarkedLabel(marked_grid, values, fiber, logs)


def totality_rank(nu: LevyMeasure, c_values, nodes: int | None = None, rtol: float = 1e-10) -> int:
    """Numerical rank of ``[(1 - exp(-c_j r_i)) sqrt(w_i)]`` over the nu-discretisation."""
    c = np.asarray(c_values, dtype=float)
    if c.ndim != 1 or len(c) == 0 or np.any(c <= 0):
        raise ValueError("c values must be a non-empty list of positive reals")
    if len(np.unique(c)) != len(c):
        raise ValueError("c values must be distinct")
    r, w = nu.quadrature(nodes if nodes is not None else 16)
    if len(c) < len(r):
        raise ValueError("need at least as many c values as nodes")
    matrix = -np.expm1(-np.outer(c, r)) * np.sqrt(w)
    s = np.linalg.svd(matrix, compute_uv=False)
    return int(np.sum(s > rtol * s[0]))
