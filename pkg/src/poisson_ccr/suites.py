"""Named verification suites.

Each suite expands a config into a list of checks. An exact check computes
rows directly; an MC check pairs a batched functional with a closed-form
target and is evaluated by :func:`poisson_ccr.pointproc.mc_mean`. Every MC
check has its own seed derived from the base seed and the check id, so
rerunning one check (or a whole suite) reproduces it bit for bit.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .config import ExperimentConfig
from .corpus import SIGMA_PAIRS, block, label_corpus, u_corpus
from .fock import FockVector, ccr_product, fock_inner, gram, second_quantize
from .l2grid import GridFunction, adjoint_shift, inner, restrict, shift
from .pointproc import (
    LevyMeasure,
    MarkedSampler,
    PoissonSampler,
    compound_laplace_rhs,
    exp_functional_batch,
    master_equation_rhs,
    mc_mean,
    xi_exponential_batch,
)
from .prodsys import (
    MarkedGrid,
    SigmaLabel,
    decompose,
    embed_g0,
    project_Qa,
    shift_sigma,
    shifted_sigma_direct,
    sigma_eval,
    sigma_eval_batch,
    sigma_eval_exponential,
    sigma_eval_marked,
    sigma_product,
    theta_check,
    totality_rank,
    xi_vector_eval,
)
from .report import CheckRow

PATHWISE_CONFIGS = 100
CSV_HEADER = ["suite", "check_id", "kind", "n", "value_re", "value_im", "target_re", "target_im", "stderr", "z", "pass"]


def check_seed(base: int, check_id: str) -> int:
    return (int(base) * 1_000_003 + zlib.crc32(check_id.encode())) % (2**63)


@dataclass
class McCheck:
    check_id: str
    functional: Callable
    sampler: object
    target: complex

    kind = "mc"

    def run(self, n: int, base_seed: int, workers: int = 1) -> list:
        est = mc_mean(self.functional, self.sampler, n, check_seed(base_seed, self.check_id), workers)
        row = CheckRow.mc(self.check_id, est, self.target)
        return [row]


@dataclass
class ExactCheck:
    check_id: str
    compute: Callable  # () -> iterable of CheckRow

    kind = "exact"

    def run(self, n: int, base_seed: int, workers: int = 1) -> list:
        return list(self.compute())


@dataclass
class SuiteReport:
    suite: str
    rows: list = field(default_factory=list)
    duration: float = 0.0
    n: int = 0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r.passed]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(
                [
                    self.suite,
                    r.check_id,
                    r.kind,
                    self.n if r.kind == "mc" else "",
                    repr(r.value.real),
                    repr(r.value.imag),
                    repr(r.target.real),
                    repr(r.target.imag),
                    repr(float(r.stderr)),
                    repr(float(r.z)),
                    int(r.passed),
                ]
            )
        return buf.getvalue()


# --------------------------------------------------------------------------
# shared corpora
# --------------------------------------------------------------------------
class _Context:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.grid = cfg.grid
        self.ka, self.kb, self.kc = cfg.fiber("a"), cfg.fiber("b"), cfg.fiber("c")
        self.a, self.b, self.c = (self.grid.lattice_vector(k) for k in (self.ka, self.kb, self.kc))
        counts = self.grid.counts
        room_a = tuple(n - k for n, k in zip(counts, self.kb))
        room_b = tuple(n - k for n, k in zip(counts, self.ka))
        self.labels_a = label_corpus(self.grid, self.ka, room=tuple(min(r, 2 * k) for r, k in zip(room_a, self.ka)), seed=cfg.seed)
        self.labels_b = label_corpus(self.grid, self.kb, room=tuple(min(r, 2 * k) for r, k in zip(room_b, self.kb)), seed=cfg.seed + 1)
        self.labels_c = label_corpus(self.grid, self.kc, seed=cfg.seed + 2)
        self.sampler = PoissonSampler.on_grid(self.grid)

    def named(self, names) -> dict:
        return {n: self.cfg.labels[n] for n in names}

    def configs(self, seed: int, count: int = PATHWISE_CONFIGS, marked_sampler=None):
        sampler = marked_sampler or self.sampler
        return list(sampler.sample_batch(seed, 0, count))

    def room(self, shift_steps) -> tuple:
        return tuple(n - s for n, s in zip(self.grid.counts, shift_steps))


def _rel(x: complex, y: complex) -> float:
    return abs(x - y) / max(abs(y), 1e-300)


def _maxdiff(f: GridFunction, g: GridFunction) -> float:
    return float(np.max(np.abs(f.values - g.values), initial=0.0))


# --------------------------------------------------------------------------
# suites
# --------------------------------------------------------------------------
def _master_equation(ctx: _Context, params: dict) -> list:
    us = ctx.named(params["u"]) if "u" in params else u_corpus(ctx.grid, ctx.ka, seed=ctx.cfg.seed)
    return [
        McCheck(f"master-equation/{name}", lambda b, u=u: exp_functional_batch(b, u), ctx.sampler, master_equation_rhs(u))
        for name, u in us.items()
    ]


def _counts(ind: GridFunction):
    return lambda b: b.total(ind.evaluate(b.points).real)


def _stationarity(ctx: _Context, params: dict) -> list:
    grid = ctx.grid
    zero = (0,) * grid.dimension
    B = block(grid, zero, ctx.kc)
    lam = B.integral().real
    checks = []
    for name, steps in (("c", ctx.kc), ("a", ctx.ka), ("a+c", tuple(x + y for x, y in zip(ctx.ka, ctx.kc)))):
        x = grid.lattice_vector(steps)
        Bx = shift(B, x)
        nb, nbx = _counts(B), _counts(Bx)
        checks += [
            McCheck(f"stationarity/x={name}/mean-diff", lambda b, nb=nb, nbx=nbx: nb(b) - nbx(b), ctx.sampler, 0.0),
            McCheck(
                f"stationarity/x={name}/second-moment-diff",
                lambda b, nb=nb, nbx=nbx: nb(b) ** 2 - nbx(b) ** 2,
                ctx.sampler,
                0.0,
            ),
            McCheck(f"stationarity/x={name}/mean", nbx, ctx.sampler, lam),
        ]
    return checks


def _independence(ctx: _Context, params: dict) -> list:
    grid = ctx.grid
    zero = (0,) * grid.dimension
    k = ctx.kc
    B1 = block(grid, zero, k)
    B2 = block(grid, k, tuple(2 * v for v in k))
    B3 = block(grid, tuple(n - v for n, v in zip(grid.counts, k)), grid.counts)
    full = block(grid, zero, grid.counts)
    checks = []
    for name, (P, Q) in {"B1,B2": (B1, B2), "B1,B3": (B1, B3)}.items():
        lp, lq = P.integral().real, Q.integral().real
        cp, cq = _counts(P), _counts(Q)
        checks.append(
            McCheck(
                f"independence/cov/{name}",
                lambda b, cp=cp, cq=cq, lp=lp, lq=lq: (cp(b) - lp) * (cq(b) - lq),
                ctx.sampler,
                0.0,
            )
        )
    lam = full.integral().real
    cf = _counts(full)
    checks += [
        McCheck("independence/count-mean", cf, ctx.sampler, lam),
        McCheck("independence/count-variance", lambda b: (cf(b) - lam) ** 2, ctx.sampler, lam),
        McCheck("independence/constant", lambda b: np.ones(b.n), ctx.sampler, 1.0),
    ]
    return checks


def _random_function(grid, room, seed: int) -> GridFunction:
    rng = np.random.default_rng(seed)
    v = np.zeros(grid.shape, dtype=complex)
    box = tuple(slice(0, r) for r in room)
    shape = v[box].shape
    v[box] = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return GridFunction(grid, v)


def _shift_laws(ctx: _Context, params: dict) -> list:
    grid = ctx.grid
    d = grid.dimension
    basic = [(0,) * d, ctx.kc, ctx.ka, ctx.kb] + [tuple(int(i == j) for i in range(d)) for j in range(d)]
    basic = list(dict.fromkeys(basic))
    max_pair = tuple(max(s[i] + t[i] for s in basic for t in basic) for i in range(d))
    room = ctx.room(max_pair)
    if min(room) < 1:
        raise ValueError("grid too small for the configured fibers")
    f = _random_function(grid, room, ctx.cfg.seed)
    g = _random_function(grid, room, ctx.cfg.seed + 1)
    one = GridFunction.constant(grid, 1.0)

    def compute():
        rows = []
        for s in basic:
            a = grid.lattice_vector(s)
            Vf, Vg = shift(f, a), shift(g, a)
            rows.append(CheckRow.exact(f"shift-laws/isometry/{s}", inner(Vf, Vg), inner(f, g), rtol=0.0))
            rows.append(CheckRow.exact(f"shift-laws/norm/{s}", Vf.norm(), f.norm(), rtol=0.0))
            rows.append(CheckRow.exact(f"shift-laws/adjoint-pairing/{s}", inner(adjoint_shift(f, a), g), inner(f, Vg)))
            rows.append(CheckRow.exact(f"shift-laws/adjoint-isometry/{s}", _maxdiff(adjoint_shift(Vf, a), f), 0.0, rtol=0.0))
            rows.append(
                CheckRow.exact(
                    f"shift-laws/range-projection/{s}",
                    _maxdiff(shift(adjoint_shift(one, a), a), restrict(one, lower=a)),
                    0.0,
                    rtol=0.0,
                )
            )
            rows.append(CheckRow.exact(f"shift-laws/range/{s}", _maxdiff(restrict(Vf, upper=a), 0 * f), 0.0, rtol=0.0))
        for s, t in itertools.product(basic, repeat=2):
            a, b = grid.lattice_vector(s), grid.lattice_vector(t)
            st = tuple(x + y for x, y in zip(s, t))
            lhs = shift(shift(f, b), a)
            rhs = shift(f, grid.lattice_vector(st))
            rows.append(CheckRow.exact(f"shift-laws/semigroup/{s}+{t}", _maxdiff(lhs, rhs), 0.0, rtol=0.0))
        full = GridFunction(grid, f.values + 0)
        for s, t in itertools.product(basic, repeat=2):
            lo = s
            mid = tuple(x + y for x, y in zip(s, t))
            for u in basic:
                hi = tuple(x + y for x, y in zip(mid, u))
                if any(h > n for h, n in zip(hi, grid.counts)):
                    continue
                A, B, C = (grid.lattice_vector(k) for k in (lo, mid, hi))
                parts = restrict(full, A, B) + restrict(full, B, C)
                rows.append(
                    CheckRow.exact(
                        f"shift-laws/region-partition/{lo}<={mid}<={hi}", _maxdiff(parts, restrict(full, A, C)), 0.0, rtol=0.0
                    )
                )
        return rows

    return [ExactCheck("shift-laws", compute)]


def _fock_laws(ctx: _Context, params: dict) -> list:
    grid = ctx.grid
    A, Bv, Cv = ctx.a, ctx.b, ctx.c
    la, lb, lc = ctx.labels_a, ctx.labels_b, ctx.labels_c
    gram_names = ["zero", "one", "cell0", "last", "cplx", "neg", "wave", "rand"]

    def vec(corpus, names, coefs, fiber):
        return FockVector(tuple((c, corpus[n]) for c, n in zip(coefs, names)), fiber, grid)

    def compute():
        rows = []
        G = gram([la[n] for n in gram_names])
        herm = 0.5 * (G + G.conj().T)
        eig = np.linalg.eigvalsh(herm)
        rows.append(CheckRow.exact("fock-laws/gram-nonpositive-eigenvalues", int(np.sum(eig <= 0)), 0, rtol=0.0))
        rows.append(CheckRow.exact("fock-laws/gram-hermitian", float(np.max(np.abs(G - G.conj().T))), 0.0))
        for f1, f2, g1, g2 in [
            ("one", "cplx", "wave", "rand"),
            ("cell0", "last", "one", "one"),
            ("rand", "wave", "neg", "cplx"),
            ("zero", "lshape", "flip", "cell0"),
        ]:
            ef1, ef2 = FockVector.exponential(la[f1], A), FockVector.exponential(la[f2], A)
            eg1, eg2 = FockVector.exponential(lb[g1], Bv), FockVector.exponential(lb[g2], Bv)
            lhs = fock_inner(ccr_product(A, ef1, Bv, eg1), ccr_product(A, ef2, Bv, eg2))
            rhs = fock_inner(ef1, ef2) * fock_inner(eg1, eg2)
            rows.append(CheckRow.exact(f"fock-laws/multiplicative/{f1},{f2}|{g1},{g2}", _rel(lhs, rhs), 0.0))
        rng = np.random.default_rng(ctx.cfg.seed)
        for trial in range(4):
            pick = lambda corpus: list(rng.choice(sorted(corpus), size=3, replace=False))  # noqa: E731
            coefs = lambda: rng.standard_normal(3) + 1j * rng.standard_normal(3)  # noqa: E731
            u = vec(la, pick(la), coefs(), A)
            v = vec(lb, pick(lb), coefs(), Bv)
            w = vec(lc, pick(lc), coefs(), Cv)
            left = ccr_product(A + Bv, ccr_product(A, u, Bv, v), Cv, w)
            right = ccr_product(A, u, Bv + Cv, ccr_product(Bv, v, Cv, w))
            lm, rm = left.label_map(), right.label_map()
            if lm.keys() != rm.keys():
                mismatch = math.inf
            else:
                mismatch = max(abs(lm[k] - rm[k]) / max(1.0, abs(rm[k])) for k in lm)
            rows.append(CheckRow.exact(f"fock-laws/associativity/{trial}", mismatch, 0.0))
            pre = fock_inner(u, u)
            post = fock_inner(second_quantize(u, Bv), second_quantize(u, Bv))
            rows.append(CheckRow.exact(f"fock-laws/second-quantization/{trial}", post, pre))
        e0a = FockVector.vacuum(grid, A)
        unit = ccr_product(A, e0a, Bv, FockVector.vacuum(grid, Bv))
        (coef, lab), = unit.terms
        rows.append(CheckRow.exact("fock-laws/unit", abs(coef - 1) + _maxdiff(lab, GridFunction.zeros(grid)), 0.0, rtol=0.0))
        return rows

    return [ExactCheck("fock-laws", compute)]


def _sigma_mc(f: GridFunction, g: GridFunction):
    return lambda b: sigma_eval_batch(f, b) * np.conj(sigma_eval_batch(g, b))


def _sigma_inner(ctx: _Context, params: dict) -> list:
    if "pairs" in params:
        pairs = [(p, q, ctx.cfg.labels[p], ctx.cfg.labels[q]) for p, q in params["pairs"]]
    else:
        pairs = [(p, q, ctx.labels_a[p], ctx.labels_a[q]) for p, q in SIGMA_PAIRS]
    return [
        McCheck(f"sigma-inner/{p},{q}", _sigma_mc(f, g), ctx.sampler, np.exp(inner(f, g)))
        for p, q, f, g in pairs
    ]


def _product_law(ctx: _Context, params: dict) -> list:
    grid = ctx.grid
    A, Bv, Cv = ctx.a, ctx.b, ctx.c
    la, lb, lc = ctx.labels_a, ctx.labels_b, ctx.labels_c
    pairs = [("one", "one"), ("cplx", "wave"), ("rand", "rand"), ("flip", "neg"), ("lshape", "cell0"), ("zero", "rand")]

    def compute():
        rows = []
        configs = ctx.configs(check_seed(ctx.cfg.seed, "product-law/pathwise"))
        for fn, gn in pairs:
            fl, gl = SigmaLabel(la[fn], A), SigmaLabel(lb[gn], Bv)
            h = sigma_product(A, fl, Bv, gl)
            err = max(_rel(sigma_eval(fl, w) * shifted_sigma_direct(gl, A, w), sigma_eval(h, w)) for w in configs)
            rows.append(CheckRow.exact(f"product-law/pathwise/{fn},{gn}", err, 0.0))
            shifted = shift_sigma(gl, A)
            err = max(_rel(sigma_eval(shifted, w), shifted_sigma_direct(gl, A, w)) for w in configs)
            rows.append(CheckRow.exact(f"product-law/shift-pathwise/{gn}", err, 0.0))
            err = max(_rel(sigma_eval_exponential(fl, w), sigma_eval(fl, w)) for w in configs)
            rows.append(CheckRow.exact(f"product-law/exp-route/{fn}", err, 0.0))
        for fn, gn, hn in [("one", "cplx", "wave"), ("rand", "lshape", "neg"), ("flip", "zero", "rand")]:
            f, g, h = SigmaLabel(la[fn], A), SigmaLabel(lb[gn], Bv), SigmaLabel(lc[hn], Cv)
            left = sigma_product(A + Bv, sigma_product(A, f, Bv, g), Cv, h)
            right = sigma_product(A, f, Bv + Cv, sigma_product(Bv, g, Cv, h))
            diff = complex(_maxdiff(left.f, right.f))
            rows.append(CheckRow(f"product-law/associativity/{fn},{gn},{hn}", "exact", diff, 0j, passed=left.equals(right)))
        zero_a, zero_b = SigmaLabel.zero(grid, A), SigmaLabel.zero(grid, Bv)
        for fn in ("one", "rand"):
            f = SigmaLabel(la[fn], A)
            right_unit = sigma_product(A, f, Bv, zero_b)
            rows.append(CheckRow.exact(f"product-law/right-unit/{fn}", _maxdiff(right_unit.f, f.f), 0.0, rtol=0.0))
            g = SigmaLabel(lb[fn], Bv)
            left_unit = sigma_product(A, zero_a, Bv, g)
            rows.append(CheckRow.exact(f"product-law/left-unit/{fn}", _maxdiff(left_unit.f, shift(g.f, A)), 0.0, rtol=0.0))
        unit_err = max(abs(sigma_eval(zero_a, w) - 1) for w in configs)
        rows.append(CheckRow.exact("product-law/unit-is-one", unit_err, 0.0, rtol=0.0))
        return rows

    return [ExactCheck("product-law", compute)]


def _projection_triples(ctx: _Context):
    grid = ctx.grid
    zero = (0,) * grid.dimension
    kab = tuple(x + y for x, y in zip(ctx.ka, ctx.kb))
    big = {
        "big-one": block(grid, zero, kab, 0.5),
        "big-cplx": block(grid, zero, kab, 0.2 - 0.3j),
        "big-rand": _random_function(grid, kab, ctx.cfg.seed + 5) * 0.2,
        "big-wave": label_corpus(grid, kab, seed=ctx.cfg.seed)["wave"],
    }
    gs = ["one", "cplx", "rand"]
    triples = [(fn, gn, f) for (fn, f), gn in itertools.product(big.items(), gs)]
    return ctx.a + ctx.b, triples


def _projection(ctx: _Context, params: dict) -> list:
    fiber_ab, triples = _projection_triples(ctx)
    A = ctx.a
    checks = []
    for fn, gn, f in triples:
        label = SigmaLabel(f, fiber_ab)
        proj = project_Qa(label, A)
        g = ctx.labels_a[gn]

        def compute(label=label, proj=proj, g=g, fn=fn, gn=gn):
            return [
                CheckRow.exact(f"projection/pairing/{fn},{gn}", np.exp(inner(proj.f, g)), np.exp(inner(label.f, g)), rtol=0.0)
            ]

        checks.append(ExactCheck(f"projection/pairing/{fn},{gn}", compute))
        target = np.exp(inner(proj.f, g))
        checks.append(McCheck(f"projection/mc-full/{fn},{gn}", _sigma_mc(label.f, g), ctx.sampler, target))
        checks.append(McCheck(f"projection/mc-projected/{fn},{gn}", _sigma_mc(proj.f, g), ctx.sampler, target))
    return checks


def _decompose(ctx: _Context, params: dict) -> list:
    grid = ctx.grid
    A = ctx.a
    names = ["one", "cplx", "rand", "wave", "lshape", "flip"]

    def compute():
        rows = []
        configs = ctx.configs(check_seed(ctx.cfg.seed, "decompose/pathwise"), count=20)
        for name in names:
            label = SigmaLabel(ctx.labels_a[name], A)
            for steps in itertools.product(*[range(k + 1) for k in ctx.ka]):
                b = grid.lattice_vector(steps)
                left, right = decompose(A, label, b)
                back = sigma_product(b, left, A - b, right)
                ok = back.equals(label)
                diff = complex(_maxdiff(back.f, label.f))
                rows.append(CheckRow(f"decompose/roundtrip/{name}/{steps}", "exact", diff, 0j, passed=ok))
            steps = tuple(max(1, k // 2) for k in ctx.ka)
            b = grid.lattice_vector(steps)
            left, right = decompose(A, label, b)
            err = max(_rel(sigma_eval(left, w) * shifted_sigma_direct(right, b, w), sigma_eval(label, w)) for w in configs)
            rows.append(CheckRow.exact(f"decompose/pathwise/{name}/{steps}", err, 0.0))
        return rows

    return [ExactCheck("decompose", compute)]


def _theta_iso(ctx: _Context, params: dict) -> list:
    names = ["zero", "one", "cplx", "wave"]
    corpus = [ctx.labels_a[n] for n in names]
    corpus_b = [ctx.labels_b[n] for n in ("one", "rand", "flip")]

    def compute():
        return theta_check(ctx.a, corpus, b=ctx.b, corpus_b=corpus_b, mc=False).rows

    checks = [ExactCheck("theta-iso", compute)]
    for j, k in itertools.product(range(len(names)), repeat=2):
        f, g = corpus[j], corpus[k]
        checks.append(McCheck(f"theta-iso/gram-mc/{names[j]},{names[k]}", _sigma_mc(f, g), ctx.sampler, np.exp(inner(f, g))))
    return checks


def _compound_laplace(ctx: _Context, params: dict) -> list:
    grid = ctx.grid
    B = block(grid, (0,) * grid.dimension, ctx.ka)
    checks = []
    for name, nu in ctx.cfg.levy.items():
        sampler = MarkedSampler.on_grid(grid, nu)
        for t in params.get("t", (0.5, 1.0, 2.0)):
            u = B * float(t)
            checks.append(
                McCheck(f"compound-laplace/{name}/t={t}", lambda b, u=u: xi_exponential_batch(b, u), sampler, compound_laplace_rhs(u, nu))
            )
    return checks


def _compound_g0(ctx: _Context, params: dict) -> list:
    grid = ctx.grid
    zero = (0,) * grid.dimension
    regions = {
        "block": block(grid, zero, ctx.ka),
        "cell": block(grid, zero, (1,) * grid.dimension),
        "half": block(grid, zero, tuple(max(1, k // 2) for k in ctx.ka)),
    }
    A = ctx.a

    def compute():
        rows = []
        for (name, nu), (ci, c) in itertools.product(ctx.cfg.levy.items(), enumerate(params.get("c", (0.5, 2.0, 20.0)))):
            bname, B = list(regions.items())[ci % len(regions)]
            mg = MarkedGrid.from_levy(grid, nu, ctx.cfg.mark_nodes)
            nu_d = mg.levy
            sampler = MarkedSampler.on_grid(grid, nu_d)
            configs = ctx.configs(check_seed(ctx.cfg.seed, f"compound-g0/{name}/{c}"), marked_sampler=sampler)
            g0 = embed_g0(float(c), B, mg, A)
            u = B * float(c)
            err = max(_rel(sigma_eval_marked(g0, w), xi_vector_eval(u, w, nu_d)) for w in configs)
            rows.append(CheckRow.exact(f"compound-g0/{name}/c={c}/B={bname}", err, 0.0))
        return rows

    return [ExactCheck("compound-g0", compute)]


def _totality(ctx: _Context, params: dict) -> list:
    def compute():
        rows = []
        for m in params.get("m", (1, 4, 8)):
            nu = LevyMeasure.atomic([1.0], [1.0]) if m == 1 else LevyMeasure.exponential(1.0)
            cs = np.geomspace(0.05, 50.0, m + 4)
            rank = totality_rank(nu, cs, nodes=m)
            rows.append(CheckRow.exact(f"totality/m={m}/k={m + 4}", rank, m, rtol=0.0))
        return rows

    return [ExactCheck("totality", compute)]


SUITES = {
    "master-equation": _master_equation,
    "stationarity": _stationarity,
    "independence": _independence,
    "shift-laws": _shift_laws,
    "fock-laws": _fock_laws,
    "sigma-inner": _sigma_inner,
    "product-law": _product_law,
    "projection": _projection,
    "decompose": _decompose,
    "theta-iso": _theta_iso,
    "compound-laplace": _compound_laplace,
    "compound-g0": _compound_g0,
    "totality": _totality,
}


def build_checks(config: ExperimentConfig, suite: str) -> list:
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {list(SUITES)}")
    return SUITES[suite](_Context(config), config.suite_params(suite))


def run_suite(config: ExperimentConfig, suite: str, out_dir=None, workers: int | None = None) -> SuiteReport:
    """Run one suite; writes ``<out_dir>/<suite>.csv`` when ``out_dir`` is given."""
    params = config.suite_params(suite)
    n = int(params.get("n", config.n))
    seed = int(params.get("seed", config.seed))
    workers = workers or config.workers
    start = time.perf_counter()
    report = SuiteReport(suite, n=n)
    for check in build_checks(config, suite):
        report.rows.extend(check.run(n, seed, workers))
    report.duration = time.perf_counter() - start
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{suite}.csv").write_text(report.to_csv())
    return report


def emit_convergence(config: ExperimentConfig, check_id: str, ladder, out_dir=None, workers: int | None = None) -> list:
    """Rerun one MC check along an n-ladder; rows are ``(n, |error|, stderr)``."""
    suite = check_id.split("/", 1)[0]
    checks = {c.check_id: c for c in build_checks(config, suite)}
    if check_id not in checks:
        raise KeyError(f"no check {check_id!r} in suite {suite!r}")
    check = checks[check_id]
    if check.kind != "mc":
        raise ValueError(f"check {check_id!r} is exact; convergence needs an MC check")
    seed = int(config.suite_params(suite).get("seed", config.seed))
    rows = []
    for n in ladder:
        (row,) = check.run(int(n), seed, workers or config.workers)
        rows.append((int(n), abs(row.value - row.target), row.stderr))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        safe = check_id.replace("/", "__").replace(",", "_")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "abs_error", "stderr"])
        for n, err, se in rows:
            w.writerow([n, repr(float(err)), repr(float(se))])
        (out / f"convergence__{safe}.csv").write_text(buf.getvalue())
    return rows
