"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

Run with pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import functools
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES, CONFIGS  # noqa: E402
from poisson_ccr.config import load_config  # noqa: E402
from poisson_ccr.corpus import label_corpus  # noqa: E402
from poisson_ccr.fock import gram  # noqa: E402
from poisson_ccr.suites import run_suite  # noqa: E402



@functools.lru_cache(maxsize=None)
def config(name: str):
    return load_config(CONFIGS / f"{name}.yaml")


@functools.lru_cache(maxsize=None)
def suite(name: str, cfg: str = "orthant1d"):
    return run_suite(config(cfg), name)


def record(number: int, ok: bool, text: str) -> None:
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'}  {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def rows(report, prefix=""):
    return [r for r in report.rows if r.check_id.startswith(prefix)]


def max_z(rs):
    return max((abs(r.z) for r in rs if r.kind == "mc"), default=0.0)


def max_value(rs):
    return max((abs(r.value) for r in rs), default=0.0)


def test_01_master_equation():
    rep = suite("master-equation")
    rs = rows(rep)
    ok = len(rs) >= 10 and rep.passed and max_z(rs) <= 4
    record(1, ok, f"master equation: {len(rs)} exponents, max |z| = {max_z(rs):.2f} at n = {rep.n}")


def test_02_sigma_inner_products():
    rep = suite("sigma-inner")
    rs = rows(rep)
    ids = {r.check_id.split("/", 1)[1] for r in rs}
    kinds = {"disjoint": "cell0,last" in ids, "equal": "one,one" in ids, "complex": "cplx,cplx" in ids}
    ok = len(rs) >= 15 and all(kinds.values()) and rep.passed
    record(2, ok, f"Sigma inner products: {len(rs)} pairs, max |z| = {max_z(rs):.2f} at n = {rep.n}")


def test_03_product_law():
    reps = [suite("product-law", c) for c in ("orthant1d", "wedge")]
    path = [r for rep in reps for r in rows(rep, "product-law/pathwise")]
    assoc = [r for rep in reps for r in rows(rep, "product-law/associativity")]
    worst = max_value(path)
    ok = all(rep.passed for rep in reps) and worst <= 1e-12 and all(r.passed for r in assoc) and len(assoc) > 0
    record(3, ok, f"product law: {len(path)} pathwise pairs x 100 configurations, max rel err = {worst:.1e}; "
           f"{len(assoc)} associativity triples exact")


def test_04_shift_isometry_laws():
    names = ("orthant1d", "orthant2d", "wedge")
    reps = {c: suite("shift-laws", c) for c in names}
    semi = [r for rep in reps.values() for r in rows(rep, "shift-laws/semigroup")]
    iso = [r for rep in reps.values() for r in rows(rep, "shift-laws/isometry")]
    exact = all(r.value == r.target for r in semi + iso)
    ok = exact and all(rep.passed for rep in reps.values())
    record(4, ok, f"shift laws: {len(semi)} semigroup + {len(iso)} isometry checks, zero error on orthants and wedge")


def test_05_fock_laws():
    rep = suite("fock-laws")
    theta = suite("theta-iso")
    grid = config("orthant1d").grid
    corpus = label_corpus(grid, config("orthant1d").fiber("a"), seed=config("orthant1d").seed)
    G = gram([corpus[n] for n in ("zero", "one", "cell0", "last", "cplx", "neg", "wave", "rand")])
    min_eig = float(np.linalg.eigvalsh(0.5 * (G + G.conj().T)).min())
    mult = rows(rep, "fock-laws/multiplicative")
    inter = rows(theta, "theta/intertwine")
    ok = rep.passed and theta.passed and min_eig > 0 and max_value(mult) <= 1e-12 and all(r.value == 0 for r in inter)
    record(5, ok, f"Fock laws: Gram min eigenvalue {min_eig:.2e} (8 labels), multiplicativity rel err "
           f"{max_value(mult):.1e}, {len(inter)} intertwinings exact")


def test_06_projection():
    rep = suite("projection")
    pair = rows(rep, "projection/pairing")
    mc = [r for r in rep.rows if r.kind == "mc"]
    ok = len(pair) >= 10 and all(r.value == r.target for r in pair) and rep.passed
    record(6, ok, f"projection: {len(pair)} triples, pairings exact, max |z| = {max_z(mc):.2f}")


def test_07_decomposability():
    reps = [suite("decompose", c) for c in ("orthant1d", "wedge")]
    rt = [r for rep in reps for r in rows(rep, "decompose/roundtrip")]
    ok = all(rep.passed for rep in reps) and all(r.passed and r.value == 0 for r in rt)
    record(7, ok, f"decomposability: {len(rt)} round trips (all lattice b <= a) exact")


def test_08_compound_laplace():
    rep = suite("compound-laplace")
    rs = rows(rep)
    families = {config("orthant1d").levy[r.check_id.split("/")[1]].family for r in rs}
    ts = {r.check_id.rsplit("=", 1)[1] for r in rs}
    ok = rep.passed and families == {"atomic", "exponential", "gamma"} and ts == {"0.5", "1.0", "2.0"}
    record(8, ok, f"compound Laplace: {len(rs)} (nu, t) cases, max |z| = {max_z(rs):.2f} at n = {rep.n}")


def test_09_compound_identification():
    rep = suite("compound-g0")
    rs = rows(rep)
    ok = len(rs) >= 6 and rep.passed and max_value(rs) <= 1e-12
    record(9, ok, f"g0 identification: {len(rs)} (c, B, nu) cases x 100 marked configurations, "
           f"max rel err = {max_value(rs):.1e}")


def test_10_totality():
    rep = suite("totality")
    ranks = {r.check_id: int(r.value.real) for r in rep.rows}
    ok = rep.passed and len(ranks) == 3
    record(10, ok, "totality: " + ", ".join(f"{k.split('/')[1]} rank {v}" for k, v in ranks.items()))


@pytest.mark.parametrize("name", ["master-equation", "compound-laplace"])
def test_11_determinism(name, tmp_path):
    cfg = config("orthant1d")
    one = run_suite(cfg, name, out_dir=tmp_path / "w1", workers=1)
    two = run_suite(cfg, name, out_dir=tmp_path / "w3", workers=3)
    again = run_suite(cfg, name, out_dir=tmp_path / "w1b", workers=1)
    a, b, c = (tmp_path / d / f"{name}.csv" for d in ("w1", "w3", "w1b"))
    ok = a.read_bytes() == b.read_bytes() == c.read_bytes() and one.passed and two.passed and again.passed
    record(11, ok, f"determinism ({name}): CSV byte-identical across reruns with 1 and 3 workers")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
