"""Acceptance suite: one pass/fail line per criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import json
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np

from corpus import COORDS, central_gradient, central_hessian, expression_corpus
from zsym import builders, cli
from zsym import classify as cl
from zsym import exprlang as el
from zsym import identities as idn
from zsym.geometry import curvature_family, divergence_coefficients, geometry_at
from zsym.jets import jet_eval, jet_eval_array, jmul

RESULTS = []
POINTS = 10


def record(number, ok, text):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"
    RESULTS.append(line)
    print(line)
    return ok


def _geos(spec, count=POINTS, seed=0):
    return [geometry_at(spec, p) for p in spec.sample_points(count, np.random.default_rng(seed))]


def _corpus_specs(n):
    return builders.standard_corpus(n, perturbed_seeds=range(5), eps=0.05)


_CORPUS_CACHE = {}


def corpus_geos():
    if not _CORPUS_CACHE:
        for n in (4, 5):
            for name, spec in _corpus_specs(n).items():
                _CORPUS_CACHE[(n, name)] = _geos(spec)
    return _CORPUS_CACHE


def criterion_1():
    start = time.perf_counter()
    sphere = builders.space_form(4, 1.0)
    rel = max(abs(float(g.scalar[0]) - 12.0) / 12.0 for g in _geos(sphere))
    trace = 0.0
    for seed in range(5):
        rep = idn.check_conformal_trace_free(_geos(builders.perturbed_flat(4, 0.05, seed), seed=seed))
        trace = max(trace, rep.max_residual)
    elapsed = time.perf_counter() - start
    ok = rel < 1e-8 and trace < 1e-9 and elapsed < 5.0
    return record(1, ok, f"S4 scalar curvature rel err {rel:.2e} (< 1e-8); C trace residual "
                         f"{trace:.2e} (< 1e-9); {elapsed:.2f} s (< 5 s)")


IDENTITY_SUITE = ("bianchi_first", "bianchi_second", "contracted_bianchi_z", "lovelock", "ricci_commutator")


def criterion_2():
    _CORPUS_CACHE.clear()
    start = time.perf_counter()
    geos = corpus_geos()
    worst, where = 0.0, None
    for key, gs in geos.items():
        for name in IDENTITY_SUITE:
            r = idn.ASSERTIVE_CHECKS[name](gs).max_residual
            if r >= worst:
                worst, where = r, (name, *key)
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 60.0
    return record(2, ok, f"identity suite on {len(geos)} metrics x {POINTS} points: max scaled "
                         f"residual {worst:.2e} at {where} (< 1e-8); {elapsed:.2f} s (< 60 s)")


def criterion_3():
    worst, where = 0.0, None
    for key, gs in corpus_geos().items():
        for kind, a, b in [("C", None, None), ("P", None, None), ("Ctilde", None, None),
                           ("N", None, None), ("W", 1.0, 1.0)]:
            r = idn.check_divergence_formula(gs, kind, a, b).max_residual
            if r >= worst:
                worst, where = r, (kind, *key)
    rows = all(divergence_coefficients("C", n)[0] == 2 * divergence_coefficients("C", n)[1] * (n - 1)
               and isinstance(divergence_coefficients("C", n)[1], Fraction) for n in range(3, 7))
    ok = worst < 1e-8 and rows
    return record(3, ok, f"divergence table max scaled residual {worst:.2e} at {where} (< 1e-8); "
                         f"C row A = 2B(n-1) exactly: {rows}")


def criterion_4():
    worst_c = worst_t = 0.0
    for n in (4, 5):
        for k in (1.0, -1.0):
            for geo in _geos(builders.space_form(n, k)):
                size = float(np.max(np.abs(geo.riemann[..., 0])))
                c = curvature_family(geo, "C").data[..., 0]
                t = curvature_family(geo, "Ctilde").data[..., 0]
                worst_c = max(worst_c, idn.zero_residual(c, size).residual)
                worst_t = max(worst_t, idn.zero_residual(t, size).residual)
    ok = worst_c < 1e-8 and worst_t < 1e-8
    return record(4, ok, f"space forms n in {{4,5}}, k = +-1: |C| scaled {worst_c:.2e}, "
                         f"|Ctilde| scaled {worst_t:.2e} (< 1e-8)")


S3 = builders.round_sphere(3, start=2)
POLAR = builders.warped_product(builders.radial_warp("sin(x1)", S3))
CUBIC = builders.warped_product(builders.radial_warp("x1+0.2*x1^3", S3))


def criterion_5():
    einstein = all(cl.quasi_einstein_decompose(g.ricci[..., 0], g.metric_value).verdict == "einstein"
                   for g in _geos(POLAR))
    verdicts, res, align = set(), 0.0, 1.0
    for g in _geos(CUBIC):
        qe = cl.quasi_einstein_decompose(g.ricci[..., 0], g.metric_value)
        verdicts.add(qe.verdict)
        if qe.verdict == "quasi_einstein":
            res = max(res, qe.residual)
            align = min(align, abs(float((g.inverse_value @ qe.T)[0])))
    ok = einstein and verdicts == {"quasi_einstein"} and res < 1e-8 and align > 1 - 1e-8
    return record(5, ok, f"sin r warp Einstein at all points: {einstein}; cubic warp verdicts "
                         f"{sorted(verdicts)}, residual {res:.2e} (< 1e-8), min |<T,dr>| "
                         f"1 - {1 - align:.1e} (> 1 - 1e-8)")


def criterion_6():
    conc = closed = 0.0
    for g in _geos(CUBIC):
        c = cl.check_concircular(g, ["1", "0", "0", "0"])
        conc = max(conc, c.concircular_residual)
        closed = max(closed, c.closed_residual)
    ok = conc < 1e-8 and closed < 1e-10
    return record(6, ok, f"T = dr concircular fit residual {conc:.2e} (< 1e-8), closedness "
                         f"{closed:.2e} (< 1e-10)")


def criterion_7():
    fit, rank1, degenerate_ok, count = 0.0, 0.0, True, 0
    for i in range(100):
        n = (4, 5, 6)[i % 3]
        option = builders.SYNTHETIC_OPTIONS[(i // 3) % 3]
        s = builders.synthetic_wzs_instance(n, i, option)
        sol = cl.solve_wzs(s.z, s.dz, s.ginv)
        count += 1
        if option == "zero":
            degenerate_ok &= sol.degenerate
            continue
        fit = max(fit, sol.residual)
        if option == "rank1":
            zs = float(np.einsum("kl,kl->", s.ginv, s.z))
            trans = idn.scaled_residual(np.einsum("k,kl->l", s.ginv @ s.eta, s.z), zs * s.eta).residual
            rank1 = max(rank1, trans, cl.check_rank1_z(s.z, s.eta, s.ginv).residual)
    ok = fit < 1e-10 and rank1 < 1e-12 and degenerate_ok and count == 100
    return record(7, ok, f"{count} synthetic instances: fit residual {fit:.2e} (< 1e-10); rank-1 "
                         f"relations {rank1:.2e} (< 1e-12); Z = 0 flagged degenerate: {degenerate_ok}")


def criterion_8():
    exprs = expression_corpus(50)
    rng = np.random.default_rng(8)
    worst1 = worst2 = 0.0
    for e in exprs:
        for p in rng.uniform(-0.5, 0.5, size=(2, 3)):
            j = jet_eval(e, p, 2, COORDS)
            g, h = j.gradient(), j.hessian()
            worst1 = max(worst1, np.max(np.abs(g - central_gradient(e, p))) / max(1.0, np.max(np.abs(g))))
            worst2 = max(worst2, np.max(np.abs(h - central_hessian(e, p))) / max(1.0, np.max(np.abs(h))))
    prod = lin = 0.0
    for i in range(50):
        f, g = exprs[i], exprs[(7 * i + 3) % 50]
        p = rng.uniform(-0.5, 0.5, size=3)
        jf, jg = jet_eval_array(f, p, 4, COORDS), jet_eval_array(g, p, 4, COORDS)
        jp = jet_eval_array(el.BinOp("*", f, g), p, 4, COORDS)
        sep = jmul(jf, jg, 3)
        prod = max(prod, np.max(np.abs(jp - sep)) / max(1.0, np.max(np.abs(sep))))
        a, b = rng.uniform(-2, 2, size=2)
        combo = el.BinOp("+", el.BinOp("*", el.Num(a), f), el.BinOp("*", el.Num(b), g))
        jl = jet_eval_array(combo, p, 4, COORDS)
        lin = max(lin, np.max(np.abs(jl - (a * jf + b * jg))) / max(1.0, np.max(np.abs(jl))))
    ok = worst1 < 1e-6 and worst2 < 1e-6 and prod < 1e-12 and lin < 1e-12
    return record(8, ok, f"50 expressions vs central differences (h = 1e-4): order 1 {worst1:.2e}, "
                         f"order 2 {worst2:.2e} (< 1e-6); product rule {prod:.2e}, linearity "
                         f"{lin:.2e} (< 1e-12)")


def criterion_9(tmp_dir):
    spec = builders.perturbed_flat(4, 0.05, 42).with_phi("-R/4")
    manifest = tmp_dir / "manifest.json"
    manifest.write_text(json.dumps(cli.spec_to_manifest(spec, points=4, seed=123)))
    outs = []
    for k in range(2):
        out = tmp_dir / f"report{k}.json"
        subprocess.run([sys.executable, "-m", "zsym.cli", "check", "--metric", str(manifest),
                        "--out", str(out)], check=False, capture_output=True)
        outs.append(out.read_bytes() if out.exists() else b"")
    ok = bool(outs[0]) and outs[0] == outs[1]
    return record(9, ok, f"two runs, same manifest and seed: byte-identical JSON "
                         f"({len(outs[0])} bytes): {ok}")


def test_criterion_1_convention_pinning():
    assert criterion_1()


def test_criterion_2_identity_suite():
    assert criterion_2()


def test_criterion_3_divergence_table():
    assert criterion_3()


def test_criterion_4_conformal_flatness():
    assert criterion_4()


def test_criterion_5_quasi_einstein():
    assert criterion_5()


def test_criterion_6_concircular():
    assert criterion_6()


def test_criterion_7_wzs_solver():
    assert criterion_7()


def test_criterion_8_jets():
    assert criterion_8()


def test_criterion_9_determinism(tmp_path):
    assert criterion_9(tmp_path)


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        ok = [criterion_1(), criterion_2(), criterion_3(), criterion_4(), criterion_5(),
              criterion_6(), criterion_7(), criterion_8(), criterion_9(Path(d))]
    sys.exit(0 if all(ok) else 1)
