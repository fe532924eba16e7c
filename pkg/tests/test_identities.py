from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zsym import builders
from zsym import identities as idn
from zsym.geometry import curvature_family, divergence, divergence_coefficients, geometry_at


def _geos(spec, count=3, seed=0):
    return [geometry_at(spec, p) for p in spec.sample_points(count, np.random.default_rng(seed))]


def _corpus(n):
    specs = builders.standard_corpus(n, perturbed_seeds=range(2))
    specs["warped_cubic"] = builders.warped_product(
        builders.radial_warp("x1+0.2*x1^3", builders.round_sphere(n - 1, start=2)))
    specs["strong"] = builders.perturbed_flat(n, 0.25, 9, auto_shrink=True).with_phi("-R/4+x1*x2")
    return specs


CORPUS = {(n, name): _geos(spec) for n in (4, 5) for name, spec in _corpus(n).items()}
IDS = [f"{n}-{name}" for n, name in CORPUS]


@pytest.fixture(params=list(CORPUS), ids=IDS)
def geos(request):
    return CORPUS[request.param]


@pytest.mark.parametrize("name", sorted(idn.ASSERTIVE_CHECKS))
def test_assertive_checks_pass(name, geos):
    report = idn.ASSERTIVE_CHECKS[name](geos)
    assert report.points == len(geos)
    assert report.passed, (name, report.max_residual, report.worst)


@pytest.mark.parametrize("a, b", [(1.0, 1.0), (2.0, -0.5), (-3.0, 1.5)])
def test_quasi_conformal_divergence(geos, a, b):
    assert idn.check_divergence_formula(geos, "W", a, b).passed
    assert idn.check_qch_scalar_condition(geos, a, b).passed


def test_qch_prefactor_vanishes():
    # a = -(n-2) b kills the right side whatever grad R is
    geos = CORPUS[(4, "strong")]
    rep = idn.check_qch_scalar_condition(geos, -2.0, 1.0)
    assert rep.passed
    assert max(r.raw for r in rep.results) < 1e-10


def test_strong_metric_is_not_trivial():
    geo = CORPUS[(4, "strong")][0]
    assert np.max(np.abs(idn.div_riemann(geo)[..., 0])) > 1e-2
    assert np.max(np.abs(idn.curvature_cyclic(geo))) > 1e-3


def test_wrong_coefficients_are_detected():
    # the checks must discriminate: a perturbed B coefficient fails loudly
    geos = CORPUS[(4, "strong")]
    for geo in geos:
        direct = divergence(curvature_family(geo, "C")).data[..., 0]
        a, b = divergence_coefficients("C", 4)
        dr = idn.grad_scalar(geo, geo.scalar)
        wrong = float(a) * idn.div_riemann(geo)[..., 0] + 1.1 * float(b) * idn.g_wedge_grad(geo, dr)
        assert idn.scaled_residual(direct, wrong).residual > 1e-5


def test_flat_residuals_are_exactly_zero():
    geos = CORPUS[(4, "flat")]
    for name, check in idn.ASSERTIVE_CHECKS.items():
        assert check(geos).max_residual == 0.0, name


def test_sphere_lovelock_sides_vanish_separately():
    for geo in CORPUS[(4, "sphere")]:
        lhs, rhs = idn.lovelock_sides(geo)
        assert np.max(np.abs(lhs)) < 1e-10
        assert np.max(np.abs(rhs)) < 1e-10


def test_coefficient_table():
    n = 5
    assert divergence_coefficients("C", n) == (Fraction(2, 3), Fraction(1, 12))
    assert divergence_coefficients("P", n) == (Fraction(3, 4), 0)
    assert divergence_coefficients("Ctilde", n) == (1, Fraction(1, 20))
    assert divergence_coefficients("N", n) == (Fraction(2, 3), Fraction(1, 6))
    assert divergence_coefficients("W", n, 1, 1) == (2, Fraction(2 - 4, 40))
    with pytest.raises(ValueError):
        divergence_coefficients("W", n, 0, 1)
    with pytest.raises(ValueError):
        divergence_coefficients("X", n)


@given(st.integers(3, 6))
def test_conformal_row_constraint(n):
    a, b = divergence_coefficients("C", n)
    assert a == 2 * b * (n - 1)


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3).filter(lambda x: abs(x) > 0.1), st.floats(-3, 3).filter(lambda x: abs(x) > 0.1))
def test_w_table_matches_combination(a, b):
    # the W row is the linear combination -(n-2) b C + (a + (n-2) b) Ctilde
    for n in (4, 5, 6):
        wa, wb = divergence_coefficients("W", n, Fraction(a), Fraction(b))
        ca, cb = divergence_coefficients("C", n)
        ta, tb = divergence_coefficients("Ctilde", n)
        k1, k2 = -(n - 2) * Fraction(b), Fraction(a) + (n - 2) * Fraction(b)
        assert wa == k1 * ca + k2 * ta
        assert wb == k1 * cb + k2 * tb


def test_w_divergence_proportional_to_c_when_equal():
    geos = CORPUS[(5, "strong")]
    b = 0.7
    for geo in geos:
        dw = divergence(curvature_family(geo, "W", -3 * b, b)).data[..., 0]
        dc = divergence(curvature_family(geo, "C")).data[..., 0]
        assert np.max(np.abs(dw + 3 * b * dc)) < 1e-12


def test_report_structure():
    rep = idn.check_lovelock(CORPUS[(4, "perturbed_0")])
    d = rep.to_dict()
    assert d["name"] == "lovelock" and d["points_evaluated"] == 3
    assert d["pass"] is True and len(d["points"]) == 3
    assert all(p["residual"] >= 0 for p in d["points"])
    merged = rep.merge(idn.check_lovelock(CORPUS[(4, "perturbed_1")]))
    assert merged.points == 6
    with pytest.raises(ValueError):
        rep.merge(idn.check_first_bianchi(CORPUS[(4, "flat")]))


def test_scaled_residual_definition():
    r = idn.scaled_residual(np.array([1.0, -3.0]), np.array([1.5, -3.0]))
    assert r.raw == 0.5 and r.scale == 4.0 and r.residual == 0.125 and r.index == (0,)
    z = idn.zero_residual(np.array([0.0, 2.0]), 1.0)
    assert z.residual == pytest.approx(2.0 / 3.0)
