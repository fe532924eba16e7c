import numpy as np
import pytest

from zsym import builders
from zsym import exprlang as el
from zsym.errors import MetricError
from zsym.geometry import curvature_family, geometry_at


def _points(spec, count=10, seed=0):
    return spec.sample_points(count, np.random.default_rng(seed))


def test_flat():
    for n in (3, 4):
        spec = builders.flat(n)
        assert np.array_equal(spec.metric_value(np.zeros(n)), np.eye(n))
        assert np.all(geometry_at(spec, np.zeros(n)).riemann == 0)


@pytest.mark.parametrize("n", [2, 7, 4.0])
def test_flat_dimension_bound(n):
    with pytest.raises(MetricError):
        builders.flat(n)


@pytest.mark.parametrize("n, k", [(3, 1.0), (4, 1.0), (4, -1.0), (5, 0.5), (6, -0.3)])
def test_space_form_scalar_curvature(n, k):
    spec = builders.space_form(n, k)
    for p in _points(spec):
        r = float(geometry_at(spec, p).scalar[0])
        assert r == pytest.approx(n * (n - 1) * k, rel=1e-8)


def test_space_form_zero_is_flat():
    spec = builders.space_form(4, 0.0)
    assert np.all(geometry_at(spec, (0.1, 0.2, 0.3, 0.4)).riemann == 0)


def test_space_form_conformally_flat():
    spec = builders.space_form(5, 1.0)
    for p in _points(spec, 3):
        assert np.max(np.abs(curvature_family(geometry_at(spec, p), "C").data[..., 0])) < 1e-8


def test_hyperbolic_chart_boundary():
    with pytest.raises(MetricError):
        builders.space_form(4, -1.0, radius=1.0)


def test_warped_flat_fiber_is_flat():
    fiber = builders.flat(3)
    spec = builders.warped_product(builders.WarpedSpec("0", fiber))
    geo = geometry_at(spec, (0.5, 0.1, 0.2, 0.3))
    assert np.max(np.abs(geo.riemann)) == 0


def test_warped_sphere_chart():
    spec = builders.warped_product(builders.radial_warp("sin(x1)", builders.round_sphere(3, start=2)))
    for p in _points(spec, 3):
        geo = geometry_at(spec, p)
        assert float(geo.scalar[0]) == pytest.approx(12.0, rel=1e-10)
        ric = geo.ricci[..., 0]
        assert np.max(np.abs(ric - 3 * geo.metric_value)) < 1e-10


def test_cone_chart_is_flat():
    spec = builders.warped_product(builders.radial_warp("x1", builders.round_sphere(3, start=2)))
    for p in _points(spec, 3):
        assert np.max(np.abs(geometry_at(spec, p).riemann[..., 0])) < 1e-12


def test_warped_block_structure():
    spec = builders.warped_product(builders.radial_warp("x1+x1^2", builders.round_sphere(4, start=2)))
    for a in range(1, 5):
        assert spec.components[0][a] == el.Num(0.0)
    assert spec.domain[0] == (0.3, 1.2)


def test_warp_must_be_radial():
    with pytest.raises(MetricError):
        builders.WarpedSpec("x2", builders.flat(3))


def test_warped_fiber_constants_are_bound():
    fiber = builders.MetricSpec.from_strings(["u", "v", "w"], [["c", "0", "0"], ["c", "0"], ["c"]],
                                             constants={"c": 2.0})
    spec = builders.warped_product(builders.WarpedSpec("x1", fiber))
    assert spec.metric_value((0.5, 0, 0, 0))[1, 1] == pytest.approx(2 * np.exp(0.5))


def test_perturbed_zero_amplitude_is_flat():
    spec = builders.perturbed_flat(4, 0.0, 1)
    assert np.array_equal(spec.metric_value((0.3, 0.2, 0.1, 0.0)), np.eye(4))


def test_perturbed_is_spd_and_deterministic():
    a = builders.perturbed_flat(4, 0.05, 42)
    b = builders.perturbed_flat(4, 0.05, 42)
    assert a.upper_triangle_text() == b.upper_triangle_text()
    assert a.upper_triangle_text() != builders.perturbed_flat(4, 0.05, 43).upper_triangle_text()
    for p in _points(a, 50):
        assert np.linalg.eigvalsh(a.metric_value(p))[0] > 0


def test_perturbed_large_amplitude_fails():
    with pytest.raises(MetricError):
        builders.perturbed_flat(4, 10.0, 42)
    spec = builders.perturbed_flat(4, 10.0, 42, auto_shrink=True)
    assert spec.n == 4


@pytest.mark.parametrize("option", builders.SYNTHETIC_OPTIONS)
def test_synthetic_instances_are_exact(option):
    s = builders.synthetic_wzs_instance(5, 0, option)
    rebuilt = (np.einsum("k,jl->kjl", s.A, s.z) + np.einsum("j,kl->kjl", s.B, s.z)
               + np.einsum("l,kj->kjl", s.D, s.z))
    assert np.array_equal(rebuilt, s.dz)
    assert np.allclose(s.dz, s.dz.transpose(0, 2, 1), atol=1e-13)
    assert np.allclose(s.z, s.z.T)


def test_synthetic_unknown_option():
    with pytest.raises(ValueError):
        builders.synthetic_wzs_instance(4, 0, "diagonal")


def test_standard_corpus():
    c = builders.standard_corpus(4)
    assert {"flat", "sphere", "hyperbolic", "sphere_polar"} <= set(c)
    assert sum(name.startswith("perturbed") for name in c) == 5
