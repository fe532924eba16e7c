"""Two-sided numerical verification of curvature identities.

Every check evaluates a left side and a right side independently and
reports the scaled residual ``max|L - R| / (1 + max(max|L|, max|R|))``.
A check accepts one :class:`GeometryAtPoint` or a sequence of them and
returns an :class:`IdentityReport` aggregated over the points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import (
    GeometryAtPoint, covariant_derivative, curvature_family, divergence,
    divergence_coefficients, z_scalar,
)
from .jets import jeinsum

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class PointResidual:
    point: tuple
    residual: float
    scale: float
    raw: float
    index: tuple


@dataclass
class IdentityReport:
    name: str
    tolerance: float
    results: list[PointResidual] = field(default_factory=list)

    @property
    def points(self) -> int:
        return len(self.results)

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.results), default=0.0)

    @property
    def mean_residual(self) -> float:
        return float(np.mean([r.residual for r in self.results])) if self.results else 0.0

    @property
    def scale(self) -> float:
        return max((r.scale for r in self.results), default=1.0)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tolerance

    @property
    def worst(self) -> PointResidual | None:
        if not self.results:
            return None
        return max(self.results, key=lambda r: r.residual)

    def merge(self, other: "IdentityReport") -> "IdentityReport":
        if other.name != self.name:
            raise ValueError("cannot merge reports of different identities")
        return IdentityReport(self.name, min(self.tolerance, other.tolerance),
                              self.results + other.results)

    def to_dict(self) -> dict:
        worst = self.worst
        return {
            "name": self.name,
            "points_evaluated": self.points,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "scale": self.scale,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "worst": None if worst is None else {
                "point": list(worst.point), "index": list(worst.index)},
            "points": [
                {"point": list(r.point), "residual": r.residual, "scale": r.scale,
                 "raw": r.raw, "index": list(r.index)}
                for r in self.results
            ],
        }


def scaled_residual(lhs, rhs, point=()) -> PointResidual:
    """Scaled residual between two arrays of equal shape."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    diff = np.abs(lhs - rhs)
    scale = 1.0 + max(float(np.max(np.abs(lhs), initial=0.0)), float(np.max(np.abs(rhs), initial=0.0)))
    if diff.size:
        flat = int(np.argmax(diff))
        raw = float(diff.flat[flat])
        index = tuple(int(i) for i in np.unravel_index(flat, diff.shape))
    else:
        raw, index = 0.0, ()
    return PointResidual(tuple(point), raw / scale, scale, raw, index)


def zero_residual(values, size: float, point=()) -> PointResidual:
    """Residual of a quantity that should vanish, relative to 1 + ``size``."""
    values = np.abs(np.asarray(values, dtype=float))
    flat = int(np.argmax(values)) if values.size else 0
    raw = float(values.flat[flat]) if values.size else 0.0
    scale = 1.0 + max(float(size), raw)
    index = tuple(int(i) for i in np.unravel_index(flat, values.shape)) if values.size else ()
    return PointResidual(tuple(point), raw / scale, scale, raw, index)


def _as_list(geos) -> list[GeometryAtPoint]:
    return [geos] if isinstance(geos, GeometryAtPoint) else list(geos)


def _collect(name: str, geos, one: Callable[[GeometryAtPoint], PointResidual], tol: float) -> IdentityReport:
    return IdentityReport(name, tol, [one(geo) for geo in _as_list(geos)])


def _run(name: str, geos, sides: Callable[[GeometryAtPoint], tuple], tol: float) -> IdentityReport:
    def one(geo):
        lhs, rhs = sides(geo)
        return scaled_residual(lhs, rhs, geo.point)
    return _collect(name, geos, one, tol)


# --------------------------------------------------------------------------
# Shared building blocks (order-0 values unless noted)
# --------------------------------------------------------------------------

def _val(a: np.ndarray) -> np.ndarray:
    return a[..., 0]


def div_riemann(geo: GeometryAtPoint) -> np.ndarray:
    """nabla_m R_{jkl}^m as jets of order 1."""
    return divergence(geo.tensor("riemann")).data


def grad_ricci(geo: GeometryAtPoint) -> np.ndarray:
    """nabla_k R_jl as jets of order 1, axes [k, j, l]."""
    return covariant_derivative(geo.tensor("ricci")).data


def g_wedge_grad(geo: GeometryAtPoint, grad_f: np.ndarray) -> np.ndarray:
    """(g_kl nabla_j - g_jl nabla_k) f as values, axes [j, k, l]."""
    g = geo.metric_value
    a = np.einsum("kl,j->jkl", g, grad_f)
    return a - a.transpose(1, 0, 2)


def grad_scalar(geo: GeometryAtPoint, data: np.ndarray) -> np.ndarray:
    return _val(covariant_derivative(geo.jet(data, "")).data)


def curvature_cyclic(geo: GeometryAtPoint) -> np.ndarray:
    """R_im R_{jkl}^m + R_jm R_{kil}^m + R_km R_{ijl}^m, axes [i, j, k, l]."""
    ric = _val(geo.ricci)
    riem = _val(geo.riemann)
    t = np.einsum("im,jklm->ijkl", ric, riem)
    # cyclic (i, j, k): T[j,k,i,l] and T[k,i,j,l] re-indexed to [i,j,k,l]
    return t + t.transpose(2, 0, 1, 3) + t.transpose(1, 2, 0, 3)


# --------------------------------------------------------------------------
# Checks
# --------------------------------------------------------------------------

def check_metric_compatibility(geos, tol: float = 1e-12) -> IdentityReport:
    """nabla g = 0 and nabla g^-1 = 0, scaled by the partials the connection cancels."""
    def one(geo):
        dg = covariant_derivative(geo.tensor("g")).data
        dginv = covariant_derivative(geo.tensor("ginv")).data
        size = max(np.max(np.abs(geo.g[..., 1:])), np.max(np.abs(geo.ginv[..., 1:])))
        return zero_residual(np.concatenate([dg.ravel(), dginv.ravel()]), size, geo.point)
    return _collect("metric_compatibility", geos, one, tol)


def check_inverse_metric(geos, tol: float = 1e-12) -> IdentityReport:
    def sides(geo):
        prod = jeinsum("ij,jk->ik", geo.g, geo.ginv, geo.n)
        ident = np.zeros_like(prod)
        ident[..., 0] = np.eye(geo.n)
        return prod, ident
    return _run("inverse_metric", geos, sides, tol)


def check_riemann_symmetries(geos, tol: float = DEFAULT_TOL) -> IdentityReport:
    """R_jklm = -R_kjlm, R_jklm = -R_jkml, R_jklm = R_lmjk."""
    def sides(geo):
        r = _val(geo.riemann_lowered())
        lhs = np.stack([r, r, r])
        rhs = np.stack([-r.transpose(1, 0, 2, 3), -r.transpose(0, 1, 3, 2), r.transpose(2, 3, 0, 1)])
        return lhs, rhs
    return _run("riemann_symmetries", geos, sides, tol)


def check_first_bianchi(geos, tol: float = DEFAULT_TOL) -> IdentityReport:
    def sides(geo):
        r = _val(geo.riemann)
        # R_{klj}^m and R_{ljk}^m re-indexed to [j,k,l,m]
        return r + r.transpose(2, 0, 1, 3), -r.transpose(1, 2, 0, 3)
    return _run("bianchi_first", geos, sides, tol)


def check_second_bianchi(geos, tol: float = DEFAULT_TOL) -> IdentityReport:
    """nabla_i R_{jkl}^m + nabla_j R_{kil}^m + nabla_k R_{ijl}^m = 0."""
    def sides(geo):
        d = _val(covariant_derivative(geo.tensor("riemann")).data)  # [i,j,k,l,m]
        return d + d.transpose(2, 0, 1, 3, 4), -d.transpose(1, 2, 0, 3, 4)
    return _run("bianchi_second", geos, sides, tol)


def check_contracted_bianchi(geos, tol: float = DEFAULT_TOL) -> IdentityReport:
    """nabla_m R_{jkl}^m = nabla_k R_jl - nabla_j R_kl."""
    def sides(geo):
        dr = _val(grad_ricci(geo))
        return _val(div_riemann(geo)), dr.transpose(1, 0, 2) - dr
    return _run("contracted_bianchi", geos, sides, tol)


def check_contracted_bianchi_z(geos, tol: float = DEFAULT_TOL) -> IdentityReport:
    """div Riem = nabla_k Z_jl - nabla_j Z_kl + (g_kl nabla_j - g_jl nabla_k) phi."""
    def sides(geo):
        dz = _val(covariant_derivative(geo.tensor("z")).data)
        rhs = dz.transpose(1, 0, 2) - dz + g_wedge_grad(geo, grad_scalar(geo, geo.phi))
        return _val(div_riemann(geo)), rhs
    return _run("contracted_bianchi_z", geos, sides, tol)


def lovelock_sides(geo: GeometryAtPoint) -> tuple[np.ndarray, np.ndarray]:
    dd = _val(covariant_derivative(geo.jet(div_riemann(geo), "ddd")).data)  # [i,j,k,l]
    lhs = dd + dd.transpose(2, 0, 1, 3) + dd.transpose(1, 2, 0, 3)
    return lhs, -curvature_cyclic(geo)


def check_lovelock(geos, tol: float = DEFAULT_TOL) -> IdentityReport:
    """Cyclic sum of nabla_i nabla_m R_{jkl}^m against minus the curvature cyclic sum."""
    return _run("lovelock", geos, lovelock_sides, tol)


def ricci_commutator_cyclic(geo: GeometryAtPoint) -> np.ndarray:
    """(nabla_i nabla_k - nabla_k nabla_i) R_jl + cyclic(i, j, k), axes [i,j,k,l]."""
    ddr = _val(covariant_derivative(covariant_derivative(geo.tensor("ricci"))).data)  # [a,b,j,l]
    comm = ddr - ddr.transpose(1, 0, 2, 3)  # [a,b,j,l] = [nabla_a, nabla_b] R_jl
    # term1: [i,k] R_jl -> comm[i,k,j,l]; axes reorder to [i,j,k,l]
    t = comm.transpose(0, 2, 1, 3)
    return t + t.transpose(2, 0, 1, 3) + t.transpose(1, 2, 0, 3)


def check_ricci_commutator_cyclic(geos, tol: float = DEFAULT_TOL) -> IdentityReport:
    def sides(geo):
        return ricci_commutator_cyclic(geo), -curvature_cyclic(geo)
    return _run("ricci_commutator", geos, sides, tol)


def riemann_commutator(geo: GeometryAtPoint) -> np.ndarray:
    """[nabla_s, nabla_i] R_jklm from the curvature action, axes [s, i, j, k, l, m]."""
    r = _val(geo.riemann)  # [s, i, a, p] = R_{sia}^p
    rl = _val(geo.riemann_lowered())
    return (np.einsum("sijp,pklm->sijklm", r, rl) + np.einsum("sikp,jplm->sijklm", r, rl)
            + np.einsum("silp,jkpm->sijklm", r, rl) + np.einsum("simp,jklp->sijklm", r, rl))


def check_ricci_identity(geos, tol: float = DEFAULT_TOL) -> IdentityReport:
    """Antisymmetrized second covariant derivative of Riemann against the curvature action."""
    def sides(geo):
        rl = geo.jet(geo.riemann_lowered(), "dddd")
        dd = _val(covariant_derivative(covariant_derivative(rl)).data)
        return dd - dd.transpose(1, 0, 2, 3, 4, 5), riemann_commutator(geo)
    return _run("ricci_identity", geos, sides, tol)


def divergence_closed_form(geo: GeometryAtPoint, kind: str, a=None, b=None) -> np.ndarray:
    big_a, big_b = divergence_coefficients(kind, geo.n, a, b)
    dr = grad_scalar(geo, geo.scalar)
    return float(big_a) * _val(div_riemann(geo)) + float(big_b) * g_wedge_grad(geo, dr)


def check_divergence_formula(geos, kind: str, a=None, b=None, tol: float = DEFAULT_TOL) -> IdentityReport:
    """Direct divergence of a curvature-family tensor against its closed form."""
    if kind == "W" and (not a or not b):
        raise ValueError("W needs nonzero constants a and b")

    def sides(geo):
        direct = _val(divergence(curvature_family(geo, kind, a, b)).data)
        return direct, divergence_closed_form(geo, kind, a, b)
    return _run(f"divergence_{kind}", geos, sides, tol)


def conformal_contractions(geo: GeometryAtPoint) -> np.ndarray:
    c = curvature_family(geo, "C")
    cl = _val(jeinsum("jklp,pm->jklm", c.data, geo.g, geo.n))
    ginv = geo.inverse_value
    pairs = ["ajkb", "jakb", "jkab", "ajbk", "jabk", "abjk"]  # contracted slots are a, b
    return np.stack([np.einsum(f"{p},ab->jk", cl, ginv) for p in pairs])


def check_conformal_trace_free(geos, tol: float = 1e-9) -> IdentityReport:
    """Every single contraction of C vanishes, relative to the size of C."""
    def one(geo):
        size = float(np.max(np.abs(_val(curvature_family(geo, "C").data))))
        return zero_residual(conformal_contractions(geo), size, geo.point)
    return _collect("conformal_trace_free", geos, one, tol)


def check_z_trace(geos, tol: float = 1e-12) -> IdentityReport:
    """g^{kl} Z_kl = R + n phi, order by order."""
    def sides(geo):
        return z_scalar(geo), geo.scalar + geo.n * geo.phi
    return _run("z_trace", geos, sides, tol)


def check_qch_scalar_condition(geos, a: float, b: float, tol: float = DEFAULT_TOL) -> IdentityReport:
    """Trace g^{kl} nabla_m W_{jkl}^m against -(1/2)(1 - 2/n)[a + b(n-2)] nabla_j R."""
    if not a or not b:
        raise ValueError("a and b must be nonzero")

    def sides(geo):
        n = geo.n
        dw = _val(divergence(curvature_family(geo, "W", a, b)).data)
        lhs = np.einsum("jkl,kl->j", dw, geo.inverse_value)
        rhs = -0.5 * (1 - 2 / n) * (a + b * (n - 2)) * grad_scalar(geo, geo.scalar)
        return lhs, rhs
    return _run("qch_scalar", geos, sides, tol)


ASSERTIVE_CHECKS = {
    "inverse_metric": check_inverse_metric,
    "metric_compatibility": check_metric_compatibility,
    "riemann_symmetries": check_riemann_symmetries,
    "bianchi_first": check_first_bianchi,
    "bianchi_second": check_second_bianchi,
    "contracted_bianchi": check_contracted_bianchi,
    "contracted_bianchi_z": check_contracted_bianchi_z,
    "z_trace": check_z_trace,
    "lovelock": check_lovelock,
    "ricci_commutator": check_ricci_commutator_cyclic,
    "ricci_identity": check_ricci_identity,
    "conformal_trace_free": check_conformal_trace_free,
    "divergence_C": lambda geos, tol=DEFAULT_TOL: check_divergence_formula(geos, "C", tol=tol),
    "divergence_P": lambda geos, tol=DEFAULT_TOL: check_divergence_formula(geos, "P", tol=tol),
    "divergence_Ctilde": lambda geos, tol=DEFAULT_TOL: check_divergence_formula(geos, "Ctilde", tol=tol),
    "divergence_N": lambda geos, tol=DEFAULT_TOL: check_divergence_formula(geos, "N", tol=tol),
}
