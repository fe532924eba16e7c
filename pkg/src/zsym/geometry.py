"""Curvature of a Riemannian metric at a point, carried as Taylor jets.

Index conventions
-----------------
``christoffel[i, j, k]`` is the Christoffel symbol with upper index ``i``.
``riemann[j, k, l, m]`` is the (1,3) tensor with one upper index ``m`` in the
last slot, antisymmetric in ``j, k``, fixed by the commutator

    (nabla_j nabla_k - nabla_k nabla_j) v_l = R_{jkl}^m v_m,

so that the Ricci tensor is ``R_kl = -R_{mkl}^m`` and the unit sphere has
positive scalar curvature n(n-1).  Jet arrays keep the Taylor-jet axis last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import exprlang as el
from .errors import JetOrderError, MetricError
from .jets import jeinsum, jet_eval_array, jet_space, jgrad, jmul, jtruncate

MIN_DIM = 2
MAX_DIM = 6
METRIC_ORDER = 4
SCALAR_CURVATURE_NAME = "R"

__all__ = [
    "MetricSpec", "TensorValue", "TensorJet", "GeometryAtPoint", "geometry_at",
    "covariant_derivative", "divergence", "z_tensor", "z_scalar",
    "curvature_family", "projective_ricci", "covector_field", "scalar_field",
    "CURVATURE_KINDS", "MAX_DIM",
]

_RESERVED = set(el.FUNCTIONS) | set(el.CONSTANTS) | {SCALAR_CURVATURE_NAME}


def _as_expr(x) -> el.Expr:
    if isinstance(x, str):
        return el.parse(x)
    if isinstance(x, (int, float)):
        return el.Num(float(x))
    return x


@dataclass(frozen=True)
class MetricSpec:
    """Closed-form metric components on a coordinate box.

    ``components`` is a full symmetric n x n tuple of expressions; build it
    with :meth:`from_strings` which accepts either the upper triangle (row k
    listing entries k..n-1) or a full symmetric matrix.  ``phi`` may use the
    name ``R`` for the scalar curvature (``"-R/4"`` gives the classical
    traceless Z tensor in dimension 4).
    """

    coords: tuple[str, ...]
    components: tuple[tuple[el.Expr, ...], ...]
    domain: tuple[tuple[float, float], ...]
    phi: el.Expr | None = None
    constants: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.coords)
        if not MIN_DIM <= n <= MAX_DIM:
            raise MetricError(f"dimension must lie in {MIN_DIM}..{MAX_DIM}, got {n}")
        if len(set(self.coords)) != n:
            raise MetricError("coordinate names must be distinct")
        for c in self.coords:
            if c in _RESERVED or c in self.constants:
                raise MetricError(f"coordinate name {c!r} is reserved")
        if len(self.components) != n or any(len(row) != n for row in self.components):
            raise MetricError("metric must be an n x n array of expressions")
        for k in range(n):
            for l in range(k + 1, n):
                if self.components[k][l] != self.components[l][k]:
                    raise MetricError(f"metric not symmetric at ({k}, {l})")
        if len(self.domain) != n:
            raise MetricError("domain needs one interval per coordinate")
        for (lo, hi), c in zip(self.domain, self.coords):
            if not lo <= hi:
                raise MetricError(f"empty domain interval for {c}")
        allowed = list(self.coords) + list(self.constants)
        for row in self.components:
            for e in row:
                el.validate(e, allowed)
        if self.phi is not None:
            el.validate(self.phi, allowed + [SCALAR_CURVATURE_NAME])
        bind = {k: float(v) for k, v in self.constants.items()}
        object.__setattr__(self, "_bound", tuple(
            tuple(el.substitute(e, bind) for e in row) for row in self.components))
        object.__setattr__(self, "_bound_phi",
                           None if self.phi is None else el.substitute(self.phi, bind))

    @property
    def n(self) -> int:
        return len(self.coords)

    @classmethod
    def from_strings(cls, coords: Sequence[str], metric, domain=None, phi=None,
                     constants: Mapping[str, float] | None = None) -> "MetricSpec":
        n = len(coords)
        rows = [[_as_expr(x) for x in row] for row in metric]
        if len(rows) != n:
            raise MetricError(f"metric has {len(rows)} rows for {n} coordinates")
        if all(len(row) == n - k for k, row in enumerate(rows)) and n > 1 and len(rows[-1]) == 1:
            full = [[None] * n for _ in range(n)]
            for k, row in enumerate(rows):
                for off, e in enumerate(row):
                    full[k][k + off] = full[k + off][k] = e
        elif all(len(row) == n for row in rows):
            full = rows
        else:
            raise MetricError("metric must be the upper triangle or a full n x n matrix")
        if domain is None:
            domain = [(-1.0, 1.0)] * n
        elif isinstance(domain, Mapping):
            try:
                domain = [tuple(domain[c]) for c in coords]
            except KeyError as exc:
                raise MetricError(f"domain missing coordinate {exc.args[0]!r}") from None
        domain = tuple((float(lo), float(hi)) for lo, hi in domain)
        return cls(tuple(coords), tuple(tuple(r) for r in full), domain,
                   None if phi is None else _as_expr(phi), dict(constants or {}))

    def with_phi(self, phi) -> "MetricSpec":
        return MetricSpec(self.coords, self.components, self.domain,
                          None if phi is None else _as_expr(phi), self.constants)

    def metric_value(self, point: Sequence[float]) -> np.ndarray:
        env = dict(zip(self.coords, map(float, point)))
        return np.array([[el.evaluate(e, env, point) for e in row] for row in self._bound])

    def upper_triangle_text(self) -> list[list[str]]:
        n = self.n
        return [[el.to_text(self.components[k][l]) for l in range(k, n)] for k in range(n)]

    def sample_points(self, count: int, rng: np.random.Generator) -> np.ndarray:
        lo = np.array([d[0] for d in self.domain])
        hi = np.array([d[1] for d in self.domain])
        return lo + (hi - lo) * rng.random((count, self.n))

    def check_spd(self, points) -> None:
        for p in points:
            g = self.metric_value(p)
            try:
                np.linalg.cholesky(g)
            except np.linalg.LinAlgError:
                raise MetricError(f"metric not positive definite at {tuple(map(float, p))}") from None


@dataclass(frozen=True)
class TensorValue:
    """Components of a tensor at a point; ``variance`` has one 'u'/'d' per slot."""

    variance: str
    components: np.ndarray
    point: tuple

    @property
    def n(self) -> int:
        return self.components.shape[0] if self.components.ndim else 0


@dataclass(frozen=True)
class TensorJet:
    """Tensor whose components are jets; carries the connection needed for nabla."""

    variance: str
    data: np.ndarray
    n: int
    point: tuple
    christoffel: np.ndarray | None = None

    def __post_init__(self):
        if self.data.ndim != len(self.variance) + 1:
            raise ValueError("data rank does not match variance signature")

    @property
    def order(self) -> int:
        return _order_of(self.data, self.n)

    def value(self) -> TensorValue:
        return TensorValue(self.variance, self.data[..., 0].copy(), self.point)

    def truncate(self, order: int) -> "TensorJet":
        return TensorJet(self.variance, jtruncate(self.data, self.n, order), self.n,
                         self.point, self.christoffel)


def _order_of(a: np.ndarray, n: int) -> int:
    for k in range(METRIC_ORDER + 1):
        if math.comb(n + k, k) == a.shape[-1]:
            return k
    raise ValueError("not a jet array")


@dataclass(frozen=True)
class GeometryAtPoint:
    """Metric, connection and curvature jets at one point.

    Jet orders: metric and inverse 4, Christoffel 3, Riemann/Ricci/scalar/phi/Z 2.
    """

    spec: MetricSpec
    point: tuple
    g: np.ndarray
    ginv: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: np.ndarray
    phi: np.ndarray
    z: np.ndarray

    @property
    def n(self) -> int:
        return self.spec.n

    def tensor(self, name: str) -> TensorJet:
        variance = {"g": "dd", "ginv": "uu", "riemann": "dddu", "ricci": "dd",
                    "scalar": "", "phi": "", "z": "dd"}[name]
        return TensorJet(variance, getattr(self, name), self.n, self.point, self.christoffel)

    def jet(self, data: np.ndarray, variance: str) -> TensorJet:
        return TensorJet(variance, data, self.n, self.point, self.christoffel)

    @property
    def metric_value(self) -> np.ndarray:
        return self.g[..., 0]

    @property
    def inverse_value(self) -> np.ndarray:
        return self.ginv[..., 0]

    def riemann_lowered(self) -> np.ndarray:
        """R_{jklm} = R_{jkl}^p g_{pm} as jets of order 2."""
        return jeinsum("jklp,pm->jklm", self.riemann, self.g, self.n)

    def mixed_ricci(self) -> np.ndarray:
        """R_j^m = g^{mp} R_{jp}."""
        return jeinsum("jp,mp->jm", self.ricci, self.ginv, self.n)


def _inverse_metric(g: np.ndarray, n: int) -> np.ndarray:
    space = jet_space(n, _order_of(g, n))
    g0 = g[..., 0]
    try:
        np.linalg.cholesky(g0)
    except np.linalg.LinAlgError:
        raise MetricError("metric not positive definite") from None
    inv0 = np.linalg.inv(g0)
    # g = g0 + h with h(p) = 0: g^-1 = sum_k (-g0^-1 h)^k g0^-1, finite under truncation
    h = g.copy()
    h[..., 0] = 0.0
    step = -np.einsum("ij,jkZ->ikZ", inv0, h)
    term = space.constant(inv0)
    total = term.copy()
    for _ in range(space.order):
        term = space.einsum("ij,jk->ik", step, term)
        total += term
    return total


def _christoffel(g: np.ndarray, ginv: np.ndarray, n: int) -> np.ndarray:
    dg = jgrad(g, n)  # dg[c, a, b] = d_c g_ab
    first = 0.5 * (np.einsum("jlkZ->ljkZ", dg) + np.einsum("kljZ->ljkZ", dg) - dg)
    return jeinsum("il,ljk->ijk", ginv, first, n)


def _riemann(gamma: np.ndarray, n: int) -> np.ndarray:
    dgam = jgrad(gamma, n)  # dgam[c, i, j, k] = d_c Gamma^i_jk
    out = np.einsum("kmjlZ->jklmZ", dgam) - np.einsum("jmklZ->jklmZ", dgam)
    gam = jtruncate(gamma, n, _order_of(dgam, n))
    out = out + jeinsum("mkp,pjl->jklm", gam, gam, n)
    out = out - jeinsum("mjp,pkl->jklm", gam, gam, n)
    return out


def _metric_jets(spec: MetricSpec, point, order: int) -> np.ndarray:
    n = spec.n
    space = jet_space(n, order)
    g = np.zeros((n, n, space.size))
    cache = {}
    for k in range(n):
        for l in range(k, n):
            e = spec._bound[k][l]
            if e not in cache:
                if isinstance(e, el.Num):
                    cache[e] = space.constant(e.value)
                else:
                    cache[e] = jet_eval_array(e, point, order, spec.coords)
            g[k, l] = g[l, k] = cache[e]
    return g


def geometry_at(spec: MetricSpec, point: Sequence[float], check_domain: bool = True) -> GeometryAtPoint:
    """Compute all curvature jets of ``spec`` at ``point``."""
    point = tuple(float(x) for x in point)
    n = spec.n
    if len(point) != n:
        raise MetricError(f"point has {len(point)} coordinates, metric has {n}")
    if check_domain:
        for x, (lo, hi), c in zip(point, spec.domain, spec.coords):
            slack = 1e-12 * (1.0 + abs(lo) + abs(hi))
            if not lo - slack <= x <= hi + slack:
                raise MetricError(f"{c}={x} outside sampling domain [{lo}, {hi}]")
    g = _metric_jets(spec, point, METRIC_ORDER)
    try:
        ginv = _inverse_metric(g, n)
    except MetricError:
        raise MetricError(f"metric not positive definite at {point}") from None
    gamma = _christoffel(g, ginv, n)
    riemann = _riemann(gamma, n)
    ricci = -np.einsum("mklmZ->klZ", riemann)
    scalar = jeinsum("kl,kl->", ginv, ricci, n)
    if spec._bound_phi is None:
        phi = jet_space(n, 2).constant(0.0)
    else:
        phi = jet_eval_array(spec._bound_phi, point, 2, spec.coords,
                             extra={SCALAR_CURVATURE_NAME: scalar})
    z = ricci + jmul(phi[None, None, :], g, n)
    return GeometryAtPoint(spec, point, g, ginv, gamma, riemann, ricci, scalar, phi, z)


# --------------------------------------------------------------------------
# Covariant derivatives
# --------------------------------------------------------------------------

_LETTERS = "abcdefgh"


def covariant_derivative(t: TensorJet) -> TensorJet:
    """nabla T with the derivative slot prepended; the jet order drops by one."""
    if t.christoffel is None:
        raise ValueError("tensor jet carries no connection")
    order = t.order
    if order < 1:
        raise JetOrderError("jet order exhausted: cannot take another covariant derivative")
    n = t.n
    rank = len(t.variance)
    out = jgrad(t.data, n)
    gam = jtruncate(t.christoffel, n, order - 1)
    data = jtruncate(t.data, n, order - 1)
    slots = _LETTERS[:rank]
    for s, kind in enumerate(t.variance):
        inner = slots[:s] + "m" + slots[s + 1:]
        if kind == "d":
            out = out - jeinsum(f"mi{slots[s]},{inner}->i{slots}", gam, data, n)
        else:
            out = out + jeinsum(f"{slots[s]}im,{inner}->i{slots}", gam, data, n)
    return TensorJet("d" + t.variance, out, n, t.point, t.christoffel)


def divergence(t: TensorJet) -> TensorJet:
    """Contract a new derivative slot with the last (contravariant) slot."""
    if not t.variance or t.variance[-1] != "u":
        raise ValueError("divergence needs a contravariant last slot")
    d = covariant_derivative(t)
    rank = len(t.variance)
    data = np.trace(d.data, axis1=0, axis2=rank)
    # np.trace moves the traced axes away and appends the remaining jet axis last
    return TensorJet(t.variance[:-1], data, t.n, t.point, t.christoffel)


def scalar_field(geo: GeometryAtPoint, expr, order: int = 2) -> TensorJet:
    """Jet of a scalar expression (may reference ``R``) as a rank-0 tensor jet."""
    spec = geo.spec
    expr = el.substitute(_as_expr(expr), {k: float(v) for k, v in spec.constants.items()})
    el.validate(expr, list(spec.coords) + [SCALAR_CURVATURE_NAME])
    order = min(order, 2) if SCALAR_CURVATURE_NAME in el.variables(expr) else order
    data = jet_eval_array(expr, geo.point, order, spec.coords,
                          extra={SCALAR_CURVATURE_NAME: geo.scalar})
    return geo.jet(data, "")


def covector_field(geo: GeometryAtPoint, exprs: Sequence, order: int = 2) -> TensorJet:
    """Jets of a covector given by one expression per coordinate."""
    if len(exprs) != geo.n:
        raise ValueError(f"need {geo.n} components, got {len(exprs)}")
    data = np.stack([scalar_field(geo, e, order).data for e in exprs])
    return geo.jet(data, "d")


# --------------------------------------------------------------------------
# Z tensor and the curvature family
# --------------------------------------------------------------------------

def z_tensor(geo: GeometryAtPoint) -> TensorJet:
    """Z_kl = R_kl + phi g_kl (jets of order 2)."""
    return geo.tensor("z")


def z_scalar(geo: GeometryAtPoint) -> np.ndarray:
    """Jet of g^{kl} Z_kl."""
    return jeinsum("kl,kl->", geo.ginv, geo.z, geo.n)


CURVATURE_KINDS = ("C", "P", "Ctilde", "N", "W")


def _delta_wedge(x: np.ndarray, n: int) -> np.ndarray:
    # delta_j^m X_kl - delta_k^m X_jl
    delta = np.eye(n)
    a = np.einsum("jm,klZ->jklmZ", delta, x)
    return a - a.transpose(1, 0, 2, 3, 4)


def _mixed_wedge(xmix: np.ndarray, g: np.ndarray, n: int) -> np.ndarray:
    # X_j^m g_kl - X_k^m g_jl
    a = jeinsum("jm,kl->jklm", xmix, g, n)
    return a - a.transpose(1, 0, 2, 3, 4)


def curvature_family(geo: GeometryAtPoint, kind: str, a: float | None = None,
                     b: float | None = None) -> TensorJet:
    """Conformal ``C``, projective ``P``, concircular ``Ctilde``, conharmonic
    ``N`` or quasi-conformal ``W`` (needs nonzero ``a`` and ``b``) as (1,3) jets.
    """
    n = geo.n
    if kind not in CURVATURE_KINDS:
        raise ValueError(f"unknown curvature kind {kind!r}; expected one of {CURVATURE_KINDS}")
    if kind in ("C", "N", "W") and n < 3:
        raise ValueError(f"{kind} needs dimension at least 3")
    riem = geo.riemann
    g = jtruncate(geo.g, n, 2)
    if kind == "P":
        data = riem + _delta_wedge(geo.ricci, n) / (n - 1)
    elif kind == "Ctilde":
        data = riem + jmul(geo.scalar, _delta_wedge(g, n), n) / (n * (n - 1))
    elif kind == "N":
        data = riem + (_delta_wedge(geo.ricci, n) + _mixed_wedge(geo.mixed_ricci(), g, n)) / (n - 2)
    elif kind == "C":
        data = (riem
                + (_delta_wedge(geo.ricci, n) + _mixed_wedge(geo.mixed_ricci(), g, n)) / (n - 2)
                - jmul(geo.scalar, _delta_wedge(g, n), n) / ((n - 1) * (n - 2)))
    else:
        if not a or not b:
            raise ValueError("quasi-conformal tensor needs nonzero constants a and b")
        c = curvature_family(geo, "C").data
        ct = curvature_family(geo, "Ctilde").data
        data = -(n - 2) * b * c + (a + (n - 2) * b) * ct
    return geo.jet(data, "dddu")


def divergence_coefficients(kind: str, n: int, a=None, b=None) -> tuple[Fraction, Fraction]:
    """(A, B) with div K = A div Riem + B (g_kl nabla_j - g_jl nabla_k) R."""
    n = Fraction(n)
    if kind == "C":
        return (n - 3) / (n - 2), (n - 3) / (2 * (n - 1) * (n - 2))
    if kind == "P":
        return (n - 2) / (n - 1), Fraction(0)
    if kind == "Ctilde":
        return Fraction(1), 1 / (n * (n - 1))
    if kind == "N":
        return (n - 3) / (n - 2), 1 / (2 * (n - 2))
    if kind == "W":
        if not a or not b:
            raise ValueError("quasi-conformal tensor needs nonzero constants a and b")
        a, b = Fraction(a), Fraction(b)
        return a + b, (2 * a - b * (n - 1) * (n - 4)) / (2 * n * (n - 1))
    if kind == "R":
        return Fraction(1), Fraction(0)
    raise ValueError(f"unknown curvature kind {kind!r}")


def projective_ricci(geo: GeometryAtPoint) -> TensorValue:
    """P_kl = n/(n-1) (R_kl - R/n g_kl)."""
    n = geo.n
    ric = geo.ricci[..., 0]
    r = geo.scalar[0]
    return TensorValue("dd", n / (n - 1) * (ric - r / n * geo.metric_value), geo.point)
