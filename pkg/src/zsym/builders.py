"""Metric constructors and synthetic pointwise tensor instances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exprlang as el
from .errors import MetricError
from .geometry import MetricSpec

BUILD_MIN_DIM = 3
BUILD_MAX_DIM = 6
SPD_SAMPLES = 64
MIN_EIGENVALUE = 1e-6


def _check_dim(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or not BUILD_MIN_DIM <= n <= BUILD_MAX_DIM:
        raise MetricError(f"dimension must lie in {BUILD_MIN_DIM}..{BUILD_MAX_DIM}, got {n!r}")


def _coords(n: int, start: int = 1) -> list[str]:
    return [f"x{i}" for i in range(start, start + n)]


def _fmt(x: float) -> str:
    s = repr(float(x))
    return f"({s})" if s.startswith("-") else s


def _diagonal(n: int, entry: str) -> list[list[str]]:
    return [[entry if l == k else "0" for l in range(k, n)] for k in range(n)]


def flat(n: int) -> MetricSpec:
    """Euclidean metric on the box [-1, 1]^n."""
    _check_dim(n)
    return MetricSpec.from_strings(_coords(n), _diagonal(n, "1"))


def conformal_factor_text(coords, k: float) -> str:
    """(1 + k |x|^2 / 4)^(-2) for the stereographic chart of a space form."""
    r2 = "+".join(f"{c}^2" for c in coords)
    return f"(1+{_fmt(k)}*({r2})/4)^(-2)"


def space_form(n: int, k: float, radius: float = 0.5) -> MetricSpec:
    """Constant sectional curvature k in the stereographic chart.

    The domain is the cube of half-width ``radius``; for k < 0 the conformal
    factor blows up on |x| = 2/sqrt(-k), so the cube must stay inside that ball.
    """
    _check_dim(n)
    if k < 0 and radius * np.sqrt(n) >= 2 / np.sqrt(-k):
        raise MetricError("sampling box meets the boundary of the hyperbolic chart")
    coords = _coords(n)
    entry = "1" if k == 0 else conformal_factor_text(coords, k)
    return MetricSpec.from_strings(coords, _diagonal(n, entry), domain=[(-radius, radius)] * n)


def round_sphere(n: int, start: int = 1, radius: float = 0.5) -> MetricSpec:
    """Unit round sphere in stereographic coordinates x<start>..; allows n = 2."""
    coords = _coords(n, start)
    return MetricSpec.from_strings(coords, _diagonal(n, conformal_factor_text(coords, 1.0)),
                                   domain=[(-radius, radius)] * n)


@dataclass(frozen=True)
class WarpedSpec:
    """Warping exponent q(x1) and an (n-1)-dimensional fiber metric."""

    q: el.Expr
    fiber: MetricSpec
    base_domain: tuple[float, float] = (0.3, 1.2)

    def __post_init__(self):
        q = el.parse(self.q) if isinstance(self.q, str) else self.q
        object.__setattr__(self, "q", q)
        extra = el.variables(q) - {"x1"}
        if extra:
            raise MetricError(f"warping function may only depend on x1, found {sorted(extra)}")


def radial_warp(f, fiber: MetricSpec, base_domain=(0.3, 1.2)) -> WarpedSpec:
    """dr^2 + f(r)^2 g_fiber, i.e. q = 2 log f."""
    text = f if isinstance(f, str) else el.to_text(f)
    return WarpedSpec(el.parse(f"2*log({text})"), fiber, tuple(base_domain))


def warped_product(w: WarpedSpec) -> MetricSpec:
    """(dx1)^2 + exp(q(x1)) g*_ab dx^a dx^b with fiber coordinates renamed x2..xn."""
    fiber = w.fiber
    m = fiber.n
    n = m + 1
    if not BUILD_MIN_DIM <= n <= BUILD_MAX_DIM:
        raise MetricError(f"dimension must lie in {BUILD_MIN_DIM}..{BUILD_MAX_DIM}, got {n}")
    rename = {c: el.Var(f"x{i + 2}") for i, c in enumerate(fiber.coords)}
    bind = {k: float(v) for k, v in fiber.constants.items()}
    warp = el.Call("exp", w.q)
    comps = [[el.Num(0.0)] * n for _ in range(n)]
    comps[0][0] = el.Num(1.0)
    for a in range(m):
        for b in range(m):
            e = el.substitute(el.substitute(fiber.components[a][b], bind), rename)
            comps[a + 1][b + 1] = el.BinOp("*", warp, e)
    domain = (tuple(w.base_domain),) + fiber.domain
    return MetricSpec(tuple(_coords(n)), tuple(tuple(r) for r in comps), domain)


def _random_entry(rng: np.random.Generator, coords, diag: bool) -> str:
    n = len(coords)
    i, j, k = rng.integers(0, n, size=3)
    c1, c2, c3 = rng.uniform(-1, 1, size=3)
    w = rng.uniform(0.5, 2.0)
    terms = [
        f"{_fmt(c1)}*sin({w:.6g}*{coords[i]}+{_fmt(c2)})",
        f"{_fmt(c3)}*{coords[j]}*{coords[k]}",
        f"{_fmt(c2)}*cos({coords[i]}-{coords[k]})*{coords[j]}",
    ]
    if diag:
        terms.append(f"{_fmt(c1 * c3)}*{coords[k]}^2")
    return "+".join(terms)


def perturbed_flat(n: int, eps: float, seed: int, auto_shrink: bool = False,
                   samples: int = SPD_SAMPLES) -> MetricSpec:
    """delta_ij + eps * h_ij with h drawn from entire trig/polynomial terms.

    The result is checked for positive definiteness at ``samples`` points of
    the box [-1, 1]^n.  On failure a MetricError is raised, or with
    ``auto_shrink`` eps is halved until the check passes.
    """
    _check_dim(n)
    coords = _coords(n)
    while True:
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        rows = []
        for k in range(n):
            row = []
            for l in range(k, n):
                h = _random_entry(rng, coords, k == l)
                base = "1+" if k == l else ""
                row.append(f"{base}{_fmt(eps)}*({h})" if eps != 0 else ("1" if k == l else "0"))
            rows.append(row)
        spec = MetricSpec.from_strings(coords, rows)
        pts = spec.sample_points(samples, np.random.default_rng(np.random.SeedSequence([seed, 1])))
        try:
            _check_spd(spec, pts)
            return spec
        except MetricError:
            if not auto_shrink or eps < 1e-12:
                raise
            eps = eps / 2


def _check_spd(spec: MetricSpec, points) -> None:
    for p in points:
        lam = np.linalg.eigvalsh(spec.metric_value(p))
        if lam[0] < MIN_EIGENVALUE:
            raise MetricError(f"metric not positive definite at {tuple(map(float, p))} "
                              f"(smallest eigenvalue {lam[0]:.3g})")


# --------------------------------------------------------------------------
# Synthetic pointwise data for the solver oracles
# --------------------------------------------------------------------------

SYNTHETIC_OPTIONS = ("invertible", "rank1", "zero")


@dataclass
class SyntheticWzs:
    option: str
    g: np.ndarray
    ginv: np.ndarray
    z: np.ndarray
    dz: np.ndarray  # [k, j, l] = nabla_k Z_jl
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray

    @property
    def eta(self) -> np.ndarray:
        return self.B - self.D

    @property
    def omega(self) -> np.ndarray:
        return self.A - self.B


def random_spd(n: int, rng: np.random.Generator) -> np.ndarray:
    m = rng.normal(size=(n, n))
    return m @ m.T / n + np.eye(n)


def synthetic_wzs_instance(n: int, seed: int, option: str = "invertible") -> SyntheticWzs:
    """Pointwise (g, Z, nabla Z, A, B, D) satisfying the WZS equation exactly.

    ``invertible`` uses a generic symmetric Z with B = D, so the symmetry of
    nabla_k Z_jl in (j, l) holds.  ``rank1`` takes Z = z eta eta / |eta|^2 and
    B = D + eta.  ``zero`` sets Z = 0.
    """
    if option not in SYNTHETIC_OPTIONS:
        raise ValueError(f"option must be one of {SYNTHETIC_OPTIONS}, got {option!r}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, n, SYNTHETIC_OPTIONS.index(option)]))
    g = random_spd(n, rng)
    ginv = np.linalg.inv(g)
    a = rng.normal(size=n)
    d = rng.normal(size=n)
    if option == "invertible":
        m = rng.normal(size=(n, n))
        z = m + m.T + n * np.eye(n)
        b = d.copy()
    elif option == "rank1":
        eta = rng.normal(size=n)
        zs = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        z = zs * np.outer(eta, eta) / (eta @ ginv @ eta)
        b = d + eta
    else:
        z = np.zeros((n, n))
        b = rng.normal(size=n)
    dz = (np.einsum("k,jl->kjl", a, z) + np.einsum("j,kl->kjl", b, z)
          + np.einsum("l,kj->kjl", d, z))
    return SyntheticWzs(option, g, ginv, z, dz, a, b, d)


def standard_corpus(n: int, perturbed_seeds=range(5), eps: float = 0.05) -> dict[str, MetricSpec]:
    """Flat space, unit sphere, unit hyperbolic space, the polar sphere chart
    and a few perturbed-flat metrics, all in dimension ``n``."""
    _check_dim(n)
    corpus = {
        "flat": flat(n),
        "sphere": space_form(n, 1.0),
        "hyperbolic": space_form(n, -1.0),
        "sphere_polar": warped_product(radial_warp("sin(x1)", round_sphere(n - 1, start=2))),
    }
    for s in perturbed_seeds:
        corpus[f"perturbed_{s}"] = perturbed_flat(n, eps, s)
    return corpus
