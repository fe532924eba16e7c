"""Pointwise detection of Z-tensor structures and recovery of associated 1-forms.

The structural conditions (weak Z symmetry, recurrence, Codazzi, quasi-Einstein,
concircularity, Deszcz pseudosymmetry) are exact tensor equations.  Generic
metrics violate them, so every routine here solves a least-squares problem
and returns the fitted parameters together with a scaled residual.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg

from .geometry import (
    GeometryAtPoint, TensorJet, covariant_derivative, covector_field,
    curvature_family, divergence, z_scalar,
)
from .identities import (
    DEFAULT_TOL, IdentityReport, _as_list, div_riemann, g_wedge_grad, grad_ricci,
    grad_scalar, riemann_commutator, scaled_residual, zero_residual,
)
from .jets import jeinsum, jet_space, jmul, jpow, jtruncate

# sigma_min < SINGULAR_RATIO * sigma_max marks a singular Z; covectors with
# g-norm below ZERO_RATIO * (1 + |Z|) count as zero
SINGULAR_RATIO = 1e-8
ZERO_RATIO = 1e-8


def _val(a):
    return a[..., 0]


def g_norm(v: np.ndarray, ginv: np.ndarray) -> float:
    return float(np.sqrt(max(v @ ginv @ v, 0.0)))


def tensor_norm(z: np.ndarray, ginv: np.ndarray) -> float:
    """sqrt(Z_ab Z^ab) for a (0,2) tensor."""
    return float(np.sqrt(max(np.einsum("ab,cd,ac,bd->", z, z, ginv, ginv), 0.0)))


# --------------------------------------------------------------------------
# Weak Z symmetry
# --------------------------------------------------------------------------

@dataclass
class WzsSolution:
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    residual: float
    rank: int
    nullity: int
    degenerate: bool
    omega: np.ndarray
    eta: np.ndarray
    omega_norm: float
    eta_norm: float
    omega_zero: bool
    eta_zero: bool
    singular_values: np.ndarray

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


def wzs_design_matrix(z: np.ndarray) -> np.ndarray:
    """Rows (k, j, l) of A_k Z_jl + B_j Z_kl + D_l Z_kj, columns (A, B, D)."""
    n = z.shape[0]
    eye = np.eye(n)
    a = np.einsum("pk,jl->kjlp", eye, z)
    b = np.einsum("pj,kl->kjlp", eye, z)
    d = np.einsum("pl,kj->kjlp", eye, z)
    return np.concatenate([a, b, d], axis=-1).reshape(n ** 3, 3 * n)


def wzs_apply(z: np.ndarray, a: np.ndarray, b: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Right side A_k Z_jl + B_j Z_kl + D_l Z_kj, axes [k, j, l]."""
    return (np.einsum("k,jl->kjl", a, z) + np.einsum("j,kl->kjl", b, z)
            + np.einsum("l,kj->kjl", d, z))


def solve_wzs(z, dz, ginv=None, scale: float = 1.0, threshold: float = SINGULAR_RATIO) -> WzsSolution:
    """Least-squares (A, B, D) for nabla_k Z_jl = A_k Z_jl + B_j Z_kl + D_l Z_kj.

    ``dz[k, j, l]`` holds nabla_k Z_jl.  Singular values of the design matrix
    below ``threshold * max(sigma_max, scale)`` are dropped, which yields the
    minimum-norm solution when the system is rank deficient.
    """
    z = np.asarray(z, dtype=float)
    dz = np.asarray(dz, dtype=float)
    n = z.shape[0]
    ginv = np.eye(n) if ginv is None else np.asarray(ginv, dtype=float)
    m = wzs_design_matrix(z)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    cut = threshold * max(float(s[0]) if s.size else 0.0, scale)
    keep = s > cut
    rank = int(keep.sum())
    coef = u[:, keep].T @ dz.ravel()
    x = vt[keep].T @ (coef / s[keep])
    a, b, d = x[:n], x[n:2 * n], x[2 * n:]
    fit = wzs_apply(z, a, b, d)
    residual = scaled_residual(dz, fit).residual
    omega, eta = a - b, b - d
    zn = tensor_norm(z, ginv)
    on, en = g_norm(omega, ginv), g_norm(eta, ginv)
    return WzsSolution(
        A=a, B=b, D=d, residual=residual, rank=rank, nullity=3 * n - rank,
        degenerate=rank < 3 * n, omega=omega, eta=eta, omega_norm=on, eta_norm=en,
        omega_zero=on < ZERO_RATIO * (1 + zn), eta_zero=en < ZERO_RATIO * (1 + zn),
        singular_values=s,
    )


def solve_wzs_at(geo: GeometryAtPoint) -> WzsSolution:
    z = _val(geo.z)
    dz = _val(covariant_derivative(geo.tensor("z")).data)
    return solve_wzs(z, dz, geo.inverse_value, scale=_curvature_scale(geo))


def _curvature_scale(geo: GeometryAtPoint) -> float:
    return 1.0 + float(np.max(np.abs(_val(geo.ricci)))) + abs(float(geo.phi[0])) * float(
        np.max(np.abs(geo.metric_value)))


def eta_symmetry_residual(z, eta) -> np.ndarray:
    """eta_j Z_kl - eta_l Z_kj, axes [j, k, l]; vanishes in a (WZS)_n."""
    t = np.einsum("j,kl->jkl", eta, z)
    return t - np.einsum("l,kj->jkl", eta, z)


@dataclass
class Rank1Check:
    applicable: bool
    residual: float | None
    z_scalar: float
    transvection_residual: float | None = None


def check_rank1_z(z, eta, ginv=None, zero_ratio: float = ZERO_RATIO) -> Rank1Check:
    """Compare Z_ij with Z eta_i eta_j / (eta^k eta_k)."""
    z = np.asarray(z, dtype=float)
    eta = np.asarray(eta, dtype=float)
    ginv = np.eye(len(eta)) if ginv is None else np.asarray(ginv, dtype=float)
    zs = float(np.einsum("kl,kl->", ginv, z))
    en2 = float(eta @ ginv @ eta)
    if np.sqrt(max(en2, 0.0)) < zero_ratio * (1 + tensor_norm(z, ginv)):
        return Rank1Check(False, None, zs)
    model = zs * np.outer(eta, eta) / en2
    trans = scaled_residual(np.einsum("k,kl->l", ginv @ eta, z), zs * eta).residual
    return Rank1Check(True, scaled_residual(z, model).residual, zs, trans)


# --------------------------------------------------------------------------
# Quasi-Einstein decomposition
# --------------------------------------------------------------------------

@dataclass
class QuasiEinstein:
    verdict: str  # "einstein", "quasi_einstein" or "not_quasi_einstein"
    alpha: float | None
    beta: float | None
    T: np.ndarray | None
    residual: float | None
    spectrum: np.ndarray
    outlier: int | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict, "alpha": self.alpha, "beta": self.beta,
            "T": None if self.T is None else self.T.tolist(),
            "residual": self.residual, "spectrum": self.spectrum.tolist(),
        }


def _fix_sign(v: np.ndarray) -> np.ndarray:
    for x in v:
        if abs(x) > 1e-12:
            return v if x > 0 else -v
    return v


def quasi_einstein_decompose(ricci, g, tol: float = DEFAULT_TOL) -> QuasiEinstein:
    """Split Ricci = alpha g + beta T T with a unit covector T, if possible.

    Eigenvalues of Ricci relative to g are clustered with spread below
    ``tol * (1 + max|lambda|)``.
    """
    ricci = np.asarray(ricci, dtype=float)
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    lam, vecs = linalg.eigh(ricci, g)
    spread_tol = tol * (1 + float(np.max(np.abs(lam))))
    if lam[-1] - lam[0] < spread_tol:
        alpha = float(np.mean(lam))
        res = scaled_residual(ricci, alpha * g).residual
        return QuasiEinstein("einstein", alpha, 0.0, None, res, lam)
    candidates = []
    if lam[n - 2] - lam[0] < spread_tol:
        candidates.append((lam[n - 2] - lam[0], n - 1, lam[: n - 1]))
    if lam[-1] - lam[1] < spread_tol:
        candidates.append((lam[-1] - lam[1], 0, lam[1:]))
    if not candidates:
        return QuasiEinstein("not_quasi_einstein", None, None, None, None, lam)
    _, out, cluster = min(candidates, key=lambda c: c[0])
    alpha = float(np.mean(cluster))
    beta = float(lam[out] - alpha)
    t = _fix_sign(g @ vecs[:, out])
    res = scaled_residual(ricci, alpha * g + beta * np.outer(t, t)).residual
    return QuasiEinstein("quasi_einstein", alpha, beta, t, res, lam, out)


def outlier_covector_jet(geo: GeometryAtPoint, qe: QuasiEinstein | None = None) -> TensorJet:
    """Jets (order 2) of the unit covector T of a quasi-Einstein Ricci tensor.

    The isolated eigenpair of Ricci relative to g is analytic in the point,
    so its jets follow from a Newton iteration on truncated jets with the
    Jacobian frozen at the base point; each sweep fixes one more order.
    """
    n = geo.n
    qe = qe or quasi_einstein_decompose(_val(geo.ricci), geo.metric_value)
    if qe.verdict != "quasi_einstein":
        raise ValueError("Ricci tensor is not quasi-Einstein at this point")
    ric = geo.ricci
    g = jtruncate(geo.g, n, 2)
    a0, g0 = _val(ric), _val(g)
    lam0, vecs = linalg.eigh(a0, g0)
    lam0, v0 = lam0[qe.outlier], vecs[:, qe.outlier]
    jac = np.zeros((n + 1, n + 1))
    jac[:n, :n] = a0 - lam0 * g0
    jac[:n, n] = -g0 @ v0
    jac[n, :n] = 2 * v0 @ g0
    space = jet_space(n, 2)
    v = space.constant(v0)
    lam = space.constant(lam0)
    for _ in range(space.order + 2):
        shifted = ric - jmul(lam[None, None, :], g, n)
        f1 = jeinsum("ab,b->a", shifted, v, n)
        f2 = jeinsum("a,a->", jeinsum("ab,b->a", g, v, n), v, n) - space.constant(1.0)
        step = np.linalg.solve(jac, np.vstack([f1, f2[None, :]]))
        v = v - step[:n]
        lam = lam - step[n]
    t = jeinsum("ab,b->a", g, v, n)
    if (_fix_sign(t[:, 0]) != t[:, 0]).any():
        t = -t
    return geo.jet(t, "d")


# --------------------------------------------------------------------------
# Codazzi / NCS / recurrence / eigen-omega / Ricci form along omega
# --------------------------------------------------------------------------

@dataclass
class CodazziCheck:
    codazzi_residual: float
    ncs_residual: float
    grad_r_plus_phi: np.ndarray  # nabla_k [R + 2(n-1) phi]

    def to_dict(self):
        return {"codazzi_residual": self.codazzi_residual, "ncs_residual": self.ncs_residual,
                "grad_R_plus_2n1_phi": self.grad_r_plus_phi.tolist()}


def check_codazzi_ncs(geo: GeometryAtPoint) -> CodazziCheck:
    n = geo.n
    dz = _val(covariant_derivative(geo.tensor("z")).data)
    codazzi = scaled_residual(dz, dz.transpose(1, 0, 2)).residual
    dr = _val(grad_ricci(geo))
    lhs = dr.transpose(1, 0, 2) - dr  # nabla_k R_jl - nabla_j R_kl, axes [j, k, l]
    grad_r = grad_scalar(geo, geo.scalar)
    rhs = -g_wedge_grad(geo, grad_r) / (2 * (n - 1))
    ncs = scaled_residual(lhs, rhs).residual
    combo = grad_r + 2 * (n - 1) * grad_scalar(geo, geo.phi)
    return CodazziCheck(codazzi, ncs, combo)


def check_codazzi_z(geo: GeometryAtPoint) -> float:
    return check_codazzi_ncs(geo).codazzi_residual


def check_ncs(geo: GeometryAtPoint) -> float:
    return check_codazzi_ncs(geo).ncs_residual


@dataclass
class Recurrence:
    lam: np.ndarray | None
    residual: float | None
    mu: np.ndarray | None
    degenerate: bool

    def to_dict(self):
        return {"lambda": None if self.lam is None else self.lam.tolist(),
                "residual": self.residual,
                "mu": None if self.mu is None else self.mu.tolist(),
                "degenerate": self.degenerate}


def solve_recurrence(z, dz, phi: float | None = None, dphi=None, scale: float = 1.0,
                     threshold: float = SINGULAR_RATIO) -> Recurrence:
    """Least-squares lambda_i in nabla_i Z_kl = lambda_i Z_kl."""
    z = np.asarray(z, dtype=float)
    dz = np.asarray(dz, dtype=float)
    n = z.shape[0]
    zz = float(np.sum(z * z))
    if np.sqrt(zz) < threshold * scale:
        return Recurrence(None, None, None, True)
    lam = np.einsum("ikl,kl->i", dz, z) / zz
    res = scaled_residual(dz, np.einsum("i,kl->ikl", lam, z)).residual
    mu = None
    if phi is not None and dphi is not None:
        mu = (lam * phi - np.asarray(dphi)) / (n - 1)
    return Recurrence(lam, res, mu, False)


def solve_recurrence_at(geo: GeometryAtPoint) -> Recurrence:
    dz = _val(covariant_derivative(geo.tensor("z")).data)
    return solve_recurrence(_val(geo.z), dz, float(geo.phi[0]), grad_scalar(geo, geo.phi),
                            scale=_curvature_scale(geo))


@dataclass
class EigenOmega:
    applicable: bool
    zeta: float | None
    residual: float | None


def check_eigen_omega(z, omega, ginv=None, zero_ratio: float = ZERO_RATIO) -> EigenOmega:
    """zeta = omega^k Z_kl omega^l / omega^j omega_j and the eigen-equation residual."""
    z = np.asarray(z, dtype=float)
    omega = np.asarray(omega, dtype=float)
    ginv = np.eye(len(omega)) if ginv is None else np.asarray(ginv, dtype=float)
    up = ginv @ omega
    on2 = float(omega @ up)
    if np.sqrt(max(on2, 0.0)) < zero_ratio * (1 + tensor_norm(z, ginv)):
        return EigenOmega(False, None, None)
    zeta = float(up @ z @ up) / on2
    return EigenOmega(True, zeta, scaled_residual(z @ up, zeta * omega).residual)


def ricci_form_residual(ricci, g, ginv, z, phi: float, omega, zeta: float) -> float:
    """Ricci against [(Z-zeta)/(n-1) - phi] g + [(n zeta - Z)/(n-1)] omega omega / |omega|^2."""
    n = g.shape[0]
    zs = float(np.einsum("kl,kl->", ginv, z))
    on2 = float(omega @ ginv @ omega)
    model = (((zs - zeta) / (n - 1) - phi) * g
             + ((n * zeta - zs) / (n - 1)) * np.outer(omega, omega) / on2)
    return scaled_residual(ricci, model).residual


def omega_ricci_form(geo: GeometryAtPoint, solution: WzsSolution) -> float | None:
    """Residual of the quasi-Einstein Ricci form built from omega; None if omega ~ 0."""
    z = _val(geo.z)
    eig = check_eigen_omega(z, solution.omega, geo.inverse_value)
    if not eig.applicable or solution.omega_zero:
        return None
    return ricci_form_residual(_val(geo.ricci), geo.metric_value, geo.inverse_value, z,
                               float(geo.phi[0]), solution.omega, eig.zeta)


def phi_hypothesis_residual(geo: GeometryAtPoint, eta) -> float:
    """(eta_j nabla_k - eta_k nabla_j) phi, scaled."""
    dphi = grad_scalar(geo, geo.phi)
    m = np.outer(eta, dphi)
    return scaled_residual(m, m.T).residual


# --------------------------------------------------------------------------
# Concircular vectors and closed forms
# --------------------------------------------------------------------------

@dataclass
class ClosedCheck:
    residual: float  # max |d_i w_j - d_j w_i|
    scaled: float


def check_closed(one_form: TensorJet) -> ClosedCheck:
    n = one_form.n
    d = _val(jet_space(n, one_form.order).grad(one_form.data))  # [i, j] = d_i w_j
    curl = d - d.T
    res = scaled_residual(d, d.T)
    return ClosedCheck(float(np.max(np.abs(curl))), res.residual)


@dataclass
class Concircular:
    f: float
    mu: float
    concircular_residual: float
    closed_residual: float
    grad_f_residual: float
    proper_residual: float

    def to_dict(self):
        return asdict(self)


def check_concircular(geo: GeometryAtPoint, T=None) -> Concircular:
    """Fit nabla_j T_l = f (T_j T_l - g_jl) and test closedness of T and f T.

    ``T`` is a covector :class:`TensorJet` of order >= 2, a list of component
    expressions, or None to use the unit eigen-covector of a quasi-Einstein
    Ricci tensor.  T is normalized to unit g-length before fitting.
    """
    n = geo.n
    if T is None:
        T = outlier_covector_jet(geo)
    elif not isinstance(T, TensorJet):
        T = covector_field(geo, T, order=2)
    if T.order < 2:
        raise ValueError("concircular check needs covector jets of order >= 2")
    t = jtruncate(T.data, n, 2)
    ginv = jtruncate(geo.ginv, n, 2)
    norm2 = jeinsum("a,a->", jeinsum("ab,b->a", ginv, t, n), t, n)
    t = jmul(t, jpow(norm2, -0.5, n)[None, :], n)
    tj = geo.jet(t, "d")
    dt = covariant_derivative(tj).data  # order 1, [j, l]
    g1 = jtruncate(geo.g, n, 1)
    t1 = jtruncate(t, n, 1)
    model = jeinsum("j,l->jl", t1, t1, n) - g1
    num = jeinsum("jl,jl->", dt, model, n)
    den = jeinsum("jl,jl->", model, model, n)
    f = jmul(num, jpow(den, -1.0, n), n)  # order 1
    f0 = float(f[0])
    conc = scaled_residual(_val(dt), f0 * _val(model)).residual
    closed = scaled_residual(_val(dt), _val(dt).T).residual
    grad_f = _val(jet_space(n, 1).grad(f))
    tval = _val(t)
    tup = geo.inverse_value @ tval
    mu = float(grad_f @ tup)
    grad_res = scaled_residual(grad_f, mu * tval).residual
    ft = jmul(f[None, :], t1, n)
    dft = _val(covariant_derivative(geo.jet(ft, "d")).data)
    proper = scaled_residual(dft, dft.T).residual
    return Concircular(f0, mu, conc, closed, grad_res, proper)


# --------------------------------------------------------------------------
# Curvature conditions
# --------------------------------------------------------------------------

def check_curvature_cyclic_condition(geos, tol: float = DEFAULT_TOL) -> IdentityReport:
    """R_im R_{jkl}^m + R_jm R_{kil}^m + R_km R_{ijl}^m = 0 (diagnostic)."""
    report = IdentityReport("curvature_cyclic", tol)
    for geo in _as_list(geos):
        ric = _val(geo.ricci)
        riem = _val(geo.riemann)
        t = np.einsum("im,jklm->ijkl", ric, riem)
        lhs = t + t.transpose(2, 0, 1, 3)
        report.results.append(scaled_residual(lhs, -t.transpose(1, 2, 0, 3), geo.point))
    return report


def tachibana(h: np.ndarray, rl: np.ndarray) -> np.ndarray:
    """h_js R_iklm - h_ji R_sklm + ... (eight terms), axes [s, i, j, k, l, m]."""
    t = (np.einsum("js,iklm->sijklm", h, rl) - np.einsum("ji,sklm->sijklm", h, rl)
         + np.einsum("ks,jilm->sijklm", h, rl) - np.einsum("ki,jslm->sijklm", h, rl)
         + np.einsum("ls,jkim->sijklm", h, rl) - np.einsum("li,jksm->sijklm", h, rl)
         + np.einsum("ms,jkli->sijklm", h, rl) - np.einsum("mi,jkls->sijklm", h, rl))
    return t


@dataclass
class DeszczFit:
    kind: str
    L: float | None
    residual: float | None
    undefined: bool
    minus_third: bool | None = None

    def to_dict(self):
        return asdict(self)


def fit_deszcz(geo: GeometryAtPoint, kind: str = "pseudosymmetric") -> DeszczFit:
    """Least-squares L_R (kind ``pseudosymmetric``) or L_S (``generalized_ricci``)."""
    rl = _val(geo.riemann_lowered())
    if kind == "pseudosymmetric":
        h = geo.metric_value
    elif kind == "generalized_ricci":
        h = _val(geo.ricci)
    else:
        raise ValueError(f"unknown Deszcz kind {kind!r}")
    q = riemann_commutator(geo)
    rhs = tachibana(h, rl)
    rn = float(np.max(np.abs(rhs)))
    floor = 1e-10 * (1 + float(np.max(np.abs(h))) * float(np.max(np.abs(rl))))
    if rn < floor:
        return DeszczFit(kind, None, None, True, None)
    big_l = float(np.sum(q * rhs) / np.sum(rhs * rhs))
    res = scaled_residual(q, big_l * rhs).residual
    minus_third = abs(big_l + 1 / 3) < 1e-6 if kind == "generalized_ricci" else None
    return DeszczFit(kind, big_l, res, False, minus_third)


def z_rank(z, g, scale: float = 1.0, threshold: float = SINGULAR_RATIO) -> dict:
    """Singular values of Z in a g-orthonormal frame and the rank at ``threshold``."""
    chol = np.linalg.cholesky(g)
    w = linalg.solve_triangular(chol, linalg.solve_triangular(chol, z, lower=True).T, lower=True)
    sv = np.sort(np.abs(np.linalg.eigvalsh(0.5 * (w + w.T))))[::-1]
    cut = threshold * max(float(sv[0]), scale)
    rank = int(np.sum(sv > cut))
    return {"singular_values": sv.tolist(), "rank": rank, "singular": rank < len(sv)}


# --------------------------------------------------------------------------
# Per-point classification record
# --------------------------------------------------------------------------

@dataclass
class ClassifyOptions:
    tol: float = DEFAULT_TOL
    w_constants: tuple[float, float] | None = None
    deszcz: bool = True
    concircular: list | None = None  # covector expressions; None uses the Ricci eigen-covector


def classify_point(geo: GeometryAtPoint, options: ClassifyOptions | None = None) -> dict:
    """Every structural diagnostic at one point, as a JSON-ready dict."""
    opt = options or ClassifyOptions()
    n = geo.n
    g = geo.metric_value
    ginv = geo.inverse_value
    ric = _val(geo.ricci)
    r = float(geo.scalar[0])
    z = _val(geo.z)
    scale = _curvature_scale(geo)
    rec = {"point": list(geo.point), "scalar_curvature": r, "phi": float(geo.phi[0]),
           "z_scalar": float(z_scalar(geo)[0])}
    rec["einstein_residual"] = scaled_residual(ric, r / n * g).residual
    rec["z_flat_residual"] = zero_residual(z, float(np.max(np.abs(ric))) + abs(rec["phi"])).residual
    qe = quasi_einstein_decompose(ric, g, opt.tol)
    rec["quasi_einstein"] = qe.to_dict()
    rec["codazzi"] = check_codazzi_ncs(geo).to_dict()
    rec["recurrence"] = solve_recurrence_at(geo).to_dict()
    c = _val(curvature_family(geo, "C").data) if n >= 3 else np.zeros((n,) * 4)
    rec["conformal_flatness_residual"] = zero_residual(c, float(np.max(np.abs(_val(geo.riemann))))).residual
    harm = {"R": zero_residual(_val(div_riemann(geo)), 0.0).residual}
    kinds = ["C", "P", "Ctilde", "N"] if n >= 3 else ["P", "Ctilde"]
    for kind in kinds:
        harm[kind] = zero_residual(_val(divergence(curvature_family(geo, kind)).data), 0.0).residual
    if opt.w_constants and n >= 3:
        a, b = opt.w_constants
        harm["W"] = zero_residual(_val(divergence(curvature_family(geo, "W", a, b)).data), 0.0).residual
    rec["harmonicity"] = harm
    sol = solve_wzs_at(geo)
    rec["wzs"] = sol.to_dict()
    rec["z_rank"] = z_rank(z, g, scale)
    eig = check_eigen_omega(z, sol.omega, ginv)
    rec["eigen_omega"] = asdict(eig)
    rec["ricci_form"] = omega_ricci_form(geo, sol)
    if not sol.eta_zero:
        r1 = check_rank1_z(z, sol.eta, ginv)
        rec["rank1_z"] = asdict(r1)
        rec["phi_hypothesis_residual"] = phi_hypothesis_residual(geo, sol.eta)
    else:
        rec["rank1_z"] = None
        rec["phi_hypothesis_residual"] = None
    rec["curvature_cyclic_residual"] = check_curvature_cyclic_condition(geo).max_residual
    if opt.concircular is not None:
        rec["concircular"] = check_concircular(geo, opt.concircular).to_dict()
    elif qe.verdict == "quasi_einstein":
        rec["concircular"] = check_concircular(geo, None).to_dict()
    else:
        rec["concircular"] = None
    if opt.deszcz:
        rec["deszcz"] = {k: fit_deszcz(geo, k).to_dict()
                         for k in ("pseudosymmetric", "generalized_ricci")}
    return rec


@dataclass
class ClassificationReport:
    records: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"points": self.records}


def classify(geos, options: ClassifyOptions | None = None) -> ClassificationReport:
    return ClassificationReport([classify_point(g, options) for g in _as_list(geos)])
