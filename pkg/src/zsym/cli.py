"""Command line front end: manifests in, identity and classification reports out."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from . import __version__
from . import builders
from . import classify as cl
from . import exprlang as el
from .errors import DomainError, ExprSyntaxError, JetOrderError, ManifestError, MetricError, ZsymError
from .geometry import MetricSpec, curvature_family, geometry_at
from .identities import (
    ASSERTIVE_CHECKS, DEFAULT_TOL, check_divergence_formula, check_qch_scalar_condition,
    scaled_residual, zero_residual,
)

DEFAULT_POINTS = 10
DEFAULT_SEED = 0
JET_ORDER = 4

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["dim", "coords", "metric"],
    "additionalProperties": False,
    "properties": {
        "dim": {"type": "integer", "minimum": builders.BUILD_MIN_DIM, "maximum": builders.BUILD_MAX_DIM},
        "coords": {"type": "array", "items": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"}},
        "metric": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
        "phi": {"type": ["string", "null"]},
        "domain": {
            "type": "object",
            "additionalProperties": {
                "type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "constants": {"type": "object", "additionalProperties": {"type": "number"}},
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "points": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "jet_order": {"type": "integer", "const": JET_ORDER},
            },
        },
        "checks": {"type": "array", "items": {"type": "string"}},
        "w_constants": {
            "type": "object",
            "required": ["a", "b"],
            "additionalProperties": False,
            "properties": {"a": {"type": "number"}, "b": {"type": "number"}},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"json": {"type": "string"}, "text": {"type": "string"}},
        },
    },
}


# --------------------------------------------------------------------------
# Checks
# --------------------------------------------------------------------------

@dataclass
class PointRecord:
    index: int
    point: tuple
    residual: float | None
    details: dict | None = None


@dataclass
class CheckResult:
    name: str
    kind: str  # "assertive" or "diagnostic"
    tolerance: float
    records: list[PointRecord] = field(default_factory=list)

    @property
    def residuals(self) -> list[float]:
        return [r.residual for r in self.records if r.residual is not None]

    @property
    def max_residual(self) -> float | None:
        return max(self.residuals) if self.residuals else None

    @property
    def mean_residual(self) -> float | None:
        return float(np.mean(self.residuals)) if self.residuals else None

    @property
    def passed(self) -> bool:
        m = self.max_residual
        return m is None or m < self.tolerance

    def to_dict(self) -> dict:
        pts = []
        for r in self.records:
            entry = {"index": r.index, "point": list(r.point), "residual": r.residual}
            if r.details is not None:
                entry["details"] = r.details
            pts.append(entry)
        return {"name": self.name, "kind": self.kind, "max_residual": self.max_residual,
                "mean_residual": self.mean_residual, "pass": self.passed, "points": pts}


def _v(a):
    return a[..., 0]


def _assertive(func) -> Callable:
    def run(geo, manifest):
        r = func(geo, tol=manifest.tol).results[0]
        return r.residual, {"scale": r.scale, "raw": r.raw, "index": list(r.index)}
    return run


def _w_check(kind: str) -> Callable:
    def run(geo, manifest):
        a, b = manifest.w_constants
        if kind == "W":
            rep = check_divergence_formula(geo, "W", a, b, tol=manifest.tol)
        else:
            rep = check_qch_scalar_condition(geo, a, b, tol=manifest.tol)
        r = rep.results[0]
        return r.residual, {"scale": r.scale, "raw": r.raw, "index": list(r.index)}
    return run


def _einstein(geo, manifest):
    ric = _v(geo.ricci)
    r = float(geo.scalar[0])
    return scaled_residual(ric, r / geo.n * geo.metric_value).residual, {"alpha": r / geo.n}


def _z_flat(geo, manifest):
    z = _v(geo.z)
    return zero_residual(z, float(np.max(np.abs(_v(geo.ricci)))) + abs(float(geo.phi[0]))).residual, None


def _conformal_flatness(geo, manifest):
    c = _v(curvature_family(geo, "C").data)
    return zero_residual(c, float(np.max(np.abs(_v(geo.riemann))))).residual, None


def _quasi_einstein(geo, manifest):
    qe = cl.quasi_einstein_decompose(_v(geo.ricci), geo.metric_value, manifest.tol)
    return qe.residual, qe.to_dict()


def _codazzi(geo, manifest):
    c = cl.check_codazzi_ncs(geo)
    return c.codazzi_residual, c.to_dict()


def _ncs(geo, manifest):
    c = cl.check_codazzi_ncs(geo)
    return c.ncs_residual, c.to_dict()


def _recurrence(geo, manifest):
    r = cl.solve_recurrence_at(geo)
    return r.residual, r.to_dict()


def _wzs(geo, manifest):
    s = cl.solve_wzs_at(geo)
    d = s.to_dict()
    d["ricci_form_residual"] = cl.omega_ricci_form(geo, s)
    return s.residual, d


def _curvature_cyclic(geo, manifest):
    return cl.check_curvature_cyclic_condition(geo).max_residual, None


def _deszcz(kind):
    def run(geo, manifest):
        f = cl.fit_deszcz(geo, kind)
        return f.residual, f.to_dict()
    return run


def _classify(geo, manifest):
    opts = cl.ClassifyOptions(tol=manifest.tol, w_constants=manifest.w_constants)
    return None, cl.classify_point(geo, opts)


DIAGNOSTIC_CHECKS = {
    "einstein": _einstein,
    "z_flat": _z_flat,
    "conformal_flatness": _conformal_flatness,
    "quasi_einstein": _quasi_einstein,
    "codazzi_z": _codazzi,
    "ncs": _ncs,
    "recurrence": _recurrence,
    "wzs": _wzs,
    "curvature_cyclic": _curvature_cyclic,
    "deszcz_pseudosymmetric": _deszcz("pseudosymmetric"),
    "deszcz_generalized_ricci": _deszcz("generalized_ricci"),
    "classify": _classify,
}
W_CHECKS = {"divergence_W": _w_check("W"), "qch_scalar": _w_check("qch")}


def check_registry() -> dict[str, tuple[str, Callable]]:
    reg = {name: ("assertive", _assertive(f)) for name, f in ASSERTIVE_CHECKS.items()}
    reg.update({name: ("assertive", f) for name, f in W_CHECKS.items()})
    reg.update({name: ("diagnostic", f) for name, f in DIAGNOSTIC_CHECKS.items()})
    return reg


# --------------------------------------------------------------------------
# Manifest
# --------------------------------------------------------------------------

@dataclass
class Manifest:
    spec: MetricSpec
    points: int
    seed: int
    tol: float
    checks: tuple[str, ...]
    w_constants: tuple[float, float] | None
    output: dict
    raw: dict

    def effective(self) -> dict:
        """Raw manifest with the resolved run block, used for the digest."""
        d = dict(self.raw)
        d["run"] = {"points": self.points, "seed": self.seed, "tol": self.tol, "jet_order": JET_ORDER}
        d["checks"] = list(self.checks)
        return d

    def digest(self) -> str:
        text = json.dumps(self.effective(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _parse_field(text: str, where: str) -> el.Expr:
    try:
        return el.parse(text)
    except ExprSyntaxError as exc:
        raise ManifestError(where, f"expression error in {text!r} at byte offset {exc.offset}: {exc}") from None


def manifest_from_dict(raw: dict) -> Manifest:
    """Validate a decoded manifest object."""
    try:
        jsonschema.validate(raw, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ManifestError(where, exc.message) from None
    n = raw["dim"]
    coords = raw["coords"]
    if len(coords) != n:
        raise ManifestError("coords", f"expected {n} names, got {len(coords)}")
    metric = [[_parse_field(t, f"metric/{i}/{j}") for j, t in enumerate(row)]
              for i, row in enumerate(raw["metric"])]
    phi = raw.get("phi")
    phi = None if phi is None else _parse_field(phi, "phi")
    domain = raw.get("domain")
    if domain is not None:
        unknown = set(domain) - set(coords)
        if unknown:
            raise ManifestError("domain", f"unknown coordinates {sorted(unknown)}")
        for c, (lo, hi) in domain.items():
            if not lo <= hi:
                raise ManifestError(f"domain/{c}", "lower bound exceeds upper bound")
    try:
        spec = MetricSpec.from_strings(coords, metric, domain, phi, raw.get("constants"))
    except ZsymError as exc:
        raise ManifestError("metric", str(exc)) from None
    run = raw.get("run", {})
    checks = tuple(raw.get("checks", ["all"]))
    w = raw.get("w_constants")
    w_constants = None if w is None else (float(w["a"]), float(w["b"]))
    if w_constants is not None and (w_constants[0] == 0 or w_constants[1] == 0):
        raise ManifestError("w_constants", "a and b must be nonzero")
    manifest = Manifest(spec, run.get("points", DEFAULT_POINTS), run.get("seed", DEFAULT_SEED),
                        float(run.get("tol", DEFAULT_TOL)), checks, w_constants,
                        dict(raw.get("output", {})), raw)
    expand_checks(manifest)
    return manifest


def load_manifest(path) -> Manifest:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError("<file>", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return manifest_from_dict(raw)


def spec_to_manifest(spec: MetricSpec, checks=("all",), points: int = DEFAULT_POINTS,
                     seed: int = DEFAULT_SEED, tol: float = DEFAULT_TOL) -> dict:
    """Manifest object describing ``spec``; the inverse of :func:`manifest_from_dict`."""
    d = {"dim": spec.n, "coords": list(spec.coords), "metric": spec.upper_triangle_text()}
    if spec.phi is not None:
        d["phi"] = el.to_text(spec.phi)
    d["domain"] = {c: [lo, hi] for c, (lo, hi) in zip(spec.coords, spec.domain)}
    if spec.constants:
        d["constants"] = dict(spec.constants)
    d["run"] = {"points": points, "seed": seed, "tol": tol}
    d["checks"] = list(checks)
    return d


def expand_checks(manifest: Manifest) -> list[str]:
    """Resolve ``all`` / ``identities`` / ``diagnostics`` into concrete check names."""
    reg = check_registry()
    out = []
    for name in manifest.checks:
        if name == "all":
            group = list(ASSERTIVE_CHECKS) + list(DIAGNOSTIC_CHECKS)
        elif name == "identities":
            group = list(ASSERTIVE_CHECKS)
        elif name == "diagnostics":
            group = list(DIAGNOSTIC_CHECKS)
        elif name in reg:
            group = [name]
        else:
            raise ManifestError("checks", f"unknown check {name!r}")
        if name in ("all", "identities") and manifest.w_constants is not None:
            group += list(W_CHECKS)
        for g in group:
            if g in W_CHECKS and manifest.w_constants is None:
                raise ManifestError("checks", f"{g} needs w_constants a and b")
            if g not in out:
                out.append(g)
    return out


# --------------------------------------------------------------------------
# Run orchestration
# --------------------------------------------------------------------------

class PointError(ZsymError):
    """A hard numerical failure at one sample point."""


def sample_points(manifest: Manifest) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(manifest.seed))
    return manifest.spec.sample_points(manifest.points, rng)


_HARD_ERRORS = (MetricError, DomainError, JetOrderError, ZeroDivisionError, OverflowError,
                np.linalg.LinAlgError)


def _located(coords, i: int, point, exc: Exception) -> PointError:
    where = ", ".join(f"{c}={x!r}" for c, x in zip(coords, point))
    return PointError(f"sample point {i} ({where}): {exc}")


def _clean(x):
    """JSON-safe copy: numpy scalars to floats, non-finite floats to None."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def run(manifest: Manifest, checks: list[str] | None = None) -> dict:
    """Evaluate the requested checks at the seeded sample points."""
    names = checks if checks is not None else expand_checks(manifest)
    reg = check_registry()
    results = [CheckResult(name, reg[name][0], manifest.tol) for name in names]
    samples = []
    for i, p in enumerate(sample_points(manifest)):
        p = tuple(float(x) for x in p)
        try:
            geo = geometry_at(manifest.spec, p)
            samples.append({"index": i, "point": list(p), "scalar_curvature": float(geo.scalar[0]),
                            "phi": float(geo.phi[0])})
            for res in results:
                value, details = reg[res.name][1](geo, manifest)
                res.records.append(PointRecord(i, p, value, details))
        except _HARD_ERRORS as exc:
            raise _located(manifest.spec.coords, i, p, exc) from None
    checks_out = [_clean(r.to_dict()) for r in results]
    overall = all(r.passed for r in results if r.kind == "assertive")
    return {
        "version": __version__,
        "manifest_digest": manifest.digest(),
        "seed": manifest.seed,
        "tolerance": manifest.tol,
        "samples": _clean(samples),
        "checks": checks_out,
        "pass": overall,
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# Text rendering
# --------------------------------------------------------------------------

def use_color(stream) -> bool:
    return "NO_COLOR" not in os.environ and hasattr(stream, "isatty") and stream.isatty()


def _fmt(x) -> str:
    return "-" if x is None else f"{x:.3e}"


def render_text(report: dict, color: bool = False, elapsed: float | None = None) -> str:
    def tag(ok: bool, kind: str) -> str:
        word = "PASS" if ok else ("FAIL" if kind == "assertive" else "INFO")
        if not color:
            return word
        code = "32" if ok else ("31" if kind == "assertive" else "33")
        return f"\x1b[{code}m{word}\x1b[0m"

    lines = [f"zsym {report['version']}  manifest {report['manifest_digest'][:16]}"
             f"  seed {report.get('seed', '-')}  tol {report.get('tolerance', '-')}"]
    samples = report.get("samples", [])
    if samples:
        rs = [s["scalar_curvature"] for s in samples]
        lines.append(f"{len(samples)} points, scalar curvature in [{min(rs):.10g}, {max(rs):.10g}]")
    width = max((len(c["name"]) for c in report["checks"]), default=4)
    for c in report["checks"]:
        lines.append(f"  {tag(c['pass'], c['kind'])}  {c['name']:<{width}}  {c['kind']:<10}"
                     f"  max {_fmt(c['max_residual'])}  mean {_fmt(c['mean_residual'])}")
    lines.append(f"overall: {tag(report['pass'], 'assertive')}")
    if elapsed is not None:
        lines.append(f"wall clock: {elapsed:.2f} s")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, metric: bool = True) -> None:
    if metric:
        p.add_argument("--metric", required=True, help="manifest JSON file")
    p.add_argument("--points", type=int, help=f"sample points (default {DEFAULT_POINTS})")
    p.add_argument("--seed", type=int, help=f"sampling seed (default {DEFAULT_SEED})")
    p.add_argument("--tol", type=float, help=f"pass tolerance (default {DEFAULT_TOL})")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zsym", description="Curvature identities and Z-tensor structures "
                                     "of closed-form Riemannian metrics.")
    parser.add_argument("--version", action="version", version=f"zsym {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", help="run the manifest checks")
    _common(p)
    p.add_argument("--check", action="append", dest="checks", help="override the manifest check list")
    _common(sub.add_parser("classify", help="per-point structure classification"))
    _common(sub.add_parser("solve-wzs", help="least-squares associated 1-forms"))
    p = sub.add_parser("report", help="render a JSON report as text")
    p.add_argument("report")

    b = sub.add_parser("build", help="emit a manifest for a built-in metric family")
    bsub = b.add_subparsers(dest="family", required=True)
    for name in ("flat", "space-form", "warped", "perturbed"):
        q = bsub.add_parser(name)
        q.add_argument("--dim", type=int, default=4)
        q.add_argument("--phi", help="phi expression (may use R)")
        q.add_argument("--out", help="write the manifest here instead of stdout")
        if name == "space-form":
            q.add_argument("--k", type=float, default=1.0, help="sectional curvature")
        elif name == "warped":
            q.add_argument("--warp", default="sin(x1)", help="f(x1) in dx1^2 + f^2 g_fiber")
            q.add_argument("--fiber", choices=("sphere", "flat"), default="sphere")
        elif name == "perturbed":
            q.add_argument("--eps", type=float, default=0.05)
            q.add_argument("--seed", type=int, default=0)
    return parser


def _apply_overrides(manifest: Manifest, args) -> Manifest:
    if args.points is not None:
        if args.points < 1:
            raise ManifestError("--points", "must be at least 1")
        manifest.points = args.points
    if args.seed is not None:
        if args.seed < 0:
            raise ManifestError("--seed", "must be non-negative")
        manifest.seed = args.seed
    if args.tol is not None:
        if not args.tol > 0:
            raise ManifestError("--tol", "must be positive")
        manifest.tol = args.tol
    return manifest


def _build(args) -> dict:
    n = args.dim
    if args.family == "flat":
        spec = builders.flat(n)
    elif args.family == "space-form":
        spec = builders.space_form(n, args.k)
    elif args.family == "warped":
        if n < builders.BUILD_MIN_DIM:
            raise MetricError(f"dimension must lie in {builders.BUILD_MIN_DIM}..{builders.BUILD_MAX_DIM}")
        fiber = (builders.round_sphere(n - 1, start=2) if args.fiber == "sphere"
                 else MetricSpec.from_strings([f"x{i}" for i in range(2, n + 1)],
                                              [["1" if l == k else "0" for l in range(k, n - 1)]
                                               for k in range(n - 1)]))
        spec = builders.warped_product(builders.radial_warp(args.warp, fiber))
    else:
        spec = builders.perturbed_flat(n, args.eps, args.seed)
    if args.phi is not None:
        spec = spec.with_phi(args.phi)
    return spec_to_manifest(spec)


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    err = sys.stderr
    try:
        if args.command == "build":
            text = json.dumps(_build(args), indent=2) + "\n"
            if args.out:
                _write(args.out, text)
            else:
                sys.stdout.write(text)
            return EXIT_PASS
        if args.command == "report":
            try:
                report = json.loads(Path(args.report).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise ManifestError(args.report, f"cannot read report: {exc}") from None
            sys.stdout.write(render_text(report, use_color(sys.stdout)))
            return EXIT_PASS if report.get("pass") else EXIT_FAIL
        manifest = _apply_overrides(load_manifest(args.metric), args)
        if args.command == "check":
            if args.checks:
                manifest.checks = tuple(args.checks)
            names = expand_checks(manifest)
        else:
            names = ["classify"] if args.command == "classify" else ["wzs"]
    except (ManifestError, MetricError, ExprSyntaxError) as exc:
        print(f"zsym: error: {exc}", file=err)
        return EXIT_USAGE

    start = time.perf_counter()
    try:
        report = run(manifest, names)
    except PointError as exc:
        print(f"zsym: numerical error at {exc}", file=err)
        return EXIT_NUMERIC
    elapsed = time.perf_counter() - start

    payload = dumps_report(report)
    out = args.out or manifest.output.get("json")
    if out:
        _write(out, payload)
    if manifest.output.get("text"):
        _write(manifest.output["text"], render_text(report, False, elapsed))
    if args.json:
        sys.stdout.write(payload)
    else:
        sys.stdout.write(render_text(report, use_color(sys.stdout), elapsed))
    return EXIT_PASS if report["pass"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
