"""Truncated multivariate Taylor jets.

A jet of order ``K`` in ``n`` variables stores every partial derivative
``d^alpha f(p)`` with ``|alpha| <= K``.  Multi-indices are enumerated in
graded-lexicographic order, so the entries of a lower-order jet are a prefix
of the entries of a higher-order one and truncation is a slice.

Tensor-valued jets are plain ndarrays whose *last* axis is the jet axis; the
functions :func:`jmul`, :func:`jeinsum` and :func:`jderiv` act on them.
:class:`Jet` wraps a single scalar jet for the public API.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

import numpy as np

from . import exprlang as el
from .errors import DomainError, JetOrderError, UnknownVariableError

MAX_ORDER = 4

__all__ = [
    "MAX_ORDER", "JetSpace", "jet_space", "space_of", "Jet", "seed_coordinate",
    "jet_eval", "jet_eval_array", "jmul", "jeinsum", "jderiv", "jgrad",
    "jtruncate", "jcompose", "jconst", "jpow",
]


def _multi_indices(n: int, order: int) -> list[tuple[int, ...]]:
    out = []
    for degree in range(order + 1):
        # combinations_with_replacement yields variable lists in lex order
        for combo in combinations_with_replacement(range(n), degree):
            alpha = [0] * n
            for v in combo:
                alpha[v] += 1
            out.append(tuple(alpha))
    return out


class JetSpace:
    """Index tables for jets of a given ``(n, order)``."""

    def __init__(self, n: int, order: int):
        if n < 1:
            raise ValueError("jets need at least one variable")
        if not 0 <= order <= MAX_ORDER:
            raise JetOrderError(f"jet order must lie in 0..{MAX_ORDER}, got {order}")
        self.n = n
        self.order = order
        self.alphas = _multi_indices(n, order)
        self.size = len(self.alphas)
        self.index = {a: i for i, a in enumerate(self.alphas)}
        self.degree = np.array([sum(a) for a in self.alphas])

        # Leibniz pairs: d^g(fh) = sum_{a+b=g} C(g,a) d^a f d^b h
        ia, ib, ic, w = [], [], [], []
        for c, gamma in enumerate(self.alphas):
            for a, alpha in enumerate(self.alphas):
                if any(x > y for x, y in zip(alpha, gamma)):
                    continue
                beta = tuple(y - x for x, y in zip(alpha, gamma))
                ia.append(a)
                ib.append(self.index[beta])
                ic.append(c)
                w.append(math.prod(math.comb(y, x) for x, y in zip(alpha, gamma)))
        self._ia = np.array(ia)
        self._ib = np.array(ib)
        self._w = np.array(w, dtype=float)
        ic = np.array(ic)
        # pairs are generated grouped by output index, so reduceat applies
        self._starts = np.searchsorted(ic, np.arange(self.size))

        # derivative gather maps into the order-1 space
        self._deriv = None
        if order >= 1:
            lower = _multi_indices(n, order - 1)
            self._deriv = []
            for i in range(n):
                idx = []
                for alpha in lower:
                    bumped = list(alpha)
                    bumped[i] += 1
                    idx.append(self.index[tuple(bumped)])
                self._deriv.append(np.array(idx))

        # alpha! converts derivative values to Taylor coefficients
        self.factorials = np.array(
            [math.prod(math.factorial(x) for x in a) for a in self.alphas], dtype=float
        )

    def __repr__(self):
        return f"JetSpace(n={self.n}, order={self.order})"

    def lower(self) -> "JetSpace":
        return jet_space(self.n, self.order - 1)

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prod = a[..., self._ia] * b[..., self._ib] * self._w
        return np.add.reduceat(prod, self._starts, axis=-1)

    def einsum(self, subscripts: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        lhs, out = subscripts.replace(" ", "").split("->")
        sa, sb = lhs.split(",")
        spec = f"{sa}Z,{sb}Z->{out}Z"
        prod = np.einsum(spec, a[..., self._ia] * self._w, b[..., self._ib], optimize=True)
        return np.add.reduceat(prod, self._starts, axis=-1)

    def deriv(self, a: np.ndarray, i: int) -> np.ndarray:
        if self._deriv is None:
            raise JetOrderError("cannot differentiate an order-0 jet")
        return a[..., self._deriv[i]]

    def grad(self, a: np.ndarray) -> np.ndarray:
        """Stack of all first partials; the new axis is placed first."""
        if self._deriv is None:
            raise JetOrderError("cannot differentiate an order-0 jet")
        return np.stack([a[..., d] for d in self._deriv], axis=0)

    def constant(self, value) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        out = np.zeros(value.shape + (self.size,))
        out[..., 0] = value
        return out

    def seed(self, i: int, point: Sequence[float]) -> np.ndarray:
        out = np.zeros(self.size)
        out[0] = point[i]
        if self.order >= 1:
            e = [0] * self.n
            e[i] = 1
            out[self.index[tuple(e)]] = 1.0
        return out

    def compose(self, a: np.ndarray, derivs: np.ndarray) -> np.ndarray:
        """Return g(a) given ``derivs[k] = g^(k)(a_0)`` for k = 0..order.

        Uses g(a) = sum_k g^(k)(a0)/k! (a - a0)^k, exact under truncation
        because (a - a0) has zero constant term.
        """
        h = np.array(a, dtype=float, copy=True)
        h[..., 0] = 0.0
        derivs = np.asarray(derivs, dtype=float)
        out = self.constant(derivs[0])
        power = None
        for k in range(1, self.order + 1):
            power = h if power is None else self.mul(power, h)
            out = out + (derivs[k] / math.factorial(k))[..., None] * power
        return out


@lru_cache(maxsize=None)
def jet_space(n: int, order: int) -> JetSpace:
    return JetSpace(n, order)


@lru_cache(maxsize=None)
def _sizes(n: int) -> dict:
    return {math.comb(n + k, k): k for k in range(MAX_ORDER + 1)}


def space_of(a: np.ndarray, n: int) -> JetSpace:
    """Recover the jet space from the length of the trailing jet axis."""
    try:
        return jet_space(n, _sizes(n)[a.shape[-1]])
    except KeyError:
        raise ValueError(f"axis length {a.shape[-1]} is not a jet size for n={n}") from None


def jtruncate(a: np.ndarray, n: int, order: int) -> np.ndarray:
    return a[..., : math.comb(n + order, order)]


def _common(a, b, n):
    order = min(space_of(a, n).order, space_of(b, n).order)
    return jet_space(n, order), jtruncate(a, n, order), jtruncate(b, n, order)


def jmul(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Elementwise (broadcast) product of jet arrays, truncated to the lower order."""
    space, a, b = _common(a, b, n)
    return space.mul(a, b)


def jeinsum(subscripts: str, a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """``np.einsum`` over tensor indices with jet multiplication on the last axis."""
    space, a, b = _common(a, b, n)
    return space.einsum(subscripts, a, b)


def jderiv(a: np.ndarray, i: int, n: int) -> np.ndarray:
    return space_of(a, n).deriv(a, i)


def jgrad(a: np.ndarray, n: int) -> np.ndarray:
    return space_of(a, n).grad(a)


def jconst(value, n: int, order: int) -> np.ndarray:
    return jet_space(n, order).constant(value)


# --------------------------------------------------------------------------
# Univariate derivative tables, g^(k)(x) for k = 0..order
# --------------------------------------------------------------------------

def _power_derivs(x: float, p: float, order: int) -> list[float]:
    out = []
    coef = 1.0
    for k in range(order + 1):
        e = p - k
        if coef == 0.0:
            out.append(0.0)
        elif e == 0:
            out.append(coef)
        else:
            out.append(coef * x ** e)
        coef *= p - k
    return out


def _poly_chain(t: float, order: int, sign: float) -> list[float]:
    # d/dx P(t) = P'(t) (1 + sign t^2) for t = tan x (sign=+1) or tanh x (sign=-1)
    poly = np.polynomial.Polynomial([0.0, 1.0])
    link = np.polynomial.Polynomial([1.0, 0.0, sign])
    out = []
    for _ in range(order + 1):
        out.append(float(poly(t)))
        poly = poly.deriv() * link
    return out


def univariate_derivs(func: str, x: float, order: int) -> list[float]:
    """Derivatives of an elementary function at ``x``; raises ValueError off-domain."""
    if func == "exp":
        return [math.exp(x)] * (order + 1)
    if func == "log":
        if x <= 0:
            raise ValueError("log of non-positive value")
        return [math.log(x)] + [(-1) ** (k - 1) * math.factorial(k - 1) / x ** k
                                for k in range(1, order + 1)]
    if func == "sin":
        cyc = [math.sin(x), math.cos(x), -math.sin(x), -math.cos(x)]
        return [cyc[k % 4] for k in range(order + 1)]
    if func == "cos":
        cyc = [math.cos(x), -math.sin(x), -math.cos(x), math.sin(x)]
        return [cyc[k % 4] for k in range(order + 1)]
    if func == "sinh":
        cyc = [math.sinh(x), math.cosh(x)]
        return [cyc[k % 2] for k in range(order + 1)]
    if func == "cosh":
        cyc = [math.cosh(x), math.sinh(x)]
        return [cyc[k % 2] for k in range(order + 1)]
    if func == "tan":
        if abs(math.cos(x)) < el.DENOMINATOR_FLOOR:
            raise ValueError("tan at a pole")
        return _poly_chain(math.tan(x), order, 1.0)
    if func == "tanh":
        return _poly_chain(math.tanh(x), order, -1.0)
    if func == "sqrt":
        if x < 0 or (x == 0 and order > 0):
            raise ValueError("sqrt of negative value" if x < 0 else "sqrt not differentiable at 0")
        return _power_derivs(x, 0.5, order)
    raise ValueError(f"unknown function {func!r}")


# --------------------------------------------------------------------------
# Expression evaluation on jets
# --------------------------------------------------------------------------

def _default_coords(n: int) -> tuple[str, ...]:
    return tuple(f"x{i + 1}" for i in range(n))


def jet_eval_array(expr: el.Expr, point: Sequence[float], order: int,
                   coords: Sequence[str] | None = None,
                   extra: Mapping[str, np.ndarray] | None = None) -> np.ndarray:
    """Evaluate ``expr`` as a jet; returns the raw derivative-value array.

    ``extra`` binds names to precomputed jet arrays (of at least ``order``),
    used for example to let a scalar field depend on the scalar curvature.
    """
    point = np.asarray(point, dtype=float)
    n = len(point)
    coords = tuple(coords) if coords is not None else _default_coords(n)
    if len(coords) != n:
        raise ValueError("coordinate list and point differ in length")
    space = jet_space(n, order)
    cidx = {c: i for i, c in enumerate(coords)}
    extra = {k: jtruncate(np.asarray(v, dtype=float), n, order) for k, v in (extra or {}).items()}

    def rec(node):
        if isinstance(node, el.Num):
            return space.constant(node.value)
        if isinstance(node, el.Const):
            return space.constant(el.CONSTANTS[node.name])
        if isinstance(node, el.Var):
            if node.name in extra:
                return extra[node.name]
            if node.name not in cidx:
                raise UnknownVariableError(node.name)
            return space.seed(cidx[node.name], point)
        if isinstance(node, el.Neg):
            return -rec(node.operand)
        if isinstance(node, el.BinOp):
            a = rec(node.left)
            b = rec(node.right)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return space.mul(a, b)
            return space.mul(a, reciprocal(b, node))
        if isinstance(node, el.Pow):
            return power(rec(node.base), node.exponent, node)
        if isinstance(node, el.Call):
            a = rec(node.arg)
            try:
                if node.func == "tan":
                    s = space.compose(a, univariate_derivs("sin", a[0], order))
                    c = space.compose(a, univariate_derivs("cos", a[0], order))
                    if abs(c[0]) < el.DENOMINATOR_FLOOR:
                        raise ValueError("tan at a pole")
                    return space.mul(s, reciprocal(c, node))
                return space.compose(a, univariate_derivs(node.func, a[0], order))
            except ValueError as exc:
                raise DomainError(str(exc), el.to_text(node), point) from None
        raise TypeError(f"not an expression node: {node!r}")

    def reciprocal(b, node):
        if abs(b[0]) < el.DENOMINATOR_FLOOR:
            raise DomainError("division by (near) zero", el.to_text(node), point)
        return space.compose(b, _power_derivs(b[0], -1.0, order))

    def power(a, p, node):
        if p.denominator == 1:
            k = int(p)
            if k == 0:
                return space.constant(1.0)
            result = a
            for _ in range(abs(k) - 1):
                result = space.mul(result, a)
            return reciprocal(result, node) if k < 0 else result
        if a[0] <= 0:
            raise DomainError("fractional power of non-positive base", el.to_text(node), point)
        return space.compose(a, _power_derivs(a[0], float(p), order))

    return rec(expr)


class Jet:
    """All partial derivatives up to a fixed total order of a scalar at a point."""

    __slots__ = ("n", "order", "data", "_space")

    def __init__(self, data, n: int, order: int | None = None):
        data = np.array(data, dtype=float)
        self._space = space_of(data, n) if order is None else jet_space(n, order)
        if data.shape != (self._space.size,):
            raise ValueError(f"expected {self._space.size} entries, got {data.shape}")
        self.n = n
        self.order = self._space.order
        self.data = data
        self.data.setflags(write=False)

    @property
    def space(self) -> JetSpace:
        return self._space

    @property
    def value(self) -> float:
        return float(self.data[0])

    def __getitem__(self, alpha) -> float:
        """Partial derivative for the multi-index ``alpha`` (a tuple of length n)."""
        return float(self.data[self._space.index[tuple(alpha)]])

    def partial(self, *variables: int) -> float:
        """``partial(0, 1)`` is d^2 f / dx_0 dx_1."""
        alpha = [0] * self.n
        for v in variables:
            alpha[v] += 1
        return self[alpha]

    def gradient(self) -> np.ndarray:
        return np.array([self.partial(i) for i in range(self.n)])

    def hessian(self) -> np.ndarray:
        return np.array([[self.partial(i, j) for j in range(self.n)] for i in range(self.n)])

    def taylor_coefficients(self) -> np.ndarray:
        return self.data / self._space.factorials

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {a: float(v) for a, v in zip(self._space.alphas, self.data)}

    def truncate(self, order: int) -> "Jet":
        return Jet(jtruncate(self.data, self.n, order), self.n, order)

    def derivative(self, i: int) -> "Jet":
        return Jet(self._space.deriv(self.data, i), self.n, self.order - 1)

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.n != self.n:
                raise ValueError("jets over different numbers of variables")
            order = min(self.order, other.order)
            return order, jtruncate(self.data, self.n, order), jtruncate(other.data, self.n, order)
        return self.order, self.data, self._space.constant(float(other))

    def __add__(self, other):
        order, a, b = self._coerce(other)
        return Jet(a + b, self.n, order)

    __radd__ = __add__

    def __sub__(self, other):
        order, a, b = self._coerce(other)
        return Jet(a - b, self.n, order)

    def __rsub__(self, other):
        order, a, b = self._coerce(other)
        return Jet(b - a, self.n, order)

    def __neg__(self):
        return Jet(-self.data, self.n, self.order)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.data * float(other), self.n, self.order)
        order, a, b = self._coerce(other)
        return Jet(jet_space(self.n, order).mul(a, b), self.n, order)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Jet(n={self.n}, order={self.order}, value={self.value:.6g})"


def seed_coordinate(i: int, point: Sequence[float], n: int | None = None, order: int = 1) -> Jet:
    """Jet of the coordinate function ``x_i`` at ``point``."""
    n = len(point) if n is None else n
    if len(point) != n:
        raise ValueError("point length does not match n")
    if not 0 <= i < n:
        raise IndexError(f"coordinate index {i} out of range for n={n}")
    return Jet(jet_space(n, order).seed(i, point), n, order)


def jet_eval(expr: el.Expr, point: Sequence[float], order: int,
             coords: Sequence[str] | None = None) -> Jet:
    """Exact partial derivatives of ``expr`` at ``point`` up to total ``order``."""
    n = len(point)
    return Jet(jet_eval_array(expr, point, order, coords), n, order)


def jcompose(func: str, a: np.ndarray, n: int) -> np.ndarray:
    """Apply an elementary function to a jet array (value-level domain checks)."""
    space = space_of(a, n)
    return space.compose(a, univariate_derivs(func, float(a[0]), space.order))


def jpow(a: np.ndarray, p: float, n: int) -> np.ndarray:
    """Real power of a scalar jet array with positive value."""
    space = space_of(a, n)
    if a[0] <= 0:
        raise DomainError("real power of non-positive value")
    return space.compose(a, _power_derivs(float(a[0]), float(p), space.order))
