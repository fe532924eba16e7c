"""Shared test data: a random expression corpus and finite-difference helpers."""

import numpy as np

from zsym import exprlang as el

COORDS = ("x1", "x2", "x3")


def _atom(rng):
    r = rng.random()
    if r < 0.6:
        return COORDS[rng.integers(len(COORDS))]
    return f"{rng.uniform(0.2, 2.0):.3f}"


def _term(rng, depth):
    if depth == 0:
        return _atom(rng)
    a, b = _term(rng, depth - 1), _term(rng, depth - 1)
    kind = rng.integers(12)
    if kind == 0:
        return f"({a})*({b})"
    if kind == 1:
        return f"({a})+({b})"
    if kind == 2:
        return f"({a})-({b})"
    if kind == 3:
        return f"({a})/(2+cos({b}))"
    if kind == 4:
        return f"exp(0.5*({a}))"
    if kind == 5:
        return f"log(1+({a})^2)"
    if kind == 6:
        return f"sqrt(2+sin({a}))"
    if kind == 7:
        return f"tan(0.3*({a}))*cosh({b})"
    if kind == 8:
        return f"tanh({a})*sinh(0.5*({b}))"
    if kind == 9:
        return f"(1.5+sin({a}))^(1/3)"
    if kind == 10:
        return f"({a})^{int(rng.integers(2, 5))}"
    return f"(3+({a})^2)^(-2)"


def expression_corpus(count=50, seed=7):
    """``count`` random smooth expressions in x1..x3, defined on [-0.5, 0.5]^3."""
    rng = np.random.default_rng(seed)
    return [el.parse(_term(rng, int(rng.integers(1, 4)))) for _ in range(count)]


def evaluate_at(expr, point):
    return el.evaluate(expr, dict(zip(COORDS, point)))


def central_gradient(expr, point, h=1e-4):
    p = np.asarray(point, dtype=float)
    out = np.zeros(len(p))
    for i in range(len(p)):
        e = np.zeros(len(p))
        e[i] = h
        out[i] = (evaluate_at(expr, p + e) - evaluate_at(expr, p - e)) / (2 * h)
    return out


def central_hessian(expr, point, h=1e-4):
    p = np.asarray(point, dtype=float)
    n = len(p)
    f0 = evaluate_at(expr, p)
    out = np.zeros((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        out[i, i] = (evaluate_at(expr, p + ei) - 2 * f0 + evaluate_at(expr, p - ei)) / h ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            v = (evaluate_at(expr, p + ei + ej) - evaluate_at(expr, p + ei - ej)
                 - evaluate_at(expr, p - ei + ej) + evaluate_at(expr, p - ei - ej)) / (4 * h ** 2)
            out[i, j] = out[j, i] = v
    return out
