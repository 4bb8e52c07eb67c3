"""Random expression generators and independent reference semantics."""
from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from ddkp import syntax
from ddkp.algebra import X, N, Expression, apply_dinv, const, normalize, theta, u
from ddkp.oracle import LatticeState, Poly, eval_expr

COEFFS = [1, -1, 2, -2, 3, Fraction(1, 2), Fraction(-3, 2)]


# -- raw trees -------------------------------------------------------------------


def random_tree(rng: random.Random, depth: int = 3) -> syntax.Node:
    """A raw tree that normalizes without leaving the quasi-local space."""
    if depth <= 0:
        r = rng.random()
        if r < 0.5:
            return syntax.JetNode(rng.randint(-1, 1), rng.randint(0, 2))
        if r < 0.7:
            return syntax.Num(Fraction(rng.choice(COEFFS)))
        return syntax.Var(rng.choice("xn"))
    kind = rng.choice(
        ["leaf", "leaf", "sum", "prod", "neg", "pow", "theta", "dinv", "dx", "shift"]
    )
    sub = lambda: random_tree(rng, depth - 1)  # noqa: E731
    if kind == "leaf":
        return random_tree(rng, 0)
    if kind == "sum":
        return syntax.Sum(tuple(sub() for _ in range(rng.randint(2, 3))))
    if kind == "prod":
        return syntax.Product((sub(), sub()))
    if kind == "neg":
        return syntax.Neg(sub())
    if kind == "pow":
        return syntax.Power(random_tree(rng, min(depth - 1, 1)), 2)
    # a jet factor keeps every summed term u-dependent
    jet = syntax.JetNode(rng.randint(-1, 1), rng.randint(0, 2))
    if kind == "theta":
        return syntax.Theta(syntax.Product((jet, sub())))
    if kind == "dinv":
        return syntax.Dinv(syntax.Product((jet, sub())))
    if kind == "dx":
        return syntax.Dx(sub())
    return syntax.Shift(rng.choice([-2, -1, 1, 2]), sub())


@st.composite
def trees(draw, depth: int = 3):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_tree(random.Random(seed), depth)


# -- small expressions for bracket properties ------------------------------------


def random_small(rng: random.Random, max_terms: int = 3, shifts: bool = True) -> Expression:
    """Short sums of u-dependent monomials, optionally with one nonlocal factor."""
    out = const(0)
    mrange = (-1, 0, 1) if shifts else (0,)
    for _ in range(rng.randint(1, max_terms)):
        term = const(rng.choice(COEFFS))
        if rng.random() < 0.2:
            term = term * X
        if rng.random() < 0.2:
            term = term * N
        for _ in range(rng.randint(1, 2)):
            term = term * u(rng.choice(mrange), rng.randint(0, 2))
        r = rng.random()
        if r < 0.15:
            term = term * theta(u(rng.choice(mrange), rng.randint(0, 1)))
        elif r < 0.25:
            term = term * apply_dinv(u(0, rng.randint(0, 1)) * u(rng.choice(mrange), rng.randint(0, 1)))
        out = out + term
    return out if not out.is_zero() else u()


@st.composite
def small_exprs(draw, max_terms: int = 3, shifts: bool = True):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_small(random.Random(seed), max_terms, shifts)


# -- reference semantics -------------------------------------------------------------


class TreeSemantics:
    """Evaluate raw trees directly: values are polynomials in x per site.

    ``Dinv`` is the brute-force definite sum from the base point, ``Dx`` is
    polynomial differentiation and ``S^k`` re-indexes the site.  Nothing here
    goes through the normal-form machinery.
    """

    def __init__(self, state: LatticeState):
        self.state = state
        self.memo: dict = {}
        self._dx_nodes: dict = {}

    def __call__(self, node, n: int) -> Poly:
        key = (id(node), n)
        if key not in self.memo:
            self.memo[key] = self._eval(node, n)
        return self.memo[key]

    def _eval(self, node, n):
        s = self.state
        if isinstance(node, syntax.Num):
            return Poly([node.value])
        if isinstance(node, syntax.Var):
            return Poly([0, 1]) if node.name == "x" else Poly([n])
        if isinstance(node, syntax.JetNode):
            return s.site(n + node.m).deriv(node.j)
        if isinstance(node, syntax.Sum):
            out = Poly()
            for item in node.items:
                out = out + self(item, n)
            return out
        if isinstance(node, syntax.Neg):
            return -self(node.item, n)
        if isinstance(node, syntax.Product):
            out = Poly([1])
            for item in node.items:
                out = out * self(item, n)
            return out
        if isinstance(node, syntax.Power):
            return self(node.base, n) ** node.exp
        if isinstance(node, syntax.Dx):
            return self(node.arg, n).deriv()
        if isinstance(node, syntax.Shift):
            return self(node.arg, n + node.k)
        if isinstance(node, (syntax.Dinv, syntax.Theta)):
            if isinstance(node, syntax.Dinv):
                arg = node.arg
            else:
                arg = self._dx_nodes.setdefault(id(node), syntax.Dx(node.arg))
            n0 = s.base_point
            out = Poly()
            if n >= n0:
                for k in range(n0, n):
                    out = out + self(arg, k)
            else:
                for k in range(n, n0):
                    out = out - self(arg, k)
            return out
        raise TypeError(node)


def tree_max_shift(node) -> int:
    """Generous bound on how far a tree can reach."""
    if isinstance(node, syntax.JetNode):
        return abs(node.m)
    if isinstance(node, syntax.Shift):
        return abs(node.k) + tree_max_shift(node.arg)
    children = []
    for attr in ("items", "item", "base", "arg"):
        v = getattr(node, attr, None)
        if isinstance(v, tuple):
            children.extend(v)
        elif v is not None:
            children.append(v)
    return max((tree_max_shift(c) for c in children), default=0)


def definite_sum(f: Expression, state: LatticeState, n: int, x) -> Fraction:
    """``sum_{k=n0}^{n-1} f(k)`` by explicit looping."""
    return sum((eval_expr(f, state, k, x) for k in range(state.base_point, n)), Fraction(0))


def interpolate(points, values) -> Poly:
    """Lagrange interpolation over the rationals."""
    coeffs = [Fraction(0)] * len(points)
    for i, xi in enumerate(points):
        basis = Poly([1])
        denom = Fraction(1)
        for j, xj in enumerate(points):
            if j != i:
                basis = basis * Poly([-xj, 1])
                denom *= xi - xj
        term = basis * (Fraction(values[i]) / denom)
        for k, c in enumerate(term.c):
            coeffs[k] += c
    return Poly(coeffs)


def x_polynomial(e: Expression, state: LatticeState, n: int, degree_bound: int) -> Poly:
    """Recover ``e(n, .)`` as a polynomial by exact interpolation."""
    pts = list(range(degree_bound + 1))
    return interpolate(pts, [eval_expr(e, state, n, x) for x in pts])


def perturbation_derivative(f: Expression, v: Expression, state: LatticeState, n: int, x, degree_bound: int = 30, eps_points: int = 7):
    """``d/d eps F[u + eps V]`` at ``eps = 0`` by brute force.

    ``V`` is tabulated per site as a polynomial in ``x``; ``F`` is then
    evaluated on genuinely perturbed states and the linear coefficient in
    ``eps`` recovered by interpolation.  ``state.margin`` must cover the
    spans of both ``F`` and ``V``.
    """
    fspan = f.max_shift()
    sites = range(state.base_point + 1, n + fspan + 1)
    vpolys = {k: x_polynomial(v, state, k, degree_bound) for k in sites}
    values = []
    for eps in range(eps_points):
        support = {k: state.site(k) + vpolys[k] * eps for k in sites}
        support = {k: p for k, p in support.items() if p}
        perturbed = LatticeState(support, state.base_point, margin=fspan)
        values.append(eval_expr(f, perturbed, n, x))
    coeffs = interpolate(list(range(eps_points)), values).c
    return coeffs[1] if len(coeffs) > 1 else Fraction(0)


def latex_summands(text: str) -> set:
    """Signed top-level summands of a LaTeX sum, for order-free comparison."""
    terms, cur, depth = [], "", 0
    for ch in text:
        if ch in "+-" and depth == 0 and cur:
            terms.append(cur)
            cur = ""
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        cur += ch
    terms.append(cur)
    return {t if t[0] in "+-" else "+" + t for t in terms}


__all__ = [
    "latex_summands",
    "random_tree",
    "trees",
    "random_small",
    "small_exprs",
    "TreeSemantics",
    "tree_max_shift",
    "definite_sum",
    "x_polynomial",
    "interpolate",
    "perturbation_derivative",
    "normalize",
]
