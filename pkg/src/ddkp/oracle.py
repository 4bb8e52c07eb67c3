"""Exact evaluation semantics and randomized zero testing.

A :class:`LatticeState` assigns a polynomial in ``x`` to finitely many
lattice sites.  ``Dinv(f)`` is realized as the definite sum

    Dinv(f)(n) = sum_{k=n0}^{n-1} f(k)

from the state's base point ``n0``, which lies left of everything the
expression can reach.  All arithmetic is exact (ints and Fractions).
"""
from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .algebra import Atom, Expression
from .errors import BasePointViolation

__all__ = [
    "Poly",
    "LatticeState",
    "DualValue",
    "ZeroTestConfig",
    "Verdict",
    "eval_expr",
    "random_state",
    "zero_test",
    "directional_eval",
    "default_seed",
]

Number = Union[int, Fraction]


class Poly:
    """Dense univariate polynomial in ``x`` with exact coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = list(coeffs)
        while c and not c[-1]:
            c.pop()
        self.c = c

    def __call__(self, x):
        acc = 0
        for a in reversed(self.c):
            acc = acc * x + a
        return acc

    def deriv(self, j: int = 1) -> "Poly":
        c = self.c
        for _ in range(j):
            c = [i * a for i, a in enumerate(c)][1:]
        return Poly(c)

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        a, b = self.c, other.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] += v
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly([-a for a in self.c])

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly) else Poly([-other]))

    def __rsub__(self, other):
        return -self + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly([a * other for a in self.c])
        if not self.c or not other.c:
            return Poly()
        out = [0] * (len(self.c) + len(other.c) - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(other.c):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly([1])
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        return self.c == other.c

    def __bool__(self):
        return bool(self.c)

    def __repr__(self):
        return f"Poly({self.c})"


@dataclass(frozen=True)
class LatticeState:
    """Compactly supported lattice data ``n -> u(n, x)``.

    ``margin`` is the shift span the state was built for: expressions whose
    jets shift further than ``margin`` are rejected by :func:`eval_expr`.
    """

    support: dict  # site -> Poly
    base_point: int
    margin: int = 0

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        if self.support and self.base_point + self.margin >= min(self.support):
            raise BasePointViolation(
                f"base point {self.base_point} is not left of the support "
                f"(min site {min(self.support)}, margin {self.margin})"
            )

    def site(self, n: int) -> Poly:
        return self.support.get(n, _ZERO_POLY)

    @property
    def max_site(self) -> int:
        return max(self.support, default=self.base_point)

    @property
    def min_site(self) -> int:
        return min(self.support, default=self.base_point + 1)

    def to_data(self) -> dict:
        return {
            "base_point": self.base_point,
            "margin": self.margin,
            "support": {str(k): [str(Fraction(a)) for a in p.c] for k, p in sorted(self.support.items())},
        }


_ZERO_POLY = Poly()


@dataclass(frozen=True)
class DualValue:
    """First-order perturbation ``primal + tangent * eps`` with ``eps^2 = 0``."""

    primal: Number
    tangent: Number = 0

    def __add__(self, other):
        if isinstance(other, DualValue):
            return DualValue(self.primal + other.primal, self.tangent + other.tangent)
        return DualValue(self.primal + other, self.tangent)

    __radd__ = __add__

    def __neg__(self):
        return DualValue(-self.primal, -self.tangent)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return -self + other

    def __mul__(self, other):
        if isinstance(other, DualValue):
            return DualValue(
                self.primal * other.primal,
                self.primal * other.tangent + self.tangent * other.primal,
            )
        return DualValue(self.primal * other, self.tangent * other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = DualValue(1)
        for _ in range(k):
            out = out * self
        return out


class _Evaluator:
    """Evaluate expressions on one state in one value domain.

    ``leaf(site, j)`` supplies the value of ``Dx^j u`` at a site and
    ``xval`` the value of ``x``.  Atom values are cached as running sums
    starting at the base point.
    """

    def __init__(self, state: LatticeState, leaf, xval):
        self.state = state
        self.leaf = leaf
        self.xval = xval
        self.n0 = state.base_point
        self._leaves: dict = {}
        self._sums: dict = {}  # atom -> [A(n0), A(n0+1), ...]

    def jet(self, site: int, j: int):
        key = (site, j)
        try:
            return self._leaves[key]
        except KeyError:
            v = self.leaf(site, j)
            self._leaves[key] = v
            return v

    def atom(self, atom: Atom, n: int):
        idx = n - self.n0
        if idx < 0:
            # continuation keeping (S - 1) A = f left of the base point
            total = 0
            for k in range(n, self.n0):
                total = total - self.value(atom.arg, k)
            return total
        sums = self._sums.get(atom)
        if sums is None:
            sums = self._sums[atom] = [0]
        while len(sums) <= idx:
            k = self.n0 + len(sums) - 1
            sums.append(sums[-1] + self.value(atom.arg, k))
        return sums[idx]

    def value(self, e: Expression, n: int):
        total = 0
        xval = self.xval
        for (jets, atoms, xdeg, ndeg), c in e.items():
            v = c
            if xdeg:
                v = v * xval**xdeg
            if ndeg:
                v = v * n**ndeg
            for (m, j), p in jets:
                f = self.jet(n + m, j)
                v = v * (f if p == 1 else f**p)
            for a, p in atoms:
                f = self.atom(a, n)
                v = v * (f if p == 1 else f**p)
            total = total + v
        return total


def _check_reach(e: Expression, state: LatticeState, n: int) -> None:
    if n < state.base_point:
        raise BasePointViolation(f"evaluation site {n} lies left of the base point {state.base_point}")
    span = e.max_shift()
    if span > state.margin:
        raise BasePointViolation(
            f"expression reaches {span} sites but the state was built for margin {state.margin}"
        )


def _numeric_leaf(state: LatticeState, x):
    def leaf(site, j):
        return state.site(site).deriv(j)(x)

    return leaf


def eval_expr(e: Expression, s: LatticeState, n: int, x: Number) -> Number:
    """Exact value of ``e`` at site ``n`` and point ``x``."""
    _check_reach(e, s, n)
    return _Evaluator(s, _numeric_leaf(s, x), x).value(e, n)


def _as_poly_values(v: Expression, s: LatticeState):
    """Value of ``v`` at each site as a polynomial in ``x``."""
    ev = _Evaluator(s, lambda site, j: s.site(site).deriv(j), Poly([0, 1]))

    def at(site):
        val = ev.value(v, site)
        return val if isinstance(val, Poly) else Poly([val])

    return at


def directional_eval(f: Expression, v: Expression, s: LatticeState, n: int, x: Number) -> Number:
    """Tangent of ``f`` at ``(n, x)`` when ``u`` is perturbed along ``v``.

    Each leaf ``Dx^j u(site)`` carries as tangent the j-th x-derivative of
    ``v`` evaluated at that site.  ``v`` itself is evaluated on polynomials
    in ``x`` and differentiated there, so no symbolic derivative is used.
    """
    _check_reach(f, s, n)
    v_at = _as_poly_values(v, s)
    cache: dict = {}

    def leaf(site, j):
        if site not in cache:
            cache[site] = v_at(site)
        return DualValue(s.site(site).deriv(j)(x), cache[site].deriv(j)(x))

    result = _Evaluator(s, leaf, DualValue(x)).value(f, n)
    return result.tangent if isinstance(result, DualValue) else 0


def default_seed() -> int:
    """Seed used when none is given; ``DDKP_SEED`` overrides it."""
    return int(os.environ.get("DDKP_SEED", "20140701"))


@dataclass(frozen=True)
class ZeroTestConfig:
    trials: int = 20
    support_width: int = 6
    xdeg_max: int = 4
    coefficient_range: int = 9
    # offsets from the first support site; None spans the base point up to
    # two sites beyond the furthest reachable one
    n_samples: Optional[tuple] = None
    x_samples: tuple = (257, -1031, 4099)
    seed: int = field(default_factory=default_seed)

    def __post_init__(self):
        if self.trials < 1 or self.support_width < 1:
            raise ValueError("trials and support_width must be positive")
        if self.xdeg_max < 0 or self.coefficient_range < 1:
            raise ValueError("xdeg_max must be >= 0 and coefficient_range >= 1")
        if len(set(self.x_samples)) != len(self.x_samples) or not self.x_samples:
            raise ValueError("x_samples must be non-empty and pairwise distinct")

    def to_data(self) -> dict:
        return {
            "trials": self.trials,
            "support_width": self.support_width,
            "xdeg_max": self.xdeg_max,
            "coefficient_range": self.coefficient_range,
            "n_samples": None if self.n_samples is None else list(self.n_samples),
            "x_samples": [str(Fraction(x)) for x in self.x_samples],
            "seed": self.seed,
        }


def random_state(cfg: ZeroTestConfig, trial: int, span: int = 0) -> LatticeState:
    """Deterministic random state for ``(cfg.seed, trial)``.

    Sites ``0 .. support_width-1`` carry polynomials of degree up to
    ``xdeg_max`` with nonzero integer coefficients; the base point sits
    ``span + 1`` sites left of the support.
    """
    rng = random.Random(f"{cfg.seed}:{trial}")
    r = cfg.coefficient_range
    support = {}
    for site in range(cfg.support_width):
        deg = rng.randint(0, cfg.xdeg_max)
        coeffs = [rng.choice((-1, 1)) * rng.randint(1, r) for _ in range(deg + 1)]
        support[site] = Poly(coeffs)
    return LatticeState(support, base_point=-span - 1, margin=span)


@dataclass(frozen=True)
class Verdict:
    """Outcome of :func:`zero_test`.

    ``kind`` is ``"exact-zero"``, ``"zero-mod-n-constant"`` or ``"nonzero"``.
    """

    kind: str
    trials: int
    evaluations: int
    witness: Optional[dict] = None

    @property
    def is_zero(self) -> bool:
        return self.kind == "exact-zero"

    def to_data(self) -> dict:
        return {
            "kind": self.kind,
            "trials": self.trials,
            "evaluations": self.evaluations,
            "witness": self.witness,
        }


def _sites(cfg: ZeroTestConfig, state: LatticeState, span: int) -> list[int]:
    if cfg.n_samples is not None:
        return sorted({state.base_point if o is None else max(state.base_point, o) for o in cfg.n_samples})
    return list(range(state.base_point, state.max_site + span + 3))


def zero_test(e: Expression, cfg: ZeroTestConfig | None = None) -> Verdict:
    """Decide whether ``e`` vanishes on random states.

    One nonzero value is conclusive.  If every value is nonzero but constant
    in ``n`` for each state and ``x``, the residual lies in the kernel of
    ``S - 1`` and is reported as ``zero-mod-n-constant``.
    """
    cfg = cfg or ZeroTestConfig()
    span = e.max_shift()
    evaluations = 0
    if e.is_zero():
        return Verdict("exact-zero", cfg.trials, 0)
    first_nonzero = None
    n_constant = True
    for trial in range(cfg.trials):
        state = random_state(cfg, trial, span)
        sites = _sites(cfg, state, span)
        evaluators = [_Evaluator(state, _numeric_leaf(state, x), x) for x in cfg.x_samples]
        values = [[] for _ in cfg.x_samples]
        for n in sites:
            for i, ev in enumerate(evaluators):
                val = ev.value(e, n)
                evaluations += 1
                values[i].append(val)
                if val and first_nonzero is None:
                    first_nonzero = {
                        "trial": trial,
                        "n": n,
                        "x": str(Fraction(cfg.x_samples[i])),
                        "value": str(Fraction(val)),
                        "state": state.to_data(),
                    }
        if any(v != row[0] for row in values for v in row):
            n_constant = False
        if first_nonzero is not None and not n_constant:
            break
    if first_nonzero is None:
        return Verdict("exact-zero", cfg.trials, evaluations)
    if n_constant:
        return Verdict("zero-mod-n-constant", cfg.trials, evaluations, first_nonzero)
    return Verdict("nonzero", cfg.trials, evaluations, first_nonzero)
