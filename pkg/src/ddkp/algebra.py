"""Quasi-local polynomial expressions and their exact rewrite calculus.

An :class:`Expression` is a finite sum of monomials

    c * x^a * n^b * prod u[m,j]^e * prod Dinv(f)^e

with rational ``c``.  ``u[m,j]`` is the ``j``-th x-derivative of ``u`` shifted
``m`` lattice sites, and ``Dinv`` is the formal inverse of ``S - 1``.
``Theta(f)`` is sugar for ``Dinv(Dx f)``.

Every rewrite used here is an identity of the definite-sum realization of
``Dinv`` (see :mod:`ddkp.oracle`), so normalization never changes the value
of an expression on any admissible lattice state.  Zero recognition is
syntactic only.
"""
from __future__ import annotations

import contextvars
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterator, NamedTuple, Union

from . import syntax
from .errors import NonSummableAtom

__all__ = [
    "Jet",
    "Atom",
    "Monomial",
    "Expression",
    "ZERO",
    "ONE",
    "X",
    "N",
    "const",
    "u",
    "add",
    "mul",
    "shift",
    "dx",
    "apply_dinv",
    "theta",
    "normalize",
    "equal_nf",
    "counting_sums",
    "counting_enabled",
]

Scalar = Union[int, Fraction]


class Jet(NamedTuple):
    m: int  # shift order
    j: int  # x-derivative order


# Monomial key: (jets, atoms, xdeg, ndeg) with
#   jets  = sorted tuple of ((m, j), exponent)
#   atoms = tuple of (Atom, exponent) sorted by Atom.order
Key = tuple

_UNIT: Key = ((), (), 0, 0)

_COUNTING = contextvars.ContextVar("ddkp_counting_sums", default=False)


@contextmanager
def counting_sums(enabled: bool = True):
    """Admit ``Dinv`` of u-free terms inside the block.

    With the definite-sum realization ``Dinv(1)`` is the counting function
    ``n - n0``.  It is kept as an opaque atom, so every rewrite stays exact.
    Outside this block such sums raise :class:`NonSummableAtom`.
    """
    token = _COUNTING.set(enabled)
    try:
        yield
    finally:
        _COUNTING.reset(token)


def counting_enabled() -> bool:
    return _COUNTING.get()


def _canon(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


class Atom:
    """``Dinv`` applied to a normalized expression.

    Atoms are interned: build them with :meth:`Atom.of`.
    """

    __slots__ = ("arg", "depth", "degree", "u_dependent", "order", "_hash", "__weakref__")
    _interned: dict = {}

    def __init__(self, arg: "Expression"):
        self.arg = arg
        depth = 0
        degree = 0
        dep = False
        for key in arg._d:
            jets, atoms = key[0], key[1]
            if jets:
                dep = True
            for a, _ in atoms:
                depth = max(depth, a.depth)
                dep = dep or a.u_dependent
            degree = max(degree, _key_degree(key))
        self.depth = depth + 1
        self.degree = degree
        self.u_dependent = dep
        self.order = (self.depth, arg.order_key())
        self._hash = hash(("Dinv", arg))

    @classmethod
    def of(cls, arg: "Expression") -> "Atom":
        if not isinstance(arg, Expression):
            raise TypeError("atom argument must be an Expression")
        if arg.is_zero():
            raise ValueError("atom argument must be nonzero")
        try:
            return cls._interned[arg]
        except KeyError:
            atom = cls(arg)
            cls._interned[arg] = atom
            return atom

    def __eq__(self, other):
        return self is other or (isinstance(other, Atom) and self.arg == other.arg)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Dinv({self.arg!r})"


def _key_degree(key: Key) -> int:
    jets, atoms = key[0], key[1]
    return sum(e for _, e in jets) + sum(a.degree * e for a, e in atoms)


def _term_order(key: Key) -> tuple:
    jets, atoms, xdeg, ndeg = key
    depth = max((a.depth for a, _ in atoms), default=0)
    return (
        _key_degree(key),
        depth,
        jets,
        tuple((a.order, e) for a, e in atoms),
        xdeg,
        ndeg,
    )


def _merge_jets(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


def _atom_sort(item):
    return item[0].order


def _merge_atoms(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items(), key=_atom_sort))


def _mul_key(k1: Key, k2: Key) -> Key:
    return (
        _merge_jets(k1[0], k2[0]),
        _merge_atoms(k1[1], k2[1]),
        k1[2] + k2[2],
        k1[3] + k2[3],
    )


def _accumulate(acc: dict, key: Key, c) -> None:
    v = acc.get(key, 0) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


@dataclass(frozen=True)
class Monomial:
    """One term ``coeff * x^xdeg * n^ndeg * jets * atoms``."""

    coeff: Fraction
    xdeg: int
    ndeg: int
    jets: tuple[tuple[Jet, int], ...]
    atoms: tuple[tuple[Atom, int], ...]

    @property
    def key(self) -> Key:
        return (tuple((tuple(j), e) for j, e in self.jets), self.atoms, self.xdeg, self.ndeg)

    @property
    def degree(self) -> int:
        return _key_degree(self.key)


class Expression:
    """Immutable normalized sum of monomials.

    Internally a mapping from monomial key to nonzero coefficient.  Supports
    ``+``, ``-``, ``*`` and integer powers with other expressions and with
    rational scalars.
    """

    __slots__ = ("_d", "_hash", "_order", "__weakref__")

    def __init__(self, terms: dict | None = None):
        self._d = {} if terms is None else terms
        self._hash = None
        self._order = None

    @classmethod
    def from_monomials(cls, monomials) -> "Expression":
        acc: dict = {}
        for mono in monomials:
            if mono.coeff:
                _check_key(mono.key)
                _accumulate(acc, mono.key, _canon(Fraction(mono.coeff)))
        return cls(acc)

    # -- structure -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self._d

    def __bool__(self):
        return bool(self._d)

    def __len__(self):
        return len(self._d)

    def items(self):
        return self._d.items()

    @property
    def terms(self) -> list[Monomial]:
        """Monomials in the canonical order."""
        out = []
        for key in sorted(self._d, key=_term_order):
            jets, atoms, xdeg, ndeg = key
            out.append(
                Monomial(
                    Fraction(self._d[key]),
                    xdeg,
                    ndeg,
                    tuple((Jet(*j), e) for j, e in jets),
                    atoms,
                )
            )
        return out

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self.terms)

    def order_key(self) -> tuple:
        if self._order is None:
            self._order = tuple(
                (_term_order(k), Fraction(self._d[k])) for k in sorted(self._d, key=_term_order)
            )
        return self._order

    def atoms(self) -> set[Atom]:
        """All atoms occurring at the top level of some term."""
        return {a for key in self._d for a, _ in key[1]}

    def max_shift(self) -> int:
        """Largest ``|m|`` over all jets, looking inside atoms."""
        best = 0
        for jets, atoms, _, _ in self._d:
            for (m, _), _ in jets:
                best = max(best, abs(m))
            for a, _ in atoms:
                best = max(best, a.arg.max_shift())
        return best

    def is_local_coefficient_free(self) -> bool:
        """True when no term carries an explicit ``x`` or ``n`` factor."""
        return all(k[2] == 0 and k[3] == 0 for k in self._d)

    # -- equality --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Expression):
            return self._d == other._d
        if isinstance(other, (int, Fraction)):
            return self._d == const(other)._d
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._d.items()))
        return self._hash

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return Expression({k: -c for k, c in self._d.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return add(self, -other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return add(other, -self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, Expression):
            return mul(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = ONE
        base = self
        while k:
            if k & 1:
                result = mul(result, base)
            k >>= 1
            if k:
                base = mul(base, base)
        return result

    def scale(self, c: Scalar) -> "Expression":
        c = _canon(Fraction(c))
        if not c:
            return ZERO
        return Expression({k: _canon(v * c) for k, v in self._d.items()})

    def __repr__(self):
        from .dsl import print_canonical

        return f"Expression({print_canonical(self)!r})"

    def __str__(self):
        from .dsl import print_canonical

        return print_canonical(self)


def _coerce(value):
    if isinstance(value, Expression):
        return value
    if isinstance(value, (int, Fraction)):
        return const(value)
    return NotImplemented


def _check_key(key: Key) -> None:
    jets, atoms, xdeg, ndeg = key
    if xdeg < 0 or ndeg < 0:
        raise ValueError("negative x or n degree")
    for (m, j), e in jets:
        if j < 0:
            raise ValueError("negative derivative order")
        if e <= 0:
            raise ValueError("jet exponents must be positive")
    for a, e in atoms:
        if not isinstance(a, Atom) or e <= 0:
            raise ValueError("malformed atom factor")


ZERO = Expression()
ONE = Expression({_UNIT: 1})
X = Expression({((), (), 1, 0): 1})
N = Expression({((), (), 0, 1): 1})


def const(c: Scalar) -> Expression:
    c = _canon(Fraction(c))
    return Expression({_UNIT: c}) if c else ZERO


def u(m: int = 0, j: int = 0) -> Expression:
    """The jet variable ``u[m,j]``."""
    if j < 0:
        raise ValueError("derivative order must be non-negative")
    return Expression({((((m, j), 1),), (), 0, 0): 1})


def _monomial(key: Key, c=1) -> Expression:
    return Expression({key: c})


def add(a: Expression, b: Expression) -> Expression:
    if not b._d:
        return a
    if not a._d:
        return b
    acc = dict(a._d)
    for k, c in b._d.items():
        _accumulate(acc, k, c)
    return Expression(acc)


def mul(a: Expression, b: Expression) -> Expression:
    if not a._d or not b._d:
        return ZERO
    acc: dict = {}
    for k1, c1 in a._d.items():
        for k2, c2 in b._d.items():
            _accumulate(acc, _mul_key(k1, k2), c1 * c2)
    return Expression(acc)


def _addmul(acc: dict, key: Key, c, e: Expression) -> None:
    """acc += c * monomial(key) * e"""
    for k2, c2 in e._d.items():
        _accumulate(acc, _mul_key(key, k2), c * c2)


def _drop_jet(jets, index):
    (jet, e) = jets[index]
    if e == 1:
        return jets[:index] + jets[index + 1 :]
    return jets[:index] + ((jet, e - 1),) + jets[index + 1 :]


def _drop_atom(atoms, index):
    (atom, e) = atoms[index]
    if e == 1:
        return atoms[:index] + atoms[index + 1 :]
    return atoms[:index] + ((atom, e - 1),) + atoms[index + 1 :]


def _atom_expr(atom: Atom) -> Expression:
    return _monomial(((), ((atom, 1),), 0, 0))


# -- shift -------------------------------------------------------------------


def shift(e: Expression, k: int) -> Expression:
    """Apply ``S^k``.

    Jets move by ``k`` sites, ``n`` becomes ``n + k`` and atoms use
    ``S Dinv = Dinv + 1`` (or ``S^-1 Dinv = Dinv - S^-1``).  ``x`` is fixed.
    """
    if k == 0 or not e._d:
        return e
    acc: dict = {}
    for key, c in e._d.items():
        jets, atoms, xdeg, ndeg = key
        moved = tuple(((m + k, j), p) for (m, j), p in jets)
        if not atoms and ndeg == 0:
            _accumulate(acc, (moved, (), xdeg, 0), c)
            continue
        part = _monomial((moved, (), xdeg, 0), c)
        if ndeg:
            part = mul(part, _n_plus(k, ndeg))
        for atom, p in atoms:
            part = mul(part, _shift_atom(atom, k) ** p)
        for k2, c2 in part._d.items():
            _accumulate(acc, k2, c2)
    return Expression(acc)


@lru_cache(maxsize=None)
def _n_plus(k: int, b: int) -> Expression:
    acc = {}
    for i in range(b + 1):
        c = comb(b, i) * k ** (b - i)
        if c:
            acc[((), (), 0, i)] = c
    return Expression(acc)


@lru_cache(maxsize=None)
def _shift_atom(atom: Atom, k: int) -> Expression:
    out = _atom_expr(atom)
    if k > 0:
        for i in range(k):
            out = add(out, shift(atom.arg, i))
    else:
        for i in range(1, -k + 1):
            out = add(out, -shift(atom.arg, -i))
    return out


# -- x-derivative ------------------------------------------------------------


def dx(e: Expression) -> Expression:
    """Total x-derivative.  ``Dx`` commutes with ``Dinv``."""
    acc: dict = {}
    for key, c in e._d.items():
        jets, atoms, xdeg, ndeg = key
        if xdeg:
            _accumulate(acc, (jets, atoms, xdeg - 1, ndeg), c * xdeg)
        for i, ((m, j), p) in enumerate(jets):
            rest = (_drop_jet(jets, i), atoms, xdeg, ndeg)
            _accumulate(acc, _mul_key(rest, ((((m, j + 1), 1),), (), 0, 0)), c * p)
        for i, (atom, p) in enumerate(atoms):
            d = _dx_atom(atom)
            if d._d:
                _addmul(acc, (jets, _drop_atom(atoms, i), xdeg, ndeg), c * p, d)
    return Expression(acc)


@lru_cache(maxsize=None)
def _dx_atom(atom: Atom) -> Expression:
    return apply_dinv(dx(atom.arg))


# -- inverse difference ------------------------------------------------------


def apply_dinv(e: Expression) -> Expression:
    """Apply ``Dinv = (S - 1)^-1`` with the exact rewrite cascade.

    Per term: linearity over rationals, ``Dinv(x^a T) = x^a Dinv(T)`` and
    ``Dinv(n T) = n Dinv(T) - Dinv(T) - Dinv(Dinv(T))`` until no ``n`` is
    left; the remaining core becomes an atom.  ``Dinv((S-1) h) -> h`` is not
    used: it only holds up to the value of ``h`` at the base point.

    Raises :class:`NonSummableAtom` if a core does not depend on ``u``
    (unless :func:`counting_sums` is active).
    """
    counting = _COUNTING.get()
    acc: dict = {}
    for key, c in e._d.items():
        jets, atoms, xdeg, ndeg = key
        body = _dinv_core(ndeg, (jets, atoms, 0, 0), counting)
        for k2, c2 in body._d.items():
            _accumulate(acc, (k2[0], k2[1], k2[2] + xdeg, k2[3]), c * c2)
    return Expression(acc)


@lru_cache(maxsize=None)
def _dinv_core(ndeg: int, core: Key, counting: bool) -> Expression:
    if ndeg == 0:
        jets, atoms = core[0], core[1]
        if not counting and not jets and not any(a.u_dependent for a, _ in atoms):
            raise NonSummableAtom(
                "Dinv applied to a term without u-dependence; "
                "the sum leaves the quasi-local space"
            )
        return _atom_expr(Atom.of(_monomial(core)))
    inner = _dinv_core(ndeg - 1, core, counting)
    return add(add(mul(N, inner), -inner), -apply_dinv(inner))


def theta(e: Expression) -> Expression:
    """``Theta = Dinv Dx``."""
    return apply_dinv(dx(e))


# -- normalization -----------------------------------------------------------


def normalize(tree) -> Expression:
    """Canonical form of a raw tree, a scalar, or an existing expression.

    Expressions are rebuilt from scratch, re-running the rewrite cascade
    inside every atom, so ``normalize`` is idempotent.
    """
    if isinstance(tree, Expression):
        return _renormalize(tree)
    if isinstance(tree, (int, Fraction)):
        return const(tree)
    if isinstance(tree, syntax.Num):
        return const(tree.value)
    if isinstance(tree, syntax.Var):
        if tree.name == "x":
            return X
        if tree.name == "n":
            return N
        raise ValueError(f"unknown variable {tree.name!r}")
    if isinstance(tree, syntax.JetNode):
        return u(tree.m, tree.j)
    if isinstance(tree, syntax.Builtin):
        from .symmetries import builtin

        return builtin(tree.name)
    if isinstance(tree, syntax.Sum):
        out = ZERO
        for item in tree.items:
            out = add(out, normalize(item))
        return out
    if isinstance(tree, syntax.Neg):
        return -normalize(tree.item)
    if isinstance(tree, syntax.Product):
        out = ONE
        for item in tree.items:
            out = mul(out, normalize(item))
        return out
    if isinstance(tree, syntax.Power):
        return normalize(tree.base) ** tree.exp
    if isinstance(tree, syntax.Theta):
        return theta(normalize(tree.arg))
    if isinstance(tree, syntax.Dinv):
        return apply_dinv(normalize(tree.arg))
    if isinstance(tree, syntax.Dx):
        return dx(normalize(tree.arg))
    if isinstance(tree, syntax.Shift):
        return shift(normalize(tree.arg), tree.k)
    raise TypeError(f"cannot normalize {type(tree).__name__}")


def _renormalize(e: Expression) -> Expression:
    acc: dict = {}
    for key, c in e._d.items():
        jets, atoms, xdeg, ndeg = key
        part = _monomial((jets, (), xdeg, ndeg), c)
        for atom, p in atoms:
            part = mul(part, apply_dinv(_renormalize(atom.arg)) ** p)
        for k2, c2 in part._d.items():
            _accumulate(acc, k2, c2)
    return Expression(acc)


def equal_nf(a: Expression, b: Expression) -> bool:
    """Syntactic equality of normal forms (sound, not complete)."""
    return a._d == b._d
