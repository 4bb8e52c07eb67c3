"""Fréchet derivatives, the Lie bracket and iterated adjoint actions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .algebra import (
    Atom,
    Expression,
    ZERO,
    _accumulate,
    _addmul,
    _drop_atom,
    _drop_jet,
    _monomial,
    add,
    apply_dinv,
    dx,
    mul,
    shift,
)

__all__ = [
    "OperatorWord",
    "directional_derivative",
    "frechet_operator",
    "apply_operator",
    "lie_bracket",
    "ad_power",
]

Orientation = Literal["left", "right"]


class _Directional:
    """Caches for one direction ``V``: ``S^m Dx^j V`` and atom derivatives."""

    def __init__(self, v: Expression):
        self.v = v
        self._dxs = [v]
        self._jets: dict = {}
        self._atoms: dict = {}

    def jet(self, m: int, j: int) -> Expression:
        try:
            return self._jets[m, j]
        except KeyError:
            pass
        while len(self._dxs) <= j:
            self._dxs.append(dx(self._dxs[-1]))
        out = shift(self._dxs[j], m)
        self._jets[m, j] = out
        return out

    def atom(self, atom: Atom) -> Expression:
        try:
            return self._atoms[atom]
        except KeyError:
            pass
        out = apply_dinv(self.derive(atom.arg))
        self._atoms[atom] = out
        return out

    def derive(self, f: Expression) -> Expression:
        acc: dict = {}
        for key, c in f._d.items():
            jets, atoms, xdeg, ndeg = key
            for i, ((m, j), p) in enumerate(jets):
                d = self.jet(m, j)
                if d._d:
                    _addmul(acc, (_drop_jet(jets, i), atoms, xdeg, ndeg), c * p, d)
            for i, (atom, p) in enumerate(atoms):
                d = self.atom(atom)
                if d._d:
                    _addmul(acc, (jets, _drop_atom(atoms, i), xdeg, ndeg), c * p, d)
        return Expression(acc)


def directional_derivative(f: Expression, v: Expression) -> Expression:
    """``F_*(V)``: the derivative of ``F`` along ``V``.

    ``u[m,j]`` contributes ``S^m Dx^j V``; ``x`` and ``n`` are constants;
    ``Dinv(g)`` contributes ``Dinv(g_*(V))``.
    """
    return _Directional(v).derive(f)


@dataclass(frozen=True)
class OperatorWord:
    """Composition of primitive operators, applied right to left.

    Symbols are ``("S", k)``, ``("Dx", j)``, ``("Dinv",)`` and
    ``("mul", expr)``.  The empty word is the identity.
    """

    symbols: tuple = ()

    def __str__(self):
        if not self.symbols:
            return "1"
        parts = []
        for sym in self.symbols:
            if sym[0] == "S":
                parts.append("S" if sym[1] == 1 else f"S^{sym[1]}")
            elif sym[0] == "Dx":
                parts.append("Dx" if sym[1] == 1 else f"Dx^{sym[1]}")
            elif sym[0] == "Dinv":
                parts.append("Dinv")
            else:
                parts.append(f"({sym[1]})")
        return "*".join(parts)

    def apply(self, v: Expression) -> Expression:
        out = v
        for sym in reversed(self.symbols):
            if sym[0] == "S":
                out = shift(out, sym[1])
            elif sym[0] == "Dx":
                for _ in range(sym[1]):
                    out = dx(out)
            elif sym[0] == "Dinv":
                out = apply_dinv(out)
            elif sym[0] == "mul":
                out = mul(sym[1], out)
            else:
                raise ValueError(f"unknown operator symbol {sym!r}")
        return out


def _jet_word(m: int, j: int) -> OperatorWord:
    syms = []
    if m:
        syms.append(("S", m))
    if j:
        syms.append(("Dx", j))
    return OperatorWord(tuple(syms))


def frechet_operator(f: Expression) -> list[tuple[Expression, OperatorWord]]:
    """Operator form of ``F_*`` as ``sum coefficient * word``.

    Jet partials give ``(dF/du[m,j]) S^m Dx^j``; an atom ``Dinv(g)`` gives
    ``(dF/dDinv(g)) Dinv * c * word`` for each summand ``c * word`` of
    ``g_*``.  Only for display and cross-checks.
    """
    jet_parts: dict = {}
    atom_parts: dict = {}
    for key, c in f._d.items():
        jets, atoms, xdeg, ndeg = key
        for i, (jet, p) in enumerate(jets):
            acc = jet_parts.setdefault(jet, {})
            _accumulate(acc, (_drop_jet(jets, i), atoms, xdeg, ndeg), c * p)
        for i, (atom, p) in enumerate(atoms):
            acc = atom_parts.setdefault(atom, {})
            _accumulate(acc, (jets, _drop_atom(atoms, i), xdeg, ndeg), c * p)
    out: list[tuple[Expression, OperatorWord]] = []
    for (m, j) in sorted(jet_parts):
        coeff = Expression(jet_parts[m, j])
        if coeff._d:
            out.append((coeff, _jet_word(m, j)))
    for atom in sorted(atom_parts, key=lambda a: a.order):
        coeff = Expression(atom_parts[atom])
        if not coeff._d:
            continue
        for inner_coeff, word in frechet_operator(atom.arg):
            syms = [("Dinv",)]
            if inner_coeff != 1:
                syms.append(("mul", inner_coeff))
            syms.extend(word.symbols)
            out.append((coeff, OperatorWord(tuple(syms))))
    return out


def apply_operator(op: list[tuple[Expression, OperatorWord]], v: Expression) -> Expression:
    out = ZERO
    for coeff, word in op:
        out = add(out, mul(coeff, word.apply(v)))
    return out


def lie_bracket(f: Expression, g: Expression) -> Expression:
    """``[F, G] = F_*(G) - G_*(F)``."""
    return add(directional_derivative(f, g), -directional_derivative(g, f))


def ad_power(a: Expression, x: Expression, k: int, orientation: Orientation = "left") -> Expression:
    """Iterate ``X -> [A, X]`` (left) or ``X -> [X, A]`` (right) ``k`` times."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if orientation not in ("left", "right"):
        raise ValueError(f"orientation must be 'left' or 'right', not {orientation!r}")
    for _ in range(k):
        if not x._d:
            break
        x = lie_bracket(a, x) if orientation == "left" else lie_bracket(x, a)
    return x
