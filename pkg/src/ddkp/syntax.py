"""Raw expression trees as produced by the DSL parser.

Trees are not canonical; :func:`ddkp.algebra.normalize` turns them into
:class:`~ddkp.algebra.Expression` values.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Node):
    value: Fraction


@dataclass(frozen=True)
class Var(Node):
    name: str  # "x" or "n"


@dataclass(frozen=True)
class JetNode(Node):
    m: int
    j: int


@dataclass(frozen=True)
class Builtin(Node):
    name: str


@dataclass(frozen=True)
class Sum(Node):
    items: tuple[Node, ...]


@dataclass(frozen=True)
class Neg(Node):
    item: Node


@dataclass(frozen=True)
class Product(Node):
    items: tuple[Node, ...]


@dataclass(frozen=True)
class Power(Node):
    base: Node
    exp: int


@dataclass(frozen=True)
class Theta(Node):
    arg: Node


@dataclass(frozen=True)
class Dinv(Node):
    arg: Node


@dataclass(frozen=True)
class Dx(Node):
    arg: Node


@dataclass(frozen=True)
class Shift(Node):
    k: int
    arg: Node
