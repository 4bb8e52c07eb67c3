"""Named objects of the DDKP equation and their verification routines.

``K`` is the equation ``u_t = u_xx + 2 u u_x + 2 Theta(u_x)``, ``G3`` its
first higher symmetry, ``W`` (alias ``N2``) the master symmetry, and
``M = K``, ``N = -x/2``, ``H = -x u_x - u`` span a copy of sl(2).

Every check is two-tier: a syntactically zero normal form passes outright,
anything else is handed to :func:`ddkp.oracle.zero_test` and passes only on
an ``exact-zero`` verdict.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Optional

from .algebra import X, N as N_VAR, Expression, ZERO, const, counting_sums, theta, u
from .calculus import ad_power, lie_bracket
from .errors import DepthBlowup, NotNilpotent, UnknownBuiltin
from .oracle import Verdict, ZeroTestConfig, zero_test

__all__ = [
    "builtin",
    "TimePolynomial",
    "Check",
    "VerificationReport",
    "check_zero",
    "is_symmetry",
    "is_master_symmetry",
    "sl2_verify",
    "weight_verify",
    "nilpotency_verify",
    "Hierarchy",
    "hierarchy",
    "time_symmetry",
    "verify_time_symmetry",
    "proportionality",
    "ORIENTATION",
]

# ad_K acts on the left, ad_N and ad_N2 on the right: ad_N K = [K, N] = H.
ORIENTATION = {"K": "left", "N": "right", "N2": "right"}


def _build_builtins() -> dict[str, Expression]:
    ux, uxx, uxxx, uu = u(0, 1), u(0, 2), u(0, 3), u()
    k = uxx + 2 * uu * ux + 2 * theta(ux)
    g3 = (
        uxxx
        + 3 * uu * uxx
        + 3 * ux**2
        + 3 * uu**2 * ux
        + 3 * theta(uu * ux)
        + 3 * ux * theta(uu)
        + 3 * uu * theta(ux)
        + 3 * theta(theta(ux))
        + 3 * theta(uxx)
    )
    w = X * uxx + 2 * X * uu * ux + 2 * X * theta(ux) + N_VAR * ux + uu**2 + 3 * theta(uu)
    return {
        "K": k,
        "G3": g3,
        "W": w,
        "M": k,
        "N": const(Fraction(-1, 2)) * X,
        "H": -X * ux - uu,
        "N2": w,
        "UX": ux,
    }


_BUILTINS: dict[str, Expression] = {}


def builtin(name: str) -> Expression:
    if not _BUILTINS:
        _BUILTINS.update(_build_builtins())
    try:
        return _BUILTINS[name]
    except KeyError:
        raise UnknownBuiltin(f"unknown builtin {name!r}; known: {', '.join(_BUILTINS)}") from None


# -- reports -------------------------------------------------------------------


@dataclass
class Check:
    """One identity checked inside a report.

    ``symbolic`` is ``syntactic-zero`` or ``nonzero-normal-form`` for zero
    checks and ``holds`` / ``fails`` for structural ones.
    """

    label: str
    passed: bool
    symbolic: str
    terms: int = 0
    oracle: Optional[Verdict] = None
    note: str = ""

    def to_data(self) -> dict:
        return {
            "label": self.label,
            "passed": self.passed,
            "symbolic": self.symbolic,
            "terms": self.terms,
            "oracle": None if self.oracle is None else self.oracle.to_data(),
            "note": self.note,
        }

    def describe(self) -> str:
        status = "ok  " if self.passed else "FAIL"
        text = f"[{status}] {self.label}: {self.symbolic}"
        if self.symbolic == "nonzero-normal-form":
            text += f" ({self.terms} terms)"
        if self.oracle is not None:
            text += f"; oracle {self.oracle.kind}"
            if self.oracle.witness:
                w = self.oracle.witness
                text += f" (trial {w['trial']}, n={w['n']}, x={w['x']}, value {w['value']})"
        if self.note:
            text += f"; {self.note}"
        return text


@dataclass
class VerificationReport:
    label: str
    checks: list[Check] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_data(self, timing: bool = False) -> dict:
        data = {
            "label": self.label,
            "passed": self.passed,
            "checks": [c.to_data() for c in self.checks],
            "params": self.params,
            "details": self.details,
        }
        if timing:
            data["elapsed"] = round(self.elapsed, 6)
        return data

    def describe(self) -> str:
        lines = [f"{self.label}: {'VERIFIED' if self.passed else 'FAILED'} ({self.elapsed:.2f}s)"]
        lines.extend("  " + c.describe() for c in self.checks)
        for key, value in self.details.items():
            lines.append(f"  {key}: {value}")
        return "\n".join(lines)


def check_zero(
    label: str,
    e: Expression,
    cfg: ZeroTestConfig | None = None,
    oracle: bool = True,
) -> Check:
    """Two-tier zero check: syntactic normal form, then oracle."""
    if e.is_zero():
        return Check(label, True, "syntactic-zero")
    if not oracle:
        return Check(label, False, "nonzero-normal-form", len(e))
    verdict = zero_test(e, cfg or ZeroTestConfig())
    return Check(label, verdict.is_zero, "nonzero-normal-form", len(e), verdict)


def _is_zero(e: Expression, cfg: ZeroTestConfig) -> bool:
    return e.is_zero() or zero_test(e, cfg).is_zero


def _params(cfg: ZeroTestConfig, **extra) -> dict:
    return {"oracle": cfg.to_data(), **extra}


def _membership(label: str, e: Expression, cfg: ZeroTestConfig | None = None) -> Check:
    """No explicit ``x`` or ``n``: syntactically, or every ``x^a n^b`` part is oracle zero."""
    groups: dict = {}
    for key, c in e._d.items():
        if key[2] or key[3]:
            groups.setdefault((key[2], key[3]), {})[(key[0], key[1], 0, 0)] = c
    if not groups:
        return Check(label, True, "holds", len(e))
    if cfg is None:
        return Check(label, False, "fails", len(e), note=f"{len(groups)} explicit x^a n^b parts")
    for (a, b), part in sorted(groups.items()):
        verdict = zero_test(Expression(part), cfg)
        if not verdict.is_zero:
            return Check(label, False, "fails", len(e), verdict, note=f"x^{a} n^{b} part does not vanish")
    return Check(
        label,
        True,
        "holds",
        len(e),
        verdict,
        note=f"explicit parts {sorted(groups)} are oracle zero",
    )


def proportionality(a: Expression, b: Expression, cfg: ZeroTestConfig | None = None) -> Optional[Fraction]:
    """``c`` with ``a = c * b``, or None.

    The candidate ratio comes from a shared term; it is accepted if the
    difference is syntactically or oracle zero.
    """
    if b.is_zero():
        return None
    if a.is_zero():
        return Fraction(0)
    cfg = cfg or ZeroTestConfig()
    for key, cb in b._d.items():
        if key in a._d:
            c = Fraction(a._d[key]) / Fraction(cb)
            if _is_zero(a - b.scale(c), cfg):
                return c
            return None
    return None


# -- theorem-level checks ------------------------------------------------------


def is_symmetry(k: Expression, g: Expression, cfg: ZeroTestConfig | None = None) -> VerificationReport:
    """Generalised symmetry test ``[K, G] = 0``."""
    cfg = cfg or ZeroTestConfig()
    start = time.perf_counter()
    report = VerificationReport("symmetry", params=_params(cfg))
    report.checks.append(check_zero("[K,G] = 0", lie_bracket(k, g), cfg))
    report.elapsed = time.perf_counter() - start
    return report


def is_master_symmetry(
    k: Expression,
    w: Expression,
    cfg: ZeroTestConfig | None = None,
    expected: Expression | None = None,
) -> VerificationReport:
    """``[K,[K,W]] = 0`` and ``[W,K]`` free of explicit ``x`` and ``n``.

    When ``expected`` is given, ``[W,K] = expected`` is checked as well.
    """
    cfg = cfg or ZeroTestConfig()
    start = time.perf_counter()
    report = VerificationReport("master symmetry", params=_params(cfg))
    wk = lie_bracket(w, k)
    report.checks.append(check_zero("[K,[K,W]] = 0", lie_bracket(k, -wk), cfg))
    report.checks.append(_membership("[W,K] has no explicit x, n", wk, cfg))
    if expected is not None:
        report.checks.append(check_zero("[W,K] - expected = 0", wk - expected, cfg))
    ratio = proportionality(wk, builtin("G3"), cfg)
    report.details["[W,K] terms"] = len(wk)
    report.details["[W,K] / G3"] = None if ratio is None else str(ratio)
    report.elapsed = time.perf_counter() - start
    return report


def sl2_verify() -> VerificationReport:
    """The three sl(2) relations; each must cancel syntactically."""
    start = time.perf_counter()
    m, n, h = builtin("M"), builtin("N"), builtin("H")
    report = VerificationReport("sl2 relations")
    for label, e in (
        ("[M,N] - H = 0", lie_bracket(m, n) - h),
        ("[H,N] + 2N = 0", lie_bracket(h, n) + 2 * n),
        ("[H,M] - 2M = 0", lie_bracket(h, m) - 2 * m),
    ):
        report.checks.append(check_zero(label, e, oracle=False))
    report.elapsed = time.perf_counter() - start
    return report


def _n2_power(m: int, orientation: str) -> Expression:
    return ad_power(builtin("N2"), builtin("K"), m, orientation)


def weight_verify(
    m: int,
    cfg: ZeroTestConfig | None = None,
    orientation: str = ORIENTATION["N2"],
    depth_cap: int = 4,
) -> VerificationReport:
    """``[H, X] = (m+2) X`` for ``X = ad_N2^m K``."""
    if not 0 <= m <= depth_cap:
        raise ValueError(f"m must lie in [0, {depth_cap}]")
    cfg = cfg or ZeroTestConfig()
    start = time.perf_counter()
    x = _n2_power(m, orientation)
    report = VerificationReport(f"weight m={m}", params=_params(cfg, m=m, orientation=orientation))
    report.checks.append(
        check_zero(f"[H, ad_N2^{m} K] - {m + 2} ad_N2^{m} K = 0", lie_bracket(builtin("H"), x) - x.scale(m + 2), cfg)
    )
    report.details["ad_N2^m K terms"] = len(x)
    report.elapsed = time.perf_counter() - start
    return report


def nilpotency_verify(
    m: int,
    l: int,
    cfg: ZeroTestConfig | None = None,
    orientation: str = ORIENTATION["N2"],
    n_orientation: str = ORIENTATION["N"],
) -> VerificationReport:
    """``ad_K^(l+1) (ad_N^l ad_N2^m K) = 0`` for ``0 <= l <= m + 2``.

    ``ad_N`` applied to a member containing ``Theta(u)`` produces
    ``Dinv(const)``, the lattice counting function, so the computation runs
    under :func:`~ddkp.algebra.counting_sums`.
    """
    if m < 0 or not 0 <= l <= m + 2:
        raise ValueError("need m >= 0 and 0 <= l <= m + 2")
    cfg = cfg or ZeroTestConfig()
    start = time.perf_counter()
    with counting_sums():
        base = _n2_power(m, orientation)
        gen = ad_power(builtin("N"), base, l, n_orientation)
        z = ad_power(builtin("K"), gen, l + 1, "left")
        check = check_zero(f"ad_K^{l + 1} ad_N^{l} ad_N2^{m} K = 0", z, cfg)
    report = VerificationReport(
        f"nilpotency m={m} l={l}",
        params=_params(cfg, m=m, l=l, orientation=orientation, n_orientation=n_orientation),
    )
    report.checks.append(check)
    report.details["generator terms"] = len(gen)
    report.elapsed = time.perf_counter() - start
    return report


@dataclass
class Hierarchy:
    members: list[Expression]
    report: VerificationReport
    orientation: str

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def __iter__(self):
        return iter(self.members)


def hierarchy(
    depth: int,
    cfg: ZeroTestConfig | None = None,
    orientation: str = "left",
    ceiling: int = 50_000,
    check_pairs: bool = True,
) -> Hierarchy:
    """``H1 = K``, ``H(j+1) = [W, Hj]`` (left) or ``[Hj, W]`` (right).

    Members are not rescaled.  Each is checked for absence of explicit
    ``x``, ``n``; all pairs are checked to commute.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    cfg = cfg or ZeroTestConfig()
    start = time.perf_counter()
    w = builtin("W")
    members = [builtin("K")]
    while len(members) < depth:
        nxt = ad_power(w, members[-1], 1, orientation)
        if len(nxt) > ceiling:
            raise DepthBlowup(len(members) + 1, len(nxt), ceiling)
        members.append(nxt)
    report = VerificationReport(
        f"hierarchy depth={depth}",
        params=_params(cfg, depth=depth, orientation=orientation, ceiling=ceiling),
    )
    g3 = builtin("G3")
    for i, h in enumerate(members, 1):
        report.checks.append(_membership(f"H{i} has no explicit x, n", h, cfg))
        ratio = proportionality(h, g3, cfg)
        if ratio is not None:
            report.details[f"H{i} / G3"] = str(ratio)
        report.details[f"H{i} terms"] = len(h)
    if check_pairs:
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                report.checks.append(
                    check_zero(f"[H{i + 1},H{j + 1}] = 0", lie_bracket(members[i], members[j]), cfg)
                )
    report.elapsed = time.perf_counter() - start
    return Hierarchy(members, report, orientation)


# -- time dependent symmetries -------------------------------------------------


class TimePolynomial:
    """Finite ``sum_k t^k * coeff_k`` with expression coefficients."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients=()):
        acc: dict[int, Expression] = {}
        for k, c in coefficients:
            if k < 0:
                raise ValueError("t powers must be non-negative")
            acc[k] = acc.get(k, ZERO) + c
        self.coefficients = tuple((k, acc[k]) for k in sorted(acc) if not acc[k].is_zero())

    @classmethod
    def constant(cls, e: Expression) -> "TimePolynomial":
        return cls([(0, e)])

    @property
    def degree(self) -> int:
        return self.coefficients[-1][0] if self.coefficients else -1

    def coefficient(self, k: int) -> Expression:
        for kk, c in self.coefficients:
            if kk == k:
                return c
        return ZERO

    def dt(self) -> "TimePolynomial":
        return TimePolynomial((k - 1, c.scale(k)) for k, c in self.coefficients if k)

    def bracket(self, e: Expression) -> "TimePolynomial":
        """``[P, E]`` taken coefficient-wise."""
        return TimePolynomial((k, lie_bracket(c, e)) for k, c in self.coefficients)

    def __sub__(self, other: "TimePolynomial") -> "TimePolynomial":
        return TimePolynomial(list(self.coefficients) + [(k, -c) for k, c in other.coefficients])

    def __eq__(self, other):
        return isinstance(other, TimePolynomial) and self.coefficients == other.coefficients

    def __repr__(self):
        inner = ", ".join(f"t^{k}: {c}" for k, c in self.coefficients)
        return f"TimePolynomial({inner})"

    def to_data(self) -> dict:
        from .dsl import expr_to_data, print_canonical

        return {
            "coefficients": [
                {"t": k, "expr": expr_to_data(c), "canonical": print_canonical(c)}
                for k, c in self.coefficients
            ]
        }


def time_symmetry(
    g0: Expression,
    cap: int = 16,
    cfg: ZeroTestConfig | None = None,
    equation: Expression | None = None,
) -> TimePolynomial:
    """``exp(-t ad_K) G0``, truncated where ``ad_K`` annihilates.

    The series stops at the first ``k`` for which ``ad_K^(k+1) G0`` is zero
    (syntactically or by an ``exact-zero`` oracle verdict).
    """
    cfg = cfg or ZeroTestConfig()
    k_eq = builtin("K") if equation is None else equation
    coeffs = []
    current = g0
    for k in range(cap + 1):
        coeffs.append((k, current.scale(Fraction((-1) ** k, factorial(k)))))
        nxt = lie_bracket(k_eq, current)
        if _is_zero(nxt, cfg):
            return TimePolynomial(coeffs)
        current = nxt
    raise NotNilpotent(cap)


def verify_time_symmetry(
    p: TimePolynomial,
    cfg: ZeroTestConfig | None = None,
    equation: Expression | None = None,
) -> VerificationReport:
    """``dP/dt = [P, K]`` coefficient by coefficient in ``t``."""
    cfg = cfg or ZeroTestConfig()
    k_eq = builtin("K") if equation is None else equation
    start = time.perf_counter()
    report = VerificationReport("time dependent symmetry", params=_params(cfg))
    dp = p.dt()
    rhs = p.bracket(k_eq)
    for k in range(max(p.degree, 0) + 1):
        residual = dp.coefficient(k) - rhs.coefficient(k)
        report.checks.append(check_zero(f"t^{k}: dP/dt - [P,K] = 0", residual, cfg))
    from .dsl import print_canonical

    report.details["coefficients"] = {f"t^{k}": print_canonical(c) for k, c in p.coefficients}
    report.elapsed = time.perf_counter() - start
    return report
