from fractions import Fraction

import pytest

from ddkp.algebra import X, theta, u
from ddkp.calculus import lie_bracket
from ddkp.dsl import parse, print_latex
from ddkp.errors import DepthBlowup, NotNilpotent, UnknownBuiltin
from ddkp.oracle import ZeroTestConfig, zero_test
from ddkp.symmetries import (
    TimePolynomial,
    builtin,
    hierarchy,
    is_master_symmetry,
    is_symmetry,
    nilpotency_verify,
    proportionality,
    sl2_verify,
    time_symmetry,
    verify_time_symmetry,
    weight_verify,
)

from helpers import latex_summands

K, G3, W, H = builtin("K"), builtin("G3"), builtin("W"), builtin("H")
CFG = ZeroTestConfig(trials=6)



def test_builtins():
    assert builtin("N") == X.scale(Fraction(-1, 2))
    assert K == u(0, 2) + 2 * u() * u(0, 1) + 2 * theta(u(0, 1))
    assert W == parse("x*u[0,2] + 2*x*u*u[0,1] + 2*x*Theta(u[0,1]) + n*u[0,1] + u^2 + 3*Theta(u)")
    assert G3 == parse(
        "u[0,3] + 3*u*u[0,2] + 3*u[0,1]^2 + 3*u^2*u[0,1] + 3*Theta(u*u[0,1]) + 3*u[0,1]*Theta(u)"
        " + 3*u*Theta(u[0,1]) + 3*Theta(Theta(u[0,1])) + 3*Theta(u[0,2])"
    )
    assert builtin("M") == K and builtin("N2") == W
    assert H == parse("-x*u[0,1] - u")
    with pytest.raises(UnknownBuiltin):
        builtin("Q")


def test_is_symmetry():
    assert is_symmetry(K, K, CFG).passed
    rep = is_symmetry(K, G3, CFG)
    assert rep.passed
    (check,) = rep.checks
    # the residual is a product identity among sums, certified by the oracle
    assert check.symbolic == "nonzero-normal-form" and check.oracle.kind == "exact-zero"
    bad = is_symmetry(K, u() ** 2, CFG)
    assert not bad.passed and bad.checks[0].oracle.witness is not None


def test_is_master_symmetry():
    rep = is_master_symmetry(K, W, CFG, expected=G3.scale(-2))
    assert rep.passed
    assert lie_bracket(W, K) + 2 * G3 == 0 * G3
    assert rep.details["[W,K] / G3"] == "-2"
    assert is_master_symmetry(K, K, CFG).passed
    assert not is_master_symmetry(K, X * u(0, 1), CFG).passed


def test_sl2():
    rep = sl2_verify()
    assert rep.passed and len(rep.checks) == 3
    assert all(c.symbolic == "syntactic-zero" for c in rep.checks)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_weights(m):
    assert weight_verify(m, CFG).passed


def test_weight_rejects_out_of_range():
    with pytest.raises(ValueError):
        weight_verify(7, CFG)


@pytest.mark.parametrize("m,l", [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (1, 3)])
def test_nilpotency(m, l):
    assert nilpotency_verify(m, l, CFG).passed


def test_nilpotency_hand_chain():
    # [K,x] = -2H and [K,H] = -2K
    assert lie_bracket(K, X) == H.scale(-2)
    assert lie_bracket(K, H) == K.scale(-2)


def test_nilpotency_rejects_bad_indices():
    with pytest.raises(ValueError):
        nilpotency_verify(0, 3, CFG)


def test_hierarchy_small():
    assert hierarchy(1, CFG).members == [K]
    h = hierarchy(2, CFG)
    assert h.members[1] == G3.scale(-2) and h.report.passed
    assert hierarchy(2, CFG, orientation="right", check_pairs=False).members[1] == G3.scale(2)


def test_hierarchy_three_commutes():
    h = hierarchy(3, CFG)
    assert h.report.passed
    members = [c for c in h.report.checks if "explicit" in c.label]
    assert len(members) == 3 and all(c.passed for c in members)
    labels = [c.label for c in h.report.checks]
    assert "[H2,H3] = 0" in labels and "[H1,H3] = 0" in labels


def test_hierarchy_ceiling():
    with pytest.raises(DepthBlowup):
        hierarchy(3, CFG, ceiling=5)


def test_proportionality():
    assert proportionality(G3.scale(3), G3) == 3
    assert proportionality(K, G3) is None


def test_time_symmetry_h():
    p = time_symmetry(H, cfg=CFG)
    assert p == TimePolynomial([(0, H), (1, K.scale(2))])
    assert verify_time_symmetry(p, CFG).passed
    tex = print_latex(p)
    head, _, tail = tex.partition(")+2t(")
    assert latex_summands(head[1:]) == latex_summands("-xu_{x}-u")
    assert latex_summands(tail[:-1]) == latex_summands("u_{xx}+2uu_{x}+2\\Theta(u_{x})")


def test_time_symmetry_k_is_constant():
    p = time_symmetry(K, cfg=CFG)
    assert p.degree == 0 and p.coefficient(0) == K
    assert verify_time_symmetry(TimePolynomial.constant(K), CFG).passed


def test_time_symmetry_x():
    p = time_symmetry(X, cfg=CFG)
    assert p.degree == 2
    assert p.coefficient(1) == parse("-2*x*u[0,1] - 2*u")
    assert p.coefficient(2) == K.scale(2)
    rep = verify_time_symmetry(p, CFG)
    assert rep.passed
    assert rep.details["coefficients"]["t^2"] == str(K.scale(2))


def test_time_symmetry_alternative_coefficients_fail():
    # x - 2t(x u_x - u) + 4t^2 K does not satisfy dP/dt = [P, K]
    variant = TimePolynomial([(0, X), (1, parse("-2*x*u[0,1] + 2*u")), (2, K.scale(4))])
    assert not verify_time_symmetry(variant, CFG).passed
    # neither does the sign-corrected line with 4t^2
    mixed = TimePolynomial([(0, X), (1, parse("-2*x*u[0,1] - 2*u")), (2, K.scale(4))])
    assert not verify_time_symmetry(mixed, CFG).passed


def test_verify_time_symmetry_failure():
    p = TimePolynomial([(0, u(0, 1)), (1, u(0, 1))])
    rep = verify_time_symmetry(p, CFG)
    assert not rep.passed
    assert any(c.oracle is not None and c.oracle.witness for c in rep.checks)


def test_time_symmetry_cap():
    with pytest.raises(NotNilpotent):
        time_symmetry(u() ** 2, cap=2, cfg=CFG)


def test_report_serialization_is_stable():
    rep = weight_verify(1, CFG)
    data = rep.to_data()
    assert "elapsed" not in data and rep.to_data() == data
    assert "elapsed" in rep.to_data(timing=True)
    assert data["params"]["oracle"]["seed"] == CFG.seed
    assert "VERIFIED" in rep.describe()


def test_g3_residual_is_certified_not_syntactic():
    residual = lie_bracket(K, G3)
    assert not residual.is_zero()
    assert zero_test(residual, ZeroTestConfig(trials=20)).kind == "exact-zero"
