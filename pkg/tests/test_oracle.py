import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specden.errors import TruncationError
from specden.frame import q_coefficients
from specden.oracle import (ModelContext, P0, PolyGauss, a2_a3_cross_term,
                            a2_closed, a3_closed, apply_b, apply_b_plus,
                            apply_L, inner, inverse_L, multiply, norm_sq,
                            project_P, rho_oracle)

from conftest import make_jet

CTX = ModelContext(a=np.array([0.9, 1.7]), D=6)


def rand_state(rng, nterms=4, max_deg=3):
    f = PolyGauss(CTX)
    for _ in range(nterms):
        deg = rng.integers(0, max_deg + 1)
        b, g = [0, 0], [0, 0]
        for _ in range(deg):
            (b if rng.random() < 0.5 else g)[rng.integers(0, 2)] += 1
        f.add_term(tuple(b), tuple(g), complex(rng.normal(), rng.normal()))
    return f


def test_truncation_guard():
    f = PolyGauss(CTX, {((3, 3), (0, 0)): 1.0})
    with pytest.raises(TruncationError):
        apply_b(0, f)


def test_lowering_never_truncates():
    f = PolyGauss(CTX, {((3, 3), (0, 0)): 1.0})
    apply_b_plus(0, f)   # must not raise: degree cannot grow


def test_inverse_discards_kernel_component():
    # the solve targets the kernel-orthogonal part, so a pure kernel input
    # inverts to zero rather than raising
    assert norm_sq(inverse_L(P0(CTX))) == 0.0


def test_inverse_is_a_right_inverse(rng):
    f = rand_state(rng)
    f = f - project_P(f)
    u = inverse_L(f)
    assert math.sqrt(norm_sq(apply_L(u) - f)) < 1e-10 * math.sqrt(norm_sq(f))
    assert math.sqrt(norm_sq(project_P(u))) < 1e-12


def test_operator_positivity(rng):
    f = rand_state(rng)
    val = inner(apply_L(f), f)
    assert abs(val.imag) < 1e-10 * abs(val)
    assert val.real > -1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(-2, 2), st.floats(-2, 2))
def test_inner_sesquilinear(seed, s, t):
    rng = np.random.default_rng(seed)
    f, h, u = rand_state(rng), rand_state(rng), rand_state(rng)
    lhs = inner(f.scale(s) + h.scale(t), u)
    rhs = s * inner(f, u) + t * inner(h, u)
    assert abs(lhs - rhs) <= 1e-9 * (1.0 + abs(lhs))
    assert abs(inner(f, h) - np.conjugate(inner(h, f))) <= 1e-10 * (
        1.0 + abs(inner(f, h)))


def test_ladders_are_mutually_adjoint(rng):
    f, h = rand_state(rng, max_deg=2), rand_state(rng, max_deg=2)
    for j in range(2):
        assert abs(inner(apply_b(j, f), h) - inner(f, apply_b_plus(j, h))) \
            < 1e-10 * (1.0 + abs(inner(f, h)))


def test_multiplication_adjoint_is_conjugate(rng):
    f, h = rand_state(rng, max_deg=2), rand_state(rng, max_deg=2)
    c = 0.7 + 0.2j
    poly = {((1, 0), (0, 1)): c}
    conj_poly = {((0, 1), (1, 0)): np.conjugate(c)}
    assert abs(inner(multiply(f, poly), h) - inner(f, multiply(h, conj_poly))) \
        < 1e-10 * (1.0 + abs(inner(f, h)))


def test_closed_a2_a3_displays_share_one_correction():
    jet = make_jet(2, 17)
    q = q_coefficients(jet)
    o = rho_oracle(jet, q)
    cross = a2_a3_cross_term(q, jet.a)
    assert o.A2 == pytest.approx(a2_closed(q, jet.a) + cross, abs=1e-12)
    assert o.A3 == pytest.approx(a3_closed(q, jet.a) + cross, abs=1e-12)
    # the correction drops out of the difference that enters the density
    assert o.A2 - o.A3 == pytest.approx(a2_closed(q, jet.a) - a3_closed(q, jet.a),
                                        abs=1e-12)


@pytest.mark.parametrize("n,seed", [(1, 41), (2, 42), (3, 43)])
def test_degree_cap_independence(n, seed):
    jet = make_jet(n, seed)
    q = q_coefficients(jet)
    o6 = rho_oracle(jet, q, D=6)
    o8 = rho_oracle(jet, q, D=8)
    for x, y in ((o6.A0, o8.A0), (o6.A1, o8.A1), (o6.A2, o8.A2),
                 (o6.A3, o8.A3), (o6.rho, o8.rho)):
        assert abs(x - y) <= 1e-10 * (1.0 + abs(y))


def test_imaginary_residue_reported(jet2, q2):
    o = rho_oracle(jet2, q2)
    assert o.im_residue < 1e-10
