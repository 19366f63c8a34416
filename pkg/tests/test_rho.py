import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from specden.errors import NotApplicableError
from specden.fields import (almost_kahler_field, constant_field, kahler_field,
                            parallel_j_field, random_field)
from specden.frame import build_frame, q_coefficients, rotate_frame
from specden.geometry import covariant_jet, endos_at
from specden.oracle import rho_oracle
from specden.rho import (rho_almost_kahler, rho_closed, rho_kahler_case,
                         rho_polar)

from conftest import make_jet


def test_constant_field_density_zero():
    jet = make_jet(2, 0, kind=lambda n, r: constant_field(n, 1.3))
    bd = rho_closed(jet)
    assert abs(bd.rho) < 1e-14
    assert abs(rho_polar(jet).rho) < 1e-14


@pytest.mark.parametrize("n,seed", [(1, 11), (2, 12), (3, 13)])
def test_three_routes_agree(n, seed):
    jet = make_jet(n, seed)
    q = q_coefficients(jet)
    closed = rho_closed(jet)
    polar = rho_polar(jet)
    oracle = rho_oracle(jet, q)
    scale = 1.0 + abs(oracle.rho)
    assert abs(closed.rho - oracle.rho) <= 1e-9 * scale
    assert abs(polar.rho - oracle.rho) <= 1e-9 * scale


def test_density_vanishes_in_complex_dimension_one():
    for seed in range(6):
        jet = make_jet(1, 100 + seed)
        assert abs(rho_closed(jet).rho) < 1e-12


def test_breakdown_groups_match_oracle(jet2, q2):
    closed = rho_closed(jet2)
    oracle = rho_oracle(jet2, q2)
    assert closed.A0 == pytest.approx(oracle.A0, abs=1e-10)
    assert closed.A1 == pytest.approx(oracle.A1, abs=1e-10)
    assert closed.J1 + closed.J2 == pytest.approx(oracle.A2 - oracle.A3,
                                                  abs=1e-10)


def test_monge_ampere_type_field():
    jet = make_jet(2, 21, kind=almost_kahler_field)
    ref = rho_almost_kahler(jet)
    got = rho_closed(jet).rho
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-12)
    assert ref > 1e-6    # construction actually exercises the gradient term


def test_almost_kahler_requires_uniform_eigenvalues(jet2):
    with pytest.raises(NotApplicableError):
        rho_almost_kahler(jet2)


def test_parallel_j_case_formula():
    for kind in (parallel_j_field, kahler_field):
        jet = make_jet(2, 31, kind=kind)
        got = rho_closed(jet).rho
        ref = rho_kahler_case(jet)
        assert got == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_parallel_j_case_rejects_generic_jet(jet2):
    with pytest.raises(NotApplicableError):
        rho_kahler_case(jet2)


def test_potential_scaling_scales_eigenvalues(rng):
    field = random_field(2, rng)
    lam = 1.7
    a1 = build_frame(endos_at(field, field.x0)).a
    a2 = build_frame(endos_at(field.scaled_potential(lam), field.x0)).a
    assert np.allclose(a2, lam * a1, rtol=1e-12)


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_frame_gauge_invariance(seed):
    rng = np.random.default_rng(seed)
    field = random_field(2, rng)
    en = endos_at(field, field.x0)
    fr = build_frame(en)
    ref = rho_closed(covariant_jet(field, fr))
    phases = rng.uniform(0.0, 2.0 * np.pi, fr.n)
    rot = rotate_frame(fr, phases=phases)
    got = rho_closed(covariant_jet(field, rot))
    assert abs(got.rho - ref.rho) <= 1e-9 * (1.0 + abs(ref.rho))
    assert abs(got.J1 - ref.J1) <= 1e-9 * (1.0 + abs(ref.J1))


def test_unitary_regauge_in_degenerate_blocks(rng):
    # constant-eigenvalue construction: the whole frame is one block
    field = almost_kahler_field(2, rng)
    en = endos_at(field, field.x0)
    fr = build_frame(en)
    ref = rho_closed(covariant_jet(field, fr)).rho
    for seed in range(5):
        U = unitary_group(2, seed=seed).rvs()
        rot = rotate_frame(fr, block_unitaries=[U])
        got = rho_closed(covariant_jet(field, rot)).rho
        assert abs(got - ref) <= 1e-9 * (1.0 + abs(ref))


def test_breakdown_serialization(jet2):
    d = rho_closed(jet2).to_dict()
    assert set(d) >= {"A0", "A1", "J1", "J2", "rho"}
    assert d["rho"] == pytest.approx(d["A0"] + d["A1"] + d["J1"] + d["J2"])
