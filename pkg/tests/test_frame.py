import numpy as np
import pytest
from scipy.stats import unitary_group

from specden.fields import constant_field, parallel_j_field, random_field
from specden.frame import build_frame, q_coefficients, rotate_frame
from specden.geometry import covariant_jet, endos_at

from conftest import make_jet


def test_frame_orthonormal_and_diagonalizing(rng):
    field = random_field(2, rng)
    en = endos_at(field, field.x0)
    fr = build_frame(en)
    d = 4
    # real frame orthonormal in g
    gram = fr.e @ en.g_x @ fr.e.T
    assert np.allclose(gram, np.eye(d), atol=1e-12)
    # w_j are (1,0) eigenvectors: J w = i w, cJ w = a_j w
    cJ = -1j * en.B_endo
    for j, w in enumerate(fr.w):
        assert np.allclose(en.J_x @ w, 1j * w, atol=1e-12)
        assert np.allclose(cJ @ w, fr.a[j] * w, atol=1e-10)
    # hermitian normalization <w_j, w_k>_g = delta
    wg = np.conjugate(fr.w) @ en.g_x @ fr.w.T
    assert np.allclose(wg, np.eye(2), atol=1e-12)
    assert np.all(np.diff(fr.a) >= -1e-12)


def test_degenerate_eigenvalues_grouped():
    field = constant_field(3, b=2.0)
    fr = build_frame(endos_at(field, field.x0))
    assert np.allclose(fr.a, 2.0)
    # any 3x3 unitary mixing must be accepted as one degenerate block
    U = unitary_group(3, seed=5).rvs()
    rotate_frame(fr, block_unitaries=[U])


def test_rotate_frame_preserves_structure(rng):
    field = random_field(2, rng)
    en = endos_at(field, field.x0)
    fr = build_frame(en)
    phases = rng.uniform(0, 2 * np.pi, fr.n)
    rot = rotate_frame(fr, phases=phases)
    assert np.allclose(rot.a, fr.a)
    gram = rot.e @ en.g_x @ rot.e.T
    assert np.allclose(gram, np.eye(4), atol=1e-12)
    for j, w in enumerate(rot.w):
        assert np.allclose((-1j * en.B_endo) @ w, rot.a[j] * w, atol=1e-10)


def test_q_antisymmetry_identities(q2):
    n = q2.n
    qa = q2.q_anti
    for j in range(n):
        for k in range(n):
            assert abs(qa[j, k, j]) < 1e-14
            for l in range(n):
                assert abs(qa[l, k, j] + qa[j, k, l]) < 1e-14
                assert abs(qa[j, k, l] + qa[l, j, k] + qa[k, l, j]) < 1e-14


def test_q_moduli_gauge_invariant(rng):
    field = random_field(2, rng)
    en = endos_at(field, field.x0)
    fr = build_frame(en)
    jet = covariant_jet(field, fr)
    q = q_coefficients(jet)
    phases = rng.uniform(0, 2 * np.pi, fr.n)
    jet_rot = covariant_jet(field, rotate_frame(fr, phases=phases))
    q_rot = q_coefficients(jet_rot)
    # per-phase re-gauging multiplies q_{j,k lbar} by unit phases; the
    # modulus table is a gauge invariant when eigenvalues are distinct
    assert np.allclose(np.abs(q_rot.q_mix), np.abs(q.q_mix), atol=1e-12)
    assert np.allclose(np.abs(q_rot.q_hol), np.abs(q.q_hol), atol=1e-12)
    assert np.allclose(np.abs(q_rot.q_anti), np.abs(q.q_anti), atol=1e-12)


def test_parallel_j_field_has_parallel_j():
    jet = make_jet(2, 3, kind=parallel_j_field)
    assert np.max(np.abs(jet.dJ)) < 1e-12
    # the field endomorphism itself still varies: q built from it is nonzero
    q = q_coefficients(jet)
    assert np.max(np.abs(q.q_mix)) > 1e-4
