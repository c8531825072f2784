import numpy as np
import pytest

import superpert as sp
from superpert.averaging import default_gap_guard

from conftest import random_hermitian


def _identity_errors(spectral, b, result, hbar):
    a = spectral.eigenvectors @ np.diag(spectral.eigenvalues) @ spectral.eigenvectors.conj().T
    e1 = sp.max_norm(sp.commutator_ad(result.b_bar, a, hbar))
    lhs = sp.commutator_ad(result.s_of_b, a, hbar)
    e2 = sp.max_norm(lhs - (result.b_bar - b))
    return e1, e2


def test_two_level_hand_computation():
    spectral = sp.eigh(np.diag([1.0, 2.0]).astype(complex))
    b = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    res = sp.average(spectral, b, 1.0)
    np.testing.assert_allclose(res.b_bar, np.zeros((2, 2)), atol=1e-15)
    np.testing.assert_allclose(
        res.s_of_b, np.array([[0.0, 1.0j], [-1.0j, 0.0]]), atol=1e-15
    )
    # (i)[S, A] = Bbar - B = -B
    a = np.diag([1.0, 2.0]).astype(complex)
    np.testing.assert_allclose(sp.commutator_ad(res.s_of_b, a), -b, atol=1e-14)


def test_diagonal_input_passes_through():
    rng = np.random.default_rng(40)
    spectral = sp.eigh(np.diag([0.0, 1.0, 3.0]).astype(complex))
    b = np.diag(rng.uniform(-1, 1, size=3)).astype(complex)
    res = sp.average(spectral, b)
    np.testing.assert_allclose(res.b_bar, b, atol=1e-15)
    assert sp.max_norm(res.s_of_b) <= 1e-15


def test_lemma_identities_random():
    rng = np.random.default_rng(41)
    for _ in range(25):
        n = int(rng.integers(2, 9))
        hbar = float(rng.uniform(0.3, 2.0))
        a = random_hermitian(rng, n, scale=2.0)
        b = random_hermitian(rng, n)
        spectral = sp.eigh(a)
        res = sp.average(spectral, b, hbar)
        e1, e2 = _identity_errors(spectral, b, res, hbar)
        bound = 1e-11 * max(sp.max_norm(b), 1e-300)
        assert e1 <= bound
        assert e2 <= bound


def test_average_is_projection():
    rng = np.random.default_rng(42)
    a = random_hermitian(rng, 6)
    b = random_hermitian(rng, 6)
    spectral = sp.eigh(a)
    first = sp.average(spectral, b)
    second = sp.average(spectral, first.b_bar)
    tol = 1e-12 * max(1.0, sp.max_norm(b))
    assert sp.max_norm(second.b_bar - first.b_bar) <= tol
    assert sp.max_norm(second.s_of_b) <= tol


def test_average_linearity():
    rng = np.random.default_rng(43)
    a = random_hermitian(rng, 5)
    b1 = random_hermitian(rng, 5)
    b2 = random_hermitian(rng, 5)
    spectral = sp.eigh(a)
    alpha, beta = 1.25, -0.75
    combined = sp.average(spectral, alpha * b1 + beta * b2)
    r1 = sp.average(spectral, b1)
    r2 = sp.average(spectral, b2)
    tol = 1e-11 * max(1.0, sp.max_norm(b1), sp.max_norm(b2))
    assert sp.max_norm(combined.b_bar - alpha * r1.b_bar - beta * r2.b_bar) <= tol
    assert sp.max_norm(combined.s_of_b - alpha * r1.s_of_b - beta * r2.s_of_b) <= tol


def test_outputs_hermitian():
    rng = np.random.default_rng(44)
    a = random_hermitian(rng, 7)
    b = random_hermitian(rng, 7)
    res = sp.average(sp.eigh(a), b)
    assert sp.hermiticity_defect(res.b_bar) <= 1e-11 * max(1.0, sp.max_norm(b))
    assert sp.hermiticity_defect(res.s_of_b) <= 1e-11 * max(1.0, sp.max_norm(res.s_of_b))


def test_degenerate_block_retention():
    rng = np.random.default_rng(45)
    q = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0]
    a = q @ np.diag([1.0, 1.0, 2.0, 3.0]) @ q.conj().T
    b = random_hermitian(rng, 4)
    spectral = sp.eigh(a, deg_tol=1e-8)
    assert len(spectral.blocks[0]) == 2
    res = sp.average(spectral, b)
    v = spectral.eigenvectors
    bt = v.conj().T @ b @ v
    bbar_t = v.conj().T @ res.b_bar @ v
    s_t = v.conj().T @ res.s_of_b @ v
    # intra-block entries kept in the average (including off-diagonal ones),
    # zeroed in the primitive; cross-block the other way around
    np.testing.assert_allclose(bbar_t[:2, :2], bt[:2, :2], atol=1e-12)
    assert sp.max_norm(bbar_t[2:, :2]) <= 1e-12
    assert sp.max_norm(s_t[:2, :2]) <= 1e-12
    e1, e2 = _identity_errors(spectral, b, res, 1.0)
    assert max(e1, e2) <= 1e-11 * sp.max_norm(b)


def test_small_denominator_guard():
    a = np.diag([0.0, 1e-8, 1.0]).astype(complex)
    spectral = sp.eigh(a)  # deg_tol default 1e-9 * range keeps 0 and 1e-8 apart
    assert len(spectral.blocks) == 3
    b = np.ones((3, 3), dtype=complex)
    with pytest.raises(sp.SmallDenominatorError) as err:
        sp.average(spectral, b)
    assert err.value.indices == (0, 1)
    assert err.value.gap == pytest.approx(1e-8)
    assert "0" in str(err.value) and "1" in str(err.value)
    # explicit permissive guard lets the same pair through
    res = sp.average(spectral, b, gap_guard=1e-10)
    assert np.isfinite(res.s_of_b).all()


def test_guard_default_scales_with_range():
    a = np.diag([0.0, 1.0, 2.0]).astype(complex)
    assert default_gap_guard(sp.eigh(a)) == pytest.approx(2e-6)


def test_dimension_mismatch():
    spectral = sp.eigh(np.diag([0.0, 1.0]).astype(complex))
    with pytest.raises(ValueError, match="mismatch"):
        sp.average(spectral, np.zeros((3, 3), dtype=complex))


def test_min_cross_block_gap():
    spectral = sp.eigh(np.diag([0.0, 0.3, 1.0]).astype(complex))
    assert sp.min_cross_block_gap(spectral) == pytest.approx(0.3)
    one_block = sp.eigh(np.eye(3, dtype=complex))
    assert sp.min_cross_block_gap(one_block) == float("inf")
