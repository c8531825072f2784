import mpmath
import numpy as np
import pytest

import superpert as sp

from conftest import random_diagonal_model

QUARTIC_GROUND = (3.0 / 4.0, -21.0 / 16.0, 333.0 / 64.0, -30885.0 / 1024.0)


def test_diagonal_perturbation_is_first_order_only():
    h0 = sp.eigh(np.diag([0.0, 1.0, 2.0, 3.5]).astype(complex))
    v = np.diag([0.4, -0.1, 0.2, 0.0]).astype(complex)
    rs = sp.rs_corrections(h0, v, max_order=4, levels=(0, 1, 2))
    for j in (0, 1, 2):
        c = rs.coefficients(j)
        assert c[0] == pytest.approx(v[j, j].real, abs=1e-15)
        assert c[1] == 0.0 and c[2] == 0.0 and c[3] == 0.0


def test_quartic_ground_state_coefficients():
    model = sp.build_quartic_oscillator(32)
    h0 = sp.eigh(model.coefficient(0))
    rs = sp.rs_corrections(h0, model.coefficient(1), max_order=4, levels=0)
    c = rs.coefficients(0)
    for got, want in zip(c, QUARTIC_GROUND):
        assert got == pytest.approx(want, rel=1e-12)


def _mp_exact_coefficients(model, level, n_coeffs=8):
    """Fit oracle: high-precision exact eigenvalues on the stated eps grid,
    Vandermonde-solved for the leading power-series coefficients."""
    with mpmath.workdps(50):
        h0 = model.coefficient(0)
        v = model.coefficient(1)
        n = model.dim
        eps_points = [mpmath.mpf(s) / 1000 for s in (-4, -3, -2, -1, 1, 2, 3, 4)]
        e_ref = sorted(mpmath.eigh(mpmath.matrix(h0.tolist()), eigvals_only=True))
        rows = []
        rhs = []
        for eps in eps_points:
            h = mpmath.zeros(n, n)
            for j in range(n):
                for k in range(n):
                    h[j, k] = mpmath.mpc(h0[j, k]) + eps * mpmath.mpc(v[j, k])
            lam = sorted(mpmath.eigh(h, eigvals_only=True))
            rows.append([eps**l for l in range(1, n_coeffs + 1)])
            rhs.append(lam[level] - e_ref[level])
        sol = mpmath.lu_solve(mpmath.matrix(rows), mpmath.matrix(rhs))
        return [float(sol[l]) for l in range(4)]


def test_fourth_order_against_finite_eps_fit():
    rng = np.random.default_rng(60)
    for _ in range(3):
        model = random_diagonal_model(rng, 8, gap=0.6, v_scale=1.0)
        h0 = sp.eigh(model.coefficient(0))
        level = int(rng.integers(0, 8))
        rs = sp.rs_corrections(h0, model.coefficient(1), max_order=4, levels=level)
        got = rs.coefficients(level)
        want = _mp_exact_coefficients(model, level)
        for l in range(4):
            assert got[l] == pytest.approx(want[l], rel=1e-5, abs=1e-9)


def test_scaling_covariance():
    rng = np.random.default_rng(61)
    model = random_diagonal_model(rng, 6, gap=0.8)
    h0 = sp.eigh(model.coefficient(0))
    v = model.coefficient(1)
    base = sp.rs_corrections(h0, v, max_order=4, levels=2).coefficients(2)
    doubled = sp.rs_corrections(h0, 2.0 * v, max_order=4, levels=2).coefficients(2)
    for l in range(4):
        # power-of-two scaling commutes with every float operation exactly
        assert doubled[l] == 2.0 ** (l + 1) * base[l]
    stretched = sp.rs_corrections(h0, 1.7 * v, max_order=4, levels=2).coefficients(2)
    for l in range(4):
        assert stretched[l] == pytest.approx(1.7 ** (l + 1) * base[l], rel=1e-12)


def test_corrections_real_for_hermitian_input():
    rng = np.random.default_rng(62)
    model = random_diagonal_model(rng, 7)
    h0 = sp.eigh(model.coefficient(0))
    rs = sp.rs_corrections(h0, model.coefficient(1), levels=range(7))
    assert rs.coeffs.dtype == np.float64
    assert np.isfinite(rs.coeffs).all()


def test_degenerate_level_rejected():
    h0 = sp.eigh(np.diag([0.0, 1e-9, 1.0]).astype(complex), deg_tol=0.0)
    v = np.ones((3, 3), dtype=complex)
    with pytest.raises(sp.SmallDenominatorError, match="degenerate"):
        sp.rs_corrections(h0, v, levels=0)


def test_energy_evaluation_and_errors():
    h0 = sp.eigh(np.diag([0.0, 2.0]).astype(complex))
    v = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    rs = sp.rs_corrections(h0, v, max_order=2, levels=0)
    # c1 = 0, c2 = 1/(0-2) = -1/2
    assert rs.energy(0.1, 0, 0) == pytest.approx(0.0)
    assert rs.energy(0.1, 0, 1) == pytest.approx(0.0)
    assert rs.energy(0.1, 0, 2) == pytest.approx(-0.005)
    assert rs.energy(0.1, 0) == rs.energy(0.1, 0, 2)
    with pytest.raises(KeyError, match="level 1"):
        rs.energy(0.1, 1)
    with pytest.raises(ValueError, match="order"):
        rs.energy(0.1, 0, 3)
    with pytest.raises(ValueError, match="max_order"):
        sp.rs_corrections(h0, v, max_order=5, levels=0)
    with pytest.raises(ValueError, match="level"):
        sp.rs_corrections(h0, v, levels=9)
