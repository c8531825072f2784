"""Cyclic Jacobi eigensolver for dense complex Hermitian matrices.

Each rotation annihilates one off-diagonal pair (p, q): the phase of
a[p, q] is absorbed into a diagonal unitary and the remaining real 2x2
block is diagonalized with a standard Givens rotation.  Sweeps repeat
until the largest off-diagonal modulus drops below tol, then one extra
polishing sweep runs; Jacobi converges quadratically, so the polish
leaves the off-diagonal at rounding level, which downstream spectral
averaging relies on.

The sweep kernel exists twice with identical semantics: a numba @njit
version (default) and a pure-numpy fallback.  Set SUPERPERT_NO_NUMBA=1
to force the fallback; benchmarks/bench_eigh.py compares the two.
"""

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

_ENV_FLAG = "SUPERPERT_NO_NUMBA"


def _numba_disabled() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


def default_backend() -> str:
    """Backend selected at import time: 'numba' unless disabled or missing."""
    if HAS_NUMBA and not _numba_disabled():
        return "numba"
    return "numpy"


def _sweep_numpy(a, v, skip):
    """One cyclic Jacobi sweep over all (p, q), p < q.  Returns rotation count."""
    n = a.shape[0]
    nrot = 0
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            r = abs(apq)
            if r <= skip:
                continue
            app = a[p, p].real
            aqq = a[q, q].real
            diff = aqq - app
            phase = apq / r
            if r < abs(diff) * 1e-36:
                t = r / diff
            else:
                theta = diff / (2.0 * r)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            jp = c * phase
            jq = s * phase
            # A <- J^H A J with J = [[c*phase, s*phase], [-s, c]] on columns (p, q)
            colp = a[:, p] * jp - a[:, q] * s
            colq = a[:, p] * jq + a[:, q] * c
            a[:, p] = colp
            a[:, q] = colq
            rowp = jp.conjugate() * a[p, :] - s * a[q, :]
            rowq = jq.conjugate() * a[p, :] + c * a[q, :]
            a[p, :] = rowp
            a[q, :] = rowq
            a[p, q] = 0.0
            a[q, p] = 0.0
            a[p, p] = a[p, p].real + 0.0j
            a[q, q] = a[q, q].real + 0.0j
            vp = v[:, p] * jp - v[:, q] * s
            vq = v[:, p] * jq + v[:, q] * c
            v[:, p] = vp
            v[:, q] = vq
            nrot += 1
    return nrot


if HAS_NUMBA:

    @njit(cache=True)
    def _sweep_numba(a, v, skip):  # pragma: no cover - exercised via dispatch
        n = a.shape[0]
        nrot = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= skip:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                diff = aqq - app
                phase = apq / r
                if r < abs(diff) * 1e-36:
                    t = r / diff
                else:
                    theta = diff / (2.0 * r)
                    if theta >= 0.0:
                        t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                    else:
                        t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                jp = c * phase
                jq = s * phase
                jpc = jp.conjugate()
                jqc = jq.conjugate()
                for i in range(n):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = aip * jp - aiq * s
                    a[i, q] = aip * jq + aiq * c
                for i in range(n):
                    api = a[p, i]
                    aqi = a[q, i]
                    a[p, i] = jpc * api - s * aqi
                    a[q, i] = jqc * api + c * aqi
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real + 0.0j
                a[q, q] = a[q, q].real + 0.0j
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = vip * jp - viq * s
                    v[i, q] = vip * jq + viq * c
                nrot += 1
        return nrot


def _offdiag_max(a):
    off = np.abs(a)
    np.fill_diagonal(off, 0.0)
    return float(off.max()) if off.size else 0.0


def jacobi_eigh(a, backend=None, tol_factor=1e-13, max_sweeps=100):
    """Diagonalize a Hermitian matrix in place semantics on a working copy.

    Parameters
    ----------
    a : (n, n) complex ndarray, Hermitian (caller-validated)
    backend : None | 'numba' | 'numpy'
        None picks the module default (env flag SUPERPERT_NO_NUMBA).
    tol_factor : float
        Convergence threshold: max off-diagonal modulus <= tol_factor * max|a|.
    max_sweeps : int
        Hard cap on cyclic sweeps, polishing sweep included.

    Returns
    -------
    lam : (n,) float ndarray, unsorted eigenvalues (diagonal of the rotated matrix)
    v : (n, n) complex ndarray, columns are the matching eigenvectors
    """
    if backend is None:
        backend = default_backend()
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        sweep = _sweep_numba
    elif backend == "numpy":
        sweep = _sweep_numpy
    else:
        raise ValueError(f"unknown jacobi backend {backend!r}")

    work = np.array(a, dtype=np.complex128, order="C", copy=True)
    n = work.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = float(np.max(np.abs(work))) if n else 0.0
    if n <= 1 or scale == 0.0:
        return np.diag(work).real.copy(), v

    tol = tol_factor * scale
    skip = 1e-3 * tol
    sweeps = 0
    while _offdiag_max(work) > tol:
        if sweeps >= max_sweeps - 1:
            raise RuntimeError(
                f"jacobi solver did not converge in {max_sweeps} sweeps "
                f"(off-diagonal max {_offdiag_max(work):.3e}, tol {tol:.3e})"
            )
        sweep(work, v, skip)
        sweeps += 1
    sweep(work, v, skip)  # polish: threshold -> rounding level
    return np.diag(work).real.copy(), v
