"""Exact spectral averaging: the solver for the homological equation.

For a Hermitian A with spectral data (E_j, |j>) and a Hermitian B, the
average and its primitive are, in A's eigenbasis,

    Bbar_jk = B_jk   if j, k share a degeneracy block, else 0
    S_jk    = (hbar/i) B_jk / (E_j - E_k)   across blocks, else 0

so that (i/hbar)[Bbar, A] = 0 and (i/hbar)[S, A] = Bbar - B hold at
working precision by construction.  For degenerate A the full intra-block
part is retained, which still commutes with A.

Cross-block gaps below the guard abort with a diagnostic instead of
amplifying noise through the denominators.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import SpectralData, hermitian_part, require_hermitian


class SmallDenominatorError(ValueError):
    """A generator denominator E_j - E_k fell below the safety guard."""

    def __init__(self, message, indices=None, gap=None):
        super().__init__(message)
        self.indices = indices
        self.gap = gap


@dataclass(frozen=True)
class AveragingResult:
    b_bar: np.ndarray
    s_of_b: np.ndarray
    blocks: tuple


def default_gap_guard(spectral: SpectralData) -> float:
    return 1e-6 * max(spectral.spectral_range, 0.0)


def min_cross_block_gap(spectral: SpectralData) -> float:
    """Smallest |E_j - E_k| over pairs in different blocks (inf if one block).

    Blocks are contiguous in the ascending spectrum, so the minimum is
    attained at a block boundary."""
    lam = spectral.eigenvalues
    gap = float("inf")
    for prev, nxt in zip(spectral.blocks, spectral.blocks[1:]):
        gap = min(gap, float(lam[nxt[0]] - lam[prev[-1]]))
    return gap


def average(spectral: SpectralData, b, hbar=1.0, gap_guard=None) -> AveragingResult:
    """Split B into its A-commuting average and the generator primitive.

    Parameters
    ----------
    spectral : SpectralData of the reference operator A
    b : Hermitian matrix to average
    hbar : positive scale of the adjoint action
    gap_guard : float or None
        Denominator guard; None means 1e-6 times A's spectral range.

    Returns
    -------
    AveragingResult with b_bar (the average) and s_of_b (the primitive,
    i.e. the generator solving (i/hbar)[S, A] = Bbar - B), both Hermitian,
    expressed in the original basis.
    """
    b = require_hermitian(b, what="averaging input")
    if b.shape[0] != spectral.dim:
        raise ValueError(f"dimension mismatch: {b.shape[0]} vs {spectral.dim}")
    if hbar <= 0:
        raise ValueError(f"hbar must be positive, got {hbar}")
    if gap_guard is None:
        gap_guard = default_gap_guard(spectral)

    lam = spectral.eigenvalues
    for prev, nxt in zip(spectral.blocks, spectral.blocks[1:]):
        j, k = prev[-1], nxt[0]
        gap = float(lam[k] - lam[j])
        if gap <= gap_guard:
            raise SmallDenominatorError(
                f"small denominator: levels {j} and {k} sit in different "
                f"degeneracy blocks but are only {gap:.6e} apart "
                f"(guard {gap_guard:.6e})",
                indices=(j, k),
                gap=gap,
            )

    v = spectral.eigenvectors
    bt = v.conj().T @ b @ v
    ids = spectral.block_ids()
    same = ids[:, None] == ids[None, :]

    bbar_t = np.where(same, bt, 0.0)
    denom = lam[:, None] - lam[None, :]
    denom = np.where(same, 1.0, denom)  # intra-block entries are masked out anyway
    s_t = np.where(same, 0.0, (hbar / 1j) * bt / denom)

    b_bar = hermitian_part(v @ bbar_t @ v.conj().T)
    s_of_b = hermitian_part(v @ s_t @ v.conj().T)
    return AveragingResult(b_bar, s_of_b, spectral.blocks)
