"""Superconvergent elimination of perturbation orders, one doubling per stage.

Stage n takes a series whose orders 1..2^(n-1)-1 already vanish, averages
the slots p in [2^(n-1), 2^n-1] against the current integrable part H_0,
uses the averaging primitives as generator slots W_p, and conjugates the
whole series.  The averaged terms are folded into H_0 with their numeric
eps^p/p! weights, the eliminated slots are asserted against their known
values and zeroed, and everything from order 2^n up is kept transformed.
The engine therefore works at a fixed evaluation point eps; its H_0 is an
expansion in functions of eps, not a plain power series.

Eigenvalues are tracked per unperturbed label through maximal-overlap
assignment between successive eigenvector sets, and eigenvectors of the
original Hamiltonian are reconstructed by chaining the per-stage flow
expansions.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .averaging import SmallDenominatorError, average, min_cross_block_gap
from .linalg import SpectralData, eigh, fix_column_phases, max_norm
from .models import ModelSpec
from .series import (
    OperatorSeries,
    TransformSeries,
    conjugate_series,
    u_coefficients,
    weighted_sum,
    zero_padded,
)


class ConsistencyError(RuntimeError):
    """An eliminated slot did not match its predicted value."""


@dataclass(frozen=True)
class StageInfo:
    stage: int
    slot_residual: float  # max |K_p - predicted|_max over eliminated slots
    series_scale: float  # max coefficient norm of the series entering the stage
    min_gap: float  # smallest denominator gap in this stage's averaging basis


@dataclass(frozen=True)
class KolmogorovState:
    stage: int
    eps: float
    series: OperatorSeries
    spectral0: SpectralData
    generators: tuple
    u_products: tuple
    deg_tol: float | None
    gap_guard: float | None
    history: tuple

    @property
    def order(self) -> int:
        return self.series.order

    @property
    def dim(self) -> int:
        return self.series.dim


@dataclass(frozen=True)
class SuResult:
    """Per-stage eigenvalues (stage 0 = unperturbed) and reconstructed
    eigenvectors of the original Hamiltonian, labelled by unperturbed level."""

    eps: float
    order: int
    n_stages: int
    energies: tuple  # energies[n][j] for stage n, label j
    eigenvectors: np.ndarray  # column j approximates level j of H(eps)
    history: tuple
    state: KolmogorovState

    @property
    def min_gap(self) -> float:
        return min((info.min_gap for info in self.history), default=float("inf"))

    @property
    def max_slot_residual(self) -> float:
        return max((info.slot_residual for info in self.history), default=0.0)


def init(model: ModelSpec, eps: float, order: int, deg_tol=None, gap_guard=None):
    """Stage-0 state: the model's series zero-padded to the truncation order."""
    if order < 1:
        raise ValueError(f"truncation order must be at least 1, got {order}")
    series = zero_padded(dict(model.h_coeffs), model.dim, order, model.hbar)
    spectral0 = eigh(series.coeffs[0], deg_tol=deg_tol)
    return KolmogorovState(
        stage=0,
        eps=float(eps),
        series=series,
        spectral0=spectral0,
        generators=(),
        u_products=(),
        deg_tol=deg_tol,
        gap_guard=gap_guard,
        history=(),
    )


def step(state: KolmogorovState) -> KolmogorovState:
    """Advance one stage; returns a new state, the input is untouched."""
    n = state.stage + 1
    P = state.order
    lo = 2 ** (n - 1)
    hi = min(2**n - 1, P)
    series = state.series
    hbar = series.hbar
    dim = series.dim

    zero = np.zeros((dim, dim), dtype=np.complex128)
    w_slots = [zero.copy() for _ in range(P + 1)]
    averaged = {}
    for p in range(lo, hi + 1):
        try:
            avg = average(state.spectral0, series.coeffs[p], hbar, state.gap_guard)
        except SmallDenominatorError as exc:
            raise SmallDenominatorError(
                f"stage {n}, order {p}: {exc}", indices=exc.indices, gap=exc.gap
            ) from exc
        averaged[p] = avg.b_bar
        w_slots[p - 1] = avg.s_of_b

    generator = OperatorSeries(tuple(w_slots), hbar)
    ts = TransformSeries(generator)
    k = conjugate_series(ts, series)

    scale = max(max_norm(c) for c in series.coeffs)
    residual = 0.0
    new_coeffs = [k.coeffs[0].copy()]
    for p in range(lo, hi + 1):
        new_coeffs[0] += (state.eps**p / math.factorial(p)) * averaged[p]
    for p in range(1, P + 1):
        if p <= hi:
            predicted = averaged.get(p, zero)
            residual = max(residual, max_norm(k.coeffs[p] - predicted))
            new_coeffs.append(zero.copy())
        else:
            new_coeffs.append(k.coeffs[p])
    if residual > 1e-8 * max(scale, 1e-300):
        raise ConsistencyError(
            f"stage {n}: eliminated slots deviate from their averaged values "
            f"by {residual:.3e} (scale {scale:.3e})"
        )

    new_series = OperatorSeries(tuple(new_coeffs), hbar)
    info = StageInfo(
        stage=n,
        slot_residual=residual,
        series_scale=scale,
        min_gap=min_cross_block_gap(state.spectral0) if averaged else float("inf"),
    )
    return KolmogorovState(
        stage=n,
        eps=state.eps,
        series=new_series,
        spectral0=eigh(new_coeffs[0], deg_tol=state.deg_tol),
        generators=state.generators + (ts,),
        u_products=state.u_products + (tuple(u_coefficients(ts)),),
        deg_tol=state.deg_tol,
        gap_guard=state.gap_guard,
        history=state.history + (info,),
    )


def default_n_stages(order: int) -> int:
    # ceil(log2(order + 1)): exactly covers every representable slot
    return int(order).bit_length()


def match_labels(v_prev: np.ndarray, v_new: np.ndarray) -> np.ndarray:
    """perm[i] = column of v_new carrying the state of v_prev column i."""
    weight = np.abs(v_prev.conj().T @ v_new) ** 2
    rows, cols = linear_sum_assignment(-weight)
    perm = np.empty(v_prev.shape[1], dtype=np.int64)
    perm[rows] = cols
    return perm


def run(
    model: ModelSpec,
    eps: float,
    order: int,
    n_stages: int | None = None,
    deg_tol=None,
    gap_guard=None,
) -> SuResult:
    """Full iteration: per-stage eigenvalues and reconstructed eigenvectors.

    Parameters
    ----------
    model : ModelSpec
    eps : evaluation point of the perturbation parameter
    order : truncation order P of the graded series (>= 1)
    n_stages : number of elimination stages; default ceil(log2(P+1))
    deg_tol, gap_guard : degeneracy tolerances, None = relative defaults

    Returns
    -------
    SuResult; energies[n][j] is the stage-n eigenvalue attached to
    unperturbed label j, energies[0] the unperturbed spectrum.
    """
    if n_stages is None:
        n_stages = default_n_stages(order)
    if n_stages < 1:
        raise ValueError(f"n_stages must be at least 1, got {n_stages}")
    if 2 ** (n_stages - 1) > order:
        warnings.warn(
            f"stages beyond {default_n_stages(order)} are no-ops at truncation "
            f"order {order}",
            stacklevel=2,
        )

    state = init(model, eps, order, deg_tol=deg_tol, gap_guard=gap_guard)
    labels = np.arange(state.dim)
    v_prev = state.spectral0.eigenvectors
    energies = [state.spectral0.eigenvalues.copy()]
    for _ in range(n_stages):
        state = step(state)
        v_new = state.spectral0.eigenvectors
        perm = match_labels(v_prev, v_new)
        labels = perm[labels]
        energies.append(state.spectral0.eigenvalues[labels])
        v_prev = v_new

    u_total = np.eye(state.dim, dtype=np.complex128)
    for u_mats in state.u_products:
        u_total = u_total @ weighted_sum(u_mats, eps)
    vecs = u_total @ state.spectral0.eigenvectors[:, labels]
    vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    vecs = fix_column_phases(vecs)

    return SuResult(
        eps=float(eps),
        order=order,
        n_stages=n_stages,
        energies=tuple(energies),
        eigenvectors=vecs,
        history=state.history,
        state=state,
    )
