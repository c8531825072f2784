"""Graded operator series and the conjugation recursions.

A series sum_p eps^p/p! A_p is stored as the coefficient list [A_0..A_P];
the factorial weights are part of the grading, not of the stored matrices.
A transform carries a generator series whose slot l holds W_{l+1}, and
acts on operators through the expansion maps

    T_0 = id,   T_{p+1} = sum_{l=0}^{p} C(p, l) ad W_{l+1} o T_{p-l}

where ad W = (i/hbar)[W, .].  Conjugating a Hamiltonian series is the
Cauchy product K_p = sum_j C(p, j) T_{p-j}(H_j); an equivalent recursion
(K_p = sum_{j=1}^{p} C(p-1, j-1)(ad W_j(K_{p-j}) + T_{p-j}(H_j))) is kept
as an independent cross-check.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_operator, commutator_ad, hermiticity_defect, max_norm

MAX_ORDER = 62  # binomials stay exact in int64 up to this order

_BINOM = [[float(math.comb(p, l)) for l in range(p + 1)] for p in range(MAX_ORDER + 1)]


def binomial(p: int, l: int) -> float:
    return _BINOM[p][l]


@dataclass(frozen=True)
class OperatorSeries:
    """Finite graded family: coeffs[p] multiplies eps^p/p!."""

    coeffs: tuple
    hbar: float = 1.0

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("series needs at least the order-0 coefficient")
        if len(self.coeffs) - 1 > MAX_ORDER:
            raise ValueError(
                f"series order {len(self.coeffs) - 1} exceeds the cap {MAX_ORDER}"
            )
        if self.hbar <= 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        mats = tuple(as_operator(c) for c in self.coeffs)
        dim = mats[0].shape[0]
        for p, c in enumerate(mats):
            if c.shape[0] != dim:
                raise ValueError(
                    f"coefficient {p} has dimension {c.shape[0]}, expected {dim}"
                )
            defect = hermiticity_defect(c)
            if defect > 1e-10 * max(1.0, max_norm(c)):
                raise ValueError(
                    f"coefficient {p} is not Hermitian (defect {defect:.3e})"
                )
        object.__setattr__(self, "coeffs", mats)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def dim(self) -> int:
        return self.coeffs[0].shape[0]


@dataclass(frozen=True)
class TransformSeries:
    """Transform generated by -W(eps); generator.coeffs[l] = W_{l+1}."""

    generator: OperatorSeries

    @property
    def order(self) -> int:
        return self.generator.order

    @property
    def dim(self) -> int:
        return self.generator.dim

    @property
    def hbar(self) -> float:
        return self.generator.hbar


def _t_images(ts: TransformSeries, a: np.ndarray, up_to: int):
    """[T_0(a), ..., T_up_to(a)].  Zero generator slots are skipped so that
    structurally-absent orders come out as exact zeros."""
    w = ts.generator.coeffs
    hbar = ts.hbar
    images = [np.array(a, dtype=np.complex128)]
    for p in range(up_to):
        nxt = np.zeros_like(images[0])
        for l in range(p + 1):
            if w[l].any() and images[p - l].any():
                nxt += binomial(p, l) * commutator_ad(w[l], images[p - l], hbar)
        images.append(nxt)
    return images


def t_apply(ts: TransformSeries, p: int, a) -> np.ndarray:
    """Image T_p(a) of one operator under the transform expansion."""
    if not 0 <= p <= ts.order:
        raise ValueError(f"order index {p} outside 0..{ts.order}")
    a = as_operator(a)
    if a.shape[0] != ts.dim:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {ts.dim}")
    return _t_images(ts, a, p)[p]


def conjugate_series(ts: TransformSeries, h: OperatorSeries) -> OperatorSeries:
    """Transformed series, Cauchy product K_p = sum_j C(p,j) T_{p-j}(H_j)."""
    if ts.order != h.order or ts.dim != h.dim:
        raise ValueError(
            f"transform (order {ts.order}, dim {ts.dim}) does not match "
            f"series (order {h.order}, dim {h.dim})"
        )
    P = h.order
    images = [_t_images(ts, h.coeffs[j], P - j) for j in range(P + 1)]
    out = []
    for p in range(P + 1):
        kp = np.zeros_like(h.coeffs[0])
        for j in range(p + 1):
            term = images[j][p - j]
            if term.any():
                kp += binomial(p, j) * term
        out.append(kp)
    return OperatorSeries(tuple(out), h.hbar)


def conjugate_series_table(ts: TransformSeries, h: OperatorSeries) -> OperatorSeries:
    """Same transform through the stagewise recursion; cross-check route."""
    if ts.order != h.order or ts.dim != h.dim:
        raise ValueError("transform/series order or dimension mismatch")
    P = h.order
    w = ts.generator.coeffs
    hbar = h.hbar
    images = [_t_images(ts, h.coeffs[j], P - j) for j in range(P + 1)]
    out = [np.array(h.coeffs[0], dtype=np.complex128)]
    for p in range(1, P + 1):
        kp = np.zeros_like(h.coeffs[0])
        for j in range(1, p + 1):
            cof = binomial(p - 1, j - 1)
            if w[j - 1].any() and out[p - j].any():
                kp += cof * commutator_ad(w[j - 1], out[p - j], hbar)
            term = images[j][p - j]
            if term.any():
                kp += cof * term
        out.append(kp)
    return OperatorSeries(tuple(out), h.hbar)


def u_coefficients(ts: TransformSeries):
    """Coefficients of the flow itself: Phi(eps) ~ sum_p eps^p/p! U_p.

    The flow solves U' = -(i/hbar) U W(eps) with U_0 = I, so that
    U(eps)^{-1} A U(eps) reproduces the conjugated series to O(eps^{P+1}).
    """
    w = ts.generator.coeffs
    hbar = ts.hbar
    n = ts.dim
    u = [np.eye(n, dtype=np.complex128)]
    for p in range(ts.order):
        nxt = np.zeros((n, n), dtype=np.complex128)
        for l in range(p + 1):
            if w[l].any() and u[p - l].any():
                nxt += binomial(p, l) * (u[p - l] @ w[l])
        u.append((-1j / hbar) * nxt)
    return u


def weighted_sum(mats, eps: float) -> np.ndarray:
    """sum_p eps^p/p! mats[p]."""
    out = np.array(mats[0], dtype=np.complex128, copy=True)
    for p in range(1, len(mats)):
        c = mats[p]
        if c.any():
            out += (eps**p / math.factorial(p)) * c
    return out


def eval_series(s: OperatorSeries, eps: float) -> np.ndarray:
    """Evaluate the series at a numeric parameter value."""
    return weighted_sum(s.coeffs, eps)


def zero_padded(coeffs_by_order, dim: int, order: int, hbar: float) -> OperatorSeries:
    """Series of the given order from a sparse {order: matrix} mapping."""
    zero = np.zeros((dim, dim), dtype=np.complex128)
    slots = [zero.copy() for _ in range(order + 1)]
    for p, mat in coeffs_by_order.items():
        if p > order:
            raise ValueError(
                f"term of order {p} does not fit truncation order {order}"
            )
        slots[p] = np.array(mat, dtype=np.complex128)
    return OperatorSeries(tuple(slots), hbar)
