"""Model construction: the builtin quartic anharmonic oscillator and JSON
ingestion of user-supplied finite-dimensional models.

The oscillator convention is H_0 = -d^2/dx^2 + x^2 (eigenvalues 1, 3, 5, ...)
with x = (a + a^dagger)/sqrt(2), a_{n-1,n} = sqrt(n), and the quartic term
x^4 as the order-1 perturbation.
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from .linalg import hermiticity_defect, hermitian_part, max_norm
from .series import OperatorSeries, zero_padded


class ModelFormatError(ValueError):
    """A model file failed to parse or validate."""


@dataclass(frozen=True)
class ModelSpec:
    dim: int
    h_coeffs: tuple  # ((order, matrix), ...), order 0 present, orders distinct
    hbar: float = 1.0
    name: str = "custom"
    provenance: str = "memory"

    @property
    def max_order(self) -> int:
        return max(p for p, _ in self.h_coeffs)

    @property
    def is_linear(self) -> bool:
        return all(p <= 1 for p, _ in self.h_coeffs)

    def coefficient(self, order: int) -> np.ndarray:
        for p, mat in self.h_coeffs:
            if p == order:
                return mat
        return np.zeros((self.dim, self.dim), dtype=np.complex128)

    def series(self, order: int) -> OperatorSeries:
        return zero_padded(dict(self.h_coeffs), self.dim, order, self.hbar)

    def with_hbar(self, hbar: float) -> "ModelSpec":
        return replace(self, hbar=float(hbar))


def _validate_terms(dim, terms, hbar, name, provenance, context):
    if dim < 1:
        raise ModelFormatError(f"{context}: dimension must be positive, got {dim}")
    if hbar <= 0:
        raise ModelFormatError(f"{context}: hbar must be positive, got {hbar}")
    orders = [p for p, _ in terms]
    if len(set(orders)) != len(orders):
        raise ModelFormatError(f"{context}: duplicate term orders {sorted(orders)}")
    if 0 not in orders:
        raise ModelFormatError(f"{context}: the order-0 (unperturbed) term is required")
    clean = []
    for p, mat in sorted(terms, key=lambda t: t[0]):
        if p < 0:
            raise ModelFormatError(f"{context}: negative term order {p}")
        mat = np.asarray(mat, dtype=np.complex128)
        if mat.shape != (dim, dim):
            raise ModelFormatError(
                f"{context}: term of order {p} has shape {mat.shape}, "
                f"expected ({dim}, {dim})"
            )
        defect = hermiticity_defect(mat)
        if defect > 1e-10 * max(1.0, max_norm(mat)):
            d = np.abs(mat - mat.conj().T)
            j, k = np.unravel_index(int(np.argmax(d)), d.shape)
            raise ModelFormatError(
                f"{context}: term of order {p} is not Hermitian; worst entry "
                f"({j}, {k}) with defect {d[j, k]:.3e}"
            )
        clean.append((int(p), hermitian_part(mat)))
    return ModelSpec(
        dim=int(dim),
        h_coeffs=tuple(clean),
        hbar=float(hbar),
        name=name,
        provenance=provenance,
    )


def make_model(dim, terms, hbar=1.0, name="custom", provenance="memory") -> ModelSpec:
    """Validated ModelSpec from (order, matrix) pairs; matrices are
    Hermiticity-checked and symmetrized."""
    return _validate_terms(dim, list(terms), hbar, name, provenance, name)


def _position_matrix(n: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1.0, n)), 1)
    return (a + a.T) / np.sqrt(2.0)


def _banded_square(x: np.ndarray, bandwidth: int) -> np.ndarray:
    # Hand-rolled banded product with a fixed ascending summation order, so
    # every retained entry depends only on its own indices; enlarging the
    # workspace cannot perturb interior entries even at the last bit.
    n = x.shape[0]
    out = np.zeros_like(x)
    for j in range(n):
        for k in range(max(0, j - 2 * bandwidth), min(n, j + 2 * bandwidth + 1)):
            lo = max(0, j - bandwidth, k - bandwidth)
            hi = min(n, j + bandwidth + 1, k + bandwidth + 1)
            acc = 0.0
            for m in range(lo, hi):
                acc += x[j, m] * x[m, k]
            out[j, k] = acc
    return out


def build_quartic_oscillator(dim: int, hbar: float = 1.0) -> ModelSpec:
    """Quartic anharmonic oscillator truncated to the lowest dim levels.

    x^4 is formed on a (dim+4)-sized workspace and truncated afterwards, so
    the retained entries are the exact infinite-basis matrix elements.
    """
    if dim < 8:
        raise ValueError(f"quartic oscillator needs dim >= 8, got {dim}")
    m = dim + 4
    x = _position_matrix(m)
    x2 = _banded_square(x, 1)
    x4 = _banded_square(x2, 2)[:dim, :dim]
    h0 = np.diag(2.0 * np.arange(dim) + 1.0)
    return _validate_terms(
        dim,
        [(0, h0), (1, x4)],
        hbar,
        name="quartic_oscillator",
        provenance="builtin",
        context="quartic_oscillator",
    )


BUILTIN_MODELS = {"quartic_oscillator": build_quartic_oscillator}


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_entry(x) -> bool:
    if _is_number(x):
        return True
    return (
        isinstance(x, list)
        and len(x) == 2
        and _is_number(x[0])
        and _is_number(x[1])
    )


def _parse_entry(x) -> complex:
    if _is_number(x):
        return complex(x, 0.0)
    return complex(x[0], x[1])


def _parse_matrix(data, dim, context):
    if not isinstance(data, list):
        raise ModelFormatError(f"{context}: matrix must be a list")
    rows_ok = len(data) == dim and all(
        isinstance(r, list) and len(r) == dim and all(_is_entry(e) for e in r)
        for r in data
    )
    if rows_ok:
        return np.array(
            [[_parse_entry(e) for e in row] for row in data], dtype=np.complex128
        )
    if len(data) == dim * dim and all(_is_entry(e) for e in data):
        flat = np.array([_parse_entry(e) for e in data], dtype=np.complex128)
        return flat.reshape(dim, dim)
    raise ModelFormatError(
        f"{context}: matrix must be {dim} rows of {dim} entries or a flat "
        f"row-major list of {dim * dim} entries (each a real or an [re, im] pair)"
    )


def model_from_dict(data, provenance="memory") -> ModelSpec:
    """Build a ModelSpec from the JSON model schema (see README)."""
    if not isinstance(data, dict):
        raise ModelFormatError(f"{provenance}: model document must be an object")
    if "builtin" in data:
        tag = data["builtin"]
        builder = BUILTIN_MODELS.get(tag)
        if builder is None:
            raise ModelFormatError(
                f"{provenance}: unknown builtin {tag!r}; "
                f"available: {sorted(BUILTIN_MODELS)}"
            )
        if "dimension" not in data:
            raise ModelFormatError(f"{provenance}: builtin selector needs 'dimension'")
        model = builder(int(data["dimension"]), hbar=float(data.get("hbar", 1.0)))
        return replace(model, provenance=provenance)
    for field in ("dimension", "terms"):
        if field not in data:
            raise ModelFormatError(f"{provenance}: missing required field {field!r}")
    dim = data["dimension"]
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ModelFormatError(f"{provenance}: 'dimension' must be an integer")
    hbar = data.get("hbar", 1.0)
    if not _is_number(hbar):
        raise ModelFormatError(f"{provenance}: 'hbar' must be a real number")
    if not isinstance(data["terms"], list) or not data["terms"]:
        raise ModelFormatError(f"{provenance}: 'terms' must be a nonempty list")
    terms = []
    for i, term in enumerate(data["terms"]):
        context = f"{provenance}: terms[{i}]"
        if not isinstance(term, dict):
            raise ModelFormatError(f"{context}: each term must be an object")
        if "order" not in term or "matrix" not in term:
            raise ModelFormatError(f"{context}: needs 'order' and 'matrix'")
        order = term["order"]
        if not isinstance(order, int) or isinstance(order, bool) or order < 0:
            raise ModelFormatError(f"{context}: 'order' must be an integer >= 0")
        terms.append((order, _parse_matrix(term["matrix"], dim, context)))
    return _validate_terms(
        dim, terms, float(hbar), data.get("name", "custom"), provenance, provenance
    )


def load_model(path) -> ModelSpec:
    """Load and validate a model file (JSON, UTF-8)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    return model_from_dict(data, provenance=str(path))
