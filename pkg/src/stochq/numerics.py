"""Dense complex-matrix kernels shared by the rest of the package.

Everything here works on plain ``numpy`` arrays. The vectorization
convention is row-major: ``vec(A)[j * cols + k] == A[j, k]``.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

TAU_HERM = 1e-10
TAU_EIG = 1e-9
TAU_INV = 1e-9
TAU_SING = 1e-12
KAPPA_MAX = 1e12


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class DomainError(ValueError):
    """Input lies outside the domain an operation is defined on."""


class SingularMatrixError(ArithmeticError):
    """A matrix that had to be inverted is singular or too ill-conditioned."""


def as_matrix(a, dtype=complex) -> np.ndarray:
    m = np.asarray(a, dtype=dtype)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    return m


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")


def hadamard_product(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"Hadamard product of {a.shape} and {b.shape}")
    return a * b


def hadamard_power(a, r: float) -> np.ndarray:
    """Entrywise power, principal branch.

    Fractional powers are only defined here for real non-negative entries,
    which is the only use the embedding needs (``r = 1/2`` of a
    stochastic matrix).
    """
    a = np.asarray(a)
    if float(r).is_integer():
        return a ** int(r)
    if np.iscomplexobj(a):
        if np.any(np.abs(a.imag) > 0):
            raise DomainError("fractional Hadamard power of a complex matrix")
        a = a.real
    if np.any(a < 0):
        raise DomainError("fractional Hadamard power of a negative entry")
    return a ** r


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def vec(a) -> np.ndarray:
    """Row-major stacking of ``a`` into a column of length rows*cols."""
    a = np.asarray(a)
    return a.reshape(-1, 1)


def unvec(v, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    v = np.asarray(v)
    if v.size != rows * cols:
        raise DimensionError(f"cannot unvec {v.size} entries into {rows}x{cols}")
    return v.reshape(rows, cols)


def _check_partition(sets: Sequence[Sequence[int]], size: int) -> list[np.ndarray]:
    out = []
    seen = np.zeros(size, dtype=bool)
    for idx in sets:
        idx = np.asarray(list(idx), dtype=int)
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= size):
            raise ValueError(f"index set {idx.tolist()} is not strictly increasing within [0, {size})")
        if np.any(seen[idx]):
            raise ValueError("index sets overlap")
        seen[idx] = True
        out.append(idx)
    if not seen.all():
        raise ValueError("index sets do not cover every row")
    return out


class DirectSum(NamedTuple):
    blocks: list[np.ndarray]
    clean: bool
    max_off_block: float


def direct_sum_extract(m, sets: Sequence[Sequence[int]], tol: float = 1e-14) -> DirectSum:
    """Split ``m`` into the principal submatrices ``m[sets[j]]``.

    ``clean`` reports whether every entry outside the diagonal blocks is
    below ``tol`` in modulus, i.e. whether ``m`` really is the direct sum.
    """
    m = np.asarray(m)
    _require_square(m)
    idx_sets = _check_partition(sets, m.shape[0])
    mask = np.zeros(m.shape, dtype=bool)
    blocks = []
    for idx in idx_sets:
        blocks.append(m[np.ix_(idx, idx)].copy())
        mask[np.ix_(idx, idx)] = True
    off = np.abs(m[~mask])
    worst = float(off.max()) if off.size else 0.0
    return DirectSum(blocks, worst <= tol, worst)


def direct_sum_assemble(blocks: Sequence[np.ndarray], sets: Sequence[Sequence[int]]) -> np.ndarray:
    size = sum(len(s) for s in sets)
    idx_sets = _check_partition(sets, size)
    dtype = np.result_type(*[np.asarray(b).dtype for b in blocks])
    out = np.zeros((size, size), dtype=dtype)
    for block, idx in zip(blocks, idx_sets):
        out[np.ix_(idx, idx)] = block
    return out


def is_hermitian(m, tol: float = TAU_HERM) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, float(np.linalg.norm(m)))
    return float(np.max(np.abs(m - m.conj().T), initial=0.0)) <= tol * scale


def hermitian_eigenvalues(m, tol: float = TAU_HERM) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix."""
    m = np.asarray(m)
    _require_square(m)
    if not is_hermitian(m, tol):
        raise DomainError("matrix is not Hermitian")
    # symmetrize so LAPACK sees exactly Hermitian input
    return np.linalg.eigvalsh((m + m.conj().T) / 2)


class DetInverse(NamedTuple):
    det: complex
    inverse: np.ndarray | None
    condition: float

    @property
    def singular(self) -> bool:
        return self.inverse is None


def det_and_inverse(m, tau_sing: float = TAU_SING, kappa_max: float = KAPPA_MAX) -> DetInverse:
    """Determinant and, unless ``m`` is numerically singular, its inverse."""
    m = np.asarray(m)
    _require_square(m)
    det = complex(np.linalg.det(m))
    cond = float(np.linalg.cond(m))
    if abs(det) < tau_sing or not np.isfinite(cond) or cond > kappa_max:
        return DetInverse(det, None, cond)
    inv = np.linalg.inv(m)
    resid = np.max(np.abs(m @ inv - np.eye(m.shape[0])))
    if resid > TAU_INV:
        return DetInverse(det, None, cond)
    return DetInverse(det, inv, cond)


def solve_right(a, b, inverse: np.ndarray | None = None, steps: int = 2) -> np.ndarray:
    """``a @ inv(b)`` refined with residuals accumulated in extended precision.

    Plain double arithmetic loses about ``cond(b) * eps``; each refinement
    step recomputes ``a - x @ b`` in ``longdouble`` and corrects ``x``.
    On platforms where ``longdouble`` is plain double the steps are
    harmless but gain nothing.
    """
    a, b = np.asarray(a), np.asarray(b)
    _require_square(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot right-divide {a.shape} by {b.shape}")
    inv = np.linalg.inv(b) if inverse is None else np.asarray(inverse)
    out = np.result_type(a, b, inv)
    wide = np.clongdouble if np.issubdtype(out, np.complexfloating) else np.longdouble
    a_w, b_w = a.astype(wide), b.astype(wide)
    x = (a @ inv).astype(wide)
    for _ in range(steps):
        resid = (a_w - x @ b_w).astype(out)
        x = x + (resid @ inv).astype(wide)
    return x.astype(out)
