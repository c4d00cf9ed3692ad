"""Density matrices, Kraus sets and their matrix (natural) forms.

The matrix form of a Kraus set ``{A_s}`` is ``sum_s kron(A_s, conj(A_s))``;
with row-major ``vec`` it satisfies ``vec(Phi(rho)) == M @ vec(rho)``.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .classical import TAU_PROB, probability_vector
from .numerics import DimensionError, DomainError, is_hermitian

TAU_PSD = 1e-9


def density_matrix(rho, tol: float = TAU_PROB) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"density matrix must be square, got {rho.shape}")
    if not is_hermitian(rho):
        raise DomainError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise DomainError(f"density matrix has trace {np.trace(rho)}")
    if np.linalg.eigvalsh(rho).min() < -TAU_PSD * rho.shape[0]:
        raise DomainError("density matrix is not positive semidefinite")
    return rho


def kraus_set(ops: Sequence) -> list[np.ndarray]:
    ops = [np.asarray(a, dtype=complex) for a in ops]
    if not ops:
        raise ValueError("empty Kraus set")
    shape = ops[0].shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise DimensionError(f"Kraus operators must be square, got {shape}")
    if any(a.shape != shape for a in ops):
        raise DimensionError("Kraus operators have different shapes")
    return ops


def apply_channel(ops: Sequence[np.ndarray], rho) -> np.ndarray:
    rho = np.asarray(rho)
    n = ops[0].shape[1]
    if rho.shape != (n, n):
        raise DimensionError(f"state of shape {rho.shape} for {n}-level operators")
    return sum(a @ rho @ a.conj().T for a in ops)


def matrix_form(ops: Sequence[np.ndarray]) -> np.ndarray:
    return sum(np.kron(a, a.conj()) for a in ops)


def apply_matrix_form(m, rho) -> np.ndarray:
    rho = np.asarray(rho)
    n = rho.shape[0]
    return (np.asarray(m) @ rho.reshape(-1)).reshape(n, n)


def embed_F(p) -> np.ndarray:
    """Diagonal density matrix carrying the probability vector ``p``."""
    return np.diag(probability_vector(p)).astype(complex)


def inverse_F(rho, tol: float = TAU_PROB) -> np.ndarray:
    rho = np.asarray(rho)
    off = rho - np.diag(np.diag(rho))
    if np.max(np.abs(off), initial=0.0) > tol:
        raise DomainError("state is not diagonal in the computational basis")
    diag = np.diag(rho)
    if np.max(np.abs(diag.imag), initial=0.0) > tol:
        raise DomainError("diagonal has imaginary parts")
    return probability_vector(diag.real, tol)


def pi_diagonalize(rho) -> np.ndarray:
    """Dephase in the computational basis: keep only the diagonal."""
    rho = np.asarray(rho)
    return np.diag(np.diag(rho))


class CPTPCheck(NamedTuple):
    ok: bool
    violation: float


def is_cptp(ops: Sequence[np.ndarray], tol: float = TAU_PROB) -> CPTPCheck:
    """Trace preservation of a Kraus set; complete positivity is automatic."""
    n = ops[0].shape[1]
    total = sum(a.conj().T @ a for a in ops)
    viol = float(np.max(np.abs(total - np.eye(n))))
    return CPTPCheck(viol <= tol, viol)


def essentially_same(ops1: Sequence[np.ndarray], ops2: Sequence[np.ndarray], tol: float = 1e-12) -> bool:
    if ops1[0].shape != ops2[0].shape:
        raise DimensionError("Kraus sets act on different dimensions")
    return float(np.max(np.abs(matrix_form(ops1) - matrix_form(ops2)))) <= tol


def _side(m: np.ndarray) -> int:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square N^2 x N^2 matrix, got {m.shape}")
    n = int(round(np.sqrt(m.shape[0])))
    if n * n != m.shape[0]:
        raise DimensionError(f"side {m.shape[0]} is not a perfect square")
    return n


def gamma_reorder(m) -> np.ndarray:
    """Reshuffle ``out[i*N + k, j*N + l] = m[i*N + j, k*N + l]``.

    Sends the matrix form of a map to its Choi matrix; it is an involution
    and preserves the Hilbert-Schmidt inner product.
    """
    m = np.asarray(m)
    n = _side(m)
    return m.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)


class CPCheck(NamedTuple):
    ok: bool
    min_eigenvalue: float
    hermitian: bool


def is_completely_positive(m, tol: float | None = None) -> CPCheck:
    """Choi-positivity test on a matrix form.

    A map whose reshuffled matrix is not Hermitian is reported as not CP
    with ``hermitian=False`` and a NaN eigenvalue.
    """
    m = np.asarray(m)
    n = _side(m)
    tol = TAU_PSD * n if tol is None else tol
    choi = gamma_reorder(m)
    if not is_hermitian(choi):
        return CPCheck(False, float("nan"), False)
    lo = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2)[0])
    return CPCheck(lo >= -tol, lo, True)
