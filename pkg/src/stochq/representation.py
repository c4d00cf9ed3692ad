"""The N-operator Kraus representation of a stochastic matrix and its relatives.

``build_representation(L)`` returns operators
``A_s[j, k] = sqrt(L[j, k] / N) * exp(2 pi i s (j - k) / N)``, ``s = 0..N-1``.
Its matrix form is ``kron(sqrt(L), sqrt(L)) * G_N`` (entrywise), which is
the direct sum of the blocks returned by :func:`v_blocks` over the index
sets of :func:`alpha_partition`.

The two families of essentially classical operations generalize the
phases to ``exp(2 pi i s (r j +/- v k) / M)`` with ``M`` operators.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .channels import apply_matrix_form, matrix_form, pi_diagonalize
from .classical import TAU_PROB, TimeFamily, stochastic_matrix
from .numerics import TAU_SING, DimensionError, DomainError, hadamard_power


class DependenceError(RuntimeError):
    """Kraus operators are linearly dependent in a non-proportional way."""


def root_of_unity(num: int, den: int) -> complex:
    # reduce first so equal rationals give bit-identical phases
    f = Fraction(num % den, den)
    return complex(np.exp(2j * np.pi * f.numerator / f.denominator))


@dataclass(frozen=True)
class RepresentationKraus:
    kraus: list[np.ndarray]
    source: np.ndarray

    @property
    def dim(self) -> int:
        return self.source.shape[0]


def build_representation(lam) -> RepresentationKraus:
    lam = stochastic_matrix(lam)
    n = lam.shape[0]
    amp = np.sqrt(lam / n)
    ops = []
    for s in range(n):
        phase = np.array([[root_of_unity(s * (j - k), n) for k in range(n)] for j in range(n)])
        ops.append(amp * phase)
    return RepresentationKraus(ops, lam)


def representation_matrix_form(lam) -> np.ndarray:
    """Matrix form of :func:`build_representation` from the closed form.

    Entries are ``sqrt(L[j, k] L[l, m])`` on the support of ``G_N``, one
    rounding each, which keeps the alpha_0 block exactly equal to ``L``.
    """
    lam = stochastic_matrix(lam)
    return np.sqrt(np.kron(lam, lam)) * build_g(lam.shape[0])


def block_for_alpha(j: int, n: int) -> int:
    """Index into :func:`v_blocks` of the block living on ``alpha_j``."""
    return (-j) % n


def build_c(n: int) -> np.ndarray:
    """Cyclic shift ``C[j, k] = 1`` iff ``k == (j + 1) mod n``."""
    if n < 2:
        raise ValueError(f"dimension must be at least 2, got {n}")
    c = np.zeros((n, n))
    for j in range(n):
        c[j, (j + 1) % n] = 1.0
    return c


def build_g(n: int) -> np.ndarray:
    """Block-circulant 0/1 matrix with ``G[n j + k, n l + m] = [(j - k + m - l) % n == 0]``."""
    if n < 2:
        raise ValueError(f"dimension must be at least 2, got {n}")
    j, k, l, m = np.meshgrid(*(np.arange(n),) * 4, indexing="ij")
    return ((j - k + m - l) % n == 0).astype(float).reshape(n * n, n * n)


def alpha_partition(n: int) -> list[list[int]]:
    """Index sets ``alpha_j = {k n + (j + k) % n : k = 0..n-1}``, sorted."""
    if n < 2:
        raise ValueError(f"dimension must be at least 2, got {n}")
    return [sorted(k * n + (j + k) % n for k in range(n)) for j in range(n)]


def v_blocks(lam) -> list[np.ndarray]:
    """``V_j = sqrt(L) * (C^j.T sqrt(L) C^j)`` for ``j = 0..N-1``.

    With the index sets of :func:`alpha_partition`, the principal submatrix
    on ``alpha_j`` is ``V_{(-j) mod N}``; the two labelings agree for N = 2.
    """
    lam = stochastic_matrix(lam)
    n = lam.shape[0]
    root = hadamard_power(lam, 0.5)
    c = build_c(n)
    out = []
    for j in range(n):
        cj = np.linalg.matrix_power(c, j)
        out.append(root * (cj.T @ root @ cj))
    return out


# -- the two classes of essentially classical operations --------------------

_SPEC_RE = re.compile(r"^\s*class:\s*([12])\s+r:\s*(\d+)\s+v:\s*(\d+)\s+M:\s*(\d+)\s*$")


@dataclass(frozen=True)
class ClassSpec:
    """One member of the plus (class 1) or minus (class 2) family.

    ``m`` is the number of Kraus operators; admissible values depend on the
    Hilbert dimension through :meth:`validate`.
    """

    class_id: int
    r: int
    v: int
    m: int

    def offset(self, n: int) -> int:
        return self.m - max(self.r, self.v) * (n - 1)

    def validate(self, n: int) -> None:
        if self.class_id not in (1, 2):
            raise ValueError(f"class must be 1 or 2, got {self.class_id}")
        for name, val in (("r", self.r), ("v", self.v)):
            if not 1 <= val <= n + 1:
                raise ValueError(f"{name}={val} outside [1, {n + 1}]")
        off = self.offset(n)
        if not 1 <= off <= n * n - max(self.r, self.v) * (n - 1):
            raise ValueError(f"M={self.m} not admissible for r={self.r}, v={self.v}, N={n}")

    @property
    def sign(self) -> int:
        return 1 if self.class_id == 1 else -1

    def __str__(self) -> str:
        return f"class:{self.class_id} r:{self.r} v:{self.v} M:{self.m}"

    @classmethod
    def parse(cls, text: str) -> "ClassSpec":
        match = _SPEC_RE.match(text)
        if not match:
            raise ValueError(f"cannot parse class spec {text!r}; expected 'class:2 r:1 v:1 M:3'")
        return cls(*map(int, match.groups()))


def admissible_specs(n: int, class_id: int | None = None) -> list[ClassSpec]:
    classes = (1, 2) if class_id is None else (class_id,)
    out = []
    for c in classes:
        for r in range(1, n + 2):
            for v in range(1, n + 2):
                lo = max(r, v) * (n - 1) + 1
                out.extend(ClassSpec(c, r, v, m) for m in range(lo, n * n + 1))
    return out


def build_class_member(spec: ClassSpec, lam) -> list[np.ndarray]:
    lam = stochastic_matrix(lam)
    n = lam.shape[0]
    spec.validate(n)
    amp = np.sqrt(lam / spec.m)
    ops = []
    for s in range(spec.m):
        phase = np.array(
            [[root_of_unity(s * (spec.r * j + spec.sign * spec.v * k), spec.m) for k in range(n)] for j in range(n)]
        )
        ops.append(amp * phase)
    return ops


def rank_one_kraus(lam) -> list[np.ndarray]:
    """``K[n j + k] = sqrt(L[j, k]) |j><k|``, the rank-one operators."""
    lam = stochastic_matrix(lam)
    n = lam.shape[0]
    ops = []
    for j in range(n):
        for k in range(n):
            a = np.zeros((n, n), dtype=complex)
            a[j, k] = math.sqrt(lam[j, k])
            ops.append(a)
    return ops


def rank_one_mixing_unitary(n: int) -> np.ndarray:
    """``U[s, n j + k] = exp(2 pi i s (n j - k) / n^2) / n``.

    Mixing :func:`rank_one_kraus` with this unitary gives the class-2
    member ``(r, v, M) = (n, 1, n^2)``.
    """
    u = np.empty((n * n, n * n), dtype=complex)
    for s in range(n * n):
        for j in range(n):
            for k in range(n):
                u[s, n * j + k] = root_of_unity(s * (n * j - k), n * n) / n
    return u


def unitary_mix(ops: Sequence[np.ndarray], u, tol: float = TAU_PROB) -> list[np.ndarray]:
    """``B_m = sum_s u[m, s] A_s``; the matrix form is unchanged."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (len(ops), len(ops)):
        raise DimensionError(f"mixing matrix {u.shape} for {len(ops)} operators")
    if np.max(np.abs(u.conj().T @ u - np.eye(len(ops)))) > tol:
        raise DomainError("mixing matrix is not unitary")
    stack = np.stack(ops)
    return list(np.tensordot(u, stack, axes=(1, 0)))


def repair_dependence(ops: Sequence[np.ndarray], ratio_tol: float = 1e-10) -> list[np.ndarray]:
    """Merge Kraus operators that are unit-modulus multiples of each other.

    A group of ``g`` proportional operators is replaced by its first member
    scaled by ``sqrt(g)``, which keeps ``sum A^dag A`` unchanged. Any
    remaining linear dependence raises :class:`DependenceError`.
    """
    if isinstance(ops, RepresentationKraus):
        ops = ops.kraus
    ops = [np.asarray(a, dtype=complex) for a in ops]
    groups: list[list[int]] = []
    for i, a in enumerate(ops):
        flat = a.reshape(-1)
        if np.max(np.abs(flat)) <= ratio_tol:
            raise DependenceError(f"operator {i} vanishes")
        for group in groups:
            b = ops[group[0]].reshape(-1)
            pivot = int(np.flatnonzero(np.abs(b) > ratio_tol)[0])
            ratio = flat[pivot] / b[pivot]
            if np.max(np.abs(flat - ratio * b)) <= ratio_tol:
                if abs(abs(ratio) - 1.0) > ratio_tol:
                    raise DependenceError(f"operator {i} is a non-unit multiple ({abs(ratio):.6g}) of {group[0]}")
                group.append(i)
                break
        else:
            groups.append([i])
    merged = [math.sqrt(len(g)) * ops[g[0]] for g in groups]
    stack = np.stack([a.reshape(-1) for a in merged])
    rank = np.linalg.matrix_rank(stack, tol=ratio_tol)
    if rank < len(merged):
        raise DependenceError(
            f"{len(merged)} operators span only {rank} dimensions after merging proportional ones"
        )
    return merged


def is_essentially_classical(ops: Sequence[np.ndarray], trials: int = 0, tol: float = TAU_PROB, seed: int = 0) -> bool:
    """Diagonal states stay diagonal, and the map commutes with dephasing.

    Both properties are linear, so they are decided exactly on matrix units
    through the matrix form. ``trials`` extra random states are also
    checked directly.
    """
    n = ops[0].shape[0]
    m = matrix_form(ops)
    diag_out = [i * n + i for i in range(n)]
    off_out = [i for i in range(n * n) if i not in diag_out]
    for k in range(n):
        # Phi(|k><k|) must be diagonal
        if np.max(np.abs(m[off_out, k * n + k])) > tol:
            return False
    for j in range(n):
        for k in range(n):
            if j != k and np.max(np.abs(m[diag_out, j * n + k])) > tol:
                # diagonal of Phi(|j><k|) must vanish, since Pi(|j><k|) = 0
                return False
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        lhs = pi_diagonalize(apply_matrix_form(m, x))
        rhs = apply_matrix_form(m, pi_diagonalize(x))
        if np.max(np.abs(lhs - rhs)) > tol * max(1.0, np.abs(x).max()):
            return False
    return True


# -- determinant scans ------------------------------------------------------


def structural_blocks(spec: ClassSpec, n: int) -> list[np.ndarray]:
    """Irreducible diagonal blocks of the member's matrix form for a positive ``L``."""
    uniform = np.full((n, n), 1.0 / n)
    pattern = np.abs(matrix_form(build_class_member(spec, uniform))) > 1e-12
    count, labels = connected_components(pattern | pattern.T, directed=False)
    return [np.flatnonzero(labels == c) for c in range(count)]


class Root(NamedTuple):
    lo: float
    hi: float
    block: int


@dataclass(frozen=True)
class InvertibilityScan:
    spec: ClassSpec
    times: np.ndarray
    dets: np.ndarray
    block_dets: np.ndarray  # (len(times), n_blocks)
    blocks: list[np.ndarray]
    near_singular: list[float]
    roots: list[Root]

    @property
    def sign_changes(self) -> int:
        return len(self.roots)


def _block_dets(spec: ClassSpec, lam, blocks) -> tuple[complex, np.ndarray]:
    m = matrix_form(build_class_member(spec, lam))
    per = np.array([np.linalg.det(m[np.ix_(b, b)]) for b in blocks])
    return complex(np.prod(per)), per


def _real_sign(z: complex, scale: float) -> int:
    if abs(z.imag) > 1e-9 * scale:
        return 0  # genuinely complex, no sign
    return int(np.sign(z.real))


def invertibility_scan(
    spec: ClassSpec,
    fam: TimeFamily,
    t_grid: Sequence[float],
    width: float = 1e-9,
    tau_sing: float = TAU_SING,
) -> InvertibilityScan:
    """Determinant of the member's matrix form along ``t_grid``.

    The determinant factorizes over irreducible blocks; roots are bracketed
    wherever a block determinant changes sign between grid points (twin
    blocks can make the full determinant touch zero without a sign change)
    and refined by bisection to ``width``.
    """
    times = np.asarray(t_grid, dtype=float)
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    blocks = structural_blocks(spec, fam.dim)
    dets = np.empty(times.size, dtype=complex)
    per = np.empty((times.size, len(blocks)), dtype=complex)
    for i, t in enumerate(times):
        dets[i], per[i] = _block_dets(spec, fam(t), blocks)
    near = [float(t) for t, d in zip(times, dets) if abs(d) < tau_sing]

    roots: list[Root] = []
    for b in range(len(blocks)):
        scale = max(float(np.max(np.abs(per[:, b]), initial=0.0)), 1e-300)
        for i in range(times.size - 1):
            s0, s1 = _real_sign(per[i, b], scale), _real_sign(per[i + 1, b], scale)
            if s0 == 0 or s1 == 0 or s0 == s1:
                continue
            lo, hi = float(times[i]), float(times[i + 1])
            while hi - lo > width:
                mid = 0.5 * (lo + hi)
                sm = _real_sign(_block_dets(spec, fam(mid), [blocks[b]])[1][0], scale)
                if sm == s0:
                    lo = mid
                elif sm == 0:
                    break
                else:
                    hi = mid
            if not any(r.lo <= hi and lo <= r.hi for r in roots):
                roots.append(Root(lo, hi, b))
    roots.sort()
    return InvertibilityScan(spec, times, dets, per, blocks, near, roots)
