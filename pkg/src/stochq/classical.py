"""Probability vectors, column-stochastic matrices and classical divisibility.

Convention: a stochastic matrix is *column* stochastic, ``sum_j L[j, k] == 1``
for every column ``k``, and acts on column probability vectors by
``p(t) = L(t, t1) @ p(t1)``. Row-stochastic data must be transposed first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .numerics import DimensionError, SingularMatrixError, det_and_inverse, solve_right

TAU_PROB = 1e-10


class InvalidStochasticMatrix(ValueError):
    """Raised when a matrix violates a stochastic-matrix invariant.

    ``invariant`` is one of ``"shape"``, ``"negative-entry"`` or
    ``"column-sum"``.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(message)
        self.invariant = invariant


def probability_vector(p, tol: float = TAU_PROB) -> np.ndarray:
    p = np.array(p, dtype=float).reshape(-1)
    if p.size == 0:
        raise ValueError("empty probability vector")
    if np.any(p < -tol):
        raise ValueError(f"probability vector has a negative entry {p.min():.3g}")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"probability vector sums to {p.sum():.17g}")
    return np.clip(p, 0.0, None)


def stochastic_min_entry(lam) -> float:
    return float(np.min(np.asarray(lam).real))


def is_stochastic(lam, tol: float = TAU_PROB) -> bool:
    lam = np.asarray(lam)
    if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
        return False
    if np.iscomplexobj(lam) and np.any(np.abs(lam.imag) > tol):
        return False
    lam = lam.real
    return bool(np.all(lam >= -tol) and np.all(np.abs(lam.sum(axis=0) - 1.0) <= tol))


def stochastic_matrix(lam, tol: float = TAU_PROB) -> np.ndarray:
    """Validate ``lam`` as a column-stochastic matrix and return a clean copy."""
    lam = np.asarray(lam)
    if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
        raise InvalidStochasticMatrix("shape", f"stochastic matrix must be square, got {lam.shape}")
    if np.iscomplexobj(lam):
        if np.any(np.abs(lam.imag) > tol):
            raise InvalidStochasticMatrix("negative-entry", "stochastic matrix has complex entries")
        lam = lam.real
    lam = np.array(lam, dtype=float)
    if np.any(lam < -tol):
        j, k = np.unravel_index(np.argmin(lam), lam.shape)
        raise InvalidStochasticMatrix(
            "negative-entry", f"negative entry {lam[j, k]:.6g} at ({j}, {k})"
        )
    sums = lam.sum(axis=0)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        k = int(bad[0])
        raise InvalidStochasticMatrix(
            "column-sum",
            f"column {k} sums to {sums[k]:.17g}, not 1 (row-stochastic input must be transposed)",
        )
    return np.clip(lam, 0.0, None)


def evolve(lam, p) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    p = np.asarray(p, dtype=float).reshape(-1)
    if lam.shape != (p.size, p.size):
        raise DimensionError(f"cannot apply {lam.shape} matrix to vector of length {p.size}")
    return lam @ p


@dataclass(frozen=True)
class TimeFamily:
    """A one-parameter family ``t -> L(t, t1)`` of stochastic matrices.

    The evaluator must be side-effect free; scans may call it concurrently.
    ``transition``, when given, returns the two-time matrix ``L(t, s)``
    directly; processes whose propagators are not invertible use it in
    place of ``L(t, t1) inv(L(s, t1))``.
    """

    name: str
    evaluator: Callable[[float], np.ndarray]
    dim: int
    t1: float = 0.0
    params: dict = field(default_factory=dict)
    transition: Callable[[float, float], np.ndarray] | None = None

    def __call__(self, t: float) -> np.ndarray:
        if t < self.t1:
            raise ValueError(f"time {t} precedes the initial time {self.t1}")
        return self.evaluator(t)


@dataclass(frozen=True)
class Intermediate:
    """Result of ``L(t, t1) @ inv(L(s, t1))``.

    ``matrix`` is ``None`` when ``L(s, t1)`` is singular; in that case
    ``stochastic`` is ``False`` and ``min_entry`` is NaN.
    """

    t: float
    s: float
    matrix: np.ndarray | None
    stochastic: bool
    min_entry: float
    condition: float

    @property
    def singular(self) -> bool:
        return self.matrix is None


def intermediate_matrix(fam: TimeFamily, t: float, s: float, tol: float = TAU_PROB) -> Intermediate:
    if not t >= s >= fam.t1:
        raise ValueError(f"need t >= s >= t1, got t={t}, s={s}, t1={fam.t1}")
    if fam.transition is not None:
        lam_ts = np.asarray(fam.transition(t, s), dtype=float)
        return Intermediate(t, s, lam_ts, is_stochastic(lam_ts, tol), stochastic_min_entry(lam_ts), math.nan)
    lam_s = np.asarray(fam(s), dtype=float)
    di = det_and_inverse(lam_s)
    if di.singular:
        return Intermediate(t, s, None, False, math.nan, di.condition)
    lam_ts = solve_right(np.asarray(fam(t), dtype=float), lam_s, di.inverse.real)
    return Intermediate(t, s, lam_ts, is_stochastic(lam_ts, tol), stochastic_min_entry(lam_ts), di.condition)


def chapman_kolmogorov_check(fam: TimeFamily, t: float, s: float, u: float, tol: float = 1e-12) -> bool:
    """Whether ``L(t, u) == L(t, s) L(s, u)`` in the max-entry norm.

    Raises ``SingularMatrixError`` when any of the three intermediates
    does not exist.
    """
    if not t >= s >= u:
        raise ValueError(f"need t >= s >= u, got {t}, {s}, {u}")
    parts = [intermediate_matrix(fam, *pair) for pair in ((t, u), (t, s), (s, u))]
    for part in parts:
        if part.singular:
            raise SingularMatrixError(f"L({part.s}) is singular")
    tu, ts, su = (p.matrix for p in parts)
    return float(np.max(np.abs(tu - ts @ su))) <= tol


def dichotomic_family(gamma: float) -> TimeFamily:
    """Symmetric two-state jump process with transition rate ``gamma``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")

    def lam(t: float) -> np.ndarray:
        e = math.exp(-2.0 * gamma * t)
        return 0.5 * np.array([[1 + e, 1 - e], [1 - e, 1 + e]])

    return TimeFamily("dichotomic", lam, 2, 0.0, {"gamma": gamma})


def oscillatory_family() -> TimeFamily:
    """Two-state family with damped oscillating bias ``q(t) = exp(-t) cos t``.

    ``L(t)`` is stochastic for every t, but it is singular wherever
    ``cos t == 0`` and the intermediate ``L(t, s)`` fails to be stochastic
    once ``|q(t)| > |q(s)|``.
    """

    def lam(t: float) -> np.ndarray:
        q = math.exp(-t) * math.cos(t)
        return 0.5 * np.array([[1 + q, 1 - q], [1 - q, 1 + q]])

    return TimeFamily("oscillatory", lam, 2, 0.0, {})


COUNTEREXAMPLE3_SETS = {
    1: dict(a=1 / 3, b=0.0, c=9 / 20, d=4 / 15, e=1 / 3, f=1 / 20),
    2: dict(a=0.0, b=0.25, c=0.0, d=0.1, e=0.0, f=0.2),
}


def counterexample3_completion(a: float, b: float, c: float, d: float, e: float, f: float) -> tuple[float, float, float]:
    """Third-row parameters ``(x, y, z)`` that make every column sum to one."""
    x, y, z = 1 - a - d, 1 - b - e, 1 - c - f
    return x, y, z


def counterexample3_family(a: float, b: float, c: float, d: float, e: float, f: float, gamma: float = 1.0) -> TimeFamily:
    """``L(t) = exp(-g t) I + 2 exp(-g t / 2) sinh(g t / 2) P`` on three states.

    ``P`` is the column-stochastic parameter matrix whose last row is
    completed from the first two.
    """
    params = dict(a=a, b=b, c=c, d=d, e=e, f=f)
    if any(v < 0 for v in params.values()):
        raise ValueError("counterexample parameters must be non-negative")
    x, y, z = counterexample3_completion(a, b, c, d, e, f)
    if min(x, y, z) < -TAU_PROB:
        raise ValueError(f"column constraints violated: x={x}, y={y}, z={z}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    p = np.array([[a, b, c], [d, e, f], [max(x, 0.0), max(y, 0.0), max(z, 0.0)]])

    def lam(t: float) -> np.ndarray:
        return math.exp(-gamma * t) * np.eye(3) + 2 * math.exp(-gamma * t / 2) * math.sinh(gamma * t / 2) * p

    return TimeFamily("counterexample3", lam, 3, 0.0, {**params, "gamma": gamma})


def semigroup_family(generator) -> TimeFamily:
    """``L(t) = expm(t W)`` for a rate matrix ``W`` (off-diagonals >= 0, columns sum to 0)."""
    w = np.array(generator, dtype=float)
    off = w - np.diag(np.diag(w))
    if np.any(off < 0) or np.any(np.abs(w.sum(axis=0)) > 1e-12):
        raise ValueError("not a rate matrix: need non-negative off-diagonals and zero column sums")
    return TimeFamily("semigroup", lambda t: expm(t * w), w.shape[0], 0.0, {"generator": w.tolist()})


def random_generator(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    w = scale * rng.random((n, n))
    np.fill_diagonal(w, 0.0)
    w -= np.diag(w.sum(axis=0))
    return w


def random_stochastic(n: int, rng: np.random.Generator) -> np.ndarray:
    lam = rng.random((n, n))
    return lam / lam.sum(axis=0)


def circulant_stochastic(first_column) -> np.ndarray:
    c = probability_vector(first_column)
    n = c.size
    return np.array([[c[(j - k) % n] for k in range(n)] for j in range(n)])


# -- discrete three-time process with a memory parameter ---------------------


@dataclass(frozen=True)
class JointProb3:
    """Joint law ``p3(j3, j2, j1)`` of a two-state process at three times.

    ``table[j3, j2, j1]``; ``epsilon`` is the memory parameter and ``q`` the
    initial distribution at the first time.
    """

    table: np.ndarray
    epsilon: float
    q: np.ndarray


def appendix_b_joint(epsilon: float, q) -> JointProb3:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    q = probability_vector(q)
    if q.size != 2:
        raise ValueError("the memory process has two states")
    q1, q2 = q
    p = np.zeros((2, 2, 2))
    p[0, 0, 0] = epsilon * q1 / 2
    p[1, 1, 0] = epsilon * q1 / 2
    p[1, 0, 0] = (1 - epsilon) * q1 / 2
    p[0, 1, 0] = (1 - epsilon) * q1 / 2
    p[0, 1, 1] = q2 / 2
    p[1, 0, 1] = q2 / 2
    return JointProb3(p, float(epsilon), q)


@dataclass(frozen=True)
class MemoryAnalysis:
    t21: np.ndarray
    t32: np.ndarray
    t31: np.ndarray
    conditional: np.ndarray  # p(j3 | j2, j1), NaN where the history is impossible
    ck_error: float
    markov_violation: float
    ck_holds: bool
    markov_holds: bool


def _history_kernel(epsilon: float) -> np.ndarray:
    # p(j3, j2 | j1) does not depend on the initial law, so read each
    # column off the process started in that state
    k = np.empty((2, 2, 2))
    for j1 in range(2):
        k[:, :, j1] = appendix_b_joint(epsilon, np.eye(2)[j1]).table[:, :, j1]
    return k


def appendix_b_analysis(j: JointProb3, tol: float = 1e-12) -> MemoryAnalysis:
    kern = _history_kernel(j.epsilon)
    t21 = kern.sum(axis=0)  # [j2, j1]
    t31 = kern.sum(axis=1)  # [j3, j1]

    cond = np.full((2, 2, 2), np.nan)
    for j2 in range(2):
        for j1 in range(2):
            if t21[j2, j1] > 0:
                cond[:, j2, j1] = kern[:, j2, j1] / t21[j2, j1]

    # p(j3 | j2) averages the history conditionals over p(j1 | j2); an
    # unreachable j2 gets a uniform column
    t32 = np.full((2, 2), 0.5)
    for j2 in range(2):
        w = t21[j2] * j.q
        if w.sum() > 0:
            w = w / w.sum()
            t32[:, j2] = sum(w[j1] * cond[:, j2, j1] for j1 in range(2) if w[j1] > 0)
    ck_error = float(np.max(np.abs(t31 - t32 @ t21)))

    violation = 0.0
    for j2 in range(2):
        for j1 in range(2):
            if t21[j2, j1] > 0:
                violation = max(violation, float(np.max(np.abs(cond[:, j2, j1] - t32[:, j2]))))
    return MemoryAnalysis(t21, t32, t31, cond, ck_error, violation, ck_error <= tol, violation <= tol)


def appendix_b_family(epsilon: float, q) -> TimeFamily:
    """The memory process seen at the discrete times ``t = 0, 1, 2``."""
    rep = appendix_b_analysis(appendix_b_joint(epsilon, q))
    mats = {0: np.eye(2), 1: rep.t21, 2: rep.t31}

    def lam(t: float) -> np.ndarray:
        key = int(round(t))
        if key not in mats or abs(t - key) > 1e-12:
            raise ValueError(f"the memory process is only defined at t in {{0, 1, 2}}, got {t}")
        return mats[key]

    steps = {(1, 0): rep.t21, (2, 1): rep.t32, (2, 0): rep.t31}

    def transition(t: float, s: float) -> np.ndarray:
        a, b = int(round(t)), int(round(s))
        if a == b:
            return np.eye(2)
        if (a, b) not in steps or max(abs(t - a), abs(s - b)) > 1e-12:
            raise ValueError(f"the memory process has no transition from t={s} to t={t}")
        return steps[a, b]

    return TimeFamily("appendix-b", lam, 2, 0.0, {"epsilon": epsilon, "q": list(map(float, q))}, transition)
