"""Intermediate maps of embedded families and their divisibility verdicts.

For a family ``L(t)`` with embedded matrix forms ``M_c(t)``, the
intermediate map is ``M(t, s) = M_c(t) inv(M_c(s))``. Its alpha_0 block is
the classical intermediate ``L(t) inv(L(s))``; complete positivity is
decided on the reshuffled (Choi) matrix.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .channels import TAU_PSD, gamma_reorder, is_completely_positive
from .classical import TAU_PROB, TimeFamily, intermediate_matrix
from .numerics import det_and_inverse, solve_right
from .representation import representation_matrix_form

SCAN_HEADER = ["t", "s", "p_divisible", "cp_divisible", "min_choi_eig", "min_intermediate_entry"]


@dataclass(frozen=True)
class IntermediateChannel:
    t: float
    s: float
    matrix: np.ndarray | None
    condition: float

    @property
    def singular(self) -> bool:
        return self.matrix is None


def intermediate_channel(fam: TimeFamily, t: float, s: float) -> IntermediateChannel:
    if not t >= s >= fam.t1:
        raise ValueError(f"need t >= s >= t1, got t={t}, s={s}, t1={fam.t1}")
    m_s = representation_matrix_form(fam(s))
    di = det_and_inverse(m_s)
    if di.singular:
        return IntermediateChannel(t, s, None, di.condition)
    return IntermediateChannel(t, s, solve_right(representation_matrix_form(fam(t)), m_s, di.inverse), di.condition)


@dataclass(frozen=True)
class DivisibilityReport:
    """Verdicts for one ``(t, s)`` pair.

    ``None`` verdicts mean indeterminate: the matrix that must be inverted
    is singular or too ill-conditioned to trust.
    """

    t: float
    s: float
    p_divisible: bool | None
    cp_divisible: bool | None
    min_choi_eigenvalue: float
    intermediate_stochastic_min_entry: float

    @property
    def indeterminate(self) -> bool:
        return self.p_divisible is None or self.cp_divisible is None


def assess(fam: TimeFamily, t: float, s: float, tol: float | None = None) -> DivisibilityReport:
    classical = intermediate_matrix(fam, t, s)
    channel = intermediate_channel(fam, t, s)
    p_div = None if classical.singular else classical.stochastic
    if channel.singular:
        return DivisibilityReport(t, s, p_div, None, math.nan, classical.min_entry)
    tol = TAU_PSD * fam.dim if tol is None else tol
    cp = is_completely_positive(channel.matrix, tol)
    return DivisibilityReport(t, s, p_div, cp.ok, cp.min_eigenvalue, classical.min_entry)


def scan(
    fam: TimeFamily,
    t_grid: Sequence[float],
    s_offsets: Sequence[float],
    tol: float | None = None,
    workers: int | None = None,
) -> list[DivisibilityReport]:
    """Assess every pair ``(s + offset, s)`` with ``s`` from ``t_grid``.

    Output order is grid order (``s`` outer, offset inner) regardless of
    ``workers``.
    """
    pairs = [(float(s) + float(d), float(s)) for s in t_grid for d in s_offsets]
    if any(d < 0 for d in s_offsets):
        raise ValueError("offsets must be non-negative")
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda p: assess(fam, p[0], p[1], tol), pairs))
    return [assess(fam, t, s, tol) for t, s in pairs]


def _fmt_bool(v: bool | None) -> str:
    return "indeterminate" if v is None else ("true" if v else "false")


def write_scan_table(reports: Sequence[DivisibilityReport], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SCAN_HEADER)
    for r in reports:
        writer.writerow(
            [
                f"{r.t:.17g}",
                f"{r.s:.17g}",
                _fmt_bool(r.p_divisible),
                _fmt_bool(r.cp_divisible),
                f"{r.min_choi_eigenvalue:.17g}",
                f"{r.intermediate_stochastic_min_entry:.17g}",
            ]
        )


def read_scan_table(fh: IO[str]) -> list[dict]:
    rows = list(csv.DictReader(fh))
    if rows and list(rows[0].keys()) != SCAN_HEADER:
        raise ValueError(f"unexpected header {list(rows[0].keys())}")
    return rows


@dataclass(frozen=True)
class TraceDiagnostics:
    trace: complex
    expected_trace: float
    trace_ok: bool
    diagonal_ok: bool
    max_diagonal_error: float


def trace_diagnostics(m, lambda_ts, tol: float = TAU_PROB) -> TraceDiagnostics:
    """Check that the Choi diagonal of ``m`` lists ``lambda_ts`` row by row."""
    lam = np.asarray(lambda_ts)
    choi = gamma_reorder(m)
    if choi.shape[0] != lam.size:
        raise ValueError(f"matrix form of side {choi.shape[0]} against {lam.shape} matrix")
    diag = np.diag(choi)
    tr = complex(diag.sum())
    expected = float(lam.sum())
    err = float(np.max(np.abs(diag - lam.reshape(-1))))
    return TraceDiagnostics(tr, expected, abs(tr - expected) <= tol, err <= tol, err)
