"""Named verification suites run by ``stochq verify``.

Each suite returns a list of :class:`Check` records; nothing here raises on
a failed check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import classical as cl
from .channels import apply_channel, embed_F, gamma_reorder, inverse_F, is_cptp, matrix_form
from .divisibility import assess, intermediate_channel
from .numerics import direct_sum_assemble, direct_sum_extract
from .representation import (
    ClassSpec,
    admissible_specs,
    alpha_partition,
    block_for_alpha,
    build_c,
    build_class_member,
    build_g,
    build_representation,
    invertibility_scan,
    is_essentially_classical,
    v_blocks,
)

SET1_ROOT_TIME = math.log(32 + (1 + 5 * math.sqrt(673)) / 4)
SET2_ROOT_INTERVAL = (1.99393180, 1.99393181)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}" + (f"  ({self.detail})" if self.detail else "")


def embedding_round_trip(dim: int, samples: int, rng: np.random.Generator) -> Check:
    worst_ev, worst_id = 0.0, 0.0
    for _ in range(samples):
        lam = cl.random_stochastic(dim, rng)
        p = rng.dirichlet(np.ones(dim))
        rep = build_representation(lam)
        out = inverse_F(apply_channel(rep.kraus, embed_F(p)), tol=1e-9)
        worst_ev = max(worst_ev, float(np.max(np.abs(out - lam @ p))))
        worst_id = max(worst_id, is_cptp(rep.kraus).violation)
    ok = worst_ev <= 1e-12 and worst_id <= 1e-12
    return Check(f"kraus embedding N={dim}", ok, f"max evolve err {worst_ev:.2e}, identity err {worst_id:.2e}")


def suite_embedding(dim: int | None = None, seed: int = 42, samples: int = 50) -> list[Check]:
    rng = np.random.default_rng(seed)
    dims = [dim] if dim else list(range(2, 7))
    checks = [embedding_round_trip(n, samples, rng) for n in dims]
    worst = 0.0
    for _ in range(20):
        lam = cl.random_stochastic(2, rng)
        r = np.sqrt(lam)
        expected = np.array(
            [
                [lam[0, 0], 0, 0, lam[0, 1]],
                [0, r[0, 0] * r[1, 1], r[0, 1] * r[1, 0], 0],
                [0, r[1, 0] * r[0, 1], r[1, 1] * r[0, 0], 0],
                [lam[1, 0], 0, 0, lam[1, 1]],
            ]
        )
        worst = max(worst, float(np.max(np.abs(matrix_form(build_representation(lam).kraus) - expected))))
    checks.append(Check("two-level matrix form pattern", worst <= 1e-14, f"max err {worst:.2e}"))
    checks.extend(structure_checks(dims, rng))
    return checks


def structure_checks(dims, rng: np.random.Generator) -> list[Check]:
    out = []
    for n in dims:
        g, c = build_g(n), build_c(n)
        alphas = alpha_partition(n)
        lam = cl.random_stochastic(n, rng)
        m = matrix_form(build_representation(lam).kraus)
        split = direct_sum_extract(m, alphas)
        vs = v_blocks(lam)
        circ = cl.circulant_stochastic(rng.dirichlet(np.ones(n)))
        vcirc = v_blocks(circ)
        errs = {
            "G^2 = N G": np.max(np.abs(g @ g - n * g)),
            "reshuffle fixes G": np.max(np.abs(gamma_reorder(g) - g)),
            "C^N = I": np.max(np.abs(np.linalg.matrix_power(c, n) - np.eye(n))),
            "off-block entries": split.max_off_block,
            "blocks equal V_j": max(np.max(np.abs(b - vs[block_for_alpha(j, n)])) for j, b in enumerate(split.blocks)),
            "V_0 = L": np.max(np.abs(vs[0] - lam)),
            "circulant V_j = L": max(np.max(np.abs(v - circ)) for v in vcirc),
            "reassembly": np.max(np.abs(direct_sum_assemble(split.blocks, alphas) - m)),
        }
        cover = sorted(i for a in alphas for i in a) == list(range(n * n))
        tol = {"off-block entries": 1e-14}
        bad = [k for k, v in errs.items() if v > tol.get(k, 1e-12)]
        out.append(
            Check(
                f"block structure N={n}",
                cover and not bad,
                ("partition broken; " if not cover else "") + ("failing: " + ", ".join(bad) if bad else "all identities hold"),
            )
        )
    return out


def suite_class_members(dim: int | None = None, seed: int = 42, samples: int = 10) -> list[Check]:
    rng = np.random.default_rng(seed)
    dims = [dim] if dim else [2, 3]
    checks = []
    for n in dims:
        specs = admissible_specs(n)
        lams = [cl.random_stochastic(n, rng) for _ in range(samples)]
        worst, non_classical = 0.0, []
        for spec in specs:
            for lam in lams:
                ops = build_class_member(spec, lam)
                worst = max(worst, is_cptp(ops).violation)
                if not is_essentially_classical(ops):
                    non_classical.append(str(spec))
        checks.append(
            Check(
                f"{len(specs)} admissible members N={n}: trace preserving and essentially classical",
                worst <= 1e-12 and not non_classical,
                f"identity err {worst:.2e}, non-classical {len(non_classical)}",
            )
        )
    plus = admissible_specs(3, class_id=1)
    dets = [abs(np.linalg.det(matrix_form(build_class_member(s, np.eye(3))))) for s in plus]
    checks.append(Check("plus-class members singular at L = I (N=3)", max(dets) < 1e-10, f"max |det| {max(dets):.2e}"))
    rng2 = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(10):
        lam = cl.random_stochastic(2, rng2)
        a = matrix_form(build_class_member(ClassSpec(2, 3, 1, 4), lam))
        b = matrix_form(build_class_member(ClassSpec(2, 2, 1, 3), lam))
        worst = max(worst, float(np.max(np.abs(a - b))))
    checks.append(Check("N=2 members (3,1,4) and (2,1,3) essentially the same", worst <= 1e-12, f"max err {worst:.2e}"))
    return checks


def suite_replication(seed: int = 42) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    for n in (2, 3, 4):
        lam = cl.random_stochastic(n, rng)
        base = build_representation(lam).kraus
        for r in range(2, n + 1):
            ops = build_class_member(ClassSpec(2, r, r, r * n), lam)
            err = max(float(np.max(np.abs(ops[k] - base[k % n] / math.sqrt(r)))) for k in range(r * n))
            checks.append(Check(f"replication N={n} r={r}", err <= 1e-15, f"max err {err:.2e}"))
    return checks


def suite_counterexample_roots() -> list[Check]:
    fam1 = cl.counterexample3_family(**cl.COUNTEREXAMPLE3_SETS[1], gamma=1.0)
    spec4 = ClassSpec(2, 1, 1, 4)
    det = abs(np.linalg.det(matrix_form(build_class_member(spec4, fam1(SET1_ROOT_TIME)))))
    lam_det = abs(np.linalg.det(fam1(SET1_ROOT_TIME)))
    checks = [
        Check(
            f"set 1: {spec4} singular at t={SET1_ROOT_TIME:.6f}",
            det < 1e-8,
            f"|det| {det:.2e}, |det L| {lam_det:.3g}",
        )
    ]
    fam2 = cl.counterexample3_family(**cl.COUNTEREXAMPLE3_SETS[2], gamma=1.0)
    spec5 = ClassSpec(2, 1, 1, 5)
    rep = invertibility_scan(spec5, fam2, np.arange(0.0, 5.0 + 1e-12, 0.01))
    inside = [r for r in rep.roots if SET2_ROOT_INTERVAL[0] < r.lo and r.hi < SET2_ROOT_INTERVAL[1]]
    detail = ", ".join(f"({r.lo:.10f}, {r.hi:.10f})" for r in rep.roots) or "no roots"
    checks.append(Check(f"set 2: {spec5} root in {SET2_ROOT_INTERVAL}", bool(inside), detail))
    grid = np.linspace(0.0, 10.0, 201)
    for k, fam in ((1, fam1), (2, fam2)):
        lam_min = min(abs(np.linalg.det(fam(t))) for t in grid)
        checks.append(Check(f"set {k}: L(t) invertible on [0, 10]", lam_min > 1e-12, f"min |det L| {lam_min:.3g}"))
    base = invertibility_scan(ClassSpec(2, 1, 1, 2), cl.dichotomic_family(1.0), grid)
    checks.append(
        Check(
            "dichotomic representation has no determinant root on [0, 10]",
            not base.roots,
            f"{len(base.near_singular)} grid points below the absolute singularity threshold",
        )
    )
    return checks


def suite_cp_divisibility(seed: int = 42, families: int = 100, pairs: int = 5) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []
    fam = cl.dichotomic_family(1.0)
    grid = np.linspace(0.0, 5.0, 20)
    bad = [(t, s) for s in grid for t in s + np.linspace(0.0, 2.0, 5) if not _both_true(assess(fam, t, s))]
    checks.append(Check("dichotomic family P- and CP-divisible on 20x5 grid", not bad, f"{len(bad)} failures"))

    worst_circ = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 4))
        w = cl.random_generator(n, rng)
        w = sum(np.roll(np.roll(w, k, 0), k, 1) for k in range(n)) / n  # circulant generator
        f = cl.semigroup_family(w)
        s = rng.uniform(0, 2)
        t = s + rng.uniform(0, 2)
        rep = assess(f, t, s)
        worst_circ = min(worst_circ, rep.min_choi_eigenvalue)
    checks.append(Check("circulant semigroups CP-divisible", worst_circ >= -1e-9 * 3, f"min eig {worst_circ:.2e}"))

    worst, count, violations = 0.0, 0, 0
    for _ in range(families):
        n = int(rng.integers(2, 4))
        f = cl.semigroup_family(cl.random_generator(n, rng))
        for _ in range(pairs):
            s = rng.uniform(0, 2)
            t = s + rng.uniform(0, 2)
            rep = assess(f, t, s)
            if not rep.p_divisible:
                continue
            count += 1
            if rep.min_choi_eigenvalue < -1e-9 * n:
                violations += 1
            worst = min(worst, rep.min_choi_eigenvalue)
    checks.append(
        Check(
            "P-divisible random semigroups give CP intermediates",
            violations == 0,
            f"{violations}/{count} pairs violate, min eig {worst:.3e}",
        )
    )
    return checks + suite_intermediate_channel(seed)


def _both_true(rep) -> bool:
    return rep.p_divisible is True and rep.cp_divisible is True and rep.min_choi_eigenvalue >= -1e-10


def suite_memory_process(epsilon: float | None = None, q=None) -> list[Check]:
    eps_values = [epsilon] if epsilon is not None else [k / 10 for k in range(11)]
    q_values = [q] if q is not None else [(1.0, 0.0), (0.5, 0.5)]
    checks = []
    for qv in q_values:
        for eps in eps_values:
            joint = cl.appendix_b_joint(eps, qv)
            rep = cl.appendix_b_analysis(joint)
            ok = abs(joint.table.sum() - 1) <= 1e-14 and rep.ck_holds and rep.markov_holds == (eps <= 1e-12)
            detail = f"ck err {rep.ck_error:.1e}, markov violation {rep.markov_violation:.3g}"
            if tuple(qv) == (1.0, 0.0):
                gap = rep.conditional[1, 1, 0] - rep.conditional[1, 1, 1]
                ok = ok and abs(gap - eps) <= 1e-12
                detail += f", conditional gap {gap:.3g}"
            checks.append(Check(f"memory process eps={eps:g} q={tuple(qv)}", ok, detail))
    return checks


def suite_intermediate_channel(seed: int = 42) -> list[Check]:
    """Composition of intermediate maps on a random semigroup."""
    rng = np.random.default_rng(seed)
    f = cl.semigroup_family(cl.random_generator(3, rng))
    u, s, t = 0.3, 0.9, 1.7
    a, b, c = (intermediate_channel(f, *p).matrix for p in ((t, u), (t, s), (s, u)))
    err = float(np.max(np.abs(a - b @ c)))
    return [Check("intermediate maps compose", err <= 1e-10, f"err {err:.2e}")]


# keys are the suite names accepted on the command line
SUITES: dict[str, Callable[..., list[Check]]] = {
    "thm1": suite_embedding,
    "thm2": suite_class_members,
    "thm3": suite_counterexample_roots,
    "thm4": suite_cp_divisibility,
    "lemma3": suite_replication,
    "appendix-b": suite_memory_process,
}
