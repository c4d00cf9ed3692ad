"""Command line front end.

Exit codes: 0 success, 2 invalid input or usage, 3 completed but with
indeterminate verdicts (``analyze``) or failed checks (``verify``).
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import classical as cl
from .channels import is_cptp, matrix_form
from .divisibility import assess, scan, write_scan_table
from .matrixio import kraus_to_doc, load_matrix, matrix_to_doc
from .numerics import direct_sum_extract
from .representation import (
    ClassSpec,
    DependenceError,
    alpha_partition,
    build_representation,
    invertibility_scan,
    repair_dependence,
    v_blocks,
)
from .suites import SUITES, SET1_ROOT_TIME

EXIT_OK, EXIT_INPUT, EXIT_INCOMPLETE = 0, 2, 3


class UsageError(Exception):
    pass


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` with both ends included (to half a step), or one number."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad time grid {text!r}") from None
    if len(vals) == 1:
        return np.array(vals)
    if len(vals) != 3:
        raise UsageError(f"time grid must be start:stop:step, got {text!r}")
    start, stop, step = vals
    if not step > 0 or stop < start:
        raise UsageError(f"empty time grid {text!r}")
    count = int(math.floor((stop - start) / step + 0.5))
    return start + step * np.arange(count + 1)


def parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def parse_params(text: str | None) -> dict:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"parameter {item!r} is not key=value")
        out[key.strip()] = float(val)
    return out


def resolve_family(args) -> cl.TimeFamily:
    name = args.family
    try:
        if name == "dichotomic":
            return cl.dichotomic_family(args.gamma)
        if name == "oscillatory":
            return cl.oscillatory_family()
        if name == "counterexample3":
            params = dict(cl.COUNTEREXAMPLE3_SETS[args.set])
            params.update(parse_params(args.params))
            return cl.counterexample3_family(**params, gamma=args.gamma)
        if name == "appendix-b":
            return cl.appendix_b_family(args.epsilon, parse_floats(args.q))
        if name == "semigroup":
            rng = np.random.default_rng(args.seed)
            return cl.semigroup_family(cl.random_generator(args.dim or 3, rng))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"family {name}: {exc}") from None
    raise UsageError(f"unknown family {name!r}")


def _fmt(m, digits: int = 10) -> str:
    m = np.asarray(m)
    if np.iscomplexobj(m) and not np.any(np.abs(m.imag) > 1e-15):
        m = m.real
    return np.array2string(m, precision=digits, suppress_small=True, max_line_width=160)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------


def cmd_embed(args) -> int:
    try:
        raw = load_matrix(args.input)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    try:
        lam = cl.stochastic_matrix(raw)
    except cl.InvalidStochasticMatrix as exc:
        raise UsageError(f"invalid stochastic matrix ({exc.invariant}): {exc}") from None
    rep = build_representation(lam)
    m = matrix_form(rep.kraus)
    alphas = alpha_partition(lam.shape[0]) if lam.shape[0] >= 2 else [[0]]
    split = direct_sum_extract(m, alphas)
    report = {
        "header": "Kraus embedding of a column-stochastic matrix, matrix form and its direct-sum blocks",
        "source": matrix_to_doc(lam),
        "kraus": kraus_to_doc(rep.kraus),
        "identity_condition_error": is_cptp(rep.kraus).violation,
        "matrix_form": matrix_to_doc(m),
        "alpha_sets": alphas,
        "direct_sum_clean": split.clean,
        "v_blocks": [matrix_to_doc(v) for v in v_blocks(lam)],
    }
    try:
        report["kraus_independent"] = kraus_to_doc(repair_dependence(rep.kraus))
    except DependenceError as exc:
        report["kraus_independent"] = None
        report["dependence_error"] = str(exc)
        print(f"warning: {exc}", file=sys.stderr)
    _emit(json.dumps(report, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    fam = resolve_family(args)
    grid = parse_grid(args.t)
    offsets = parse_floats(args.offset)
    if grid.size == 0 or not offsets:
        raise UsageError("empty grid")
    if np.any(grid < fam.t1) or any(d < 0 for d in offsets):
        raise UsageError("grid times must be >= the initial time and offsets non-negative")
    try:
        reports = scan(fam, grid, offsets, tol=args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    buf = io.StringIO()
    write_scan_table(reports, buf)
    _emit(buf.getvalue(), args.out)
    undecided = sum(r.indeterminate for r in reports)
    if undecided:
        print(f"{undecided} of {len(reports)} pairs are indeterminate (singular propagator)", file=sys.stderr)
        return EXIT_INCOMPLETE
    return EXIT_OK


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    checks = []
    for name in names:
        if name in ("thm1", "thm2"):
            result = SUITES[name](dim=args.dim, seed=args.seed)
        elif name in ("thm4", "lemma3"):
            result = SUITES[name](seed=args.seed)
        elif name == "appendix-b":
            q = parse_floats(args.q) if args.q else None
            result = SUITES[name](epsilon=args.epsilon, q=q)
        else:
            result = SUITES[name]()
        checks.extend(result)
        print(f"== {name}")
        for c in result:
            print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_INCOMPLETE


def _demo_dichotomic(args) -> str:
    g, t = args.gamma, args.t_value
    fam = cl.dichotomic_family(g)
    lam = fam(t)
    rep = build_representation(lam)
    m = matrix_form(rep.kraus)
    split = direct_sum_extract(m, alpha_partition(2))
    pref = math.exp(-g * t / 2) / math.sqrt(2)
    ch, sh = math.sqrt(math.cosh(g * t)), math.sqrt(math.sinh(g * t))
    closed = [pref * np.array([[ch, sh], [sh, ch]]), pref * np.array([[ch, -sh], [-sh, ch]])]
    kerr = max(float(np.max(np.abs(a - b))) for a, b in zip(rep.kraus, closed))
    s = t / 2
    verdict = assess(fam, t, s)
    lines = [
        f"# symmetric two-state jump process, gamma={g:g}, t={t:g}",
        "## stochastic matrix L(t)",
        _fmt(lam),
        "## Kraus operators A_0, A_1",
        _fmt(rep.kraus[0]),
        _fmt(rep.kraus[1]),
        f"max deviation from the cosh/sinh closed form: {kerr:.2e}",
        f"identity condition error: {is_cptp(rep.kraus).violation:.2e}",
        "## matrix form M_c(t)",
        _fmt(m),
        "## direct-sum blocks (alpha_0 = {0,3}, alpha_1 = {1,2}); both equal L(t)",
        _fmt(split.blocks[0]),
        _fmt(split.blocks[1]),
        f"off-block max {split.max_off_block:.2e}; block deviation from L(t): "
        f"{max(float(np.max(np.abs(b - lam))) for b in split.blocks):.2e}",
        f"## divisibility at (t, s) = ({t:g}, {s:g})",
        f"P-divisible: {verdict.p_divisible}",
        f"CP-divisible: {verdict.cp_divisible} (min Choi eigenvalue {verdict.min_choi_eigenvalue:.3e})",
    ]
    return "\n".join(lines) + "\n"


def _demo_appendix_b(args) -> str:
    q = parse_floats(args.q) if args.q else [0.5, 0.5]
    joint = cl.appendix_b_joint(args.epsilon, q)
    rep = cl.appendix_b_analysis(joint)
    lines = [f"# two-state process with memory parameter eps={args.epsilon:g}, q={tuple(q)}", "## joint table p3(j3, j2, j1)"]
    for j3 in range(2):
        for j2 in range(2):
            for j1 in range(2):
                lines.append(f"p3({j3},{j2},{j1}) = {joint.table[j3, j2, j1]:.12g}")
    lines += [
        "## transition matrices",
        "T(t2,t1) =", _fmt(rep.t21),
        "T(t3,t2) =", _fmt(rep.t32),
        "T(t3,t1) =", _fmt(rep.t31),
        f"## Chapman-Kolmogorov T(t3,t1) = T(t3,t2) T(t2,t1): {'pass' if rep.ck_holds else 'fail'} (err {rep.ck_error:.2e})",
        f"## Markov condition p(j3|j2,j1) = p(j3|j2): {'pass' if rep.markov_holds else 'fail'} "
        f"(max violation {rep.markov_violation:.3g})",
    ]
    for j2 in range(2):
        for j1 in range(2):
            c = rep.conditional[1, j2, j1]
            lines.append(f"p(1 | j2={j2}, j1={j1}) = {'undefined' if math.isnan(c) else f'{c:.12g}'}")
    return "\n".join(lines) + "\n"


def _demo_counterexample3(args) -> str:
    params = cl.COUNTEREXAMPLE3_SETS[args.set]
    fam = cl.counterexample3_family(**params, gamma=args.gamma)
    spec = ClassSpec(2, 1, 1, 4 if args.set == 1 else 5)
    grid = np.round(np.arange(0.0, 6.0 + 1e-12, 0.05), 12)
    rep = invertibility_scan(spec, fam, grid)
    lines = [
        f"# three-state counterexample, parameter set {args.set}: "
        + ", ".join(f"{k}={v:.6g}" for k, v in params.items())
        + f", gamma={args.gamma:g}",
        f"## determinant of the matrix form of {spec} versus t",
        "t,det_matrix_form,det_L",
    ]
    for t, d in zip(rep.times[::10], rep.dets[::10]):
        lines.append(f"{t:.2f},{d.real:.6e},{np.linalg.det(fam(t)):.6e}")
    lines.append("## bracketed roots")
    for r in rep.roots:
        lines.append(f"t in ({r.lo:.12f}, {r.hi:.12f})")
    if args.set == 1:
        lines.append(f"closed-form root ln(32 + (1 + 5 sqrt(673))/4)/gamma = {SET1_ROOT_TIME / args.gamma:.12f}")
    return "\n".join(lines) + "\n"


DEMOS = {"dichotomic": _demo_dichotomic, "appendix-b": _demo_appendix_b, "counterexample3": _demo_counterexample3}


def cmd_demo(args) -> int:
    try:
        text = DEMOS[args.name](args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stochq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="embed a stochastic matrix file as a Kraus set")
    p.add_argument("input", help="matrix file (JSON rows/cols/data)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("analyze", help="divisibility scan of a named family")
    p.add_argument("--family", required=True, help="dichotomic | counterexample3 | oscillatory | appendix-b | semigroup")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--set", type=int, choices=(1, 2), default=1, help="counterexample3 parameter set")
    p.add_argument("--params", help="counterexample3 overrides, e.g. a=0.2,d=0.1")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--q", default="0.5,0.5")
    p.add_argument("--dim", type=int)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--t", required=True, help="start:stop:step")
    p.add_argument("--offset", default="0.5", help="comma-separated offsets t - s")
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite", choices=[*SUITES, "all"])
    p.add_argument("--dim", type=int)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--q")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo", help="end-to-end report for a worked example")
    p.add_argument("name", choices=list(DEMOS))
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--t", dest="t_value", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.3)
    p.add_argument("--q")
    p.add_argument("--set", type=int, choices=(1, 2), default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
