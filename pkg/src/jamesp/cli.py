"""Command-line front end: ``jamesp norm|construct|certify|verify``.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .certify import MAX_SWEEP_K, certify_linf_embedding, grid_check
from .construction import (
    accumulated_error_bound,
    build,
    guaranteed_power_bound,
    plan,
)
from .core import (
    BRUTEFORCE_MAX_SUPPORT,
    FiniteVector,
    check_exponent,
    jp_norm_bruteforce,
    jp_norm_exact,
    jp_norm_pruned,
)
from .io import (
    VectorFileError,
    construction_csv,
    construction_table,
    distortion_csv,
    distortion_summary,
    fmt,
    read_vectors,
    rows_csv,
    write_vectors,
)
from . import lemmas

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SOUNDNESS_TOL = 1e-8
NORM_FLOOR_TOL = 1e-9
MAX_MATERIALIZE = 20_000_000

METHODS = {"dp": jp_norm_exact, "brute": jp_norm_bruteforce, "pruned": jp_norm_pruned}
SUITES = ("ineq1", "ineq2", "best-constant", "fillgaps", "endpoints", "mainlemma", "steps", "sk")
SCALAR_PS = (1.1, 1.5, 2.0, 2.5, 3.0, 4.0)


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _exponent(p: float) -> float:
    try:
        return check_exponent(p)
    except ValueError as exc:
        raise UsageError(str(exc))


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _chain_text(chain: Sequence[int], limit: int = 40) -> str:
    if len(chain) <= limit:
        return ",".join(map(str, chain))
    head = ",".join(map(str, chain[:limit // 2]))
    tail = ",".join(map(str, chain[-limit // 2:]))
    return f"{head},...,{tail} ({len(chain)} indices)"


def _load(path: str, p_override: float | None):
    try:
        p, vectors, meta = read_vectors(path)
    except VectorFileError as exc:
        raise UsageError(str(exc))
    return _exponent(p if p_override is None else p_override), vectors, meta


def _check_dp_limit(length: int, limit: int, what: str) -> None:
    if length > limit:
        raise UsageError(f"{what}: {length} indices exceeds --dp-limit {limit}")


# --------------------------------------------------------------------- norm

def cmd_norm(args) -> int:
    p, vectors, _ = _load(args.file, args.p)
    method = METHODS[args.method]
    status = EXIT_OK
    rows = []
    for i, x in enumerate(vectors):
        _check_dp_limit(x.support_length + 1, args.dp_limit, f"vector {i}")
        if args.method == "brute" and x.support_length > BRUTEFORCE_MAX_SUPPORT:
            raise UsageError(f"vector {i}: brute force limited to support {BRUTEFORCE_MAX_SUPPORT}")
        r = method(x, p)
        print(f"vector {i}: norm = {fmt(r.value)}  power = {fmt(r.power)}  "
              f"chain = {_chain_text(r.argmax_chain) or '(empty)'}")
        oracle = ""
        if args.check_oracle and x.support_length <= BRUTEFORCE_MAX_SUPPORT:
            dp = jp_norm_exact(x, p)
            bf = jp_norm_bruteforce(x, p)
            ok = math.isclose(dp.value, bf.value, rel_tol=1e-10, abs_tol=1e-300)
            oracle = "pass" if ok else "FAIL"
            print(f"  oracle: dp = {fmt(dp.value)} brute = {fmt(bf.value)} -> {oracle}")
            if not ok:
                status = EXIT_FAIL
        rows.append((i, r.value, r.power, " ".join(map(str, r.argmax_chain)), oracle))
    if args.csv:
        _emit(rows_csv(("vector", "norm", "power", "chain", "oracle"), rows), args.csv)
    return status


# ---------------------------------------------------------------- construct

def _soundness(c, dp_limit: int) -> tuple[bool, list[str]]:
    msgs = []
    ok = True
    _check_dp_limit(c.support + 1, dp_limit, "construction")
    for i, x in enumerate(c.vectors, start=1):
        if x.support_length > c.support:
            ok = False
            msgs.append(f"x_{i} leaves [0, {c.support - 1}]")
        nrm = jp_norm_exact(x, c.p).value
        if nrm < 1.0 - NORM_FLOOR_TOL:
            ok = False
            msgs.append(f"||x_{i}|| = {fmt(nrm)} < 1")
    report = certify_linf_embedding(c.vectors, c.p)
    worst = max(v ** c.p for v in report.per_pattern.values())
    acc = accumulated_error_bound(c)
    msgs.append(f"max pattern norm^p = {fmt(worst)}; accumulated bound gamma_K + E_K = {fmt(acc)}")
    if worst > acc + SOUNDNESS_TOL:
        ok = False
        msgs.append("accumulated error bound VIOLATED")
    if c.mode == "bound":
        g = guaranteed_power_bound(c)
        msgs.append(f"guaranteed bound gamma_K + eps_K = {fmt(g)}; 1 + 2 eps = {fmt(1 + 2 * c.eps)}")
        if worst > g + SOUNDNESS_TOL or g > 1.0 + 2.0 * c.eps + SOUNDNESS_TOL:
            ok = False
            msgs.append("bound-mode guarantee VIOLATED")
    return ok, msgs


def cmd_construct(args) -> int:
    p = _exponent(args.p)
    if args.K < 1:
        raise UsageError("K must be >= 1")
    if not args.eps > 0:
        raise UsageError("eps must be > 0")
    if args.mode == "manual" and args.n is None and args.K > 1:
        raise UsageError("manual mode requires --n")
    try:
        stages = plan(args.K, args.eps, p, args.mode, args.n or [])
    except ValueError as exc:
        raise UsageError(str(exc))
    support = stages[-1].support
    if not args.no_verify and support + 1 > args.dp_limit:
        raise UsageError(f"predicted support 2m_K = {support} exceeds --dp-limit "
                         f"{args.dp_limit}; pass --no-verify to build without norm checks")
    if support > MAX_MATERIALIZE:
        raise UsageError(f"support 2m_K = {support} is too large to materialise "
                         f"(limit {MAX_MATERIALIZE}); stage plan follows\n"
                         + "\n".join(f"k={s.k} n_k={s.n} m_k={s.m}" for s in stages))
    c = build(args.K, args.eps, p, args.mode, args.n or [])
    print(construction_table(c))
    if args.report:
        _emit(construction_csv(c), args.report)
    if args.out:
        meta = {"K": c.K, "eps": float(c.eps), "p": float(c.p), "mode": c.mode, "n": c.ns}
        write_vectors(args.out, c.p, c.vectors, meta)
    status = EXIT_OK
    if not args.no_verify:
        ok, msgs = _soundness(c, args.dp_limit)
        for m in msgs:
            print(m)
        print("soundness: " + ("pass" if ok else "FAIL"))
        if not ok:
            status = EXIT_FAIL
    if args.certify:
        if args.K > MAX_SWEEP_K:
            raise UsageError(f"certification limited to K <= {MAX_SWEEP_K}")
        _check_dp_limit(c.support + 1, args.dp_limit, "certification")
        status = max(status, _certify(c.vectors, c.p, args))
    return status


# ------------------------------------------------------------------ certify

def _certify(vectors, p: float, args) -> int:
    try:
        report = certify_linf_embedding(vectors, p)
    except ValueError as exc:
        raise UsageError(str(exc))
    print(distortion_summary(report))
    if args.csv:
        _emit(distortion_csv(report), args.csv)
    status = EXIT_OK
    if getattr(args, "grid", None):
        g = grid_check(vectors, p, args.grid)
        print(f"grid check (g={args.grid}) max = {fmt(g)}")
        if g > report.M + 1e-9:
            status = EXIT_FAIL
    if args.require_distortion is not None:
        if not report.certified or report.distortion > args.require_distortion:
            print(f"required distortion <= {args.require_distortion:g}: FAIL")
            status = EXIT_FAIL
        else:
            print(f"required distortion <= {args.require_distortion:g}: pass")
    return status


def cmd_certify(args) -> int:
    p, vectors, _ = _load(args.file, args.p)
    if not 1 <= len(vectors) <= MAX_SWEEP_K:
        raise UsageError(f"need between 1 and {MAX_SWEEP_K} vectors, got {len(vectors)}")
    longest = max(v.support_length for v in vectors)
    _check_dp_limit(longest + 1, args.dp_limit, "certification")
    return _certify(vectors, p, args)


# ------------------------------------------------------------------- verify

def _seeds(args) -> list[int]:
    if args.seed is None and args.seeds is None:
        raise UsageError(f"suite {args.suite!r} is randomised: pass --seed and/or --seeds")
    base = args.seed or 0
    return list(range(base, base + (args.seeds or 1)))


def _verify_rows(args) -> list[tuple]:
    """One row per check: (suite, p, params, seed, check, value, passed)."""
    suite = args.suite
    ps = [_exponent(p) for p in (args.p or ([2.0] if suite in ("mainlemma", "steps", "sk",
                                                                 "fillgaps", "endpoints")
                                            else SCALAR_PS))]
    rows = []
    if suite == "ineq1":
        g = args.grid or 200
        grid = np.logspace(-6, 1, g)
        for p in ps:
            worst = min(lemmas.check_ineq1(a, b, p) / max(1.0, (a + b) ** p)
                        for a in grid for b in grid)
            rows.append((suite, p, f"grid={g}", "", "min scaled margin", worst,
                         worst >= -lemmas.SCALAR_TOL))
    elif suite == "ineq2":
        g = args.grid or 1000
        for p in ps:
            worst = min(lemmas.check_ineq2(t, p) / max(1.0, t ** p)
                        for t in np.linspace(1.0, 100.0, g))
            rows.append((suite, p, f"grid={g}", "", "min scaled margin", worst,
                         worst >= -lemmas.SCALAR_TOL))
    elif suite == "best-constant":
        g = args.grid or 1000
        if g < 100:
            raise UsageError("best-constant scan needs --grid >= 100")
        for p in ps:
            scan = lemmas.best_constant_scan(p, g)
            rows.append((suite, p, f"grid={g}", "", "scan", scan, scan <= 2.0 ** p))
            rows.append((suite, p, f"grid={g}", "", "remark constant",
                         lemmas.remark_constant(p), True))
    elif suite == "fillgaps":
        for p in ps:
            for seed in _seeds(args):
                rng = np.random.default_rng(seed)
                ell = int(rng.integers(1, 6))
                C, D, E = lemmas.random_fillgaps_family(rng, ell)
                top = max(max(c) for c in C)
                v = FiniteVector(rng.normal(size=top + 2))
                gap = lemmas.check_fillgaps(v, p, C, D, E)
                rows.append((suite, p, f"ell={ell}", seed, "relative discrepancy", gap,
                             gap <= lemmas.IDENTITY_TOL))
    elif suite == "endpoints":
        for p in ps:
            for seed in _seeds(args):
                v, c, cp, B = lemmas.random_endpoint_instance(np.random.default_rng(seed))
                margin = lemmas.check_endpoints(v, p, c, cp, B)
                scale = lemmas.endpoints_scale(v, p, c, cp)
                rows.append((suite, p, f"c={c} c'={cp} B={'/'.join(map(str, B))}", seed,
                             "margin", margin, margin >= -lemmas.SCALAR_TOL * scale))
    else:
        if args.n % 2 or args.n < 2:
            raise UsageError(f"--n must be even and >= 2, got {args.n}")
        for p in ps:
            for seed in _seeds(args):
                inst = lemmas.MainLemmaInstance.generate(p, args.m, args.n, seed, args.gamma)
                params = f"m={args.m} n={args.n} gamma={args.gamma:g}"
                if inst.top > args.dp_limit:
                    raise UsageError(f"2mn = {inst.top} exceeds --dp-limit {args.dp_limit}")
                if suite == "mainlemma":
                    r = lemmas.verify_mainlemma(inst, args.dp_limit)
                    for name, margin in r.margins.items():
                        rows.append((suite, p, params, seed, name, margin,
                                     margin >= -lemmas.INEQ_TOL))
                elif suite == "steps":
                    tr = lemmas.verify_steps(inst, args.dp_limit)
                    for name, margin in tr.margins.items():
                        rows.append((suite, p, params, seed, name, margin,
                                     margin >= -lemmas.INEQ_TOL))
                    if p == 2.0:
                        worst = max(abs(s) for s in tr.s)
                        rows.append((suite, p, params, seed, "max |s_k|", worst, worst <= 1e-12))
                    elif p > 2.0:
                        worst = min(tr.s)
                        rows.append((suite, p, params, seed, "min s_k", worst, worst >= -1e-12))
                else:
                    for k in range(2 * args.m):
                        gap = lemmas.check_sk_identity(inst, k)
                        rows.append((suite, p, params, seed, f"s_{k} identity", gap,
                                     gap <= lemmas.IDENTITY_TOL))
    return rows


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    try:
        rows = _verify_rows(args)
    except ValueError as exc:
        raise UsageError(str(exc))
    failed = [r for r in rows if not r[-1]]
    by_check: dict[tuple, list] = {}
    for r in rows:
        by_check.setdefault((r[1], r[4]), []).append(r)
    for (p, check), group in by_check.items():
        n_fail = sum(not r[-1] for r in group)
        vals = [r[5] for r in group]
        print(f"{args.suite} p={p:g} {check}: {len(group) - n_fail}/{len(group)} pass "
              f"(min {fmt(min(vals))}, max {fmt(max(vals))})")
    if args.csv:
        _emit(rows_csv(("suite", "p", "params", "seed", "check", "value", "pass"),
                       [r[:-1] + ("pass" if r[-1] else "FAIL",) for r in rows]), args.csv)
    print(f"verify {args.suite}: " + ("pass" if not failed else f"FAIL ({len(failed)} checks)"))
    return EXIT_FAIL if failed else EXIT_OK


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jamesp",
        description="Exact J_p norms, the c0 construction, distortion certificates "
                    "and proof checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--dp-limit", type=_positive_int, default=lemmas.DEFAULT_DP_LIMIT,
                        help="largest index range the O(L^2) norm DP may run on (default 20000)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p_norm = sub.add_parser("norm", help="norms of the vectors in a vector file")
    p_norm.add_argument("file")
    p_norm.add_argument("--p", type=float, help="override the exponent stored in the file")
    p_norm.add_argument("--method", choices=sorted(METHODS), default="dp")
    p_norm.add_argument("--check-oracle", action="store_true",
                        help="cross-check the DP against brute force (support <= 20)")
    p_norm.add_argument("--csv", help="write a CSV report here")
    p_norm.set_defaults(func=cmd_norm)

    p_con = sub.add_parser("construct", help="build the K-vector construction")
    p_con.add_argument("--K", type=int, required=True)
    p_con.add_argument("--eps", type=float, default=1.0)
    p_con.add_argument("--p", type=float, required=True)
    p_con.add_argument("--mode", choices=("bound", "manual"), default="bound")
    p_con.add_argument("--n", type=_int_list, help="manual stage factors, e.g. 8,8 or 1,8,8")
    p_con.add_argument("--out", help="write the vectors to this vector file")
    p_con.add_argument("--report", help="write the stage table as CSV here")
    p_con.add_argument("--no-verify", action="store_true",
                       help="skip norm-based soundness checks")
    p_con.add_argument("--certify", action="store_true", help="also certify the vectors")
    p_con.add_argument("--require-distortion", type=float)
    p_con.add_argument("--csv", help="distortion CSV path when --certify is given")
    p_con.set_defaults(func=cmd_construct)

    p_cert = sub.add_parser("certify", help="distortion against the l_inf^K basis")
    p_cert.add_argument("file")
    p_cert.add_argument("--p", type=float)
    p_cert.add_argument("--require-distortion", type=float)
    p_cert.add_argument("--grid", type=int, help="also sample the cube faces (K <= 4)")
    p_cert.add_argument("--csv", help="write per-pattern norms as CSV here")
    p_cert.set_defaults(func=cmd_certify)

    p_ver = sub.add_parser("verify", help="run a lemma verification suite")
    p_ver.add_argument("suite", help=", ".join(SUITES))
    p_ver.add_argument("--p", type=float, nargs="+")
    p_ver.add_argument("--m", type=_positive_int, default=2)
    p_ver.add_argument("--n", type=int, default=8)
    p_ver.add_argument("--gamma", type=float, default=1.0)
    p_ver.add_argument("--seed", type=int, help="first seed")
    p_ver.add_argument("--seeds", type=_positive_int, help="number of consecutive seeds")
    p_ver.add_argument("--grid", type=int)
    p_ver.add_argument("--csv", help="write one row per check here")
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"jamesp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
