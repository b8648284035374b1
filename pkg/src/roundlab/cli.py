"""Command line surface; every subcommand prints one JSON report.

Exit codes: 0 when the check passed or the job completed, 2 when the run
surfaced a violation, mismatch, or obstruction, 1 on errors and bad usage.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction

from . import __version__, kernels
from .cayley import (FamilyGenerators, block_projection_check,
                     cayley_roundness_upper, standard_basis_generators,
                     verify_mstar_isometry)
from .cyclic import (BudgetExceeded, CycleSpace, PairClass,
                     ProductCycleSpace, SimplexClass, build_simplex,
                     count_incidences, count_pairs_closed, enumerate_pairs,
                     is_simplex, stage_pair_class, stage_range_warnings,
                     stage_simplex_class, stage_space)
from .inject import (InjectionTable, build_ballchain_injection,
                     build_ell0_injection, build_ellp_injection,
                     load_ballchain_target, verify_injection)
from .metric import empirical_moduli, validate_metric
from .obstruction import (coarse_obstruction_report, resolve_builtin_map,
                          uniform_obstruction_report, verify_chain_inequality,
                          verify_step_inequality)
from .report import Report
from .roundness import estimate_roundness
from .spaces import read_space_csv
from .zspace import (ZPoint, ball_census, certify_corrected,
                     scan_triangle_violations)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; here 2 means `violation found`,
    so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def _parse_p(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(Fraction(text))


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(",", " ").split()]


def _print_report(args, command: str, params: dict, results: dict,
                  provenance_extra: dict | None = None,
                  wall_time: float | None = None) -> None:
    prov = {"version": __version__, "backend": kernels.BACKEND}
    if provenance_extra:
        prov.update(provenance_extra)
    rep = Report(command, params, results, prov, wall_time)
    text = rep.to_json()
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _add_out(p) -> None:
    p.add_argument("--out", help="write the JSON report here instead of stdout")


def _add_space_args(p) -> None:
    p.add_argument("--coords", type=int, help="number of cycle coordinates")
    p.add_argument("--units", type=int, help="units per cycle (even)")
    p.add_argument("--quantum", type=_parse_fraction, default=Fraction(1),
                   help="real length of one unit (rational, default 1)")
    p.add_argument("--n", type=int,
                   help="stage-form block size (sets coords/units/quantum)")


def _add_class_args(p, simplex: bool) -> None:
    p.add_argument("--delta", type=int, help="quanta separating a class pair")
    p.add_argument("--support", type=int, help="coordinates that differ")
    if simplex:
        p.add_argument("--size", type=int, help="family count (even, >= 2)")
    p.add_argument("--t", type=int, help="stage-form scale exponent")
    p.add_argument("--m", type=int, help="stage-form support exponent")


def _resolve_space(args) -> ProductCycleSpace:
    if args.n is not None:
        space = stage_space(args.n)
        print(f"stage form: n={args.n} -> coords={space.coords} "
              f"units={space.units} quantum={space.quantum}", file=sys.stderr)
        return space
    if args.coords is None or args.units is None:
        raise ValueError("give --coords and --units, or stage form --n")
    return ProductCycleSpace(args.coords, CycleSpace(args.units, args.quantum))


def _resolve_pair_class(args) -> PairClass:
    if args.t is not None or args.m is not None:
        if args.n is None or args.t is None or args.m is None:
            raise ValueError("stage form needs --n, --t and --m together")
        cls = stage_pair_class(args.n, args.t, args.m)
        print(f"stage form: (t={args.t}, m={args.m}) -> delta={cls.delta} "
              f"support={cls.support}", file=sys.stderr)
        for w in stage_range_warnings(args.n, args.t, args.m):
            print(f"warning: {w}", file=sys.stderr)
        return cls
    if args.delta is None or args.support is None:
        raise ValueError("give --delta and --support, or stage form --t/--m")
    return PairClass(args.delta, args.support)


def _resolve_simplex_class(args) -> SimplexClass:
    if args.t is not None or args.m is not None:
        if args.n is None or args.t is None or args.m is None:
            raise ValueError("stage form needs --n, --t and --m together")
        scls = stage_simplex_class(args.n, args.t, args.m)
        print(f"stage form: (t={args.t}, m={args.m}) -> delta={scls.delta} "
              f"support={scls.support} families={scls.families}",
              file=sys.stderr)
        for w in stage_range_warnings(args.n, args.t, args.m):
            print(f"warning: {w}", file=sys.stderr)
        return scls
    if args.delta is None or args.support is None or args.size is None:
        raise ValueError(
            "give --size, --delta and --support, or stage form --t/--m")
    return SimplexClass(args.delta, args.support, args.size)


def _cmd_validate(args) -> int:
    space = read_space_csv(args.input, checked=False)
    rep = validate_metric(space, budget=args.budget)
    _print_report(args, "validate",
                  {"input": args.input, "budget": args.budget},
                  rep.to_dict())
    return 0 if rep.ok else 2


def _cmd_gr_estimate(args) -> int:
    space = read_space_csv(args.input, checked=not args.unchecked)
    mode = "search" if args.search else "exhaustive"
    start = time.perf_counter()
    est = estimate_roundness(
        space, max_size=args.max_size, p_tolerance=args.tol, mode=mode,
        budget=args.budget, seed=args.seed, p_cap=args.p_cap)
    wall = time.perf_counter() - start
    params = {"input": args.input, "max_size": args.max_size,
              "tol": args.tol, "mode": mode, "budget": args.budget,
              "seed": args.seed, "p_cap": args.p_cap}
    _print_report(args, "gr estimate", params, est.to_dict(),
                  {"seed": args.seed}, wall)
    return 0


def _cmd_simplex_build(args) -> int:
    space = _resolve_space(args)
    scls = _resolve_simplex_class(args)
    ds = build_simplex(space, scls)
    verified = is_simplex(space, ds, scls)
    if not verified:
        raise ArithmeticError("built simplex failed its own class check")
    results = {
        "coords": space.coords,
        "units": space.units,
        "quantum": space.quantum,
        "delta": scls.delta,
        "support": scls.support,
        "families": scls.families,
        "xs": [list(x) for x in ds.xs],
        "ys": [list(y) for y in ds.ys],
        "verified": verified,
    }
    _print_report(args, "simplex build", vars_params(args), results)
    return 0


def vars_params(args) -> dict:
    # worker count never changes results (sampling is slice-merged), so it
    # stays out of the report body to keep equal-seed runs byte-identical
    skip = {"func", "out", "command", "sub", "workers"}
    return {k: (str(v) if isinstance(v, Fraction) else v)
            for k, v in vars(args).items()
            if k not in skip and not callable(v)}


def _cmd_counts_pairs(args) -> int:
    space = _resolve_space(args)
    cls = _resolve_pair_class(args)
    closed = count_pairs_closed(space, cls)
    results = {"delta": cls.delta, "support": cls.support,
               "count": closed, "enumerated": None}
    if args.enumerate_budget is not None:
        seen = sum(1 for _ in enumerate_pairs(space, cls,
                                              args.enumerate_budget))
        results["enumerated"] = seen
        if seen != closed:
            raise ArithmeticError(
                f"enumeration found {seen} pairs, closed form {closed}")
    _print_report(args, "counts pairs", vars_params(args), results)
    return 0


def _cmd_counts_incidences(args) -> int:
    space = _resolve_space(args)
    scls = _resolve_simplex_class(args)
    inc = count_incidences(space, scls, budget=args.budget)
    results = {
        "delta": inc.delta, "support": inc.support, "families": inc.families,
        "simplices": inc.s_count,
        "edge_pairs": inc.n_edge_class,
        "conn_pairs": inc.n_conn_class,
        "simplices_per_edge_pair": inc.k_count,
        "simplices_per_conn_pair": inc.l_count,
        "edge_identity": "S*r*(r-1) == N_edge*K",
        "conn_identity": "S*r^2 == N_conn*L",
        "ratio_identity_holds": inc.ratio_identity_holds(),
    }
    _print_report(args, "counts incidences", vars_params(args), results)
    return 0


def _load_moduli(path):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    samples = data["samples"] if isinstance(data, dict) else data
    def conv(v):
        if isinstance(v, str):
            return Fraction(v)
        if isinstance(v, int):
            return Fraction(v)
        return float(v)
    return empirical_moduli([(conv(d), conv(i)) for d, i in samples])


def _cmd_obstruct_coarse(args) -> int:
    moduli = _load_moduli(args.moduli)
    rep = coarse_obstruction_report(moduli, args.p)
    _print_report(args, "obstruct coarse",
                  {"moduli": args.moduli, "p": args.p}, rep.to_dict())
    return 2 if rep.found else 0


def _cmd_obstruct_uniform(args) -> int:
    ladder = _parse_int_list(args.n_ladder)
    start = time.perf_counter()
    rep = uniform_obstruction_report(
        args.map, ladder, args.p, samples=args.samples, seed=args.seed,
        workers=args.workers)
    wall = time.perf_counter() - start
    params = {"map": args.map, "n_ladder": ladder, "p": args.p,
              "samples": args.samples, "seed": args.seed}
    _print_report(args, "obstruct uniform", params, rep.to_dict(),
                  {"seed": args.seed}, wall)
    return 2 if rep.obstruction_found else 0


def _cmd_obstruct_step(args) -> int:
    space = _resolve_space(args)
    scls = _resolve_simplex_class(args)
    emap = resolve_builtin_map(args.map, space)
    rep = verify_step_inequality(
        emap, scls, args.p, mode=args.mode, budget=args.budget,
        samples=args.samples, seed=args.seed, workers=args.workers)
    _print_report(args, "obstruct step", vars_params(args), rep.to_dict(),
                  {"seed": args.seed})
    return 0 if rep.holds else 2


def _cmd_obstruct_chain(args) -> int:
    space = _resolve_space(args)
    scls = _resolve_simplex_class(args)
    emap = resolve_builtin_map(args.map, space)
    rep = verify_chain_inequality(
        emap, scls, args.levels, args.p, mode=args.mode, budget=args.budget,
        samples=args.samples, seed=args.seed, workers=args.workers)
    ok = rep.cumulative_holds and all(s["holds"] for s in rep.steps)
    _print_report(args, "obstruct chain", vars_params(args), rep.to_dict(),
                  {"seed": args.seed})
    return 0 if ok else 2


def _cmd_zspace_validate(args) -> int:
    violations = scan_triangle_violations(args.variant, args.block_bound)
    results = {
        "variant": args.variant,
        "block_bound": args.block_bound,
        "violation_count": len(violations),
        "violations": [v.to_dict() for v in
                       (violations if args.all else violations[:1])],
    }
    if args.variant == "corrected":
        results["certificate"] = certify_corrected(args.block_bound).to_dict()
    _print_report(args, "zspace validate", vars_params(args), results)
    return 2 if violations else 0


def _cmd_zspace_ball(args) -> int:
    if args.center:
        with open(args.center, "r", encoding="utf-8") as fh:
            center = ZPoint.from_json_dict(json.load(fh))
    else:
        center = ZPoint.zero(args.block)
    census = ball_census(center, Fraction(args.radius), args.variant,
                         args.block_bound)
    _print_report(args, "zspace ball", vars_params(args), census.to_dict())
    return 0


def _cmd_inject_build(args) -> int:
    space = read_space_csv(args.input)
    target = args.target
    if target == "ell0":
        table = build_ell0_injection(space)
    elif target.startswith("ellp:"):
        table = build_ellp_injection(space, Fraction(target.split(":", 1)[1]))
    elif target.startswith("ballchain:"):
        table = build_ballchain_injection(
            space, load_ballchain_target(target.split(":", 1)[1]))
    else:
        raise ValueError(f"unknown target {target!r}")
    rep = verify_injection(space, table, modulus=args.modulus)
    payload = table.to_json_dict(space)
    if args.map_out:
        with open(args.map_out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    results = {"table": None if args.map_out else payload,
               "map_out": args.map_out,
               "verification": rep.to_dict()}
    _print_report(args, "inject build", vars_params(args), results)
    return 0 if rep.ok else 2


def _cmd_inject_verify(args) -> int:
    with open(args.map, "r", encoding="utf-8") as fh:
        table, space = InjectionTable.from_json_dict(json.load(fh))
    if args.input:
        space = read_space_csv(args.input)
    if space is None:
        raise ValueError("map file has no embedded domain; pass --input")
    rep = verify_injection(space, table, modulus=args.modulus)
    _print_report(args, "inject verify", vars_params(args), rep.to_dict())
    return 0 if rep.ok else 2


def _cmd_cayley_verify(args) -> int:
    start = time.perf_counter()
    rep = verify_mstar_isometry(
        args.n, mode=args.mode, variant=args.variant, budget=args.budget,
        seed=args.seed, workers=args.workers)
    wall = time.perf_counter() - start
    _print_report(args, "cayley verify", vars_params(args), rep.to_dict(),
                  {"seed": args.seed}, wall)
    return 0 if rep.ok else 2


def _cmd_cayley_roundness(args) -> int:
    if args.standard_basis:
        gens = standard_basis_generators(args.dim)
    else:
        if args.jump is None:
            raise ValueError("give --jump, or --standard-basis")
        gens = FamilyGenerators(args.dim, args.jump, args.variant)
    g = tuple(_parse_int_list(args.g))
    h = tuple(_parse_int_list(args.h))
    rep = cayley_roundness_upper(gens, g, h, cutoff=args.cutoff)
    _print_report(args, "cayley roundness", vars_params(args), rep.to_dict())
    return 0


def _cmd_cayley_projection(args) -> int:
    rep = block_projection_check(
        _parse_int_list(args.dims), _parse_int_list(args.jumps),
        args.radius, args.variant)
    _print_report(args, "cayley projection", vars_params(args), rep.to_dict())
    return 0 if rep.ok else 2


def build_parser() -> _Parser:
    parser = _Parser(prog="roundlab",
                     description="generalized roundness verification lab")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="audit metric axioms of a space file")
    p.add_argument("--input", required=True)
    p.add_argument("--budget", type=int, default=None,
                   help="max triangle triples to check")
    _add_out(p)
    p.set_defaults(func=_cmd_validate)

    gr = sub.add_parser("gr", help="generalized roundness").add_subparsers(
        dest="sub", required=True)
    p = gr.add_parser("estimate", help="bracket the roundness by bisection")
    p.add_argument("--input", required=True)
    p.add_argument("--max-size", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-3,
                   help="bracket width in the exponent")
    p.add_argument("--exhaustive", action="store_true", default=False,
                   help="scan all configurations (default)")
    p.add_argument("--search", action="store_true", default=False,
                   help="seeded greedy search instead of full scans")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-cap", type=float, default=16.0)
    p.add_argument("--unchecked", action="store_true",
                   help="skip axiom validation of the input")
    _add_out(p)
    p.set_defaults(func=_cmd_gr_estimate)

    sx = sub.add_parser("simplex", help="class simplices").add_subparsers(
        dest="sub", required=True)
    p = sx.add_parser("build", help="construct and verify a class simplex")
    _add_space_args(p)
    _add_class_args(p, simplex=True)
    _add_out(p)
    p.set_defaults(func=_cmd_simplex_build)

    cnt = sub.add_parser("counts", help="exact census").add_subparsers(
        dest="sub", required=True)
    p = cnt.add_parser("pairs", help="closed-form class pair count")
    _add_space_args(p)
    _add_class_args(p, simplex=False)
    p.add_argument("--enumerate-budget", type=int, default=None,
                   help="cross-check by enumeration up to this budget")
    _add_out(p)
    p.set_defaults(func=_cmd_counts_pairs)
    p = cnt.add_parser("incidences", help="simplex/pair incidence identities")
    _add_space_args(p)
    _add_class_args(p, simplex=True)
    p.add_argument("--budget", type=int, default=10 ** 8)
    _add_out(p)
    p.set_defaults(func=_cmd_counts_incidences)

    ob = sub.add_parser("obstruct", help="embedding obstruction reports"
                        ).add_subparsers(dest="sub", required=True)
    p = ob.add_parser("coarse", help="growth obstruction from a modulus table")
    p.add_argument("--moduli", required=True,
                   help="JSON file of [distance, image] samples")
    p.add_argument("--p", type=_parse_p, required=True)
    _add_out(p)
    p.set_defaults(func=_cmd_obstruct_coarse)
    p = ob.add_parser("uniform", help="fine/coarse class comparison ladder")
    p.add_argument("--map", required=True,
                   help="builtin:identity|circle|snowflake:a|constant")
    p.add_argument("--n-ladder", required=True, help="even depths, e.g. 2,4,6")
    p.add_argument("--p", type=_parse_p, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--workers", type=int, default=1)
    _add_out(p)
    p.set_defaults(func=_cmd_obstruct_uniform)
    p = ob.add_parser("step", help="one averaged-comparison step")
    _add_space_args(p)
    _add_class_args(p, simplex=True)
    p.add_argument("--map", required=True)
    p.add_argument("--p", type=_parse_p, required=True)
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--budget", type=int, default=2_000_000)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--workers", type=int, default=1)
    _add_out(p)
    p.set_defaults(func=_cmd_obstruct_step)
    p = ob.add_parser("chain", help="averaged comparisons down a class chain")
    _add_space_args(p)
    _add_class_args(p, simplex=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--p", type=_parse_p, required=True)
    p.add_argument("--mode", choices=("exact", "mc"), default="mc")
    p.add_argument("--budget", type=int, default=2_000_000)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--workers", type=int, default=1)
    _add_out(p)
    p.set_defaults(func=_cmd_obstruct_chain)

    zs = sub.add_parser("zspace", help="disjoint block unions"
                        ).add_subparsers(dest="sub", required=True)
    p = zs.add_parser("validate", help="triangle audit of a zeta variant")
    p.add_argument("--variant", choices=("literal", "corrected"),
                   required=True)
    p.add_argument("--block-bound", type=int, default=8)
    p.add_argument("--all", action="store_true",
                   help="report every violation, not just the first")
    _add_out(p)
    p.set_defaults(func=_cmd_zspace_validate)
    p = zs.add_parser("ball", help="ball census around a point")
    p.add_argument("--block", type=int, required=True)
    p.add_argument("--center", help="ZPoint JSON file (default: zero point)")
    p.add_argument("--radius", required=True, help="rational radius")
    p.add_argument("--variant", choices=("literal", "corrected"),
                   default="corrected")
    p.add_argument("--block-bound", type=int, default=8)
    _add_out(p)
    p.set_defaults(func=_cmd_zspace_ball)

    inj = sub.add_parser("inject", help="Lipschitz injections"
                         ).add_subparsers(dest="sub", required=True)
    p = inj.add_parser("build", help="build an injection table")
    p.add_argument("--input", required=True)
    p.add_argument("--target", required=True,
                   help="ell0 | ellp:p | ballchain:intervals|cauchy|file.json")
    p.add_argument("--map-out", dest="map_out", default=None,
                   help="write the injection table JSON here")
    p.add_argument("--modulus", default=None,
                   help="identity | root:p (default inferred from target)")
    _add_out(p)
    p.set_defaults(func=_cmd_inject_build)
    p = inj.add_parser("verify", help="re-check an injection table")
    p.add_argument("--map", required=True)
    p.add_argument("--input", default=None,
                   help="space file overriding the embedded domain")
    p.add_argument("--modulus", default=None)
    _add_out(p)
    p.set_defaults(func=_cmd_inject_verify)

    cay = sub.add_parser("cayley", help="Cayley graph checks"
                         ).add_subparsers(dest="sub", required=True)
    p = cay.add_parser("verify", help="cyclic sup metric vs word metric")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("exhaustive", "sampled"),
                   default="exhaustive")
    p.add_argument("--variant", choices=("merged", "literal"),
                   default="merged")
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    _add_out(p)
    p.set_defaults(func=_cmd_cayley_verify)
    p = cay.add_parser("roundness", help="diagonal-configuration upper bound")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--jump", type=int, default=None)
    p.add_argument("--variant", choices=("merged", "literal"),
                   default="merged")
    p.add_argument("--standard-basis", action="store_true",
                   help="use the +-e_i generators instead of a jump family")
    p.add_argument("--g", required=True, help="comma-separated generator")
    p.add_argument("--h", required=True, help="comma-separated generator")
    p.add_argument("--cutoff", type=int, default=8)
    _add_out(p)
    p.set_defaults(func=_cmd_cayley_roundness)
    p = cay.add_parser("projection", help="block-projection consistency")
    p.add_argument("--dims", default="2,2")
    p.add_argument("--jumps", default="3,8")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--variant", choices=("literal", "merged"),
                   default="literal")
    _add_out(p)
    p.set_defaults(func=_cmd_cayley_projection)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
