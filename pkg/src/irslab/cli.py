"""Command-line entry point: one subcommand, one output document."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import bs_space, chabauty_rn, chain_gluing, free_group_subgroups as fg, gh_metric
from .errors import CapacityError, DomainError
from .rooted_graphs import RootedGraph, cheeger_constant

DEFAULT_SEED = 20240601
EXIT_INPUT = 2
EXIT_CAPACITY = 3


class InputError(Exception):
    pass


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _fraction_fields(x: Fraction) -> dict:
    return {"value": float(x), "fraction": f"{x.numerator}/{x.denominator}"}


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _record_csv(doc: dict) -> str:
    keys = [k for k in sorted(doc) if not isinstance(doc[k], (list, dict))]
    return _csv(keys, [[doc[k] for k in keys]])


def _load_perms(path: str):
    data = _load_json(path)
    if not isinstance(data, dict) or "perms" not in data:
        raise InputError(f"{path}: expected an object with a 'perms' list")
    perms = []
    for p in data["perms"]:
        if isinstance(p, str):
            if "degree" not in data:
                raise InputError("cycle notation needs a 'degree' field")
            perms.append(fg.parse_cycles(p, int(data["degree"])))
        else:
            perms.append([int(x) for x in p])
    return fg.schreier_from_permutations(perms, int(data.get("root", 0)))


# ---------------------------------------------------------------- commands


def cmd_chabauty_dist(args):
    a = chabauty_rn.ClosedSubgroupRn.from_dict(_load_json(args.a))
    b = chabauty_rn.ClosedSubgroupRn.from_dict(_load_json(args.b))
    quad = chabauty_rn.Quadrature(args.r_cut, args.step, args.net_step)
    d = chabauty_rn.chabauty_distance(a, b, quad)
    return {
        "rho": d.value,
        "error_bound": d.error_bound,
        "quadrature_error": d.quadrature_error,
        "net_error": d.net_error,
        "tail_bound": d.tail,
    }, None


def _core_doc(core: fg.CoreGraph) -> dict:
    doc = core.to_dict()
    doc["vertices"] = core.vertex_count
    doc["free_basis"] = [fg.format_word(w) for w in core.free_basis()]
    return doc


def cmd_fold(args):
    core = fg.stallings_core(fg.parse_generators(args.gens, args.rank), args.rank)
    return _core_doc(core), None


def cmd_member(args):
    if args.core:
        core = fg.CoreGraph.from_dict(_load_json(args.core))
    else:
        if args.gens is None or args.rank is None:
            raise InputError("member needs --core or both --rank and --gens")
        core = fg.stallings_core(fg.parse_generators(args.gens, args.rank), args.rank)
    word = fg.parse_word(args.word, core.rank)
    return {"word": fg.format_word(word), "member": fg.contains(core, word)}, None


def cmd_schreier(args):
    sch = _load_perms(args.perms)
    doc = sch.to_dict()
    gens = sch.free_basis()
    doc["stabilizer_generators"] = [fg.format_word(w) for w in gens]
    core = fg.stallings_core(gens, sch.rank)
    doc["stabilizer_core_vertices"] = core.vertex_count
    doc["stabilizer_core_complete"] = core.is_complete()
    return doc, None


def _stats_output(stats: bs_space.LocalStatistics, extra=None):
    doc = stats.to_dict()
    doc.update(extra or {})
    return doc, stats.to_csv()


def cmd_ball_stats(args):
    g = RootedGraph.from_dict(_load_json(args.graph))
    sampling = "exhaustive" if args.samples is None else bs_space.MonteCarlo(args.samples, args.seed)
    return _stats_output(bs_space.local_statistics(g, args.r_max, sampling))


def cmd_bs_dist(args):
    a = bs_space.LocalStatistics.from_dict(_load_json(args.a))
    b = bs_space.LocalStatistics.from_dict(_load_json(args.b))
    d = bs_space.bs_distance(a, b)
    tv = [bs_space.tv_distance(a, b, r) for r in range(1, a.radius + 1)]
    doc = {"value": d.value, "tail_bound": d.tail_bound, "tv": tv}
    return doc, _csv(["r", "value"], [[r, v] for r, v in enumerate(tv, 1)])


def cmd_mtp_check(args):
    g = RootedGraph.from_dict(_load_json(args.graph))
    weights = None
    if args.weights:
        weights = _load_json(args.weights)
        if not isinstance(weights, list):
            raise InputError("root weights file must hold a JSON list")
    rep = bs_space.mtp_defect(g, args.radius, weights)
    return {"radius": rep.radius, "defect": rep.defect, "witness": rep.witness}, None


def _spaces(args):
    x = gh_metric.FiniteMetricSpace.from_dict(_load_json(args.x))
    y = gh_metric.FiniteMetricSpace.from_dict(_load_json(args.y))
    return x, y


def cmd_gh_dist(args):
    x, y = _spaces(args)
    if args.pointed:
        if args.mode == "bound":
            b = gh_metric.pointed_gh_bounds(x, y)
            return {"lower": b.lower, "upper": b.upper}, None
        return {"value": gh_metric.pointed_gh_distance(x, y)}, None
    res = gh_metric.gh_distance(x, y, args.mode)
    if args.mode == "bound":
        return {"lower": res.lower, "upper": res.upper}, None
    return {"value": res}, None


def cmd_ghd_series(args):
    x, y = _spaces(args)
    s = gh_metric.ghd_series(x, y, args.n_max)
    doc = {
        "value": s.value,
        "lower": s.lower,
        "tail_bound": s.tail_bound,
        "exact": s.exact,
        "terms": [[t.lower, t.upper] for t in s.terms],
    }
    rows = [[n, t.lower, t.upper] for n, t in enumerate(s.terms, 1)]
    return doc, _csv(["n", "lower", "upper"], rows)


def cmd_glue_stats(args):
    bound = chain_gluing.window_consistency_bound(args.window, block=args.root_block)
    if args.r_max >= bound and not args.allow_boundary:
        raise DomainError(
            f"r_max {args.r_max} reaches the window boundary (bound {bound}); "
            "pass --allow-boundary to override"
        )
    stats, meta = chain_gluing.chain_statistics(
        args.p, args.window, args.r_max, args.samples, args.seed, args.root_block, return_samples=True
    )
    freq = sum(m.origin_label == "A" for m in meta) / len(meta)
    return _stats_output(stats, {"origin_a_frequency": freq, "boundary_bound": bound})


def cmd_cheeger(args):
    g = RootedGraph.from_dict(_load_json(args.graph))
    res = cheeger_constant(g, args.mode)
    doc = _fraction_fields(res.value)
    doc.update(is_bound=res.is_bound, witness=sorted(res.witness))
    return doc, None


def cmd_thick(args):
    if args.graph:
        target = RootedGraph.from_dict(_load_json(args.graph))
    else:
        target = chain_gluing.sample_chain(args.seed, args.window, args.p)
    frac = chain_gluing.thick_fraction(target, args.radius, args.threshold)
    doc = _fraction_fields(frac)
    doc.update(radius=args.radius, threshold=args.threshold)
    return doc, None


def cmd_short_rel(args):
    sch = _load_perms(args.perms)
    doc = _fraction_fields(fg.short_relation_probability(sch, args.length))
    doc["length"] = args.length
    return doc, None


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="irslab", description="Invariant random subgroup experiments.")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        return p

    p = add("chabauty-dist", cmd_chabauty_dist, "Chabauty distance of closed subgroups of R^n")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--r-cut", type=float, default=12.0)
    p.add_argument("--step", type=float, default=1.0 / 64)
    p.add_argument("--net-step", type=float, default=0.25)

    p = add("fold", cmd_fold, "Stallings core graph of a subgroup of F_k")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--gens", required=True)

    p = add("member", cmd_member, "subgroup membership of a word")
    p.add_argument("--rank", type=int)
    p.add_argument("--gens")
    p.add_argument("--core")
    p.add_argument("--word", required=True)

    p = add("schreier", cmd_schreier, "Schreier graph and stabilizer of a permutation action")
    p.add_argument("--perms", required=True)

    p = add("ball-stats", cmd_ball_stats, "ball statistics of a rooted graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--r-max", type=int, default=3)
    p.add_argument("--samples", type=int)

    p = add("bs-dist", cmd_bs_dist, "distance between two ball statistics")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)

    p = add("mtp-check", cmd_mtp_check, "mass-transport defect of a rooted graph law")
    p.add_argument("--graph", required=True)
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--weights")

    p = add("gh-dist", cmd_gh_dist, "Gromov-Hausdorff distance of finite metric spaces")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--mode", choices=("exact", "bound"), default="exact")
    p.add_argument("--pointed", action="store_true")

    p = add("ghd-series", cmd_ghd_series, "truncated pointed GH series over integer balls")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--n-max", type=int, default=4)

    p = add("glue-stats", cmd_glue_stats, "ball statistics of the random glued chain")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--window", type=int, default=12)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--r-max", type=int, default=3)
    p.add_argument("--root-block", type=int, default=0)
    p.add_argument("--allow-boundary", action="store_true")

    p = add("cheeger", cmd_cheeger, "Cheeger constant of a finite graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--mode", choices=("exact", "bound"), default="exact")

    p = add("thick", cmd_thick, "thick fraction of a graph or a sampled chain")
    p.add_argument("--graph")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--window", type=int, default=12)
    p.add_argument("--radius", type=float, default=3.0)
    p.add_argument("--threshold", type=float, default=1.0)

    p = add("short-rel", cmd_short_rel, "probability of a short relation at a uniform vertex")
    p.add_argument("--perms", required=True)
    p.add_argument("--length", type=int, default=4)
    return ap


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        doc, csv_text = args.func(args)
    except CapacityError as exc:
        return _fail(EXIT_CAPACITY, "capacity", str(exc))
    except (InputError, DomainError) as exc:
        return _fail(EXIT_INPUT, "input", str(exc))
    except (KeyError, TypeError, ValueError) as exc:
        return _fail(EXIT_INPUT, "input", f"malformed input: {exc}")
    if args.format == "csv":
        sys.stdout.write(csv_text if csv_text is not None else _record_csv(doc))
    else:
        sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
