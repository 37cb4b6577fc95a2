"""Command-line interface: ``giph <command> [options]``.

Environment variables ``GIPH_WORKERS`` and ``GIPH_SEED`` supply defaults for
``--workers`` and ``--seed``; explicit flags take precedence.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import checks
from .dataset import GenSpec1D, GridFunction2D, atomic_write_text, generate_1d, generate_2d, load, save, write_pgm
from .groups import GroupSpec
from .metrics import GroupGrid, common_group, d_match_sup, natural_pseudo_distance, write_distance_csv
from .operators import builtin_set, load_manifest
from .retrieval import DiagramIndex, benchmark, build_index, format_hits, query, write_report


class UsageError(Exception):
    pass


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}")


def resolve_ops(selector: str):
    """A builtin group tag (G1..G5, ISO2) or a manifest path."""
    try:
        return builtin_set(GroupSpec.parse(selector))
    except ValueError:
        pass
    path = Path(selector)
    if not path.is_file():
        raise UsageError(f"--ops {selector!r} is neither a group tag nor a manifest file")
    return load_manifest(path)


def _existing(path: str) -> str:
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")
    return path


def _out_dir_ok(path: Optional[str]) -> None:
    if path is not None and not Path(path).resolve().parent.is_dir():
        raise UsageError(f"output directory does not exist: {Path(path).parent}")


def _grid(args, group) -> GroupGrid:
    group = GroupSpec.parse(group)
    if args.exact_grid:
        return GroupGrid.exact(group, c=args.grid_c)
    return GroupGrid(group, c=args.grid_c, levels=args.levels, top_k=args.top_k)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_gen1d(args) -> int:
    _out_dir_ok(args.out)
    fs = generate_1d(GenSpec1D(args.count, lipschitz_cap=args.cap, seed=args.seed))
    save(args.out, fs)
    return 0


def cmd_gen2d(args) -> int:
    _out_dir_ok(args.out)
    imgs = generate_2d(args.count, tuple(args.bumps), args.size, args.pad, seed=args.seed)
    save(args.out, imgs)
    if args.pgm_dir:
        Path(args.pgm_dir).mkdir(parents=True, exist_ok=True)
        for img in imgs:
            write_pgm(img, Path(args.pgm_dir) / f"{img.id}.pgm")
    return 0


def cmd_index(args) -> int:
    _out_dir_ok(args.out)
    data = load(_existing(args.data))
    ops = resolve_ops(args.ops)
    build_index(data, ops, args.resolution, args.workers).save(args.out)
    return 0


def cmd_query(args) -> int:
    _out_dir_ok(args.out)
    index = DiagramIndex.load(_existing(args.index))
    ops = resolve_ops(args.ops) if args.ops else None
    try:
        hits = query(index, args.id, args.k, ops)
    except KeyError as exc:
        raise UsageError(str(exc.args[0]))
    _emit(format_hits(hits), args.out)
    return 0


def cmd_bench(args) -> int:
    for p in (args.csv, args.summary):
        _out_dir_ok(p)
    group = GroupSpec.parse(args.group)
    if group is GroupSpec.ISO2:
        raise UsageError("bench needs a group of the line (G1..G5)")
    if args.data:
        data = load(_existing(args.data))[: args.count]
    else:
        data = generate_1d(GenSpec1D(args.count, lipschitz_cap=args.cap, seed=args.seed))
    ops = resolve_ops(args.ops or str(group))
    report = benchmark(
        data, group, ops, _grid(args, group), args.resolution, max_pairs=args.max_pairs, seed=args.seed, workers=args.workers
    )
    write_report(report, args.csv, args.summary)
    if not args.summary:
        print(json.dumps(report.summary(), indent=2, sort_keys=True))
    return 0


def cmd_check(args) -> int:
    results = checks.run_all(args.group, args.count, args.seed)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def cmd_dist(args) -> int:
    _out_dir_ok(args.out)
    data = {f.id: f for f in load(_existing(args.data))}
    for fid in (args.id1, args.id2):
        if fid not in data:
            raise UsageError(f"unknown id {fid!r}")
    f1, f2 = data[args.id1], data[args.id2]
    ops = resolve_ops(args.ops)
    res = d_match_sup(f1, f2, ops, args.resolution)
    dg = None
    if not isinstance(f1, GridFunction2D):
        group = GroupSpec.parse(args.group) if args.group else common_group(ops)
        dg = natural_pseudo_distance(f1, f2, _grid(args, group))
    rows = [(f1.id, f2.id, res.value, res.argmax, dg, args.resolution)]
    if args.out:
        write_distance_csv(args.out, rows)
    else:
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "dist.csv"
            write_distance_csv(path, rows)
            sys.stdout.write(path.read_text())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="giph", description="Compare functions up to a group action via persistence of operator outputs.")
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(sp):
        sp.add_argument("--seed", type=int, default=None, help="RNG seed (default $GIPH_SEED or 0)")

    def parallel(sp):
        sp.add_argument("--workers", type=int, default=None, help="worker processes (default $GIPH_WORKERS or 1)")

    def resolution(sp):
        sp.add_argument("--resolution", type=int, default=1024, help="nodes on the padded window")

    def grid(sp):
        sp.add_argument("--levels", type=int, default=3, help="coarse-to-fine levels of the group grid")
        sp.add_argument("--top-k", type=int, default=1, help="incumbents refined at each level")
        sp.add_argument("--exact-grid", action="store_true", help="flat grid with step 0.01 (slow)")
        sp.add_argument("--grid-c", type=float, default=50.0, help="slopes in [1/c, c], offsets in [-c, c]")

    sp = sub.add_parser("gen1d", help="generate random PL functions")
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--cap", type=float, default=5.0, help="Lipschitz cap")
    sp.add_argument("--out", required=True)
    seeded(sp)
    sp.set_defaults(func=cmd_gen1d)

    sp = sub.add_parser("gen2d", help="generate random bump images")
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--bumps", type=int, nargs=2, default=[3, 6], metavar=("MIN", "MAX"))
    sp.add_argument("--size", type=int, default=128)
    sp.add_argument("--pad", type=int, default=8)
    sp.add_argument("--pgm-dir", default=None, help="also write one PGM per image here")
    sp.add_argument("--out", required=True)
    seeded(sp)
    sp.set_defaults(func=cmd_gen2d)

    sp = sub.add_parser("index", help="precompute operator diagrams for a dataset")
    sp.add_argument("--data", required=True)
    sp.add_argument("--ops", required=True, help="group tag or operator manifest")
    sp.add_argument("--out", required=True)
    resolution(sp)
    parallel(sp)
    sp.set_defaults(func=cmd_index)

    sp = sub.add_parser("query", help="nearest neighbours of an indexed function")
    sp.add_argument("--index", required=True)
    sp.add_argument("--id", required=True)
    sp.add_argument("-k", type=int, default=10)
    sp.add_argument("--ops", default=None, help="verify the index was built with this operator set")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("bench", help="D^F_match against the grid bound for d_G on all pairs")
    sp.add_argument("--group", required=True)
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--cap", type=float, default=5.0)
    sp.add_argument("--data", default=None, help="use the first COUNT functions of this dataset")
    sp.add_argument("--ops", default=None, help="group tag or manifest (default: the group's builtin set)")
    sp.add_argument("--max-pairs", type=int, default=1_000_000)
    sp.add_argument("--csv", default=None, help="per-pair output")
    sp.add_argument("--summary", default=None, help="summary JSON (printed if omitted)")
    seeded(sp)
    parallel(sp)
    resolution(sp)
    grid(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("check", help="run property suites and worked examples")
    sp.add_argument("--group", default="G3")
    sp.add_argument("--count", type=int, default=20)
    seeded(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("dist", help="D^F_match and the d_G upper bound for one pair")
    sp.add_argument("--data", required=True)
    sp.add_argument("--id1", required=True)
    sp.add_argument("--id2", required=True)
    sp.add_argument("--ops", required=True)
    sp.add_argument("--group", default=None, help="group of the d_G grid (default: smallest operator group)")
    sp.add_argument("--out", default=None)
    resolution(sp)
    grid(sp)
    sp.set_defaults(func=cmd_dist)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _env_int("GIPH_SEED", 0)
        if hasattr(args, "workers") and args.workers is None:
            args.workers = _env_int("GIPH_WORKERS", 1)
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be >= 1")
        return args.func(args)
    except (UsageError, ValueError, KeyError, OSError) as exc:
        print(f"giph {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
