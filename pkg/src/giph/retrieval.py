"""Diagram indexes, nearest-neighbour queries and the error benchmark.

An index stores the degree-0 diagram of ``F(phi)`` for every function ``phi``
of a dataset and every operator ``F`` of a set; queries then only need
bottleneck distances. The benchmark compares the resulting lower bound with
the brute-force upper bound for the natural pseudo-distance on all pairs.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bottleneck import bottleneck_distance
from .dataset import atomic_write_text
from .groups import GroupSpec
from .metrics import GroupGrid, common_group, dmatch_from_diagrams, natural_pseudo_distance, operator_diagram
from .operators import Operator
from .persistence import PersistenceDiagram

MAX_PAIRS = 1_000_000


def manifest_hash(ops: Sequence[Operator]) -> str:
    """SHA-256 of the operator manifest (name, group, kind, params), in order."""
    records = []
    for op in ops:
        try:
            records.append(op.to_record())
        except TypeError:
            records.append({"name": op.name, "group": str(op.group), "kind": op.kind})
    return hashlib.sha256(json.dumps(records, sort_keys=True).encode()).hexdigest()


@dataclass
class DiagramIndex:
    group: str
    resolution: int
    manifest_hash: str
    operators: List[str]
    ids: List[str]
    diagrams: Dict[Tuple[str, str], PersistenceDiagram] = field(default_factory=dict, repr=False)

    def missing(self) -> List[Tuple[str, str]]:
        return [(i, o) for i in self.ids for o in self.operators if (i, o) not in self.diagrams]

    def check(self, ops: Optional[Sequence[Operator]] = None) -> None:
        """Raise unless the index is complete and, if given, built from ``ops``."""
        missing = self.missing()
        if missing:
            raise ValueError(f"index incomplete: {len(missing)} diagrams missing, e.g. {missing[0]}")
        if ops is not None and manifest_hash(ops) != self.manifest_hash:
            raise ValueError("operator set does not match the one the index was built with")

    def diagrams_of(self, fid: str) -> List[PersistenceDiagram]:
        return [self.diagrams[(fid, o)] for o in self.operators]

    def to_text(self) -> str:
        header = {
            "index": {
                "group": self.group,
                "resolution": self.resolution,
                "manifest_hash": self.manifest_hash,
                "operators": self.operators,
                "ids": self.ids,
            }
        }
        lines = [json.dumps(header)]
        for fid in self.ids:
            for op in self.operators:
                lines.append(self.diagrams[(fid, op)].to_json(fid, op))
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        atomic_write_text(path, self.to_text())

    @classmethod
    def load(cls, path) -> "DiagramIndex":
        with open(path) as fh:
            lines = [line for line in fh if line.strip()]
        if not lines:
            raise ValueError(f"{path}: empty index file")
        try:
            meta = json.loads(lines[0])["index"]
        except (ValueError, KeyError) as exc:
            raise ValueError(f"{path}:1: missing index header") from exc
        index = cls(meta["group"], int(meta["resolution"]), meta["manifest_hash"], list(meta["operators"]), list(meta["ids"]))
        for lineno, line in enumerate(lines[1:], 2):
            try:
                rec = json.loads(line)
                index.diagrams[(rec["id"], rec["operator"])] = PersistenceDiagram.from_record(rec)
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed diagram record: {exc}") from exc
        return index


def _diagrams_for(args):
    f, ops, resolution = args
    out = []
    for op in ops:
        try:
            out.append(operator_diagram(op, f, resolution))
        except Exception as exc:
            raise RuntimeError(f"failed on function {f.id!r}, operator {op.name!r}: {exc}") from exc
    return out


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def build_index(dataset: Sequence, ops: Sequence[Operator], resolution: int = 1024, workers: int = 1) -> DiagramIndex:
    """Diagram of every ``op(f)``; results do not depend on ``workers``."""
    if not dataset or not ops:
        raise ValueError("need a non-empty dataset and operator set")
    ids = [f.id for f in dataset]
    if any(i is None for i in ids) or len(set(ids)) != len(ids):
        raise ValueError("dataset functions need unique ids")
    names = [op.name for op in ops]
    if len(set(names)) != len(names):
        raise ValueError("operator names must be unique")
    index = DiagramIndex(str(common_group(ops)), resolution, manifest_hash(ops), names, ids)
    results = _map(_diagrams_for, [(f, list(ops), resolution) for f in dataset], workers)
    for fid, diags in zip(ids, results):
        for name, d in zip(names, diags):
            index.diagrams[(fid, name)] = d
    return index


@dataclass(frozen=True)
class QueryHit:
    rank: int
    id: str
    dmatch: float
    argmax_op: Optional[str]


def query(index: DiagramIndex, q, k: int = 10, ops: Optional[Sequence[Operator]] = None) -> List[QueryHit]:
    """The ``k`` indexed functions closest to ``q`` in ``D^F_match``.

    ``q`` is an indexed id, or a function (whose diagrams are computed with
    ``ops``, which must match the index). The query's own id is excluded and
    ties are broken by id.
    """
    index.check(ops)
    if isinstance(q, str):
        if (q, index.operators[0]) not in index.diagrams:
            raise KeyError(f"unknown query id {q!r}")
        qid, qd = q, index.diagrams_of(q)
    else:
        if ops is None:
            raise ValueError("external queries need the operator set")
        qid = getattr(q, "id", None)
        qd = [operator_diagram(op, q, index.resolution) for op in ops]
    scored = []
    for fid in index.ids:
        if fid == qid:
            continue
        r = dmatch_from_diagrams(qd, index.diagrams_of(fid), index.operators)
        scored.append((r.value, fid, r.argmax))
    scored.sort(key=lambda t: (t[0], t[1]))
    return [QueryHit(i + 1, fid, v, arg) for i, (v, fid, arg) in enumerate(scored[:k])]


def format_hits(hits: Sequence[QueryHit]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "id", "dmatch", "argmax_op"])
    for h in hits:
        w.writerow([h.rank, h.id, repr(h.dmatch), h.argmax_op])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# benchmark


@dataclass
class BenchmarkReport:
    group: str
    count: int
    pairs: int
    mean_dG: float
    mean_dmatch: float
    MAE: float
    MRE: Optional[float]
    mre_excluded: int
    false_positive_rate: Optional[float]
    fp_k: int
    violations: int
    tolerance: float
    resolution: int
    grid: dict
    rows: List[tuple] = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("rows")
        return d

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id1", "id2", "dmatch", "dG_upper"])
        for id1, id2, dm, dg in self.rows:
            w.writerow([id1, id2, repr(dm), repr(dg)])
        return buf.getvalue()


def select_pairs(n: int, max_pairs: int = MAX_PAIRS, seed: int = 0) -> np.ndarray:
    """All unordered pairs ``i < j``, or a seeded uniform sample of ``max_pairs`` of them."""
    total = n * (n - 1) // 2
    if total <= max_pairs:
        i, j = np.triu_indices(n, 1)
        return np.stack([i, j], axis=1)
    rng = np.random.default_rng(seed)
    flat = np.sort(rng.choice(total, size=max_pairs, replace=False))
    # invert the row-major enumeration of the strict upper triangle
    i = (n - 2 - np.floor(np.sqrt(-8 * flat + 4 * n * (n - 1) - 7) / 2 - 0.5)).astype(np.int64)
    j = (flat + i + 1 - n * (n - 1) // 2 + (n - i) * ((n - i) - 1) // 2).astype(np.int64)
    return np.stack([i, j], axis=1)


def _dG_chunk(args):
    functions, pairs, grid = args
    return [natural_pseudo_distance(functions[i], functions[j], grid) for i, j in pairs]


def _false_positive_rate(n: int, pairs: np.ndarray, D: np.ndarray, dG: np.ndarray, k: int) -> Optional[float]:
    """Mean fraction of each query's top-``k`` by ``D`` whose ``d_G`` exceeds the ``k``-th smallest ``d_G``."""
    if len(pairs) != n * (n - 1) // 2 or n <= k:
        return None
    Dm = np.full((n, n), np.inf)
    Gm = np.full((n, n), np.inf)
    Dm[pairs[:, 0], pairs[:, 1]] = Dm[pairs[:, 1], pairs[:, 0]] = D
    Gm[pairs[:, 0], pairs[:, 1]] = Gm[pairs[:, 1], pairs[:, 0]] = dG
    rates = []
    for q in range(n):
        top = np.lexsort((np.arange(n), Dm[q]))[:k]
        threshold = np.sort(Gm[q])[k - 1]
        rates.append(np.mean(Gm[q, top] > threshold))
    return float(np.mean(rates))


def benchmark(
    functions: Sequence,
    group,
    ops: Sequence[Operator],
    grid: Optional[GroupGrid] = None,
    resolution: int = 1024,
    tolerance: Optional[float] = None,
    max_pairs: int = MAX_PAIRS,
    seed: int = 0,
    workers: int = 1,
    fp_k: int = 5,
) -> BenchmarkReport:
    """All-pairs ``D^F_match`` against the grid upper bound for ``d_G``.

    MAE is the mean of ``|d_G - D|``; MRE averages ``|d_G - D| / d_G`` over
    pairs with ``d_G > 0`` (the others are counted in ``mre_excluded``).
    Pairs with ``D > d_G + tolerance`` are counted as violations.
    """
    from .metrics import diagram_tolerance

    if len(functions) < 2:
        raise ValueError("need at least two functions")
    group = GroupSpec.parse(group)
    grid = grid or GroupGrid(group)
    tolerance = diagram_tolerance(resolution) if tolerance is None else tolerance
    index = build_index(functions, ops, resolution, workers)
    pairs = select_pairs(len(functions), max_pairs, seed)

    diags = [index.diagrams_of(f.id) for f in functions]
    D = np.empty(len(pairs))
    for k, (i, j) in enumerate(pairs):
        best = 0.0
        for a, b in zip(diags[i], diags[j]):
            best = max(best, bottleneck_distance(a, b))
        D[k] = best

    chunks = np.array_split(pairs, max(1, min(len(pairs), 16 * max(1, workers))))
    parts = _map(_dG_chunk, [(list(functions), c, grid) for c in chunks if len(c)], workers)
    dG = np.array([v for part in parts for v in part])

    err = dG - D
    positive = dG > 0
    ids = [f.id for f in functions]
    rows = [(ids[i], ids[j], float(d), float(g)) for (i, j), d, g in zip(pairs, D, dG)]
    grid_info = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(grid).items() if k not in ("a_values", "b_values")}
    grid_info["group"] = str(grid.group)
    grid_info["flat"] = grid.is_flat
    return BenchmarkReport(
        group=str(group),
        count=len(functions),
        pairs=len(pairs),
        mean_dG=float(dG.mean()),
        mean_dmatch=float(D.mean()),
        MAE=float(np.abs(err).mean()),
        MRE=float(np.mean(np.abs(err[positive]) / dG[positive])) if positive.any() else None,
        mre_excluded=int((~positive).sum()),
        false_positive_rate=_false_positive_rate(len(functions), pairs, D, dG, fp_k),
        fp_k=fp_k,
        violations=int(np.sum(D > dG + tolerance)),
        tolerance=tolerance,
        resolution=resolution,
        grid=grid_info,
        rows=rows,
    )


def write_report(report: BenchmarkReport, csv_path=None, summary_path=None) -> None:
    if csv_path is not None:
        atomic_write_text(csv_path, report.csv_text())
    if summary_path is not None:
        atomic_write_text(summary_path, json.dumps(report.summary(), indent=2, sort_keys=True) + "\n")
