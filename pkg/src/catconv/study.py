"""Operating characteristics, p-value concordance and timing of the tests.

Each study cell fixes a segment length ``t``, a DAR(1) dependence ``phi``
and a mixing weight ``beta``.  Replicates simulate one segment from
``DAR(1)(phi, p)`` and a second from ``DAR(1)(phi, beta*p + (1-beta)*q)``
and record the p-value of every requested method.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bootstrap import BootstrapConfig, NullModel
from .chain import SegmentSet
from .diagnose import evaluate
from .errors import CatconvError
from .simulate import Dar1Params, derive_stream, simulate_dar1
from .stats import Method

__all__ = [
    "PAPER_P",
    "PAPER_Q",
    "StudyGrid",
    "StudyResult",
    "run_study",
    "concordance",
    "concordance_rows",
    "run_bench",
]

log = logging.getLogger(__name__)

PAPER_P = (0.25, 0.3, 0.45)
PAPER_Q = (0.75, 0.05, 0.2)
ALL_METHODS = tuple(Method)


@dataclass(frozen=True)
class StudyGrid:
    """Study design.

    Cells are the Cartesian product of ``lengths``, ``phis`` and ``betas``
    unless ``cells`` lists ``(t, phi, beta)`` triples explicitly.
    """

    lengths: tuple = (10, 100, 1000, 10000)
    phis: tuple = (0.0, 0.25, 0.5, 0.75)
    betas: tuple = (0.0, 0.3, 0.5, 0.7, 0.8, 0.85, 0.9, 0.94, 0.96, 1.0)
    p: tuple = PAPER_P
    q: tuple = PAPER_Q
    replications: int = 1000
    alpha: float = 0.05
    methods: tuple = ALL_METHODS
    B: int = 1000
    seed: int = 0
    null_model: NullModel = NullModel.POOLED
    cells: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        object.__setattr__(self, "null_model", NullModel(self.null_model))
        for name in ("lengths", "phis", "betas", "methods"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        for name in ("p", "q"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if np.any(vec < 0) or abs(vec.sum() - 1) > 1e-12:
                raise ValueError(f"{name} must be a probability vector")
        if len(self.p) != len(self.q):
            raise ValueError("p and q must have the same length")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        if self.cells is not None:
            object.__setattr__(self, "cells", tuple((int(t), float(f), float(b)) for t, f, b in self.cells))

    def cell_list(self) -> list:
        if self.cells is not None:
            return list(self.cells)
        return [(int(t), float(f), float(b)) for t, f, b in itertools.product(self.lengths, self.phis, self.betas)]


@dataclass
class StudyResult:
    """Per-cell p-values, shape ``(replications, len(methods))``; NaN marks a failed replicate."""

    grid: StudyGrid
    cells: list
    pvalues: dict
    warnings: dict = field(default_factory=dict)

    def column(self, method) -> int:
        return self.grid.methods.index(Method(method))

    def rejection_rate(self, method, t, phi, beta) -> float:
        p = self.pvalues[(t, float(phi), float(beta))][:, self.column(method)]
        valid = p[~np.isnan(p)]
        return float(np.mean(valid < self.grid.alpha)) if valid.size else math.nan

    def rejection_rows(self) -> list:
        rows = []
        for cell in self.cells:
            t, phi, beta = cell
            for j, method in enumerate(self.grid.methods):
                p = self.pvalues[cell][:, j]
                valid = p[~np.isnan(p)]
                reject = float(np.mean(valid < self.grid.alpha)) if valid.size else math.nan
                rows.append(
                    {
                        "method": method.value,
                        "t": t,
                        "phi": phi,
                        "beta": beta,
                        "replications": p.size,
                        "valid": int(valid.size),
                        "reject": reject,
                        "not_reject": 1.0 - reject,
                    }
                )
        return rows

    def pvalue_rows(self) -> list:
        rows = []
        for cell in self.cells:
            t, phi, beta = cell
            for rep, values in enumerate(self.pvalues[cell]):
                for method, p in zip(self.grid.methods, values):
                    rows.append({"t": t, "phi": phi, "beta": beta, "replicate": rep, "method": method.value, "p": p})
        return rows

    def subset(self, cells) -> "StudyResult":
        cells = [(int(t), float(f), float(b)) for t, f, b in cells]
        return StudyResult(self.grid, cells, {c: self.pvalues[c] for c in cells}, {c: self.warnings.get(c, []) for c in cells})


def _mixture(grid: StudyGrid, beta: float) -> np.ndarray:
    mix = beta * np.asarray(grid.p) + (1 - beta) * np.asarray(grid.q)
    return mix / mix.sum()


def _replicate(grid: StudyGrid, cell, index: int):
    t, phi, beta = cell
    gen = derive_stream(grid.seed, index).generator()
    first = simulate_dar1(Dar1Params(np.asarray(grid.p, dtype=float), phi), t, gen)
    second = simulate_dar1(Dar1Params(_mixture(grid, beta), phi), t, gen)
    cfg = BootstrapConfig(B=grid.B, seed=int(gen.integers(2**63)), null_model=grid.null_model)
    segments = SegmentSet.from_codes([first, second], len(grid.p))
    out = np.full(len(grid.methods), np.nan)
    problems = []
    for j, method in enumerate(grid.methods):
        try:
            out[j] = evaluate(segments, method, cfg).p_value
        except CatconvError as exc:
            problems.append(f"replicate {index} {method}: {exc}")
    return out, problems


def _run_chunk(grid: StudyGrid, cell_index: int, cell, lo: int, hi: int):
    rows = np.empty((hi - lo, len(grid.methods)))
    problems = []
    for rep in range(lo, hi):
        rows[rep - lo], issues = _replicate(grid, cell, cell_index * grid.replications + rep)
        problems.extend(issues)
    return cell_index, lo, rows, problems


def run_study(grid: StudyGrid, workers: int = 1, chunk: int = 50) -> StudyResult:
    """Run every cell of the grid; identical output for any ``workers``."""
    cells = grid.cell_list()
    n = grid.replications
    pvalues = {cell: np.empty((n, len(grid.methods))) for cell in cells}
    warnings = {cell: [] for cell in cells}
    tasks = [(grid, ci, cell, lo, min(lo + chunk, n)) for ci, cell in enumerate(cells) for lo in range(0, n, chunk)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, *zip(*tasks)))
    else:
        results = [_run_chunk(*task) for task in tasks]
    for ci, lo, rows, problems in results:
        cell = cells[ci]
        pvalues[cell][lo:lo + rows.shape[0]] = rows
        warnings[cell].extend(problems)
    for cell, problems in warnings.items():
        if problems:
            log.warning("cell %s: %d failed evaluations", cell, len(problems))
    return StudyResult(grid, cells, pvalues, warnings)


def _correlations(pvalues: np.ndarray) -> np.ndarray:
    k = pvalues.shape[1]
    out = np.eye(k)
    for a, b in itertools.combinations(range(k), 2):
        x, y = pvalues[:, a], pvalues[:, b]
        ok = ~(np.isnan(x) | np.isnan(y))
        x, y = x[ok], y[ok]
        if x.size < 3 or np.std(x) == 0 or np.std(y) == 0:
            rho = math.nan
        else:
            rho = float(np.corrcoef(x, y)[0, 1])
        out[a, b] = out[b, a] = rho
    return out


def concordance(result: StudyResult) -> dict:
    """Pearson correlations of p-values between methods for every ``(t, phi)``.

    Cells sharing ``(t, phi)`` are pooled over ``beta``.  Returns
    ``{(t, phi): {family: (methods, matrix)}}`` with separate entries for
    the frequency and transition families.
    """
    if not result.pvalues:
        raise ValueError("study result holds no p-values")
    groups = {}
    for cell in result.cells:
        groups.setdefault(cell[:2], []).append(result.pvalues[cell])
    out = {}
    for key, blocks in groups.items():
        stacked = np.concatenate(blocks)
        families = {}
        for family in ("frequency", "transition"):
            methods = tuple(m for m in result.grid.methods if m.family == family)
            if not methods:
                continue
            cols = [result.column(m) for m in methods]
            families[family] = (methods, _correlations(stacked[:, cols]))
        out[key] = families
    return out


def concordance_rows(summary: dict) -> list:
    rows = []
    for (t, phi), families in summary.items():
        for family, (methods, matrix) in families.items():
            for a, b in itertools.combinations(range(len(methods)), 2):
                rows.append(
                    {"t": t, "phi": phi, "family": family, "method_a": methods[a].value,
                     "method_b": methods[b].value, "rho": matrix[a, b]}
                )
    return rows


def run_bench(
    chains=(2, 4, 6, 8, 10),
    categories=(2, 4, 6, 8, 10),
    lengths=(10, 100, 1000, 10000),
    repetitions: int = 100,
    methods=ALL_METHODS,
    B: int = 1000,
    phi: float = 0.5,
    seed: int = 0,
    clock=time.perf_counter,
) -> list:
    """Wall-clock time of each method on DAR(1) chains with a uniform marginal."""
    methods = tuple(Method(m) for m in methods)
    rows = []
    if repetitions < 1:
        return rows
    cfg = BootstrapConfig(B=B, seed=seed)
    index = 0
    for s, r, t in itertools.product(chains, categories, lengths):
        params = Dar1Params(np.full(r, 1.0 / r), phi)
        times = {m: [] for m in methods}
        for _ in range(repetitions):
            gen = derive_stream(seed, index).generator()
            index += 1
            segments = SegmentSet.from_codes([simulate_dar1(params, t, gen) for _ in range(s)], r)
            for m in methods:
                start = clock()
                try:
                    evaluate(segments, m, cfg)
                except CatconvError:
                    pass  # degenerate draws still cost time; keep the sample
                times[m].append(clock() - start)
        for m in methods:
            x = np.array(times[m])
            rows.append(
                {"method": m.value, "chains": s, "categories": r, "length": t, "reps": repetitions,
                 "median": float(np.median(x)), "mean": float(x.mean()), "min": float(x.min()), "max": float(x.max())}
            )
    return rows
