"""Parametric bootstrap versions of the homogeneity tests.

Replicate ``b`` draws all of its uniforms from ``derive_stream(seed, b)``,
segment by segment in input order, so each replicate statistic depends only
on ``(data, config, b)``.  Replicates are processed in chunks that may run
on worker threads; chunk boundaries never change any value.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chain import SegmentSet, frequency_table, transition_table
from .simulate import _cdf, dar1_paths, derive_stream, markov_paths
from .stats import (
    DEGENERATE_SUPPORT,
    Method,
    TestOutcome,
    billingsley_batch,
    estimate_dar1,
    pearson_batch,
)
from .errors import DataError

__all__ = [
    "NullModel",
    "BootstrapConfig",
    "BootstrapOutcome",
    "bootstrap_pvalue",
    "darboot",
    "mcboot",
    "billingsley_boot",
    "darboot_test",
    "mcboot_test",
    "billingsley_boot_test",
]

NEGATIVE_PHI = "negative-phi-simulated-as-zero"
_CHUNK = 100


class NullModel(str, enum.Enum):
    AS_ESTIMATED = "as-estimated"
    POOLED = "pooled"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class BootstrapConfig:
    """Bootstrap settings.

    ``null_model`` chooses whether replicates are simulated from each
    segment's own fitted parameters or from parameters pooled over all
    segments.  ``parallelism`` is a worker-count hint and never affects
    results.
    """

    B: int = 1000
    seed: int = 0
    parallelism: int = field(default=1, compare=False)
    null_model: NullModel = NullModel.POOLED

    def __post_init__(self):
        object.__setattr__(self, "null_model", NullModel(self.null_model))
        if self.B < 1:
            raise ValueError("B must be at least 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")


@dataclass(frozen=True, eq=False)
class BootstrapOutcome:
    observed_statistic: float
    replicate_statistics: np.ndarray
    p_value: float
    warnings: tuple = ()


def bootstrap_pvalue(observed: float, replicates) -> float:
    """Share of replicate statistics at least as large as the observed one."""
    replicates = np.asarray(replicates, dtype=float)
    if replicates.size == 0:
        raise ValueError("no replicate statistics")
    return np.count_nonzero(replicates >= observed) / replicates.size


def _chunks(cfg: BootstrapConfig):
    size = min(_CHUNK, -(-cfg.B // cfg.parallelism))
    return [range(lo, min(lo + size, cfg.B)) for lo in range(0, cfg.B, size)]


def _run(cfg: BootstrapConfig, fn) -> np.ndarray:
    chunks = _chunks(cfg)
    if cfg.parallelism == 1 or len(chunks) == 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            parts = list(pool.map(fn, chunks))
    return np.concatenate(parts)


def _uniforms(seed: int, indices: range, shapes: list) -> list:
    """Per-segment uniform blocks ``(len(indices), *shape)`` in replicate order."""
    blocks = [np.empty((len(indices),) + shape) for shape in shapes]
    for row, b in enumerate(indices):
        gen = derive_stream(seed, b).generator()
        for block, shape in zip(blocks, shapes):
            block[row] = gen.random(shape)
    return blocks


def _category_counts(paths: np.ndarray, r: int) -> np.ndarray:
    m = paths.shape[0]
    flat = paths + r * np.arange(m)[:, None]
    return np.bincount(flat.ravel(), minlength=m * r).reshape(m, r)


def _pair_counts(paths: np.ndarray, r: int) -> np.ndarray:
    m = paths.shape[0]
    pairs = paths[:, :-1] * r + paths[:, 1:] + (r * r) * np.arange(m)[:, None]
    return np.bincount(pairs.ravel(), minlength=m * r * r).reshape(m, r, r)


def _finish(observed, reps, warnings) -> BootstrapOutcome:
    return BootstrapOutcome(observed, reps, bootstrap_pvalue(observed, reps), tuple(warnings))


def _constant_replicates(observed, cfg, warnings) -> BootstrapOutcome:
    # a single pooled category makes every simulated chain constant, so all
    # replicate statistics are exactly zero
    return _finish(observed, np.zeros(cfg.B), warnings)


def _require_two(segments: SegmentSet):
    if segments.s < 2:
        raise DataError("homogeneity test needs at least 2 segments")


def darboot(segments: SegmentSet, cfg: BootstrapConfig = BootstrapConfig()) -> BootstrapOutcome:
    """DAR(1) parametric bootstrap of the Pearson statistic."""
    _require_two(segments)
    freq = frequency_table(segments)
    observed = float(pearson_batch(freq.counts[None])[0])
    if len(freq.support) == 1:
        return _constant_replicates(observed, cfg, (DEGENERATE_SUPPORT,))
    fit = estimate_dar1(segments)
    warnings = list(fit.warnings)
    phi = fit.phi_hat
    if phi < 0:
        phi = 0.0
        warnings.append(NEGATIVE_PHI)
    if cfg.null_model is NullModel.POOLED:
        cdfs = [_cdf(fit.pooled)] * segments.s
    else:
        cdfs = [_cdf(row) for row in fit.proportions]
    lengths = segments.lengths
    r = segments.r

    def chunk(indices):
        blocks = _uniforms(cfg.seed, indices, [(2, n) for n in lengths])
        counts = np.stack(
            [_category_counts(dar1_paths(u[:, 0], u[:, 1], cdf, phi), r) for u, cdf in zip(blocks, cdfs)],
            axis=1,
        )
        return pearson_batch(counts)

    return _finish(observed, _run(cfg, chunk), warnings)


def _markov_inputs(segments: SegmentSet, cfg: BootstrapConfig):
    """Per-segment (initial CDF, transition CDF); unvisited rows become self-loops."""
    r = segments.r
    freq = frequency_table(segments)
    trans = transition_table(segments)
    if cfg.null_model is NullModel.POOLED:
        counts = [trans.pooled_counts] * segments.s
        initials = [freq.pooled_proportions] * segments.s
    else:
        counts = list(trans.counts)
        initials = list(freq.proportions)
    out = []
    for c, init in zip(counts, initials):
        tot = c.sum(axis=1, keepdims=True)
        matrix = np.where(tot > 0, c / np.where(tot > 0, tot, 1), np.eye(r))
        out.append((_cdf(init), _cdf(matrix)))
    return out


def _markov_replicates(segments: SegmentSet, cfg: BootstrapConfig, statistic) -> np.ndarray:
    params = _markov_inputs(segments, cfg)
    lengths = segments.lengths
    r = segments.r
    s = segments.s
    shared = cfg.null_model is NullModel.POOLED
    groups = {}
    for i, n in enumerate(lengths):
        groups.setdefault(n, []).append(i)

    def chunk(indices):
        m = len(indices)
        blocks = _uniforms(cfg.seed, indices, [(n,) for n in lengths])
        out = [None] * s
        # segments of equal length share one time loop
        for n, members in groups.items():
            u = np.concatenate([blocks[i] for i in members])
            if shared:
                init, trans = params[0]
            else:
                init = np.concatenate([np.broadcast_to(params[i][0], (m, r)) for i in members])
                trans = np.concatenate([np.broadcast_to(params[i][1], (m, r, r)) for i in members])
            paths = markov_paths(u, init, trans)
            for k, i in enumerate(members):
                out[i] = paths[k * m:(k + 1) * m]
        return statistic(out, r)

    return _run(cfg, chunk)


def _pearson_of_paths(paths, r):
    return pearson_batch(np.stack([_category_counts(p, r) for p in paths], axis=1))


def _billingsley_of_paths(paths, r):
    return billingsley_batch(np.stack([_pair_counts(p, r) for p in paths], axis=1))


def mcboot(segments: SegmentSet, cfg: BootstrapConfig = BootstrapConfig()) -> BootstrapOutcome:
    """First-order Markov bootstrap of the Pearson statistic."""
    _require_two(segments)
    freq = frequency_table(segments)
    observed = float(pearson_batch(freq.counts[None])[0])
    warnings = (DEGENERATE_SUPPORT,) if len(freq.support) == 1 else ()
    return _finish(observed, _markov_replicates(segments, cfg, _pearson_of_paths), warnings)


def billingsley_boot(segments: SegmentSet, cfg: BootstrapConfig = BootstrapConfig()) -> BootstrapOutcome:
    """First-order Markov bootstrap of the transition-matrix statistic."""
    _require_two(segments)
    trans = transition_table(segments)
    observed = float(billingsley_batch(trans.counts[None])[0])
    return _finish(observed, _markov_replicates(segments, cfg, _billingsley_of_paths), ())


def _as_test(method, outcome: BootstrapOutcome, cfg) -> TestOutcome:
    return TestOutcome(
        method,
        outcome.observed_statistic,
        outcome.p_value,
        replicates=cfg.B,
        warnings=outcome.warnings,
    )


def darboot_test(segments: SegmentSet, cfg: BootstrapConfig = BootstrapConfig()) -> TestOutcome:
    return _as_test(Method.DARBOOT, darboot(segments, cfg), cfg)


def mcboot_test(segments: SegmentSet, cfg: BootstrapConfig = BootstrapConfig()) -> TestOutcome:
    return _as_test(Method.MCBOOT, mcboot(segments, cfg), cfg)


def billingsley_boot_test(segments: SegmentSet, cfg: BootstrapConfig = BootstrapConfig()) -> TestOutcome:
    return _as_test(Method.BILLINGSLEYBOOT, billingsley_boot(segments, cfg), cfg)
