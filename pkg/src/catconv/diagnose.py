"""Between-chain, within-chain and sequential evaluation of the six tests."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

from .bootstrap import BootstrapConfig, billingsley_boot_test, darboot_test, mcboot_test
from .chain import SegmentSet, frequency_table, split_within, transition_table
from .errors import DataError
from .stats import Method, TestOutcome, billingsley_test, hangartner_test, weiss_test

__all__ = [
    "Mode",
    "DiagnosticRequest",
    "Evaluation",
    "DiagnosticReport",
    "evaluate",
    "checkpoint_grid",
    "run_between",
    "run_within",
    "run_sequential",
    "run",
]

log = logging.getLogger(__name__)

MIN_PREFIX = 50
SHORT_PREFIX = 100
DEFAULT_CHECKPOINTS = 20


class Mode(str, enum.Enum):
    BETWEEN = "between"
    WITHIN = "within"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DiagnosticRequest:
    """What to run.

    ``checkpoints`` is ``None`` for a single evaluation, an integer ``K`` for
    ``K`` evenly spaced cumulative prefixes, or an explicit list of prefix
    lengths.
    """

    method: Method = Method.WEISS
    mode: Mode = Mode.BETWEEN
    window_fraction: float = 0.30
    checkpoints: int | tuple | None = None
    alpha: float = 0.05
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "mode", Mode(self.mode))
        if not 0 < self.window_fraction < 0.5:
            raise ValueError(f"window fraction must lie in (0, 0.5), got {self.window_fraction}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        cp = self.checkpoints
        if cp is not None and not isinstance(cp, int):
            cp = tuple(int(c) for c in cp)
            if not cp or any(c < 1 for c in cp):
                raise ValueError("explicit checkpoints must be positive iterations")
            object.__setattr__(self, "checkpoints", cp)
        elif isinstance(cp, int) and cp < 1:
            raise ValueError("checkpoint count must be at least 1")


@dataclass(frozen=True)
class Evaluation:
    """One test result plus where it came from.

    ``unit`` names the chain (within mode) or ``"all"`` (between mode);
    ``checkpoint`` is the prefix length for sequential runs.
    """

    unit: str
    outcome: TestOutcome
    checkpoint: int | None = None


@dataclass(frozen=True)
class DiagnosticReport:
    request: DiagnosticRequest
    evaluations: tuple
    warnings: tuple = ()

    def rejections(self) -> list:
        return [e.outcome.rejects(self.request.alpha) for e in self.evaluations]


def evaluate(segments: SegmentSet, method: Method, cfg: BootstrapConfig) -> TestOutcome:
    """Apply one of the six tests to a segment set."""
    if segments.s < 2:
        raise DataError("homogeneity test needs at least 2 segments")
    method = Method(method)
    if method is Method.HANGARTNER:
        return hangartner_test(frequency_table(segments))
    if method is Method.WEISS:
        return weiss_test(segments)
    if method is Method.BILLINGSLEY:
        return billingsley_test(transition_table(segments))
    if method is Method.DARBOOT:
        return darboot_test(segments, cfg)
    if method is Method.MCBOOT:
        return mcboot_test(segments, cfg)
    return billingsley_boot_test(segments, cfg)


def run_between(chains: SegmentSet, req: DiagnosticRequest) -> DiagnosticReport:
    if chains.s < 2:
        raise DataError("between mode needs >= 2 chains")
    outcome = evaluate(chains, req.method, req.bootstrap)
    return DiagnosticReport(req, (Evaluation("all", outcome),))


def run_within(chains: SegmentSet, req: DiagnosticRequest) -> DiagnosticReport:
    """Compare head and tail windows of every chain separately."""
    evaluations = []
    for name, chain in zip(chains.unit_names(), chains.segments):
        try:
            windows = split_within(chain, req.window_fraction, chains.alphabet)
        except DataError as exc:
            raise DataError(f"chain {name}: {exc}") from None
        evaluations.append(Evaluation(name, evaluate(windows, req.method, req.bootstrap)))
    return DiagnosticReport(req, tuple(evaluations))


def checkpoint_grid(length: int, k: int) -> list:
    """``k`` evenly spaced prefix lengths ending at ``length``."""
    return [(i * length) // k for i in range(1, k + 1)]


def run_sequential(chains: SegmentSet, req: DiagnosticRequest) -> DiagnosticReport:
    """Between-chain test on growing cumulative prefixes of all chains."""
    if chains.s < 2:
        raise DataError("between mode needs >= 2 chains")
    length = min(chains.lengths)
    cp = req.checkpoints if req.checkpoints is not None else DEFAULT_CHECKPOINTS
    grid = checkpoint_grid(length, cp) if isinstance(cp, int) else sorted(set(cp))
    if grid[-1] > length:
        raise DataError(f"checkpoint {grid[-1]} exceeds chain length {length}")
    warnings = []
    evaluations = []
    for t in grid:
        if t < MIN_PREFIX:
            warnings.append(f"skipped-checkpoint-{t}")
            log.warning("skipping checkpoint %d: prefix shorter than %d", t, MIN_PREFIX)
            continue
        if t <= SHORT_PREFIX:
            warnings.append(f"short-prefix-{t}")
        outcome = evaluate(chains.prefix(t), req.method, req.bootstrap)
        evaluations.append(Evaluation("all", outcome, t))
    return DiagnosticReport(req, tuple(evaluations), tuple(warnings))


def run(chains: SegmentSet, req: DiagnosticRequest) -> DiagnosticReport:
    """Dispatch on mode and checkpoints."""
    if req.checkpoints is not None:
        if req.mode is not Mode.BETWEEN:
            raise ValueError("sequential evaluation is only defined for between mode")
        return run_sequential(chains, req)
    if req.mode is Mode.WITHIN:
        return run_within(chains, req)
    return run_between(chains, req)
