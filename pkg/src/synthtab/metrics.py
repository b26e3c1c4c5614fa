"""Tablature precision / recall / F1 over frame label matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, ShapeError
from .labels import FrameLabelMatrix
from .tablature import N_STRINGS


@dataclass(frozen=True)
class MetricReport:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    per_string: tuple = ()

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, per_string=()) -> "MetricReport":
        """Scores from counts.  A zero denominator gives 0, except that an
        all-empty comparison (no predictions, no truth) scores 1 everywhere."""
        tp, fp, fn = int(tp), int(fp), int(fn)
        if tp + fp + fn == 0:
            return cls(1.0, 1.0, 1.0, 0, 0, 0, tuple(per_string))
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f, tp, fp, fn, tuple(per_string))

    def to_dict(self) -> dict:
        d = {"precision": self.precision, "recall": self.recall, "f1": self.f1,
             "tp": self.tp, "fp": self.fp, "fn": self.fn}
        if self.per_string:
            d["per_string"] = [s.to_dict() for s in self.per_string]
        return d


def _as_array(m):
    if isinstance(m, FrameLabelMatrix):
        return m.active, m.hop_s
    return np.asarray(m, dtype=bool), None


def tab_f1(pred, truth) -> MetricReport:
    """Micro-averaged scores over every (frame, string, fret) bin."""
    p, p_hop = _as_array(pred)
    t, t_hop = _as_array(truth)
    if p.shape != t.shape:
        raise ShapeError(f"prediction {p.shape} vs truth {t.shape}")
    if p_hop is not None and t_hop is not None and p_hop != t_hop:
        raise ShapeError(f"hop {p_hop} vs {t_hop}")
    if p.ndim != 3 or p.shape[1] != N_STRINGS:
        raise ShapeError(f"expected (frames, {N_STRINGS}, frets), got {p.shape}")
    tp = np.sum(p & t, axis=(0, 2))
    fp = np.sum(p & ~t, axis=(0, 2))
    fn = np.sum(~p & t, axis=(0, 2))
    strings = tuple(MetricReport.from_counts(a, b, c) for a, b, c in zip(tp, fp, fn))
    return MetricReport.from_counts(tp.sum(), fp.sum(), fn.sum(), strings)


def aggregate(reports, mode: str = "micro") -> MetricReport:
    """Combine per-track reports.

    ``micro`` sums counts and recomputes scores; ``macro`` averages the
    scores (counts are still summed, so they no longer determine P/R/F1).
    """
    reports = list(reports)
    if not reports:
        raise EmptyInputError("no reports to aggregate")
    if mode not in ("micro", "macro"):
        raise ValueError(f"unknown aggregation mode {mode!r}")
    tp = sum(r.tp for r in reports)
    fp = sum(r.fp for r in reports)
    fn = sum(r.fn for r in reports)
    per_string = ()
    if all(len(r.per_string) == N_STRINGS for r in reports):
        per_string = tuple(aggregate([r.per_string[s] for r in reports], mode)
                           for s in range(N_STRINGS))
    if mode == "micro":
        return MetricReport.from_counts(tp, fp, fn, per_string)
    n = len(reports)
    return MetricReport(
        sum(r.precision for r in reports) / n,
        sum(r.recall for r in reports) / n,
        sum(r.f1 for r in reports) / n,
        tp, fp, fn, per_string,
    )
