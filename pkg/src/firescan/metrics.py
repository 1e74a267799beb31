"""Global per-pixel evaluation of predicted masks against reference masks.

Counters are accumulated over every compared pixel pair and the metrics are
computed once at the end, so the result is a dataset-level score rather than
an average of per-patch scores. True negatives are deliberately not tracked:
fire pixels are rare, and pixel accuracy would be dominated by background.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass
class EvalAccumulator:
    """Mergeable tp/fp/fn counters."""

    tp: int = 0
    fp: int = 0
    fn: int = 0


@dataclass
class MetricsReport:
    """Final precision/recall/IoU/F plus the raw counters behind them.

    degenerate is set when any metric had a zero denominator; such metrics
    are reported as 0.0 rather than raising, so batch runs stay total.
    """

    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    iou: float
    f_score: float
    degenerate: bool


def accumulate(
    pred: np.ndarray,
    truth: np.ndarray,
    valid: np.ndarray | None = None,
    acc: EvalAccumulator | None = None,
) -> EvalAccumulator:
    """Add one mask pair's tp/fp/fn to an accumulator.

    Only pixels where `valid` is true are counted; pass None to count all.

    Raises:
        ValueError: shape mismatch between pred, truth, or valid.
    """
    if pred.shape != truth.shape:
        raise ValueError(f"pred shape {pred.shape} does not match truth shape {truth.shape}")
    if valid is not None and valid.shape != pred.shape:
        raise ValueError(f"valid shape {valid.shape} does not match masks {pred.shape}")
    if acc is None:
        acc = EvalAccumulator()
    p = pred if valid is None else (pred & valid)
    t = truth if valid is None else (truth & valid)
    acc.tp += int(np.count_nonzero(p & t))
    acc.fp += int(np.count_nonzero(p & ~t))
    acc.fn += int(np.count_nonzero(~p & t))
    return acc


def merge(a: EvalAccumulator, b: EvalAccumulator) -> EvalAccumulator:
    """Field-wise sum of two accumulators."""
    return EvalAccumulator(tp=a.tp + b.tp, fp=a.fp + b.fp, fn=a.fn + b.fn)


def finalize(acc: EvalAccumulator) -> MetricsReport:
    """Compute P, R, F, and IoU from the accumulated counters.

    P = tp/(tp+fp), R = tp/(tp+fn), F = 2tp/(2tp+fp+fn) (the harmonic mean of
    P and R), IoU = tp/(tp+fp+fn). A zero denominator reports 0.0 for that
    metric and sets the degenerate flag.
    """
    tp, fp, fn = acc.tp, acc.fp, acc.fn
    degenerate = False

    def _div(num: int, den: int) -> float:
        nonlocal degenerate
        if den == 0:
            degenerate = True
            return 0.0
        return num / den

    precision = _div(tp, tp + fp)
    recall = _div(tp, tp + fn)
    f_score = _div(2 * tp, 2 * tp + fp + fn)
    iou = _div(tp, tp + fp + fn)
    return MetricsReport(
        tp=tp,
        fp=fp,
        fn=fn,
        precision=precision,
        recall=recall,
        iou=iou,
        f_score=f_score,
        degenerate=degenerate,
    )


METRICS_CSV_HEADER = "label,tp,fp,fn,P,R,IoU,F"


def reports_to_csv(rows: Sequence[tuple[str, MetricsReport]]) -> str:
    """Serialize labeled reports as CSV, one row per label."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRICS_CSV_HEADER.split(","))
    for label, rep in rows:
        # Labels come from user-chosen names and may need CSV quoting.
        writer.writerow(
            (label, rep.tp, rep.fp, rep.fn,
             f"{rep.precision:.6f}", f"{rep.recall:.6f}", f"{rep.iou:.6f}", f"{rep.f_score:.6f}")
        )
    return buf.getvalue()
