"""Detection and system metrics.

Detection side: IoU box matching under the VOC protocol (greedy by descending
confidence, each ground-truth box claimed at most once) and 11-point
interpolated average precision as defined for the VOC 2007 competition, with
the later all-points variant available but not the default.

System side: 4x4 confusion matrices over {NONE, RED, GREEN, OFF} frame
states, per-approach first-correct-detection delay/distance, and a timeline
CSV export for plotting prediction streams against ground truth.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .detection import Detection, StateClass
from .errors import LengthMismatch, NoGroundTruth
from .geometry import BoundingBox, Pose6D
from .mapping import PriorMap
from .recognition import FinalState, group_distances

STATE_ORDER = (FinalState.NONE, FinalState.RED, FinalState.GREEN, FinalState.OFF)
_STATE_INDEX = {s: i for i, s in enumerate(STATE_ORDER)}
RECALL_LEVELS_2007 = tuple(i / 10.0 for i in range(11))


@dataclass(frozen=True)
class EvalConfig:
    iou_threshold: float = 0.5
    tau: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError("iou_threshold must be in (0, 1]")


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes, in [0, 1]."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0.0 or iy <= 0.0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


@dataclass(frozen=True)
class MatchResult:
    """Indices into the (sorted) detection list and the ground-truth list."""

    tp: tuple[tuple[int, int], ...]  # (det index, gt index)
    fp: tuple[int, ...]
    fn: tuple[int, ...]
    order: tuple[int, ...]  # sorted detection order as input indices


def match_detections(dets: Sequence[Detection], gts: Sequence, iou_threshold: float) -> MatchResult:
    """Greedy confidence-descending matching against same-class ground truth.

    Each detection takes the unmatched same-class gt box of highest IoU when
    that IoU reaches the threshold, else it is a false positive; leftover gt
    boxes are false negatives. ``gts`` items need ``bbox`` and ``state``.
    """
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, i))
    taken = [False] * len(gts)
    tp: list[tuple[int, int]] = []
    fp: list[int] = []
    for di in order:
        det = dets[di]
        best_iou = 0.0
        best_gt = -1
        for gi, gt in enumerate(gts):
            if taken[gi] or gt.state is not det.state:
                continue
            v = iou(det.bbox, gt.bbox)
            if v > best_iou:
                best_iou = v
                best_gt = gi
        if best_gt >= 0 and best_iou >= iou_threshold:
            taken[best_gt] = True
            tp.append((di, best_gt))
        else:
            fp.append(di)
    fn = tuple(gi for gi, t in enumerate(taken) if not t)
    return MatchResult(tuple(tp), tuple(fp), fn, tuple(order))


def voc2007_ap(ranked: Sequence[tuple[float, bool]], n_gt: int) -> float:
    """11-point interpolated AP from (confidence, is_tp) pairs.

    The pairs may arrive unsorted; they are ranked by descending confidence.
    Precision at each recall level r in {0.0, 0.1, ..., 1.0} is the maximum
    precision over ranks whose recall reaches r, zero when none does.
    """
    if n_gt <= 0:
        raise NoGroundTruth("AP undefined without ground-truth instances")
    if not ranked:
        return 0.0
    pairs = sorted(ranked, key=lambda x: -x[0])
    tp_cum = 0
    points = []  # (recall, precision) per rank
    for k, (_, is_tp) in enumerate(pairs, start=1):
        if is_tp:
            tp_cum += 1
        points.append((tp_cum / n_gt, tp_cum / k))
    total = 0.0
    for level in RECALL_LEVELS_2007:
        best = [p for r, p in points if r >= level]
        total += max(best) if best else 0.0
    return total / 11.0


def ap_all_points(ranked: Sequence[tuple[float, bool]], n_gt: int) -> float:
    """Area under the interpolated PR curve (the 2010+ VOC definition)."""
    if n_gt <= 0:
        raise NoGroundTruth("AP undefined without ground-truth instances")
    if not ranked:
        return 0.0
    pairs = sorted(ranked, key=lambda x: -x[0])
    tp_cum = 0
    recalls = [0.0]
    precisions = [1.0]
    for k, (_, is_tp) in enumerate(pairs, start=1):
        if is_tp:
            tp_cum += 1
        recalls.append(tp_cum / n_gt)
        precisions.append(tp_cum / k)
    # envelope: precision at recall r is max precision at recall >= r
    for i in range(len(precisions) - 2, -1, -1):
        precisions[i] = max(precisions[i], precisions[i + 1])
    area = 0.0
    for i in range(1, len(recalls)):
        area += (recalls[i] - recalls[i - 1]) * precisions[i]
    return area


def mean_ap(per_class_ap: Mapping[str, float | None]) -> float:
    """Unweighted mean over classes with defined AP."""
    defined = [v for v in per_class_ap.values() if v is not None]
    if not defined:
        raise NoGroundTruth("no class has ground truth; mAP undefined")
    return sum(defined) / len(defined)


@dataclass
class DetectionTally:
    """Accumulates per-frame match results into dataset-level metrics."""

    iou_threshold: float = 0.5
    scored: dict[StateClass, list[tuple[float, bool]]] = field(
        default_factory=lambda: {c: [] for c in StateClass})
    n_gt: dict[StateClass, int] = field(default_factory=lambda: {c: 0 for c in StateClass})

    def add_frame(self, dets: Sequence[Detection], gts: Sequence) -> None:
        for gt in gts:
            self.n_gt[gt.state] += 1
        result = match_detections(dets, gts, self.iou_threshold)
        tp_dets = {di for di, _ in result.tp}
        for di in result.order:
            det = dets[di]
            self.scored[det.state].append((det.confidence, di in tp_dets))

    def precision_recall(self, tau: float) -> dict[str, dict[str, float | int]]:
        out = {}
        all_tp = all_kept = all_gt = 0
        for cls in StateClass:
            kept = [(c, tp) for c, tp in self.scored[cls] if c >= tau]
            tp = sum(1 for _, is_tp in kept if is_tp)
            n_gt = self.n_gt[cls]
            out[cls.wire] = {
                "tp": tp, "detections": len(kept), "gt": n_gt,
                "precision": tp / len(kept) if kept else None,
                "recall": tp / n_gt if n_gt else None,
            }
            all_tp += tp
            all_kept += len(kept)
            all_gt += n_gt
        out["overall"] = {
            "tp": all_tp, "detections": all_kept, "gt": all_gt,
            "precision": all_tp / all_kept if all_kept else None,
            "recall": all_tp / all_gt if all_gt else None,
        }
        return out

    def average_precision(self, variant: str = "voc2007") -> dict[str, float | None]:
        fn = voc2007_ap if variant == "voc2007" else ap_all_points
        out: dict[str, float | None] = {}
        for cls in StateClass:
            if self.n_gt[cls] == 0:
                out[cls.wire] = None  # undefined; excluded from the mean
            else:
                out[cls.wire] = fn(self.scored[cls], self.n_gt[cls])
        return out


# ---------------------------------------------------------------------------
# System-level metrics

@dataclass
class ConfusionMatrix:
    """Counts indexed (ground truth row, predicted column) over STATE_ORDER."""

    counts: np.ndarray = field(default_factory=lambda: np.zeros((4, 4), dtype=int))

    def add(self, gt: FinalState, pred: FinalState) -> None:
        self.counts[_STATE_INDEX[gt], _STATE_INDEX[pred]] += 1

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def row(self, state: FinalState) -> list[int]:
        return self.counts[_STATE_INDEX[state]].tolist()

    def accuracy_lit(self) -> float | None:
        """Per-frame accuracy restricted to RED/GREEN ground truth."""
        idx = [_STATE_INDEX[FinalState.RED], _STATE_INDEX[FinalState.GREEN]]
        total = int(self.counts[idx, :].sum())
        if total == 0:
            return None
        correct = int(self.counts[idx, idx].sum())
        return correct / total

    def to_wire(self) -> dict:
        return {
            "order": [s.wire for s in STATE_ORDER],
            "counts": self.counts.tolist(),
        }


def confusion(pred_states: Sequence[FinalState], gt_states: Sequence[FinalState]) -> ConfusionMatrix:
    if len(pred_states) != len(gt_states):
        raise LengthMismatch(f"{len(pred_states)} predictions vs {len(gt_states)} ground-truth frames")
    cm = ConfusionMatrix()
    for pred, gt in zip(pred_states, gt_states):
        cm.add(gt, pred)
    return cm


@dataclass(frozen=True)
class EarlyDetectionRecord:
    log_id: str
    approach: int
    group_id: str
    delay_s: float
    distance_m: float
    correct_found: bool

    def to_wire(self) -> dict:
        return {
            "log": self.log_id, "approach": self.approach, "group": self.group_id,
            "delay_s": self.delay_s, "distance_m": self.distance_m,
            "correct_found": self.correct_found,
        }


def relevant_group_track(poses: Sequence[Pose6D], prior: PriorMap,
                         activation_range: float) -> tuple[list[str | None], list[float]]:
    """Per-frame (nearest active group id, distance to it) from logged poses."""
    ids: list[str | None] = []
    dists: list[float] = []
    for pose in poses:
        options = group_distances(pose, prior, activation_range)
        if not options:
            ids.append(None)
            dists.append(math.inf)
        else:
            gid, d = min(options.items(), key=lambda kv: (kv[1], kv[0]))
            ids.append(gid)
            dists.append(d)
    return ids, dists


def early_detection(times: Sequence[float], gt_states: Sequence[FinalState],
                    pred_states: Sequence[FinalState], group_ids: Sequence[str | None],
                    distances: Sequence[float], activation_range: float,
                    log_id: str = "log") -> list[EarlyDetectionRecord]:
    """First correct lit-state prediction per approach.

    An approach is a maximal run of frames sharing the same active group. The
    first frame whose prediction equals a RED/GREEN ground truth closes it:
    delay is measured from range entry, distance is whatever range remains
    (clamped to [0, activation_range]). Approaches that never see a correct
    prediction come back flagged with delay = approach duration, distance 0.
    """
    n = len(times)
    if not (len(gt_states) == len(pred_states) == len(group_ids) == len(distances) == n):
        raise LengthMismatch("early_detection inputs must align frame-for-frame")
    records: list[EarlyDetectionRecord] = []
    approach = 0
    i = 0
    while i < n:
        if group_ids[i] is None:
            i += 1
            continue
        gid = group_ids[i]
        j = i
        while j < n and group_ids[j] == gid:
            j += 1
        entry_t = times[i]
        found = None
        for k in range(i, j):
            if gt_states[k] in (FinalState.RED, FinalState.GREEN) and pred_states[k] is gt_states[k]:
                found = k
                break
        if found is None:
            duration = times[j - 1] - entry_t if j - 1 > i else 0.0
            records.append(EarlyDetectionRecord(log_id, approach, gid, duration, 0.0, False))
        else:
            distance = min(max(distances[found], 0.0), activation_range)
            records.append(EarlyDetectionRecord(log_id, approach, gid,
                                                times[found] - entry_t, distance, True))
        approach += 1
        i = j
    return records


# ---------------------------------------------------------------------------
# Reports

def build_report(gt_states: Sequence[FinalState], times: Sequence[float],
                 verdict_streams: Mapping[str, Sequence[FinalState]],
                 early: Mapping[str, Sequence[EarlyDetectionRecord]] | None = None,
                 detector_metrics: Mapping[str, dict] | None = None) -> dict:
    """Machine-readable report over one or more verdict streams."""
    report: dict = {"frames": len(gt_states), "streams": {}}
    for label, preds in verdict_streams.items():
        cm = confusion(list(preds), list(gt_states))
        entry: dict = {"confusion": cm.to_wire()}
        acc = cm.accuracy_lit()
        entry["accuracy_lit"] = acc
        entry["accuracy_all"] = float(np.trace(cm.counts)) / cm.total if cm.total else None
        if early and label in early:
            recs = list(early[label])
            entry["early_detection"] = [r.to_wire() for r in recs]
            completed = [r for r in recs if r.correct_found]
            entry["early_summary"] = {
                "mean_delay_s": sum(r.delay_s for r in completed) / len(completed) if completed else None,
                "mean_distance_m": sum(r.distance_m for r in completed) / len(completed) if completed else None,
                "approaches": len(recs),
                "missed_approaches": len(recs) - len(completed),
            }
        report["streams"][label] = entry
    if detector_metrics:
        report["detector"] = dict(detector_metrics)
    return report


def _fmt(v, width=8, nd=2):
    if v is None:
        return " " * (width - 1) + "-"
    if isinstance(v, float):
        return f"{v:{width}.{nd}f}"
    return f"{v:{width}d}"


def render_report_text(report: dict) -> str:
    """Aligned-text tables for terminals."""
    lines: list[str] = []
    if "detector" in report:
        lines.append("Detector metrics")
        lines.append(f"{'stream':<12}{'threshold':<12}{'class':<10}"
                     f"{'precision':>10}{'recall':>10}{'AP':>10}")
        for label, det in report["detector"].items():
            aps = det.get("ap", {})
            for tau_label, classes in det.get("precision_recall", {}).items():
                for cls, pr in classes.items():
                    if cls == "overall":
                        continue
                    lines.append(
                        f"{label:<12}{tau_label:<12}{cls:<10}"
                        f"{_fmt(pr['precision'], 10)}{_fmt(pr['recall'], 10)}{_fmt(aps.get(cls), 10)}"
                    )
            map_val = det.get("map")
            lines.append(f"{label:<12}{'':<12}{'mAP':<10}{'':>10}{'':>10}{_fmt(map_val, 10)}")
        lines.append("")

    lines.append("First correct detections")
    lines.append(f"{'stream':<12}{'approach':<12}{'delay (s)':>12}{'distance (m)':>14}")
    for label, entry in report["streams"].items():
        for rec in entry.get("early_detection", []):
            tag = f"{rec['log']} ({rec['approach']})"
            if not rec["correct_found"]:
                lines.append(f"{label:<12}{tag:<12}{'never':>12}{'-':>14}")
            else:
                lines.append(f"{label:<12}{tag:<12}{rec['delay_s']:>12.2f}{rec['distance_m']:>14.2f}")
    lines.append("")

    header = [s.wire[0].upper() for s in STATE_ORDER]
    for label, entry in report["streams"].items():
        lines.append(f"Confusion matrix [{label}] (rows: ground truth, cols: predicted)")
        lines.append(" " * 10 + "".join(f"{h:>8}" for h in header))
        counts = entry["confusion"]["counts"]
        for i, state in enumerate(STATE_ORDER):
            name = f"{state.wire.upper()} ({header[i]})"
            lines.append(f"{name:<10}" + "".join(f"{c:>8d}" for c in counts[i]))
        acc = entry.get("accuracy_lit")
        lines.append(f"accuracy on lit frames: {acc:.4f}" if acc is not None else "accuracy on lit frames: -")
        lines.append("")
    return "\n".join(lines)


def write_timeline_csv(path, times: Sequence[float], gt_states: Sequence[FinalState],
                       verdict_streams: Mapping[str, Sequence[FinalState]]) -> None:
    """CSV with one row per frame: t, gt, then one prediction column per stream."""
    labels = list(verdict_streams)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "gt"] + [f"pred_{label}" for label in labels])
        for i, t in enumerate(times):
            writer.writerow([f"{t:.6f}", gt_states[i].wire]
                            + [verdict_streams[label][i].wire for label in labels])
