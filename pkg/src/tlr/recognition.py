"""Online phase: pick the relevant light group, gate detections, emit a state.

When a mapped group comes within the activation range ahead of the vehicle,
its lights are projected into the image together with a gating sphere per
light. Detections whose box center falls outside every gate circle are
discarded; among the survivors the one closest to any projected light wins
and its class becomes the frame state. With an active group but no surviving
detection the state is OFF; with no active group it is NONE.

No temporal smoothing is applied: each frame is judged on its own.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .detection import Detection, StateClass, filter_by_confidence
from .errors import DetectorUnavailable, ParseError
from .geometry import CameraModel, PixelPoint, Pose6D, compose, pixel_gate_radius, project_to_image
from .mapping import MapLight, PriorMap


@dataclass(frozen=True)
class RecognizerConfig:
    activation_range: float = 100.0
    gate_radius: float = 1.5
    tau: float = 0.5

    def __post_init__(self):
        if self.activation_range <= 0:
            raise ValueError("activation_range must be positive")
        if self.gate_radius <= 0:
            raise ValueError("gate_radius must be positive")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0, 1]")


class FinalState(Enum):
    NONE = "none"
    OFF = "off"
    RED = "red"
    GREEN = "green"

    @property
    def wire(self) -> str:
        return self.value

    @staticmethod
    def from_wire(s: str) -> "FinalState":
        return FinalState(s)


class Advisory(Enum):
    PROCEED = "proceed"
    SLOW_STOP = "slow_stop"
    NO_CONSTRAINT = "no_constraint"


_STATE_FOR_CLASS = {StateClass.RED: FinalState.RED, StateClass.GREEN: FinalState.GREEN}
_ADVISORY_FOR_STATE = {
    FinalState.NONE: Advisory.NO_CONSTRAINT,
    FinalState.OFF: Advisory.SLOW_STOP,
    FinalState.RED: Advisory.SLOW_STOP,
    FinalState.GREEN: Advisory.PROCEED,
}


@dataclass(frozen=True)
class ProjectedLight:
    light_id: str
    pixel: PixelPoint
    gate_px: float


@dataclass(frozen=True)
class FrameVerdict:
    state: FinalState
    selected: Detection | None = None
    active_group: str | None = None
    projected_lights: tuple[ProjectedLight, ...] = ()
    advisory: Advisory = Advisory.NO_CONSTRAINT

    def __post_init__(self):
        if (self.state is FinalState.NONE) != (self.active_group is None):
            raise ValueError("state NONE must coincide with no active group")
        if self.state in (FinalState.RED, FinalState.GREEN) and self.selected is None:
            raise ValueError("red/green verdict requires a selected detection")


def group_distances(pose: Pose6D, prior: PriorMap, activation_range: float) -> dict[str, float]:
    """Distance to each group over its ahead-of-vehicle members within range."""
    world_to_vehicle = pose.to_transform().inverse()
    out: dict[str, float] = {}
    vehicle_pos = pose.position
    for group in prior.groups:
        best = math.inf
        for light in (prior.light_by_id(lid) for lid in group.light_ids):
            local = world_to_vehicle.apply(light.position)
            if local[0] <= 0.0:
                continue  # behind or abeam; this member cannot activate
            d = float(np.linalg.norm(light.position - vehicle_pos))
            if d <= activation_range and d < best:
                best = d
        if math.isfinite(best):
            out[group.id] = best
    return out


def active_group(pose: Pose6D, prior: PriorMap, activation_range: float = 100.0) -> str | None:
    """The nearest group with an ahead-of-vehicle member in range, if any."""
    dists = group_distances(pose, prior, activation_range)
    if not dists:
        return None
    return min(dists.items(), key=lambda kv: (kv[1], kv[0]))[0]


def recognize_frame(frame, dets: Sequence[Detection], prior: PriorMap,
                    cam: CameraModel, cfg: RecognizerConfig) -> FrameVerdict:
    """Judge one frame. ``dets`` must already be confidence-filtered."""
    group_id = active_group(frame.pose, prior, cfg.activation_range)
    if group_id is None:
        return FrameVerdict(state=FinalState.NONE)

    world_to_camera = cam.world_to_camera(frame.pose)
    projected: list[ProjectedLight] = []
    for light in prior.group_members(group_id):
        pix = project_to_image(cam, world_to_camera.apply(light.position))
        if pix is None:
            continue  # invisible lights contribute no gate circle
        projected.append(ProjectedLight(light.id, pix, pixel_gate_radius(cam, pix.depth, cfg.gate_radius)))

    best: tuple[float, float, int, int] | None = None
    best_det: Detection | None = None
    for det_idx, det in enumerate(dets):
        cx, cy = det.bbox.center
        in_gate = False
        min_dist = math.inf
        for p in projected:
            dist = math.hypot(cx - p.pixel.u, cy - p.pixel.v)
            min_dist = min(min_dist, dist)
            if dist <= p.gate_px:
                in_gate = True
        if not in_gate:
            continue
        # ties: nearer first, then higher confidence, then red over green
        key = (min_dist, -det.confidence, 0 if det.state is StateClass.RED else 1, det_idx)
        if best is None or key < best:
            best = key
            best_det = det

    if best_det is None:
        return FrameVerdict(state=FinalState.OFF, active_group=group_id,
                            projected_lights=tuple(projected), advisory=Advisory.SLOW_STOP)
    state = _STATE_FOR_CLASS[best_det.state]
    return FrameVerdict(state=state, selected=best_det, active_group=group_id,
                        projected_lights=tuple(projected), advisory=_ADVISORY_FOR_STATE[state])


def run_log(frames: Iterable, prior: PriorMap, detector, cam: CameraModel,
            cfg: RecognizerConfig, on_detections=None) -> list[tuple[float, FrameVerdict]]:
    """One verdict per frame, in log order; deterministic for a deterministic detector.

    ``on_detections(t, raw)``, when given, sees the unfiltered detector output
    of every frame (for writing detection streams alongside the verdicts).
    """
    out: list[tuple[float, FrameVerdict]] = []
    for frame in frames:
        try:
            raw = detector.detect(frame)
        except DetectorUnavailable as e:
            raise DetectorUnavailable(f"at frame t={frame.t:.3f}: {e}") from e
        if on_detections is not None:
            on_detections(frame.t, raw)
        dets = filter_by_confidence(raw, cfg.tau)
        out.append((frame.t, recognize_frame(frame, dets, prior, cam, cfg)))
    return out


# ---------------------------------------------------------------------------
# Verdict stream wire format (JSONL)

def verdict_to_wire(t: float, verdict: FrameVerdict) -> dict:
    return {
        "t": t,
        "state": verdict.state.wire,
        "group": verdict.active_group,
        "selected": verdict.selected.to_wire() if verdict.selected else None,
        "advisory": verdict.advisory.value,
    }


def verdict_from_wire(obj: dict) -> tuple[float, FrameVerdict]:
    state = FinalState.from_wire(obj["state"])
    selected = Detection.from_wire(obj["selected"]) if obj.get("selected") else None
    verdict = FrameVerdict(
        state=state,
        selected=selected,
        active_group=obj.get("group"),
        advisory=Advisory(obj["advisory"]),
    )
    return float(obj["t"]), verdict


def write_verdicts(verdicts: Sequence[tuple[float, FrameVerdict]], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t, v in verdicts:
            f.write(json.dumps(verdict_to_wire(t, v), separators=(",", ":")))
            f.write("\n")


def read_verdicts(path) -> list[tuple[float, FrameVerdict]]:
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(verdict_from_wire(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                raise ParseError(f"bad verdict record: {e}", line=lineno) from e
    return out
