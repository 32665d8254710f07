"""Human map-curation session: review clustered candidates, persist decisions.

The session is event-sourced: every mutation (accept/reject decisions, manual
candidate picks) appends to a decision log, and replaying that log against
the initial candidate set reproduces the exact same state, so the saved map
is a pure function of (initial candidates, decisions). One editor at a time:
a lock file next to the candidates file rejects concurrent sessions.
"""

from __future__ import annotations

import datetime as _dt
import io
import json
import os
import threading
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from PIL import Image, ImageDraw

from .errors import (
    FrameNotFound,
    InvalidGroup,
    PendingRemain,
    PointIndexOutOfRange,
    TlrError,
    UnknownCandidate,
)
from .geometry import CameraModel, project_points
from .mapping import (
    CandidateStatus,
    MappingConfig,
    PriorMap,
    TLCandidate,
    accepted_to_map,
    save_prior_map,
)

_FRAME_TIME_TOL = 1e-6

_STATUS_COLORS = {
    CandidateStatus.PENDING: (255, 210, 60),
    CandidateStatus.ACCEPTED: (80, 220, 100),
    CandidateStatus.REJECTED: (230, 80, 80),
}


@dataclass
class DecisionEvent:
    timestamp: str
    actor: str
    action: dict

    def to_wire(self) -> dict:
        return {"timestamp": self.timestamp, "actor": self.actor, "action": self.action}


@dataclass
class CurationSession:
    """Mutable curation state over one candidate set and its source log."""

    route_id: str
    candidates: dict[str, TLCandidate]
    frames: list = field(default_factory=list)  # LogFrame, time-ordered
    camera: CameraModel | None = None
    config: MappingConfig = field(default_factory=MappingConfig)
    decisions: list[DecisionEvent] = field(default_factory=list)
    _initial: dict[str, TLCandidate] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    @classmethod
    def open(cls, candidates: Sequence[TLCandidate], route_id: str, frames=None,
             camera: CameraModel | None = None,
             config: MappingConfig | None = None) -> "CurationSession":
        by_id = {c.id: _copy_candidate(c) for c in candidates}
        session = cls(route_id=route_id, candidates=by_id,
                      frames=sorted(frames or [], key=lambda f: f.t), camera=camera,
                      config=config or MappingConfig())
        session._initial = {c.id: _copy_candidate(c) for c in candidates}
        return session

    # -- queries ------------------------------------------------------------

    def list_candidates(self) -> list[TLCandidate]:
        """Stable ordering by source time, then id."""
        return sorted(self.candidates.values(), key=lambda c: (c.source_frame_range[0], c.id))

    def get(self, candidate_id: str) -> TLCandidate:
        try:
            return self.candidates[candidate_id]
        except KeyError:
            raise UnknownCandidate(f"no candidate {candidate_id!r}") from None

    def pending_ids(self) -> list[str]:
        return sorted(cid for cid, c in self.candidates.items()
                      if c.status is CandidateStatus.PENDING)

    def nearest_frame_time(self, candidate: TLCandidate) -> float | None:
        """Time of the in-range frame whose pose comes closest to the centroid."""
        if not self.frames:
            return None
        first_t, last_t = candidate.source_frame_range
        window = [f for f in self.frames if first_t - _FRAME_TIME_TOL <= f.t <= last_t + _FRAME_TIME_TOL]
        if not window:
            window = self.frames
        target = np.asarray(candidate.centroid, dtype=float)
        best = min(window, key=lambda f: float(np.linalg.norm(f.pose.position - target)))
        return best.t

    def draft_map(self) -> PriorMap:
        return accepted_to_map(self.list_candidates(), self.route_id,
                               self.config.group_link_radius)

    # -- mutations ----------------------------------------------------------

    def decide(self, candidate_id: str, decision: str, group: str | None = None,
               relevant_for: Sequence[str] = (), actor: str = "anonymous") -> TLCandidate:
        action = {
            "type": "decide",
            "candidate": candidate_id,
            "decision": decision,
            "group": group,
            "relevant_for": sorted(relevant_for),
        }
        with self._lock:
            candidate = self._apply(action)
            self._log(actor, action)
        return candidate

    def manual_candidate(self, t: float, point_index: int,
                         actor: str = "anonymous") -> TLCandidate:
        action = {"type": "manual", "t": t, "point_index": point_index}
        with self._lock:
            candidate = self._apply(action)
            self._log(actor, action)
        return candidate

    def save(self, out_path, force: bool = False, actor: str = "anonymous") -> PriorMap:
        """Write the prior map; refuses while PENDING candidates remain unless forced."""
        with self._lock:
            pending = self.pending_ids()
            if pending and not force:
                raise PendingRemain(f"{len(pending)} candidates still pending: {pending}")
            prior = accepted_to_map(self.list_candidates(), self.route_id,
                                    self.config.group_link_radius)
            save_prior_map(prior, out_path)
            self._log(actor, {"type": "save", "path": str(out_path), "force": force,
                              "dropped_pending": pending})
        return prior

    # -- event sourcing -----------------------------------------------------

    def _log(self, actor: str, action: dict) -> None:
        self.decisions.append(DecisionEvent(
            timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(), actor=actor, action=action))

    def _apply(self, action: dict) -> TLCandidate:
        kind = action["type"]
        if kind == "decide":
            candidate = self.get(action["candidate"])
            decision = action["decision"]
            if decision not in ("accept", "reject"):
                raise TlrError(f"unknown decision {decision!r}")
            group = action.get("group")
            if group is not None and (not isinstance(group, str) or not group.strip()):
                raise InvalidGroup(f"group id must be null or a nonempty string, got {group!r}")
            candidate.status = (CandidateStatus.ACCEPTED if decision == "accept"
                                else CandidateStatus.REJECTED)
            candidate.group_id = group
            candidate.relevant_for = frozenset(action.get("relevant_for") or ())
            return candidate
        if kind == "manual":
            return self._add_manual(float(action["t"]), int(action["point_index"]))
        if kind == "save":
            return None  # projection only; state untouched
        raise TlrError(f"unknown event type {kind!r}")

    def _add_manual(self, t: float, point_index: int) -> TLCandidate:
        frame = self._frame_at(t)
        if not 0 <= point_index < len(frame.lidar):
            raise PointIndexOutOfRange(
                f"point {point_index} outside scan of {len(frame.lidar)} points at t={t}")
        world = frame.pose.to_transform().apply(np.asarray(frame.lidar[point_index], dtype=float))
        base = f"m{t:.3f}-p{point_index}"
        cid = base
        suffix = 2
        while cid in self.candidates:
            cid = f"{base}-{suffix}"
            suffix += 1
        candidate = TLCandidate(id=cid, centroid=world, support=1,
                                source_frame_range=(t, t))
        self.candidates[cid] = candidate
        return candidate

    def _frame_at(self, t: float):
        times = [f.t for f in self.frames]
        i = bisect_left(times, t - _FRAME_TIME_TOL)
        if i < len(self.frames) and abs(self.frames[i].t - t) <= _FRAME_TIME_TOL:
            return self.frames[i]
        raise FrameNotFound(f"no frame at t={t}")

    @classmethod
    def replay(cls, initial: Sequence[TLCandidate], events: Sequence[DecisionEvent],
               route_id: str, frames=None, camera=None,
               config: MappingConfig | None = None) -> "CurationSession":
        """Rebuild a session purely from its initial candidates and event log."""
        session = cls.open(initial, route_id, frames=frames, camera=camera, config=config)
        for event in events:
            if event.action["type"] == "save":
                continue
            session._apply(event.action)
            session.decisions.append(event)
        return session


def _copy_candidate(c: TLCandidate) -> TLCandidate:
    return TLCandidate(id=c.id, centroid=np.array(c.centroid, dtype=float), support=c.support,
                       source_frame_range=tuple(c.source_frame_range), status=c.status,
                       group_id=c.group_id, relevant_for=frozenset(c.relevant_for))


# ---------------------------------------------------------------------------
# Overlay rendering (schematic; synthetic logs carry no camera imagery)

def render_overlay_png(session: CurationSession, t: float) -> bytes:
    """Projected LiDAR points of the frame plus candidate centroid crosses."""
    if session.camera is None:
        raise TlrError("session has no camera model; cannot render overlays")
    cam = session.camera
    frame = session._frame_at(t)
    img = Image.new("RGB", (cam.width, cam.height), (24, 26, 30))
    draw = ImageDraw.Draw(img)

    if len(frame.lidar):
        pts_cam = cam.vehicle_to_camera().apply(np.asarray(frame.lidar, dtype=float))
        uv, depth, visible = project_points(cam, pts_cam)
        shade = np.clip(255.0 - 3.0 * depth, 60.0, 255.0).astype(int)
        for (u, v), s, ok in zip(uv, shade, visible):
            if ok:
                draw.point((float(u), float(v)), fill=(int(s), int(s), int(s)))

    world_to_camera = cam.world_to_camera(frame.pose)
    for c in session.list_candidates():
        pts_cam = world_to_camera.apply(np.asarray(c.centroid, dtype=float).reshape(1, 3))
        uv, _, visible = project_points(cam, pts_cam)
        if not visible[0]:
            continue
        u, v = float(uv[0][0]), float(uv[0][1])
        color = _STATUS_COLORS[c.status]
        arm = 12
        draw.line([(u - arm, v), (u + arm, v)], fill=color, width=2)
        draw.line([(u, v - arm), (u, v + arm)], fill=color, width=2)
        draw.text((u + arm + 2, v - 6), c.id, fill=color)

    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Single-editor lock

class SessionLock:
    """O_EXCL lock file guarding one curation session per candidates file."""

    def __init__(self, candidates_path):
        self.path = str(candidates_path) + ".lock"
        self._held = False

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise TlrError(
                f"another curation session holds {self.path}; "
                "remove the lock file if it is stale") from None
        with os.fdopen(fd, "w") as f:
            f.write(str(os.getpid()))
        self._held = True
        return self

    def __exit__(self, *exc):
        if self._held:
            try:
                os.unlink(self.path)
            except FileNotFoundError:
                pass
            self._held = False
        return False
