"""Offline prior-map construction.

LiDAR points are projected into the camera; those landing inside a detection
box are accumulated in world coordinates. Whenever enough consecutive frames
pass without a single detection the buffer is clustered (DBSCAN) and the
cluster centroids become traffic-light candidates awaiting human curation.
Accepted lights sharing control semantics are linked into groups by a
maximum-distance rule.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .detection import Detection, filter_by_confidence
from .errors import ParseError, UnknownRoute, VersionMismatch
from .geometry import BoundingBox, CameraModel, Vec3, as_points, project_points

PRIOR_MAP_VERSION = 1
CANDIDATES_VERSION = 1
DEFAULT_GROUP_LINK_RADIUS_M = 20.0


@dataclass(frozen=True)
class MappingConfig:
    flush_gap_frames: int = 8
    dbscan_eps: float = 0.5
    dbscan_min_pts: int = 6
    group_link_radius: float = DEFAULT_GROUP_LINK_RADIUS_M
    tight_bbox_shrink: float = 0.1

    def __post_init__(self):
        if self.flush_gap_frames < 1:
            raise ValueError("flush_gap_frames must be >= 1")
        if self.dbscan_eps <= 0:
            raise ValueError("dbscan_eps must be positive")
        if self.dbscan_min_pts < 1:
            raise ValueError("dbscan_min_pts must be >= 1")
        if self.group_link_radius <= 0:
            raise ValueError("group_link_radius must be positive")
        if not 0.0 <= self.tight_bbox_shrink < 1.0:
            raise ValueError("tight_bbox_shrink must be in [0, 1)")


class CandidateStatus(Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass
class TLCandidate:
    """A clustered (or manually picked) traffic-light position awaiting review."""

    id: str
    centroid: Vec3
    support: int
    source_frame_range: tuple[float, float]
    status: CandidateStatus = CandidateStatus.PENDING
    group_id: str | None = None
    relevant_for: frozenset[str] = frozenset()

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "centroid": [float(c) for c in self.centroid],
            "support": self.support,
            "source_frame_range": list(self.source_frame_range),
            "status": self.status.value,
            "group": self.group_id,
            "relevant_for": sorted(self.relevant_for),
        }

    @staticmethod
    def from_wire(obj: dict) -> "TLCandidate":
        return TLCandidate(
            id=str(obj["id"]),
            centroid=np.asarray(obj["centroid"], dtype=float),
            support=int(obj["support"]),
            source_frame_range=(float(obj["source_frame_range"][0]), float(obj["source_frame_range"][1])),
            status=CandidateStatus(obj.get("status", "pending")),
            group_id=obj.get("group"),
            relevant_for=frozenset(obj.get("relevant_for", [])),
        )


@dataclass(frozen=True)
class TLGroup:
    id: str
    light_ids: frozenset[str]

    def __post_init__(self):
        if not self.light_ids:
            raise ValueError("a group must have at least one light")


@dataclass(frozen=True)
class MapLight:
    """An accepted traffic light as stored in the prior map."""

    id: str
    position: Vec3
    relevant_for: frozenset[str] = frozenset()


@dataclass(frozen=True)
class PriorMap:
    route_id: str
    lights: tuple[MapLight, ...]
    groups: tuple[TLGroup, ...]
    version: int = PRIOR_MAP_VERSION

    def __post_init__(self):
        light_ids = {l.id for l in self.lights}
        if len(light_ids) != len(self.lights):
            raise ValueError("duplicate light ids in prior map")
        seen: dict[str, str] = {}
        for g in self.groups:
            for lid in g.light_ids:
                if lid not in light_ids:
                    raise ValueError(f"group {g.id} references unknown light {lid}")
                if lid in seen:
                    raise ValueError(f"light {lid} appears in groups {seen[lid]} and {g.id}")
                seen[lid] = g.id
        ungrouped = light_ids - set(seen)
        if ungrouped:
            raise ValueError(f"lights not reachable from any group: {sorted(ungrouped)}")

    def light_by_id(self, light_id: str) -> MapLight:
        for l in self.lights:
            if l.id == light_id:
                return l
        raise KeyError(light_id)

    def group_members(self, group_id: str) -> list[MapLight]:
        for g in self.groups:
            if g.id == group_id:
                return [self.light_by_id(lid) for lid in sorted(g.light_ids)]
        raise KeyError(group_id)


@dataclass
class PointBuffer:
    """World-frame LiDAR hits accumulated between detection gaps."""

    chunks: list[np.ndarray] = field(default_factory=list)
    gap_counter: int = 0
    source_frame_range: tuple[float, float] | None = None

    @property
    def point_count(self) -> int:
        return sum(len(c) for c in self.chunks)

    def points(self) -> np.ndarray:
        if not self.chunks:
            return np.empty((0, 3))
        return np.concatenate(self.chunks, axis=0)

    def append(self, world_points: np.ndarray, t: float) -> None:
        if len(world_points) == 0:
            return
        self.chunks.append(np.asarray(world_points, dtype=float))
        if self.source_frame_range is None:
            self.source_frame_range = (t, t)
        else:
            first, _ = self.source_frame_range
            self.source_frame_range = (first, t)


def accumulate_hits(frame, dets: Sequence[Detection], buffer: PointBuffer,
                    cam: CameraModel, cfg: MappingConfig) -> PointBuffer:
    """Gate the frame's LiDAR scan by detection boxes and accumulate hits.

    Points are projected with the frame's (possibly noisy) pose; those inside
    any box, after the configured tightening shrink, are transformed to world
    coordinates and appended. An empty detection list advances the gap
    counter; any detection resets it.
    """
    if not dets:
        buffer.gap_counter += 1
        return buffer
    buffer.gap_counter = 0

    lidar = frame.lidar
    if len(lidar) == 0:
        return buffer
    pts_vehicle = as_points(lidar)
    pts_camera = cam.vehicle_to_camera().apply(pts_vehicle)
    uv, _, visible = project_points(cam, pts_camera)

    boxes = [d.bbox.shrunk(cfg.tight_bbox_shrink) if cfg.tight_bbox_shrink > 0 else d.bbox
             for d in dets]
    inside = np.zeros(len(pts_vehicle), dtype=bool)
    u, v = uv[:, 0], uv[:, 1]
    for b in boxes:
        inside |= (u >= b.x_min) & (u <= b.x_max) & (v >= b.y_min) & (v <= b.y_max)
    hits = visible & inside
    if hits.any():
        world = frame.pose.to_transform().apply(pts_vehicle[hits])
        buffer.append(world, frame.t)
    return buffer


def dbscan(points, eps: float, min_pts: int) -> tuple[list[list[int]], list[int]]:
    """Density-based clustering; returns (clusters as index lists, noise indices).

    A point is core when its eps-neighborhood (itself included) holds at least
    ``min_pts`` points; clusters are maximal density-connected sets and border
    points join the first cluster that reaches them in scan order.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    pts = as_points(points) if len(points) else np.empty((0, 3))
    n = len(pts)
    if n == 0:
        return [], []

    tree = cKDTree(pts)
    labels = np.full(n, -1, dtype=int)
    visited = np.zeros(n, dtype=bool)
    clusters: list[list[int]] = []

    for i in range(n):
        if visited[i]:
            continue
        visited[i] = True
        neighbors = tree.query_ball_point(pts[i], eps)
        if len(neighbors) < min_pts:
            continue  # noise for now; may be claimed as a border point later
        cluster_id = len(clusters)
        labels[i] = cluster_id
        members = [i]
        seeds = deque(j for j in neighbors if j != i)
        while seeds:
            j = seeds.popleft()
            if labels[j] == -1:
                labels[j] = cluster_id
                members.append(j)
            if visited[j]:
                continue
            visited[j] = True
            j_neighbors = tree.query_ball_point(pts[j], eps)
            if len(j_neighbors) >= min_pts:
                seeds.extend(j_neighbors)
        clusters.append(sorted(members))

    noise = [int(i) for i in np.flatnonzero(labels == -1)]
    return clusters, noise


def maybe_flush(buffer: PointBuffer, cfg: MappingConfig, *,
                force: bool = False) -> tuple[list[TLCandidate], PointBuffer]:
    """Cluster and reset the buffer once the detection gap is long enough.

    Returns ([], buffer) unless gap_counter >= flush_gap_frames (or ``force``)
    and the buffer holds points; then centroids come back as PENDING
    candidates and a fresh buffer replaces the old one.
    """
    due = force or buffer.gap_counter >= cfg.flush_gap_frames
    if not due or buffer.point_count == 0:
        return [], buffer
    pts = buffer.points()
    clusters, _ = dbscan(pts, cfg.dbscan_eps, cfg.dbscan_min_pts)
    first_t, last_t = buffer.source_frame_range
    candidates = []
    for k, members in enumerate(clusters):
        centroid = pts[members].mean(axis=0)
        candidates.append(TLCandidate(
            id=f"c{first_t:09.3f}-{k}",
            centroid=centroid,
            support=len(members),
            source_frame_range=(first_t, last_t),
        ))
    return candidates, PointBuffer()


def run_mapping(frames: Iterable, detector, cam: CameraModel, cfg: MappingConfig,
                tau: float = 0.5) -> list[TLCandidate]:
    """Replay a log through detection gating and flush-on-gap clustering.

    Any points left in the buffer at end of log are flushed regardless of the
    gap counter, so lights seen near a log's end still become candidates.
    """
    buffer = PointBuffer()
    candidates: list[TLCandidate] = []
    for frame in frames:
        dets = filter_by_confidence(detector.detect(frame), tau)
        buffer = accumulate_hits(frame, dets, buffer, cam, cfg)
        flushed, buffer = maybe_flush(buffer, cfg)
        candidates.extend(flushed)
    flushed, _ = maybe_flush(buffer, cfg, force=True)
    candidates.extend(flushed)
    return candidates


def link_groups(lights: Sequence, radius: float) -> list[TLGroup]:
    """Partition lights into single-linkage groups under a distance threshold.

    Accepts anything with ``id`` and ``centroid``/``position`` attributes.
    Group ids are deterministic: "g-" + the lexicographically smallest member
    id. Output is sorted by group id.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    items = [(l.id, np.asarray(getattr(l, "position", getattr(l, "centroid", None)), dtype=float))
             for l in lights]
    n = len(items)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(items[i][1] - items[j][1]) <= radius:
                union(i, j)

    components: dict[int, list[str]] = {}
    for i in range(n):
        components.setdefault(find(i), []).append(items[i][0])
    groups = [TLGroup(id=f"g-{min(ids)}", light_ids=frozenset(ids)) for ids in components.values()]
    return sorted(groups, key=lambda g: g.id)


def transfer_annotations(prior: PriorMap, target_route: str,
                         relevance_overrides: Mapping[str, bool] | None = None,
                         group_link_radius: float = DEFAULT_GROUP_LINK_RADIUS_M) -> PriorMap:
    """Carry a map's lights over to another route and re-link its groups.

    A light is kept when an override says so, or (absent an override) when it
    is already tagged relevant for the target route. Kept lights gain the
    target route in their relevance tags.
    """
    if not target_route:
        raise UnknownRoute("target route id must be a nonempty string")
    overrides = dict(relevance_overrides or {})
    known = {l.id for l in prior.lights}
    unknown = set(overrides) - known
    if unknown:
        raise KeyError(f"overrides reference unknown lights: {sorted(unknown)}")
    route_known = any(target_route in l.relevant_for for l in prior.lights)
    if prior.lights and not route_known and not overrides:
        raise UnknownRoute(f"map for {prior.route_id!r} knows nothing about route {target_route!r}")

    kept = []
    for l in prior.lights:
        keep = overrides.get(l.id, target_route in l.relevant_for)
        if keep:
            kept.append(MapLight(l.id, l.position, l.relevant_for | {target_route}))
    groups = link_groups(kept, group_link_radius)
    return PriorMap(route_id=target_route, lights=tuple(kept), groups=tuple(groups))


# ---------------------------------------------------------------------------
# File formats

_MAP_KEYS = {"version", "route_id", "lights", "groups"}
_LIGHT_KEYS = {"id", "position", "relevant_for"}
_GROUP_KEYS = {"id", "light_ids"}


def prior_map_to_wire(prior: PriorMap) -> dict:
    return {
        "version": prior.version,
        "route_id": prior.route_id,
        "lights": [
            {"id": l.id, "position": [float(c) for c in l.position],
             "relevant_for": sorted(l.relevant_for)}
            for l in prior.lights
        ],
        "groups": [{"id": g.id, "light_ids": sorted(g.light_ids)} for g in prior.groups],
    }


def prior_map_from_wire(obj: dict) -> PriorMap:
    if not isinstance(obj, dict):
        raise ParseError(f"prior map must be a JSON object, got {type(obj).__name__}")
    unknown = set(obj) - _MAP_KEYS
    if unknown:
        raise ParseError(f"unknown prior-map fields: {sorted(unknown)}")
    missing = _MAP_KEYS - set(obj)
    if missing:
        raise ParseError(f"missing prior-map fields: {sorted(missing)}")
    if obj["version"] != PRIOR_MAP_VERSION:
        raise VersionMismatch(f"unsupported prior-map version {obj['version']!r}")
    lights = []
    for entry in obj["lights"]:
        unknown = set(entry) - _LIGHT_KEYS
        if unknown:
            raise ParseError(f"unknown light fields: {sorted(unknown)}")
        lights.append(MapLight(
            id=str(entry["id"]),
            position=np.asarray(entry["position"], dtype=float),
            relevant_for=frozenset(entry["relevant_for"]),
        ))
    groups = []
    for entry in obj["groups"]:
        unknown = set(entry) - _GROUP_KEYS
        if unknown:
            raise ParseError(f"unknown group fields: {sorted(unknown)}")
        groups.append(TLGroup(id=str(entry["id"]), light_ids=frozenset(entry["light_ids"])))
    try:
        return PriorMap(route_id=str(obj["route_id"]), lights=tuple(lights), groups=tuple(groups))
    except ValueError as e:
        raise ParseError(str(e)) from e


def save_prior_map(prior: PriorMap, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(prior_map_to_wire(prior), f, indent=2, sort_keys=True)
        f.write("\n")


def load_prior_map(path) -> PriorMap:
    with open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON in prior map {path}: {e}") from e
    return prior_map_from_wire(obj)


def save_candidates(candidates: Sequence[TLCandidate], route_id: str, path,
                    source_log: str | None = None) -> None:
    payload = {
        "version": CANDIDATES_VERSION,
        "route_id": route_id,
        "source_log": source_log,
        "candidates": [c.to_wire() for c in candidates],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def load_candidates(path) -> tuple[list[TLCandidate], str, str | None]:
    """Returns (candidates, route_id, source_log)."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON in candidates {path}: {e}") from e
    if obj.get("version") != CANDIDATES_VERSION:
        raise VersionMismatch(f"unsupported candidates version {obj.get('version')!r}")
    cands = [TLCandidate.from_wire(c) for c in obj["candidates"]]
    return cands, str(obj["route_id"]), obj.get("source_log")


def accepted_to_map(candidates: Sequence[TLCandidate], route_id: str,
                    group_link_radius: float = DEFAULT_GROUP_LINK_RADIUS_M) -> PriorMap:
    """Project accepted candidates into a prior map.

    Candidates accepted with an explicit group keep it; the rest are
    auto-linked among themselves by the distance rule.
    """
    accepted = [c for c in candidates if c.status is CandidateStatus.ACCEPTED]
    lights = [MapLight(c.id, np.asarray(c.centroid, dtype=float),
                       c.relevant_for or frozenset({route_id}))
              for c in accepted]
    explicit: dict[str, set[str]] = {}
    auto = []
    for c, l in zip(accepted, lights):
        if c.group_id:
            explicit.setdefault(c.group_id, set()).add(l.id)
        else:
            auto.append(l)
    groups = [TLGroup(gid, frozenset(ids)) for gid, ids in explicit.items()]
    groups.extend(link_groups(auto, group_link_radius))
    return PriorMap(route_id=route_id, lights=tuple(lights),
                    groups=tuple(sorted(groups, key=lambda g: g.id)))
