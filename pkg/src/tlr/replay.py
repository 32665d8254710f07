"""Log data model, JSONL reader/writer, and a synthetic scenario generator.

The generator produces a drive-by log with known ground truth: a vehicle
follows a waypoint path past scheduled traffic lights while a spinning-LiDAR
stand-in samples each lit, visible light head (a 0.3 x 0.9 x 0.3 m box around
the mapped position) plus ground and pole clutter. Ground-truth detections
are the exact pixel extents of the projected head corners, so LiDAR head
samples always project inside them, which is what makes noiseless map
recovery exact.

Localization error, when enabled, is an Ornstein-Uhlenbeck drift applied to
the *logged* pose only; sensor data is always generated from the true pose,
mirroring how a real localization module corrupts world-frame processing but
not the sensor-relative measurements themselves.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .detection import NoiseModel, StateClass
from .errors import InvalidScenario, ParseError, VersionMismatch
from .geometry import (
    BoundingBox,
    CameraModel,
    Pose6D,
    camera_from_wire,
    camera_to_wire,
    default_camera,
)
from .mapping import MapLight, PriorMap, TLGroup
from .recognition import FinalState, active_group

LOG_VERSION = 1

HEAD_HALF_EXTENTS = np.array([0.15, 0.15, 0.45])  # 0.3 wide, 0.3 deep, 0.9 tall

# below this projected size a detector has nothing to work with; the head
# stops producing ground-truth boxes (and so also head LiDAR samples)
MIN_GT_BOX_PX = 3.0


@dataclass(frozen=True)
class GroundTruthBox:
    bbox: BoundingBox
    state: StateClass
    light_id: str

    def to_wire(self) -> dict:
        return {"bbox": self.bbox.to_list(), "class": self.state.wire, "light": self.light_id}

    @staticmethod
    def from_wire(obj: dict) -> "GroundTruthBox":
        return GroundTruthBox(BoundingBox.from_list(obj["bbox"]),
                              StateClass.from_wire(obj["class"]), str(obj["light"]))


@dataclass(eq=False)
class LogFrame:
    """One timestamped sensor snapshot."""

    t: float
    pose: Pose6D
    lidar: np.ndarray  # (N, 3) vehicle frame
    gt_detections: list[GroundTruthBox] = field(default_factory=list)
    gt_state: FinalState = FinalState.NONE
    image_ref: str | None = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, LogFrame):
            return NotImplemented
        return (
            self.t == other.t
            and self.pose == other.pose
            and np.array_equal(self.lidar, other.lidar)
            and self.gt_detections == other.gt_detections
            and self.gt_state == other.gt_state
            and self.image_ref == other.image_ref
        )


@dataclass(frozen=True)
class Rddf:
    """Reference trajectory: ordered waypoints with target speeds."""

    route_id: str
    waypoints: tuple[tuple[Pose6D, float], ...]


# ---------------------------------------------------------------------------
# Scenario description

@dataclass(frozen=True)
class ScheduleEntry:
    start: float
    end: float
    state: FinalState  # RED, GREEN or OFF

    def __post_init__(self):
        if self.state not in (FinalState.RED, FinalState.GREEN, FinalState.OFF):
            raise InvalidScenario(f"schedule state must be red/green/off, got {self.state}")
        if not self.start < self.end:
            raise InvalidScenario(f"schedule interval must have start < end: {self}")


@dataclass(frozen=True)
class ScenarioLight:
    id: str
    position: np.ndarray
    group: str
    schedule: tuple[ScheduleEntry, ...]
    relevant_for: frozenset[str] = frozenset()

    def state_at(self, t: float) -> FinalState:
        for entry in self.schedule:
            if entry.start <= t < entry.end:
                return entry.state
        return FinalState.OFF


@dataclass(frozen=True)
class Waypoint:
    position: np.ndarray
    speed: float

    def __post_init__(self):
        if self.speed < 0:
            raise InvalidScenario("waypoint speed must be >= 0")


@dataclass(frozen=True)
class LidarModel:
    beams: int = 32
    points_per_beam: int = 1080
    vfov_up_deg: float = 10.0
    vfov_down_deg: float = -30.0
    origin: tuple[float, float, float] = (0.0, 0.0, 2.2)
    max_range_m: float = 80.0
    head_hit_base: float = 4000.0  # expected head returns at 1 m, falls off as 1/d^2
    head_hit_cap: int = 200

    @property
    def scan_budget(self) -> int:
        return self.beams * self.points_per_beam


@dataclass(frozen=True)
class PoleSpec:
    x: float
    y: float
    height: float


@dataclass(frozen=True)
class ClutterModel:
    ground_points_per_frame: int = 1500
    ground_radius: tuple[float, float] = (4.0, 45.0)
    poles: tuple[PoleSpec, ...] = ()
    pole_points_per_frame: int = 30  # per pole in range
    pole_range_m: float = 60.0


@dataclass(frozen=True)
class LocalizationNoise:
    sigma_longitudinal: float = 0.0
    sigma_lateral: float = 0.0
    correlation_time_s: float = 5.0


@dataclass(frozen=True)
class Scenario:
    route_id: str
    path: tuple[Waypoint, ...]
    lights: tuple[ScenarioLight, ...]
    duration_s: float
    frame_rate_hz: float = 16.0
    rng_seed: int = 0
    activation_range_m: float = 100.0
    camera: CameraModel = field(default_factory=default_camera)
    lidar: LidarModel = field(default_factory=LidarModel)
    clutter: ClutterModel = field(default_factory=ClutterModel)
    localization_noise: LocalizationNoise = field(default_factory=LocalizationNoise)
    detector_noise: NoiseModel | None = None

    def __post_init__(self):
        if not self.route_id:
            raise InvalidScenario("route_id must be nonempty")
        if self.frame_rate_hz <= 0:
            raise InvalidScenario("frame_rate_hz must be positive")
        if self.duration_s <= 0:
            raise InvalidScenario("duration_s must be positive")
        if len(self.path) < 2:
            raise InvalidScenario("path needs at least two waypoints")
        ids = [l.id for l in self.lights]
        if len(set(ids)) != len(ids):
            raise InvalidScenario("duplicate light ids")
        for light in self.lights:
            entries = sorted(light.schedule, key=lambda e: e.start)
            for a, b in zip(entries, entries[1:]):
                if a.end > b.start:
                    raise InvalidScenario(f"overlapping schedule on light {light.id}")
        self._check_group_consistency()

    def _check_group_consistency(self):
        # two lit members of one group must never disagree
        by_group: dict[str, list[ScenarioLight]] = {}
        for l in self.lights:
            by_group.setdefault(l.group, []).append(l)
        lit = (FinalState.RED, FinalState.GREEN)
        for gid, members in by_group.items():
            for i, a in enumerate(members):
                for b in members[i + 1:]:
                    for ea in a.schedule:
                        if ea.state not in lit:
                            continue
                        for eb in b.schedule:
                            if eb.state not in lit or eb.state == ea.state:
                                continue
                            if ea.start < eb.end and eb.start < ea.end:
                                raise InvalidScenario(
                                    f"group {gid}: lights {a.id} and {b.id} disagree "
                                    f"({ea.state.value} vs {eb.state.value}) in overlapping time"
                                )

    def truth_map(self) -> PriorMap:
        lights = tuple(
            MapLight(l.id, np.asarray(l.position, dtype=float),
                     l.relevant_for or frozenset({self.route_id}))
            for l in self.lights
        )
        members: dict[str, set[str]] = {}
        for l in self.lights:
            members.setdefault(l.group, set()).add(l.id)
        groups = tuple(sorted((TLGroup(gid, frozenset(ids)) for gid, ids in members.items()),
                              key=lambda g: g.id))
        return PriorMap(route_id=self.route_id, lights=lights, groups=groups)


# ---------------------------------------------------------------------------
# Generation

def _path_poses(scenario: Scenario, n_frames: int) -> list[Pose6D]:
    """Walk the waypoint polyline at per-segment speed; hold the final pose."""
    wps = scenario.path
    dt = 1.0 / scenario.frame_rate_hz
    seg = 0
    into = 0.0
    poses = []

    def segment_vec(k):
        return wps[k + 1].position - wps[k].position

    def heading(k):
        v = segment_vec(k)
        return math.atan2(v[1], v[0])

    for _ in range(n_frames):
        while seg < len(wps) - 1:
            length = float(np.linalg.norm(segment_vec(seg)))
            if into < length or length == 0.0:
                break
            into -= length
            seg += 1
        if seg >= len(wps) - 1:
            pos = wps[-1].position
            yaw = heading(len(wps) - 2)
        else:
            length = float(np.linalg.norm(segment_vec(seg)))
            frac = 0.0 if length == 0.0 else into / length
            pos = wps[seg].position + frac * segment_vec(seg)
            yaw = heading(seg)
            into += wps[seg].speed * dt
        poses.append(Pose6D(float(pos[0]), float(pos[1]), float(pos[2]), yaw=yaw))
    return poses


def _project_head_bbox(cam: CameraModel, world_to_camera, light_pos) -> BoundingBox | None:
    """Pixel bbox of the head box, or None unless fully inside the image."""
    offsets = np.array([
        [sx, sy, sz]
        for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)
    ]) * HEAD_HALF_EXTENTS
    corners_cam = world_to_camera.apply(np.asarray(light_pos) + offsets)
    z = corners_cam[:, 2]
    if np.any(z <= 0.0):
        return None
    u = cam.fx * corners_cam[:, 0] / z + cam.cx
    v = cam.fy * corners_cam[:, 1] / z + cam.cy
    x0, x1 = float(u.min()), float(u.max())
    y0, y1 = float(v.min()), float(v.max())
    if x0 < 0 or y0 < 0 or x1 >= cam.width or y1 >= cam.height:
        return None
    if x1 - x0 < MIN_GT_BOX_PX or y1 - y0 < MIN_GT_BOX_PX:
        return None
    return BoundingBox(x0, y0, x1, y1)


def _within_vertical_fov(points_vehicle: np.ndarray, lidar: LidarModel) -> np.ndarray:
    rel = points_vehicle - np.asarray(lidar.origin)
    horiz = np.hypot(rel[:, 0], rel[:, 1])
    elev = np.degrees(np.arctan2(rel[:, 2], horiz))
    rng = np.linalg.norm(rel, axis=1)
    return (elev >= lidar.vfov_down_deg) & (elev <= lidar.vfov_up_deg) & (rng <= lidar.max_range_m)


def generate(scenario: Scenario) -> tuple[list[LogFrame], PriorMap, Rddf]:
    """Produce (log frames, truth prior map, reference trajectory).

    Deterministic given the scenario seed. Head samples are uniform points in
    the head box (so their projections stay inside the gt box by convexity),
    emitted only on frames where the light is lit and fully visible; clutter
    is a per-frame ground spray plus returns from fixed world poles.
    """
    truth = scenario.truth_map()
    n_frames = int(round(scenario.duration_s * scenario.frame_rate_hz))
    dt = 1.0 / scenario.frame_rate_hz
    true_poses = _path_poses(scenario, n_frames)
    rng = np.random.default_rng(scenario.rng_seed)
    cam = scenario.camera
    lidar = scenario.lidar
    clutter = scenario.clutter
    noise = scenario.localization_noise

    # stationary start for the pose-drift process
    drift = np.array([
        rng.normal(0.0, noise.sigma_longitudinal) if noise.sigma_longitudinal > 0 else 0.0,
        rng.normal(0.0, noise.sigma_lateral) if noise.sigma_lateral > 0 else 0.0,
    ])
    ou_a = math.exp(-dt / noise.correlation_time_s) if noise.correlation_time_s > 0 else 0.0
    ou_scale = math.sqrt(max(0.0, 1.0 - ou_a * ou_a))

    frames: list[LogFrame] = []
    for i in range(n_frames):
        t = i * dt
        true_pose = true_poses[i]
        world_to_vehicle = true_pose.to_transform().inverse()
        world_to_camera = cam.world_to_camera(true_pose)

        # ground-truth boxes for lit, fully visible lights
        gt_boxes: list[GroundTruthBox] = []
        lit_visible: list[ScenarioLight] = []
        for light in scenario.lights:
            state = light.state_at(t)
            if state not in (FinalState.RED, FinalState.GREEN):
                continue
            bbox = _project_head_bbox(cam, world_to_camera, light.position)
            if bbox is None:
                continue
            gt_boxes.append(GroundTruthBox(bbox, StateClass(state.value), light.id))
            lit_visible.append(light)

        # LiDAR: head samples, then pole returns, then ground spray
        chunks: list[np.ndarray] = []
        for light in lit_visible:
            local_center = world_to_vehicle.apply(np.asarray(light.position))
            d = float(np.linalg.norm(local_center - np.asarray(lidar.origin)))
            if d > lidar.max_range_m or d < 1e-6:
                continue
            n_hits = min(lidar.head_hit_cap, int(round(lidar.head_hit_base / (d * d))))
            if n_hits <= 0:
                continue
            samples = np.asarray(light.position) + rng.uniform(-1.0, 1.0, size=(n_hits, 3)) * HEAD_HALF_EXTENTS
            local = world_to_vehicle.apply(samples)
            chunks.append(local[_within_vertical_fov(local, lidar)])

        for pole in clutter.poles:
            base = np.array([pole.x, pole.y, 0.0])
            d = float(np.linalg.norm(world_to_vehicle.apply(base) - np.asarray(lidar.origin)))
            if d > clutter.pole_range_m:
                continue
            n = clutter.pole_points_per_frame
            pts = np.column_stack([
                pole.x + rng.normal(0.0, 0.05, n),
                pole.y + rng.normal(0.0, 0.05, n),
                rng.uniform(0.0, pole.height, n),
            ])
            local = world_to_vehicle.apply(pts)
            chunks.append(local[_within_vertical_fov(local, lidar)])

        budget = lidar.scan_budget - sum(len(c) for c in chunks)
        n_ground = max(0, min(clutter.ground_points_per_frame, budget))
        if n_ground:
            r0, r1 = clutter.ground_radius
            radius = np.sqrt(rng.uniform(r0 * r0, r1 * r1, n_ground))
            theta = rng.uniform(0.0, 2.0 * math.pi, n_ground)
            ground = np.column_stack([
                radius * np.cos(theta),
                radius * np.sin(theta),
                rng.normal(0.0, 0.02, n_ground),
            ])
            chunks.append(ground[_within_vertical_fov(ground, lidar)])

        scan = np.concatenate(chunks, axis=0) if chunks else np.empty((0, 3))
        if len(scan) > lidar.scan_budget:
            scan = scan[: lidar.scan_budget]

        # logged pose: true pose plus correlated drift in the vehicle frame
        if noise.sigma_longitudinal > 0 or noise.sigma_lateral > 0:
            step = np.array([
                rng.normal(0.0, noise.sigma_longitudinal) if noise.sigma_longitudinal > 0 else 0.0,
                rng.normal(0.0, noise.sigma_lateral) if noise.sigma_lateral > 0 else 0.0,
            ])
            drift = drift * ou_a + step * ou_scale
            c, s = math.cos(true_pose.yaw), math.sin(true_pose.yaw)
            offset = np.array([c * drift[0] - s * drift[1], s * drift[0] + c * drift[1], 0.0])
            logged_pose = Pose6D(true_pose.x + offset[0], true_pose.y + offset[1], true_pose.z,
                                 true_pose.roll, true_pose.pitch, true_pose.yaw)
        else:
            logged_pose = true_pose

        gt_state = _ground_truth_state(scenario, truth, true_pose, t)
        frames.append(LogFrame(t=t, pose=logged_pose, lidar=scan,
                               gt_detections=gt_boxes, gt_state=gt_state))

    waypoint_poses = _rddf_waypoints(scenario)
    rddf = Rddf(route_id=scenario.route_id, waypoints=waypoint_poses)
    return frames, truth, rddf


def _ground_truth_state(scenario: Scenario, truth: PriorMap, pose: Pose6D, t: float) -> FinalState:
    gid = active_group(pose, truth, scenario.activation_range_m)
    if gid is None:
        return FinalState.NONE
    lit = {
        light.state_at(t)
        for light in scenario.lights
        if light.group == gid and light.state_at(t) in (FinalState.RED, FinalState.GREEN)
    }
    if lit:
        return lit.pop()  # group consistency was validated at construction
    return FinalState.OFF


def _rddf_waypoints(scenario: Scenario) -> tuple[tuple[Pose6D, float], ...]:
    out = []
    wps = scenario.path
    for k, wp in enumerate(wps):
        seg = min(k, len(wps) - 2)
        v = wps[seg + 1].position - wps[seg].position
        yaw = math.atan2(v[1], v[0])
        p = wp.position
        out.append((Pose6D(float(p[0]), float(p[1]), float(p[2]), yaw=yaw), wp.speed))
    return tuple(out)


# ---------------------------------------------------------------------------
# Log JSONL

_FRAME_KEYS = {"t", "pose", "lidar", "gt_detections", "gt_state", "image_ref"}


def frame_to_wire(frame: LogFrame) -> dict:
    return {
        "t": frame.t,
        "pose": frame.pose.to_list(),
        "lidar": np.asarray(frame.lidar, dtype=float).ravel().tolist(),
        "gt_detections": [g.to_wire() for g in frame.gt_detections],
        "gt_state": frame.gt_state.wire,
        "image_ref": frame.image_ref,
    }


def frame_from_wire(obj: dict) -> LogFrame:
    if not isinstance(obj, dict):
        raise ValueError("frame record must be an object")
    unknown = set(obj) - _FRAME_KEYS
    if unknown:
        raise ValueError(f"unknown frame fields: {sorted(unknown)}")
    missing = _FRAME_KEYS - set(obj)
    if missing:
        raise ValueError(f"missing frame fields: {sorted(missing)}")
    flat = np.asarray(obj["lidar"], dtype=float)
    if flat.size % 3 != 0:
        raise ValueError("lidar array length must be a multiple of 3")
    return LogFrame(
        t=float(obj["t"]),
        pose=Pose6D.from_list(obj["pose"]),
        lidar=flat.reshape(-1, 3),
        gt_detections=[GroundTruthBox.from_wire(g) for g in obj["gt_detections"]],
        gt_state=FinalState.from_wire(obj["gt_state"]),
        image_ref=obj["image_ref"],
    )


def write_log(frames: Iterable[LogFrame], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for frame in frames:
            f.write(json.dumps(frame_to_wire(frame), separators=(",", ":")))
            f.write("\n")


def read_log(path) -> Iterator[LogFrame]:
    """Stream frames from a JSONL log.

    Tolerates an optional leading header object carrying "log_version";
    a header declaring any version other than the supported one raises
    VersionMismatch.
    """
    with open(path, "r", encoding="utf-8") as f:
        first_content_line = True
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"invalid JSON: {e.msg}", line=lineno) from None
            if first_content_line and isinstance(obj, dict) and "log_version" in obj:
                if obj["log_version"] != LOG_VERSION:
                    raise VersionMismatch(f"unsupported log version {obj['log_version']!r}")
                first_content_line = False
                continue
            first_content_line = False
            try:
                yield frame_from_wire(obj)
            except (KeyError, ValueError, TypeError) as e:
                raise ParseError(str(e), line=lineno) from None


def load_log(path) -> list[LogFrame]:
    return list(read_log(path))


# ---------------------------------------------------------------------------
# RDDF file

def save_rddf(rddf: Rddf, path) -> None:
    payload = {
        "route_id": rddf.route_id,
        "waypoints": [{"pose": pose.to_list(), "speed": speed} for pose, speed in rddf.waypoints],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def load_rddf(path) -> Rddf:
    with open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON in rddf {path}: {e}") from None
    waypoints = tuple(
        (Pose6D.from_list(w["pose"]), float(w["speed"])) for w in obj["waypoints"]
    )
    return Rddf(route_id=str(obj["route_id"]), waypoints=waypoints)


# ---------------------------------------------------------------------------
# Scenario JSON

def scenario_to_wire(s: Scenario) -> dict:
    return {
        "route_id": s.route_id,
        "duration_s": s.duration_s,
        "frame_rate_hz": s.frame_rate_hz,
        "rng_seed": s.rng_seed,
        "activation_range_m": s.activation_range_m,
        "camera": camera_to_wire(s.camera),
        "lidar": {
            "beams": s.lidar.beams, "points_per_beam": s.lidar.points_per_beam,
            "vfov_up_deg": s.lidar.vfov_up_deg, "vfov_down_deg": s.lidar.vfov_down_deg,
            "origin": list(s.lidar.origin), "max_range_m": s.lidar.max_range_m,
            "head_hit_base": s.lidar.head_hit_base, "head_hit_cap": s.lidar.head_hit_cap,
        },
        "path": [{"position": w.position.tolist(), "speed": w.speed} for w in s.path],
        "lights": [
            {
                "id": l.id, "position": np.asarray(l.position).tolist(), "group": l.group,
                "relevant_for": sorted(l.relevant_for),
                "schedule": [{"start": e.start, "end": e.end, "state": e.state.wire}
                             for e in l.schedule],
            }
            for l in s.lights
        ],
        "clutter": {
            "ground_points_per_frame": s.clutter.ground_points_per_frame,
            "ground_radius": list(s.clutter.ground_radius),
            "poles": [{"x": p.x, "y": p.y, "height": p.height} for p in s.clutter.poles],
            "pole_points_per_frame": s.clutter.pole_points_per_frame,
            "pole_range_m": s.clutter.pole_range_m,
        },
        "localization_noise": {
            "sigma_longitudinal": s.localization_noise.sigma_longitudinal,
            "sigma_lateral": s.localization_noise.sigma_lateral,
            "correlation_time_s": s.localization_noise.correlation_time_s,
        },
        "detector_noise": s.detector_noise.to_wire() if s.detector_noise else None,
    }


def scenario_from_wire(obj: dict) -> Scenario:
    try:
        camera = camera_from_wire(obj["camera"]) if "camera" in obj else default_camera()
        lidar = LidarModel(**obj["lidar"]) if "lidar" in obj else LidarModel()
        if isinstance(lidar.origin, list):
            lidar = LidarModel(**{**obj["lidar"], "origin": tuple(obj["lidar"]["origin"])})
        clutter = ClutterModel()
        if "clutter" in obj:
            cl = dict(obj["clutter"])
            cl["poles"] = tuple(PoleSpec(**p) for p in cl.get("poles", []))
            cl["ground_radius"] = tuple(cl.get("ground_radius", (4.0, 45.0)))
            clutter = ClutterModel(**cl)
        loc = LocalizationNoise(**obj.get("localization_noise", {}))
        det_noise = NoiseModel.from_wire(obj["detector_noise"]) if obj.get("detector_noise") else None
        lights = tuple(
            ScenarioLight(
                id=str(l["id"]),
                position=np.asarray(l["position"], dtype=float),
                group=str(l.get("group") or f"g-{l['id']}"),
                schedule=tuple(ScheduleEntry(float(e["start"]), float(e["end"]),
                                             FinalState.from_wire(e["state"]))
                               for e in l["schedule"]),
                relevant_for=frozenset(l.get("relevant_for", [])),
            )
            for l in obj["lights"]
        )
        path = tuple(Waypoint(np.asarray(w["position"], dtype=float), float(w["speed"]))
                     for w in obj["path"])
        return Scenario(
            route_id=str(obj["route_id"]),
            path=path,
            lights=lights,
            duration_s=float(obj["duration_s"]),
            frame_rate_hz=float(obj.get("frame_rate_hz", 16.0)),
            rng_seed=int(obj.get("rng_seed", 0)),
            activation_range_m=float(obj.get("activation_range_m", 100.0)),
            camera=camera,
            lidar=lidar,
            clutter=clutter,
            localization_noise=loc,
            detector_noise=det_noise,
        )
    except InvalidScenario:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidScenario(f"bad scenario: {e}") from e


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scenario_to_wire(s), f, indent=2)
        f.write("\n")


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidScenario(f"invalid JSON in scenario {path}: {e}") from None
    return scenario_from_wire(obj)
