"""Rigid-body transforms, pinhole camera model, and image-space projections.

Coordinate conventions (fixed; all wire formats depend on them):

  World frame:   right-handed, z up. Traffic-light positions live here.
  Vehicle frame: x forward, y left, z up; origin on the ground under the
                 rear-axle center. "Ahead of the vehicle" means x > 0.
  Camera frame:  z forward (optical axis), x right, y down.
  Image frame:   u right, v down, origin at the top-left pixel corner.

Euler angles in ``Pose6D`` compose as yaw*pitch*roll (intrinsic Z-Y-X),
i.e. R = Rz(yaw) @ Ry(pitch) @ Rx(roll).

The camera model is a pure pinhole without lens distortion. Gating spheres
are projected conservatively as circles of radius max(fx, fy) * R / depth
centered on the projected sphere center, not as true conic outlines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NonPositiveDepth

Vec3 = np.ndarray  # shape (3,), float64

_ROT_ATOL = 1e-9


def vec3(x: float, y: float, z: float) -> Vec3:
    """Build a finite 3-vector."""
    v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector components: {v}")
    return v


def as_points(points) -> np.ndarray:
    """Coerce to an (N, 3) float64 array; a single (3,) vector becomes (1, 3)."""
    a = np.asarray(points, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, 3)
    if a.ndim != 2 or a.shape[1] != 3:
        raise ValueError(f"expected (N, 3) points, got shape {a.shape}")
    return a


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    w = math.remainder(a, math.tau)
    if w <= -math.pi:
        w += math.tau
    return w


def _rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=float)


def _rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=float)


def _rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=float)


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation; maps points from one frame into another."""

    rotation: np.ndarray
    translation: Vec3

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if r.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {r.shape}")
        if not np.all(np.isfinite(r)) or not np.all(np.isfinite(t)):
            raise ValueError("non-finite transform")
        if not np.allclose(r.T @ r, np.eye(3), atol=_ROT_ATOL, rtol=0.0):
            raise ValueError("rotation is not orthonormal within 1e-9")
        if abs(float(np.linalg.det(r)) - 1.0) > _ROT_ATOL:
            raise ValueError("rotation determinant is not +1 within 1e-9")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3))

    @staticmethod
    def from_rpy(roll: float, pitch: float, yaw: float, translation=(0.0, 0.0, 0.0)) -> "RigidTransform":
        """Intrinsic Z-Y-X: R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
        r = _rot_z(yaw) @ _rot_y(pitch) @ _rot_x(roll)
        return RigidTransform(r, np.asarray(translation, dtype=float))

    @staticmethod
    def rot_z(a: float) -> "RigidTransform":
        return RigidTransform(_rot_z(a), np.zeros(3))

    def inverse(self) -> "RigidTransform":
        r_inv = self.rotation.T
        return RigidTransform(r_inv, -(r_inv @ self.translation))

    def apply(self, points) -> np.ndarray:
        """Transform a (3,) point or (N, 3) batch; preserves the input shape."""
        p = np.asarray(points, dtype=float)
        if p.ndim == 1:
            return self.rotation @ p + self.translation
        return p @ self.rotation.T + self.translation


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Transform applying ``b`` first, then ``a``."""
    return RigidTransform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def transform_point(t: RigidTransform, p) -> np.ndarray:
    """R @ p + translation."""
    return t.apply(p)


@dataclass(frozen=True)
class Pose6D:
    """Vehicle pose in the world frame: position in meters, angles in radians.

    Angles are normalized to (-pi, pi] at construction.
    """

    x: float
    y: float
    z: float
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "z", "roll", "pitch", "yaw"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite pose field {name}")
        object.__setattr__(self, "roll", wrap_angle(self.roll))
        object.__setattr__(self, "pitch", wrap_angle(self.pitch))
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    @property
    def position(self) -> Vec3:
        return np.array([self.x, self.y, self.z], dtype=float)

    def to_transform(self) -> RigidTransform:
        """Vehicle-to-world transform for this pose."""
        return RigidTransform.from_rpy(self.roll, self.pitch, self.yaw, self.position)

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.z, self.roll, self.pitch, self.yaw]

    @staticmethod
    def from_list(values) -> "Pose6D":
        x, y, z, roll, pitch, yaw = (float(v) for v in values)
        return Pose6D(x, y, z, roll, pitch, yaw)


class PixelPoint(NamedTuple):
    """Sub-pixel image location of a projected 3D point, with its camera depth."""

    u: float
    v: float
    depth: float


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box; x_min < x_max and y_min < y_max."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box {self}")

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def shrunk(self, fraction: float) -> "BoundingBox":
        """Box scaled about its center by (1 - fraction) per side."""
        if not 0.0 <= fraction < 1.0:
            raise ValueError("shrink fraction must be in [0, 1)")
        cx, cy = self.center
        hw = 0.5 * self.width * (1.0 - fraction)
        hh = 0.5 * self.height * (1.0 - fraction)
        return BoundingBox(cx - hw, cy - hh, cx + hw, cy + hh)

    def to_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    @staticmethod
    def from_list(values) -> "BoundingBox":
        x0, y0, x1, y1 = (float(v) for v in values)
        return BoundingBox(x0, y0, x1, y1)


# Camera mounted front-facing: optical axis along vehicle +x, image right
# along vehicle -y, image down along vehicle -z.
CAMERA_FORWARD_ROTATION = np.array(
    [[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]], dtype=float
)


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus the camera pose in the vehicle frame."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    extrinsics: RigidTransform = field(
        default_factory=lambda: RigidTransform(CAMERA_FORWARD_ROTATION, np.array([1.2, 0.0, 2.0]))
    )

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point outside image")

    def vehicle_to_camera(self) -> RigidTransform:
        return self.extrinsics.inverse()

    def world_to_camera(self, vehicle_pose: Pose6D) -> RigidTransform:
        return compose(self.vehicle_to_camera(), vehicle_pose.to_transform().inverse())

    def scaled(self, k: float) -> "CameraModel":
        """Camera for an image uniformly resized by factor k."""
        return CameraModel(
            self.fx * k, self.fy * k, self.cx * k, self.cy * k,
            int(round(self.width * k)), int(round(self.height * k)), self.extrinsics,
        )


def camera_from_hfov(width: int, height: int, hfov_deg: float,
                     extrinsics: RigidTransform | None = None) -> CameraModel:
    """Square-pixel pinhole camera from a horizontal field of view."""
    fx = (width / 2.0) / math.tan(math.radians(hfov_deg) / 2.0)
    kwargs = {} if extrinsics is None else {"extrinsics": extrinsics}
    return CameraModel(fx, fx, width / 2.0, height / 2.0, width, height, **kwargs)


def default_camera() -> CameraModel:
    """1280x960, 66 deg HFOV front camera (the simulator default)."""
    return camera_from_hfov(1280, 960, 66.0)


def camera_to_wire(cam: CameraModel) -> dict:
    return {
        "fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy,
        "width": cam.width, "height": cam.height,
        "extrinsics": {
            "rotation": cam.extrinsics.rotation.tolist(),
            "translation": cam.extrinsics.translation.tolist(),
        },
    }


def camera_from_wire(obj: dict) -> CameraModel:
    extr = RigidTransform(
        np.asarray(obj["extrinsics"]["rotation"], dtype=float),
        np.asarray(obj["extrinsics"]["translation"], dtype=float),
    )
    return CameraModel(float(obj["fx"]), float(obj["fy"]), float(obj["cx"]), float(obj["cy"]),
                       int(obj["width"]), int(obj["height"]), extr)


def project_to_image(cam: CameraModel, p_camera) -> PixelPoint | None:
    """Project a camera-frame point; None when behind the camera or off-image."""
    x, y, z = (float(c) for c in np.asarray(p_camera, dtype=float).reshape(3))
    if z <= 0.0:
        return None
    u = cam.fx * x / z + cam.cx
    v = cam.fy * y / z + cam.cy
    if not (0.0 <= u < cam.width and 0.0 <= v < cam.height):
        return None
    return PixelPoint(u, v, z)


def project_points(cam: CameraModel, pts_camera: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized projection of (N, 3) camera-frame points.

    Returns (uv (N, 2), depth (N,), visible (N,) bool). uv rows for invisible
    points are unspecified.
    """
    pts = as_points(pts_camera)
    z = pts[:, 2]
    in_front = z > 0.0
    safe_z = np.where(in_front, z, 1.0)
    u = cam.fx * pts[:, 0] / safe_z + cam.cx
    v = cam.fy * pts[:, 1] / safe_z + cam.cy
    visible = in_front & (u >= 0.0) & (u < cam.width) & (v >= 0.0) & (v < cam.height)
    return np.stack([u, v], axis=1), z, visible


def pixel_gate_radius(cam: CameraModel, depth: float, r_world: float) -> float:
    """Image radius of a world-space gating sphere at the given depth.

    Conservative circular approximation: max(fx, fy) * r_world / depth.
    """
    if depth <= 0.0:
        raise NonPositiveDepth(f"depth must be positive, got {depth}")
    if r_world < 0.0:
        raise ValueError("gate radius must be >= 0")
    return max(cam.fx, cam.fy) * r_world / depth
