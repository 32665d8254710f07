import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tlr.errors import NonPositiveDepth
from tlr.geometry import (
    BoundingBox,
    CameraModel,
    Pose6D,
    RigidTransform,
    camera_from_hfov,
    compose,
    default_camera,
    pixel_gate_radius,
    project_points,
    project_to_image,
    transform_point,
    vec3,
)

CAM = CameraModel(fx=1000.0, fy=1000.0, cx=320.0, cy=240.0, width=640, height=480)

angles = st.floats(-math.pi, math.pi, allow_nan=False, allow_infinity=False)
coords = st.floats(-1000.0, 1000.0, allow_nan=False, allow_infinity=False)


def random_transform(draw):
    r, p, y = draw(angles), draw(angles), draw(angles)
    t = np.array([draw(coords), draw(coords), draw(coords)])
    return RigidTransform.from_rpy(r, p, y, t)


class TestCompose:
    def test_identity(self):
        t = RigidTransform.from_rpy(0.1, -0.2, 0.3, (1.0, 2.0, 3.0))
        out = compose(t, RigidTransform.identity())
        assert np.allclose(out.rotation, t.rotation)
        assert np.allclose(out.translation, t.translation)

    def test_inverse_gives_identity(self):
        t = RigidTransform.from_rpy(0.4, 0.1, -1.2, (5.0, -3.0, 0.7))
        out = compose(t, t.inverse())
        assert np.allclose(out.rotation, np.eye(3), atol=1e-9)
        assert np.allclose(out.translation, 0.0, atol=1e-9)

    def test_two_quarter_turns(self):
        # rotZ(90) twice maps (1,0,0) to (-1,0,0)
        q = RigidTransform.rot_z(math.pi / 2)
        half = compose(q, q)
        assert np.allclose(half.apply(vec3(1, 0, 0)), [-1, 0, 0], atol=1e-12)

    def test_order_matters(self):
        a = RigidTransform.rot_z(math.pi / 2)
        b = RigidTransform(np.eye(3), np.array([1.0, 0.0, 0.0]))
        # b then a: translate then rotate
        assert np.allclose(compose(a, b).apply(vec3(0, 0, 0)), [0, 1, 0], atol=1e-12)
        assert np.allclose(compose(b, a).apply(vec3(0, 0, 0)), [1, 0, 0], atol=1e-12)


class TestTransformPoint:
    def test_identity(self):
        assert np.allclose(transform_point(RigidTransform.identity(), vec3(1, 2, 3)), [1, 2, 3])

    def test_pure_translation(self):
        t = RigidTransform(np.eye(3), np.array([0.0, 0.0, 5.0]))
        assert np.allclose(transform_point(t, vec3(1, 2, 3)), [1, 2, 8])

    def test_rotation_plus_translation(self):
        # rotZ(90) with t=(1,0,0): (1,0,0) -> (1,1,0)
        t = RigidTransform(RigidTransform.rot_z(math.pi / 2).rotation, np.array([1.0, 0.0, 0.0]))
        assert np.allclose(transform_point(t, vec3(1, 0, 0)), [1, 1, 0], atol=1e-12)

    def test_batch_matches_single(self):
        t = RigidTransform.from_rpy(0.2, -0.5, 1.1, (3.0, 2.0, 1.0))
        pts = np.array([[1.0, 2.0, 3.0], [-4.0, 0.5, 9.0]])
        batch = t.apply(pts)
        for i in range(2):
            assert np.allclose(batch[i], t.apply(pts[i]))

    @settings(max_examples=200)
    @given(st.data())
    def test_inverse_roundtrip(self, data):
        t = random_transform(data.draw)
        p = np.array([data.draw(coords), data.draw(coords), data.draw(coords)])
        back = transform_point(t.inverse(), transform_point(t, p))
        assert np.allclose(back, p, atol=1e-9)


class TestRigidTransformInvariants:
    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            RigidTransform(np.eye(3) * 2.0, np.zeros(3))

    def test_rejects_reflection(self):
        r = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError):
            RigidTransform(r, np.zeros(3))


class TestPose6D:
    def test_angle_normalization(self):
        p = Pose6D(0, 0, 0, yaw=3 * math.pi)
        assert math.isclose(p.yaw, math.pi)
        p2 = Pose6D(0, 0, 0, yaw=-math.pi)
        assert math.isclose(p2.yaw, math.pi)

    def test_yaw_pitch_roll_order(self):
        # pure yaw of 90 deg sends vehicle +x to world +y
        t = Pose6D(0, 0, 0, yaw=math.pi / 2).to_transform()
        assert np.allclose(t.apply(vec3(1, 0, 0)), [0, 1, 0], atol=1e-12)

    def test_roundtrip_list(self):
        p = Pose6D(1, 2, 3, 0.1, 0.2, 0.3)
        assert Pose6D.from_list(p.to_list()) == p


class TestProjectToImage:
    def test_optical_axis_hits_principal_point(self):
        assert project_to_image(CAM, vec3(0, 0, 10)) == PixelApprox(320, 240, 10)

    def test_offset_point(self):
        # u = 1000*1/10 + 320 = 420
        assert project_to_image(CAM, vec3(1, 0, 10)) == PixelApprox(420, 240, 10)

    def test_behind_camera(self):
        assert project_to_image(CAM, vec3(0, 0, -5)) is None

    def test_off_image(self):
        # u = 1000*4/10 + 320 = 720 >= 640
        assert project_to_image(CAM, vec3(4, 0, 10)) is None

    def test_never_returns_nonpositive_depth(self):
        for z in (-3.0, 0.0, 1e-9, 5.0):
            res = project_to_image(CAM, vec3(0, 0, z))
            if res is not None:
                assert res.depth > 0

    def test_batch_agrees_with_scalar(self):
        pts = np.array([[0, 0, 10], [1, 0, 10], [0, 0, -5], [4, 0, 10]], dtype=float)
        uv, depth, visible = project_points(CAM, pts)
        for i, p in enumerate(pts):
            single = project_to_image(CAM, p)
            if single is None:
                assert not visible[i]
            else:
                assert visible[i]
                assert np.allclose(uv[i], [single.u, single.v])
                assert math.isclose(depth[i], single.depth)

    def test_intrinsic_scaling_scales_pixels(self):
        k = 2.5
        scaled = CAM.scaled(k)
        a = project_to_image(CAM, vec3(0.5, -0.3, 12.0))
        b = project_to_image(scaled, vec3(0.5, -0.3, 12.0))
        assert a is not None and b is not None
        assert math.isclose(b.u, a.u * k) and math.isclose(b.v, a.v * k)
        assert math.isclose(
            pixel_gate_radius(scaled, 12.0, 1.5), k * pixel_gate_radius(CAM, 12.0, 1.5)
        )


class TestPixelGateRadius:
    def test_hand_values(self):
        assert math.isclose(pixel_gate_radius(CAM, 50.0, 1.5), 30.0)
        assert math.isclose(pixel_gate_radius(CAM, 15.0, 1.5), 100.0)

    def test_zero_radius(self):
        assert pixel_gate_radius(CAM, 10.0, 0.0) == 0.0

    def test_nonpositive_depth_raises(self):
        with pytest.raises(NonPositiveDepth):
            pixel_gate_radius(CAM, 0.0, 1.5)
        with pytest.raises(NonPositiveDepth):
            pixel_gate_radius(CAM, -2.0, 1.5)

    @given(
        st.floats(0.1, 500.0), st.floats(0.1, 500.0),
        st.floats(0.0, 10.0), st.floats(0.0, 10.0),
    )
    def test_monotonicity(self, d1, d2, r1, r2):
        if d1 > d2:
            d1, d2 = d2, d1
        if r1 > r2:
            r1, r2 = r2, r1
        assert pixel_gate_radius(CAM, d2, r1) <= pixel_gate_radius(CAM, d1, r1)
        assert pixel_gate_radius(CAM, d1, r1) <= pixel_gate_radius(CAM, d1, r2)


class TestBoundingBox:
    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            BoundingBox(10, 10, 10, 20)
        with pytest.raises(ValueError):
            BoundingBox(10, 30, 20, 20)

    def test_shrink(self):
        b = BoundingBox(0, 0, 10, 20).shrunk(0.1)
        assert b.center == (5.0, 10.0)
        assert math.isclose(b.width, 9.0) and math.isclose(b.height, 18.0)


class TestDefaultCamera:
    def test_matches_sensor_sheet(self):
        cam = default_camera()
        assert cam.width == 1280 and cam.height == 960
        assert math.isclose(cam.fx, 640.0 / math.tan(math.radians(33.0)))
        assert cam.fx == cam.fy

    def test_hfov_roundtrip(self):
        cam = camera_from_hfov(640, 480, 90.0)
        # 90 deg HFOV: fx == half the width
        assert math.isclose(cam.fx, 320.0)

    def test_forward_mount_axes(self):
        cam = default_camera()
        r = cam.extrinsics.rotation
        # camera z (optical axis) along vehicle +x, camera y (image down) along vehicle -z
        assert np.allclose(r @ np.array([0, 0, 1.0]), [1, 0, 0])
        assert np.allclose(r @ np.array([0, 1.0, 0]), [0, 0, -1])


class PixelApprox:
    """Equality helper for PixelPoint assertions."""

    def __init__(self, u, v, depth, tol=1e-9):
        self.u, self.v, self.depth, self.tol = u, v, depth, tol

    def __eq__(self, other):
        if other is None:
            return False
        return (
            math.isclose(other.u, self.u, abs_tol=self.tol)
            and math.isclose(other.v, self.v, abs_tol=self.tol)
            and math.isclose(other.depth, self.depth, abs_tol=self.tol)
        )
