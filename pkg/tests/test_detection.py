import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tlr.detection import (
    Detection,
    NoiseModel,
    ScriptedDetector,
    StateClass,
    filter_by_confidence,
    size_pool_from_frames,
)
from tlr.geometry import BoundingBox, CameraModel, Pose6D
from tlr.replay import GroundTruthBox, LogFrame

CAM = CameraModel(fx=1000.0, fy=1000.0, cx=320.0, cy=240.0, width=640, height=480)


def make_frame(t=0.0, boxes=()):
    gts = [GroundTruthBox(BoundingBox(*b), state, lid) for b, state, lid in boxes]
    return LogFrame(t=t, pose=Pose6D(0, 0, 0), lidar=np.empty((0, 3)), gt_detections=gts)


TWO_BOX_FRAME = make_frame(boxes=[
    ((100, 100, 140, 180), StateClass.RED, "l1"),
    ((300, 90, 330, 150), StateClass.GREEN, "l2"),
])


class TestScriptedDetector:
    def test_noiseless_passthrough(self):
        det = ScriptedDetector(CAM, noise=None)
        out = det.detect(TWO_BOX_FRAME)
        assert len(out) == 2
        assert all(d.confidence == 1.0 for d in out)
        got = {(d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max, d.state) for d in out}
        assert got == {(100, 100, 140, 180, StateClass.RED), (300, 90, 330, 150, StateClass.GREEN)}

    def test_same_frame_twice_is_identical(self):
        noise = NoiseModel(miss_base=0.2, center_jitter_sigma=2.0, size_jitter_sigma=0.1,
                           fp_rate=1.5, rng_seed=7)
        det = ScriptedDetector(CAM, noise)
        assert det.detect(TWO_BOX_FRAME) == det.detect(TWO_BOX_FRAME)

    def test_different_seeds_differ(self):
        frame = make_frame(boxes=[((100, 100, 140, 180), StateClass.RED, "l1")])
        a = ScriptedDetector(CAM, NoiseModel(center_jitter_sigma=3.0, rng_seed=1)).detect(frame)
        b = ScriptedDetector(CAM, NoiseModel(center_jitter_sigma=3.0, rng_seed=2)).detect(frame)
        assert a != b

    def test_total_dropout(self):
        det = ScriptedDetector(CAM, NoiseModel(miss_base=1.0))
        assert det.detect(TWO_BOX_FRAME) == []

    def test_sorted_by_descending_confidence(self):
        noise = NoiseModel(fp_rate=4.0, rng_seed=3)
        out = ScriptedDetector(CAM, noise).detect(TWO_BOX_FRAME)
        confs = [d.confidence for d in out]
        assert confs == sorted(confs, reverse=True)

    def test_boxes_stay_in_image(self):
        # GT box near the border plus violent jitter must still clip in-bounds
        frame = make_frame(boxes=[((0, 0, 30, 60), StateClass.RED, "l1"),
                                  ((610, 420, 639, 479), StateClass.GREEN, "l2")])
        noise = NoiseModel(center_jitter_sigma=15.0, size_jitter_sigma=0.5, fp_rate=3.0, rng_seed=11)
        for t in range(50):
            frame.t = float(t)
            for d in ScriptedDetector(CAM, noise).detect(frame):
                assert 0 <= d.bbox.x_min < d.bbox.x_max <= CAM.width
                assert 0 <= d.bbox.y_min < d.bbox.y_max <= CAM.height

    def test_small_boxes_missed_more(self):
        small = make_frame(boxes=[((100, 100, 104, 108), StateClass.RED, "s")])
        large = make_frame(boxes=[((100, 100, 220, 340), StateClass.RED, "b")])
        noise = NoiseModel(miss_area_scale=400.0, rng_seed=5)
        det = ScriptedDetector(CAM, noise)
        hits_small = sum(bool(det.detect(make_frame(t=float(k), boxes=[((100, 100, 104, 108), StateClass.RED, "s")])))
                         for k in range(200))
        hits_large = sum(bool(det.detect(make_frame(t=float(k), boxes=[((100, 100, 220, 340), StateClass.RED, "b")])))
                         for k in range(200))
        assert hits_small < hits_large
        assert hits_large > 190  # area >> scale: nearly always seen

    def test_fp_sizes_from_pool(self):
        noise = NoiseModel(fp_rate=5.0, rng_seed=9).with_size_pool([(10.0, 20.0)])
        out = ScriptedDetector(CAM, noise).detect(make_frame())
        assert out, "expected some false positives"
        for d in out:
            # uniform placement may clip at borders, never enlarge
            assert d.bbox.width <= 10.0 + 1e-9
            assert d.bbox.height <= 20.0 + 1e-9

    def test_size_pool_from_frames(self):
        pool = size_pool_from_frames([TWO_BOX_FRAME])
        assert pool == [(40.0, 80.0), (30.0, 60.0)]


class TestFilterByConfidence:
    def _dets(self, *confs):
        return [Detection(BoundingBox(0, 0, 10, 10), StateClass.RED, c) for c in confs]

    def test_straddle(self):
        out = filter_by_confidence(self._dets(0.6, 0.4), 0.5)
        assert [d.confidence for d in out] == [0.6]

    def test_zero_tau_identity(self):
        dets = self._dets(0.9, 0.1, 0.5)
        assert filter_by_confidence(dets, 0.0) == dets

    def test_boundary_inclusive(self):
        out = filter_by_confidence(self._dets(0.5), 0.5)
        assert len(out) == 1

    def test_rejects_bad_tau(self):
        with pytest.raises(ValueError):
            filter_by_confidence([], 1.5)

    @given(st.lists(st.floats(0.0, 1.0), max_size=30), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_nested_in_tau(self, confs, tau1, tau2):
        if tau1 > tau2:
            tau1, tau2 = tau2, tau1
        dets = self._dets(*confs)
        high = filter_by_confidence(dets, tau2)
        low = filter_by_confidence(dets, tau1)
        assert set(id(d) for d in high) <= set(id(d) for d in low)


class TestDetectionWire:
    def test_roundtrip(self):
        d = Detection(BoundingBox(1.5, 2.5, 30.0, 44.25), StateClass.GREEN, 0.625)
        assert Detection.from_wire(d.to_wire()) == d

    def test_confidence_bounds_enforced(self):
        with pytest.raises(ValueError):
            Detection(BoundingBox(0, 0, 1, 1), StateClass.RED, 1.2)
