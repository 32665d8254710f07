import math

import numpy as np
import pytest

from tlr.detection import Detection, ScriptedDetector, StateClass, filter_by_confidence
from tlr.geometry import BoundingBox, Pose6D, default_camera, pixel_gate_radius, project_to_image
from tlr.mapping import MapLight, PriorMap, TLGroup
from tlr.recognition import (
    Advisory,
    FinalState,
    FrameVerdict,
    RecognizerConfig,
    active_group,
    read_verdicts,
    recognize_frame,
    run_log,
    write_verdicts,
)
from tlr.replay import LogFrame, generate
from tlr.scenarios import single_light_approach, two_light_redundancy

CAM = default_camera()
CFG = RecognizerConfig(activation_range=100.0, gate_radius=1.5, tau=0.5)


def one_group_map(*positions, route="r"):
    lights = tuple(MapLight(f"L{i}", np.asarray(p, dtype=float), frozenset({route}))
                   for i, p in enumerate(positions))
    groups = (TLGroup("g0", frozenset(l.id for l in lights)),)
    return PriorMap(route_id=route, lights=lights, groups=groups)


def frame_at(pose, t=0.0):
    return LogFrame(t=t, pose=pose, lidar=np.empty((0, 3)))


def box_at(u, v, w=12.0, h=30.0, state=StateClass.RED, conf=0.9):
    return Detection(BoundingBox(u - w / 2, v - h / 2, u + w / 2, v + h / 2), state, conf)


class TestActiveGroup:
    def test_beyond_range(self):
        prior = one_group_map([150.0, 0.0, 4.5])
        assert active_group(Pose6D(0, 0, 0), prior, 100.0) is None

    def test_in_range_ahead(self):
        prior = one_group_map([50.0, 0.0, 4.5])
        assert active_group(Pose6D(0, 0, 0), prior, 100.0) == "g0"

    def test_behind_vehicle(self):
        prior = one_group_map([-5.0, 0.0, 4.5])
        assert active_group(Pose6D(0, 0, 0), prior, 100.0) is None

    def test_behind_respects_heading(self):
        # light 5 m to the world -x side, vehicle facing -x: it is ahead
        prior = one_group_map([-5.0, 0.0, 4.5])
        assert active_group(Pose6D(0, 0, 0, yaw=math.pi), prior, 100.0) == "g0"

    def test_nearest_group_wins(self):
        lights = (
            MapLight("near", np.array([40.0, 0.0, 4.5]), frozenset({"r"})),
            MapLight("far", np.array([90.0, 0.0, 4.5]), frozenset({"r"})),
        )
        prior = PriorMap("r", lights, (TLGroup("g-near", frozenset({"near"})),
                                       TLGroup("g-far", frozenset({"far"}))))
        assert active_group(Pose6D(0, 0, 0), prior, 100.0) == "g-near"

    def test_group_with_one_member_behind_still_active(self):
        prior = one_group_map([-5.0, 0.0, 4.5], [30.0, 0.0, 4.5])
        assert active_group(Pose6D(0, 0, 0), prior, 100.0) == "g0"


class TestRecognizeFrame:
    def test_none_when_no_group(self):
        prior = one_group_map([500.0, 0.0, 4.5])
        v = recognize_frame(frame_at(Pose6D(0, 0, 0)), [], prior, CAM, CFG)
        assert v.state is FinalState.NONE
        assert v.active_group is None
        assert v.advisory is Advisory.NO_CONSTRAINT

    def test_off_on_zero_detections(self):
        prior = one_group_map([40.0, 0.0, 4.5])
        v = recognize_frame(frame_at(Pose6D(0, 0, 0)), [], prior, CAM, CFG)
        assert v.state is FinalState.OFF
        assert v.advisory is Advisory.SLOW_STOP
        assert v.active_group == "g0"
        assert v.projected_lights, "active lights should still project"

    def test_single_centered_red(self):
        prior = one_group_map([40.0, 0.0, 4.5])
        pose = Pose6D(0, 0, 0)
        pix = project_to_image(CAM, CAM.world_to_camera(pose).apply(np.array([40.0, 0.0, 4.5])))
        v = recognize_frame(frame_at(pose), [box_at(pix.u, pix.v)], prior, CAM, CFG)
        assert v.state is FinalState.RED
        assert v.advisory is Advisory.SLOW_STOP
        assert v.selected is not None

    def test_min_distance_selection(self):
        prior = one_group_map([40.0, 0.0, 4.5])
        pose = Pose6D(0, 0, 0)
        pix = project_to_image(CAM, CAM.world_to_camera(pose).apply(np.array([40.0, 0.0, 4.5])))
        dets = [
            box_at(pix.u + 12.0, pix.v, state=StateClass.RED, conf=0.99),
            box_at(pix.u + 4.0, pix.v, state=StateClass.GREEN, conf=0.6),
        ]
        v = recognize_frame(frame_at(pose), dets, prior, CAM, CFG)
        assert v.state is FinalState.GREEN
        assert v.selected.state is StateClass.GREEN

    def test_out_of_gate_discarded(self):
        prior = one_group_map([40.0, 0.0, 4.5])
        pose = Pose6D(0, 0, 0)
        pix = project_to_image(CAM, CAM.world_to_camera(pose).apply(np.array([40.0, 0.0, 4.5])))
        gate_px = pixel_gate_radius(CAM, pix.depth, CFG.gate_radius)
        v = recognize_frame(frame_at(pose), [box_at(pix.u + gate_px + 5.0, pix.v)], prior, CAM, CFG)
        assert v.state is FinalState.OFF

    def test_tie_breaks_red_over_green(self):
        prior = one_group_map([40.0, 0.0, 4.5])
        pose = Pose6D(0, 0, 0)
        pix = project_to_image(CAM, CAM.world_to_camera(pose).apply(np.array([40.0, 0.0, 4.5])))
        dets = [
            box_at(pix.u + 5.0, pix.v, state=StateClass.GREEN, conf=0.7),
            box_at(pix.u - 5.0, pix.v, state=StateClass.RED, conf=0.7),
        ]
        v = recognize_frame(frame_at(pose), dets, prior, CAM, CFG)
        assert v.state is FinalState.RED

    def test_gate_soundness_randomized(self):
        rng = np.random.default_rng(9)
        prior = one_group_map([60.0, 4.0, 4.5], [60.0, -4.0, 4.5])
        for _ in range(300):
            pose = Pose6D(rng.uniform(-40, 55), rng.uniform(-2, 2), 0.0,
                          yaw=rng.uniform(-0.2, 0.2))
            dets = [
                box_at(rng.uniform(0, CAM.width), rng.uniform(0, CAM.height),
                       state=StateClass.RED if rng.random() < 0.5 else StateClass.GREEN,
                       conf=float(rng.uniform(0.5, 1.0)))
                for _ in range(rng.integers(0, 6))
            ]
            v = recognize_frame(frame_at(pose), dets, prior, CAM, CFG)
            if v.selected is not None:
                cx, cy = v.selected.bbox.center
                assert any(
                    math.hypot(cx - p.pixel.u, cy - p.pixel.v) <= p.gate_px
                    for p in v.projected_lights
                )
            if v.state in (FinalState.RED, FinalState.GREEN):
                assert v.selected is not None

    def test_verdict_invariants_enforced(self):
        with pytest.raises(ValueError):
            FrameVerdict(state=FinalState.NONE, active_group="g0")
        with pytest.raises(ValueError):
            FrameVerdict(state=FinalState.RED, active_group="g0", selected=None)


class TestMonotoneTau:
    def test_lowering_tau_never_turns_red_green_into_off(self):
        rng = np.random.default_rng(4)
        prior = one_group_map([50.0, 0.0, 4.5])
        pose = Pose6D(0, 0, 0)
        pix = project_to_image(CAM, CAM.world_to_camera(pose).apply(np.array([50.0, 0.0, 4.5])))
        for _ in range(200):
            dets = [
                box_at(pix.u + rng.uniform(-30, 30), pix.v + rng.uniform(-30, 30),
                       state=StateClass.RED if rng.random() < 0.5 else StateClass.GREEN,
                       conf=float(rng.uniform(0, 1)))
                for _ in range(rng.integers(0, 5))
            ]
            dets.sort(key=lambda d: -d.confidence)
            hi = recognize_frame(frame_at(pose), filter_by_confidence(dets, 0.5), prior, CAM, CFG)
            lo = recognize_frame(frame_at(pose), filter_by_confidence(dets, 0.2), prior, CAM, CFG)
            if hi.state in (FinalState.RED, FinalState.GREEN):
                assert lo.state in (FinalState.RED, FinalState.GREEN)


class TestRunLog:
    def test_empty_log(self):
        prior = one_group_map([40.0, 0.0, 4.5])
        assert run_log([], prior, ScriptedDetector(CAM), CAM, CFG) == []

    def test_all_out_of_range(self):
        prior = one_group_map([1000.0, 0.0, 4.5])
        frames = [frame_at(Pose6D(float(i), 0, 0), t=float(i)) for i in range(5)]
        verdicts = run_log(frames, prior, ScriptedDetector(CAM), CAM, CFG)
        assert [v.state for _, v in verdicts] == [FinalState.NONE] * 5

    def test_noiseless_fidelity(self):
        scenario = single_light_approach(seed=6, switch_at=12.0)
        frames, truth, _ = generate(scenario)
        detector = ScriptedDetector(scenario.camera)
        verdicts = run_log(frames, truth, detector, scenario.camera,
                           RecognizerConfig(tau=0.5))
        relevant = truth.lights[0].id
        for frame, (t, v) in zip(frames, verdicts):
            assert t == frame.t
            if frame.gt_state is FinalState.NONE:
                assert v.state is FinalState.NONE
            elif any(g.light_id == relevant for g in frame.gt_detections):
                assert v.state is frame.gt_state
            else:
                assert v.state is FinalState.OFF

    def test_group_redundancy_uses_readable_member(self):
        scenario = two_light_redundancy(seed=2)
        frames, truth, _ = generate(scenario)
        verdicts = run_log(frames, truth, ScriptedDetector(scenario.camera),
                           scenario.camera, RecognizerConfig(tau=0.5))
        saw_detected = 0
        for frame, (_, v) in zip(frames, verdicts):
            if v.active_group is None:
                continue
            if frame.gt_detections:
                assert v.state is FinalState.RED, "readable member must carry the group"
                saw_detected += 1
        assert saw_detected > 30


class TestVerdictWire:
    def test_roundtrip(self, tmp_path):
        scenario = single_light_approach(seed=8)
        frames, truth, _ = generate(scenario)
        verdicts = run_log(frames[:120], truth, ScriptedDetector(scenario.camera),
                           scenario.camera, CFG)
        path = tmp_path / "verdicts.jsonl"
        write_verdicts(verdicts, path)
        loaded = read_verdicts(path)
        assert [(t, v.state, v.active_group, v.selected, v.advisory) for t, v in loaded] == [
            (t, v.state, v.active_group, v.selected, v.advisory) for t, v in verdicts
        ]
        # write-read-write byte identity
        path2 = tmp_path / "verdicts2.jsonl"
        write_verdicts(loaded, path2)
        assert path.read_bytes() == path2.read_bytes()
