"""Detector abstraction: classed, scored bounding boxes per frame.

Two backends share the ``detect(frame)`` contract: a deterministic scripted
detector that perturbs a frame's ground-truth annotations through a noise
model (for simulation and tests), and an HTTP client for a real model served
remotely. Output is always sorted by descending confidence and every box lies
within image bounds. No NMS is applied anywhere; backends are assumed to have
already suppressed duplicates.

Only two classes exist: RED (covering red and yellow) and GREEN.
"""

from __future__ import annotations

import base64
import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
import requests

from .errors import DetectorUnavailable
from .geometry import BoundingBox, CameraModel

DEFAULT_TIMEOUT_MS = 500
TIMEOUT_ENV_VAR = "TLR_DETECTOR_TIMEOUT_MS"


class StateClass(Enum):
    RED = "red"
    GREEN = "green"

    @property
    def wire(self) -> str:
        return self.value

    @staticmethod
    def from_wire(s: str) -> "StateClass":
        return StateClass(s)


@dataclass(frozen=True)
class Detection:
    bbox: BoundingBox
    state: StateClass
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of [0, 1]: {self.confidence}")

    def to_wire(self) -> dict:
        return {"bbox": self.bbox.to_list(), "class": self.state.wire, "confidence": self.confidence}

    @staticmethod
    def from_wire(obj: dict) -> "Detection":
        return Detection(
            bbox=BoundingBox.from_list(obj["bbox"]),
            state=StateClass.from_wire(obj["class"]),
            confidence=float(obj["confidence"]),
        )


def filter_by_confidence(dets: Sequence[Detection], tau: float) -> list[Detection]:
    """Keep detections with confidence >= tau, order preserved."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau out of [0, 1]: {tau}")
    return [d for d in dets if d.confidence >= tau]


@dataclass(frozen=True)
class NoiseModel:
    """Noise knobs for the scripted detector.

    The miss probability for a ground-truth box of pixel area A is
    clamp(miss_base + exp(-A / miss_area_scale), 0, 1): large boxes are missed
    at roughly miss_base, small (distant) boxes are dropped almost always.
    True-positive confidence is a Beta(tp) sample scaled by
    (1 - exp(-A / miss_area_scale)), so surviving small boxes also score low,
    which is what makes low confidence thresholds pay off at long range.
    False positives appear Poisson(fp_rate) per frame, placed uniformly, sized
    from ``fp_size_pool`` when provided (the empirical ground-truth size pool
    of a scenario; see ``size_pool_from_frames``), else from the current
    frame's ground truth, else from a default range.
    """

    miss_base: float = 0.0
    miss_area_scale: float = 400.0
    center_jitter_sigma: float = 0.0
    size_jitter_sigma: float = 0.0
    fp_rate: float = 0.0
    tp_confidence_beta: tuple[float, float] = (8.0, 2.0)
    fp_confidence_beta: tuple[float, float] = (2.0, 5.0)
    rng_seed: int = 0
    fp_size_pool: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.miss_base <= 1.0:
            raise ValueError("miss_base must be a probability")
        if not 0.0 <= self.fp_rate:
            raise ValueError("fp_rate must be >= 0")
        for s in (self.center_jitter_sigma, self.size_jitter_sigma):
            if s < 0:
                raise ValueError("jitter sigmas must be >= 0")
        if self.miss_area_scale <= 0:
            raise ValueError("miss_area_scale must be positive")

    def to_wire(self) -> dict:
        return {
            "miss_base": self.miss_base,
            "miss_area_scale": self.miss_area_scale,
            "center_jitter_sigma": self.center_jitter_sigma,
            "size_jitter_sigma": self.size_jitter_sigma,
            "fp_rate": self.fp_rate,
            "tp_confidence_beta": list(self.tp_confidence_beta),
            "fp_confidence_beta": list(self.fp_confidence_beta),
            "rng_seed": self.rng_seed,
            "fp_size_pool": [list(s) for s in self.fp_size_pool],
        }

    @staticmethod
    def from_wire(obj: dict) -> "NoiseModel":
        kwargs = dict(obj)
        for key in ("tp_confidence_beta", "fp_confidence_beta"):
            if key in kwargs:
                kwargs[key] = tuple(float(v) for v in kwargs[key])
        if "fp_size_pool" in kwargs:
            kwargs["fp_size_pool"] = tuple((float(w), float(h)) for w, h in kwargs["fp_size_pool"])
        return NoiseModel(**kwargs)

    def with_size_pool(self, sizes: Iterable[tuple[float, float]]) -> "NoiseModel":
        return replace(self, fp_size_pool=tuple(sizes))


def size_pool_from_frames(frames) -> list[tuple[float, float]]:
    """Empirical (width, height) pool of all ground-truth boxes in a log."""
    pool = []
    for frame in frames:
        for gt in frame.gt_detections:
            pool.append((gt.bbox.width, gt.bbox.height))
    return pool


def _clip_box(x0, y0, x1, y1, width, height) -> BoundingBox | None:
    x0, x1 = max(0.0, x0), min(float(width), x1)
    y0, y1 = max(0.0, y0), min(float(height), y1)
    if x0 >= x1 or y0 >= y1:
        return None
    return BoundingBox(x0, y0, x1, y1)


class ScriptedDetector:
    """Replays a frame's ground-truth boxes through a noise model.

    Randomness is derived per frame from (rng_seed, frame timestamp), so
    detecting the same frame twice yields identical output. With ``noise``
    None the detector is an exact pass-through at confidence 1.0.
    """

    def __init__(self, camera: CameraModel, noise: NoiseModel | None = None):
        self.camera = camera
        self.noise = noise

    def _frame_rng(self, t: float) -> np.random.Generator:
        key = int(round(t * 1e6)) & 0x7FFFFFFFFFFFFFFF
        return np.random.default_rng([self.noise.rng_seed & 0x7FFFFFFFFFFFFFFF, key])

    def detect(self, frame) -> list[Detection]:
        gts = frame.gt_detections
        if self.noise is None:
            dets = [Detection(gt.bbox, gt.state, 1.0) for gt in gts]
            return sorted(dets, key=lambda d: -d.confidence)

        nm = self.noise
        rng = self._frame_rng(frame.t)
        w, h = self.camera.width, self.camera.height
        dets: list[Detection] = []

        for gt in gts:
            area = gt.bbox.area
            p_miss = min(1.0, max(0.0, nm.miss_base + math.exp(-area / nm.miss_area_scale)))
            miss_roll = rng.random()
            jitter = rng.normal(size=4)
            conf_roll = rng.beta(*nm.tp_confidence_beta)
            if miss_roll < p_miss:
                continue
            cx, cy = gt.bbox.center
            cx += nm.center_jitter_sigma * jitter[0]
            cy += nm.center_jitter_sigma * jitter[1]
            bw = gt.bbox.width * max(0.1, 1.0 + nm.size_jitter_sigma * jitter[2])
            bh = gt.bbox.height * max(0.1, 1.0 + nm.size_jitter_sigma * jitter[3])
            box = _clip_box(cx - bw / 2, cy - bh / 2, cx + bw / 2, cy + bh / 2, w, h)
            if box is None:
                continue
            size_factor = 1.0 - math.exp(-area / nm.miss_area_scale)
            conf = min(1.0, max(0.0, conf_roll * size_factor))
            dets.append(Detection(box, gt.state, conf))

        n_fp = rng.poisson(nm.fp_rate) if nm.fp_rate > 0 else 0
        if n_fp:
            pool = list(nm.fp_size_pool) or [(g.bbox.width, g.bbox.height) for g in gts]
            for _ in range(n_fp):
                if pool:
                    bw, bh = pool[rng.integers(len(pool))]
                else:
                    bw, bh = rng.uniform(4.0, 40.0), rng.uniform(8.0, 80.0)
                cx, cy = rng.uniform(0, w), rng.uniform(0, h)
                box = _clip_box(cx - bw / 2, cy - bh / 2, cx + bw / 2, cy + bh / 2, w, h)
                if box is None:
                    continue
                state = StateClass.RED if rng.random() < 0.5 else StateClass.GREEN
                conf = float(rng.beta(*nm.fp_confidence_beta))
                dets.append(Detection(box, state, min(1.0, max(0.0, conf))))

        dets.sort(key=lambda d: -d.confidence)
        return dets


def write_detections(stream: Iterable[tuple[float, Sequence[Detection]]], path) -> None:
    """JSONL of raw per-frame detector output: {"t": s, "detections": [...]}."""
    import json

    with open(path, "w", encoding="utf-8") as f:
        for t, dets in stream:
            f.write(json.dumps({"t": t, "detections": [d.to_wire() for d in dets]},
                               separators=(",", ":")))
            f.write("\n")


def read_detections(path) -> list[tuple[float, list[Detection]]]:
    import json

    from .errors import ParseError

    out = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                out.append((float(obj["t"]), [Detection.from_wire(d) for d in obj["detections"]]))
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                raise ParseError(f"bad detection record: {e}", line=lineno) from None
    return out


def _timeout_seconds(timeout_ms: int | None) -> float:
    if timeout_ms is None:
        timeout_ms = int(os.environ.get(TIMEOUT_ENV_VAR, DEFAULT_TIMEOUT_MS))
    return timeout_ms / 1000.0


class RemoteDetector:
    """HTTP client for a detector service.

    POSTs {"image_b64": <png>, "tau": <float>} to ``base_url``/detect and
    expects {"detections": [{"bbox": [...], "class": "red"|"green",
    "confidence": c}]}. Responses are sanitized: boxes are clipped to the
    image, degenerate boxes and unknown classes dropped, confidence clamped
    to [0, 1]. Safe for concurrent requests.
    """

    def __init__(self, base_url: str, camera: CameraModel, tau: float = 0.0,
                 timeout_ms: int | None = None, session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.camera = camera
        self.tau = tau
        self.timeout_s = _timeout_seconds(timeout_ms)
        self._session = session or requests.Session()

    def detect(self, frame) -> list[Detection]:
        if frame.image_ref is None:
            raise ValueError("remote detection needs a frame with an image reference")
        try:
            with open(frame.image_ref, "rb") as f:
                payload = base64.b64encode(f.read()).decode("ascii")
        except OSError as e:
            raise DetectorUnavailable(f"cannot read image {frame.image_ref}: {e}") from e
        try:
            resp = self._session.post(
                f"{self.base_url}/detect",
                json={"image_b64": payload, "tau": self.tau},
                timeout=self.timeout_s,
            )
            resp.raise_for_status()
            body = resp.json()
        except (requests.RequestException, ValueError) as e:
            raise DetectorUnavailable(f"detector backend failed: {e}") from e
        return self._sanitize(body)

    def _sanitize(self, body) -> list[Detection]:
        try:
            raw = body["detections"]
        except (TypeError, KeyError) as e:
            raise DetectorUnavailable(f"malformed detector response: {body!r}") from e
        dets: list[Detection] = []
        for item in raw:
            try:
                x0, y0, x1, y1 = (float(v) for v in item["bbox"])
                state = StateClass.from_wire(item["class"])
                conf = min(1.0, max(0.0, float(item["confidence"])))
            except (TypeError, KeyError, ValueError):
                continue
            box = _clip_box(x0, y0, x1, y1, self.camera.width, self.camera.height)
            if box is None:
                continue
            dets.append(Detection(box, state, conf))
        dets.sort(key=lambda d: -d.confidence)
        return dets
