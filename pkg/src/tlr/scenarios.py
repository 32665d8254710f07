"""Ready-made synthetic scenarios for demos, tests and acceptance runs.

All of them drive a straight avenue along +x at constant speed; lights hang
4.5 m high, 4 m to either side of the lane, well inside camera view during an
approach. Poles sit 12 m off the lane so their returns never share a sightline
with a light head.
"""

from __future__ import annotations

import numpy as np

from .detection import NoiseModel
from .recognition import FinalState
from .replay import (
    ClutterModel,
    LocalizationNoise,
    PoleSpec,
    Scenario,
    ScenarioLight,
    ScheduleEntry,
    Waypoint,
)

PLATFORM_SIGMA_LONGITUDINAL = 0.28
PLATFORM_SIGMA_LATERAL = 0.14


def _light(light_id: str, x: float, y: float, group: str,
           schedule: tuple[ScheduleEntry, ...]) -> ScenarioLight:
    return ScenarioLight(id=light_id, position=np.array([x, y, 4.5]),
                         group=group, schedule=schedule)


def _constant(state: FinalState, duration: float) -> tuple[ScheduleEntry, ...]:
    return (ScheduleEntry(0.0, duration, state),)


def six_lights_three_groups(seed: int = 0,
                            localization_noise: LocalizationNoise | None = None,
                            detector_noise: NoiseModel | None = None,
                            ground_points: int = 1500) -> Scenario:
    """Three paired-light intersections along a 400 m straight, one pass."""
    duration = 40.0
    red = _constant(FinalState.RED, duration)
    green = _constant(FinalState.GREEN, duration)
    switch = (ScheduleEntry(0.0, 30.0, FinalState.RED), ScheduleEntry(30.0, duration, FinalState.GREEN))
    lights = (
        _light("a1", 120.0, 4.0, "ga", red),
        _light("a2", 120.0, -4.0, "ga", red),
        _light("b1", 240.0, 4.0, "gb", green),
        _light("b2", 240.0, -4.0, "gb", green),
        _light("c1", 360.0, 4.0, "gc", switch),
        _light("c2", 360.0, -4.0, "gc", switch),
    )
    return Scenario(
        route_id="avenue-east",
        path=(Waypoint(np.array([0.0, 0.0, 0.0]), 10.0), Waypoint(np.array([400.0, 0.0, 0.0]), 10.0)),
        lights=lights,
        duration_s=duration,
        rng_seed=seed,
        clutter=ClutterModel(
            ground_points_per_frame=ground_points,
            poles=(PoleSpec(60.0, 12.0, 6.0), PoleSpec(180.0, -12.0, 6.0), PoleSpec(300.0, 12.0, 6.0)),
        ),
        localization_noise=localization_noise or LocalizationNoise(),
        detector_noise=detector_noise,
    )


def single_light_approach(seed: int = 0, state: FinalState = FinalState.RED,
                          switch_at: float | None = None,
                          localization_noise: LocalizationNoise | None = None,
                          detector_noise: NoiseModel | None = None,
                          ground_points: int = 800) -> Scenario:
    """One light 150 m down the road, reached at 10 m/s."""
    duration = 15.0
    if switch_at is None:
        schedule = _constant(state, duration)
    else:
        other = FinalState.GREEN if state is FinalState.RED else FinalState.RED
        schedule = (ScheduleEntry(0.0, switch_at, state), ScheduleEntry(switch_at, duration, other))
    return Scenario(
        route_id="single-approach",
        path=(Waypoint(np.array([0.0, 0.0, 0.0]), 10.0), Waypoint(np.array([160.0, 0.0, 0.0]), 10.0)),
        lights=(_light("tl-solo", 150.0, 4.0, "g-solo", schedule),),
        duration_s=duration,
        rng_seed=seed,
        clutter=ClutterModel(ground_points_per_frame=ground_points),
        localization_noise=localization_noise or LocalizationNoise(),
        detector_noise=detector_noise,
    )


def two_light_redundancy(seed: int = 0, ground_points: int = 600) -> Scenario:
    """One group of two lights; only one is ever lit (the other stays dark)."""
    duration = 15.0
    lights = (
        _light("pair-lit", 150.0, 4.0, "g-pair", _constant(FinalState.RED, duration)),
        _light("pair-dark", 150.0, -4.0, "g-pair", _constant(FinalState.OFF, duration)),
    )
    return Scenario(
        route_id="redundant-pair",
        path=(Waypoint(np.array([0.0, 0.0, 0.0]), 10.0), Waypoint(np.array([160.0, 0.0, 0.0]), 10.0)),
        lights=lights,
        duration_s=duration,
        rng_seed=seed,
        clutter=ClutterModel(ground_points_per_frame=ground_points),
    )


def platform_localization_noise() -> LocalizationNoise:
    """Localization error magnitudes reported for the vehicle platform."""
    return LocalizationNoise(sigma_longitudinal=PLATFORM_SIGMA_LONGITUDINAL,
                             sigma_lateral=PLATFORM_SIGMA_LATERAL)


def distance_degraded_detector(seed: int = 0) -> NoiseModel:
    """Detector noise whose misses and confidence collapse on small boxes."""
    return NoiseModel(
        miss_base=0.02,
        miss_area_scale=400.0,
        center_jitter_sigma=1.0,
        size_jitter_sigma=0.05,
        fp_rate=0.5,
        rng_seed=seed,
    )


def jitter_only_detector(seed: int = 0) -> NoiseModel:
    """Misses and box jitter without false positives.

    False positives occasionally gate background clutter into the map buffer;
    those clusters are a curation concern (see background_pole_capture), not a
    centroid-accuracy one, so accuracy measurements use this model.
    """
    return NoiseModel(
        miss_base=0.02,
        miss_area_scale=400.0,
        center_jitter_sigma=1.0,
        size_jitter_sigma=0.05,
        fp_rate=0.0,
        rng_seed=seed,
    )


def background_pole_capture(seed: int = 0, ground_points: int = 600) -> Scenario:
    """One light with a tall pole 40 m behind it, crossing its sightline.

    Around 30 m range the pole top projects inside the light's bounding box,
    so LiDAR returns "hit" the box while actually striking the background and
    accumulate a dense cluster at the wrong depth: the classic background-
    capture failure that human curation must reject.
    """
    duration = 15.0
    return Scenario(
        route_id="pole-trap",
        path=(Waypoint(np.array([0.0, 0.0, 0.0]), 10.0), Waypoint(np.array([160.0, 0.0, 0.0]), 10.0)),
        lights=(_light("trap-light", 150.0, 4.0, "g-trap", _constant(FinalState.RED, duration)),),
        duration_s=duration,
        rng_seed=seed,
        clutter=ClutterModel(
            ground_points_per_frame=ground_points,
            poles=(PoleSpec(190.0, 9.33, 12.0),),
            pole_points_per_frame=60,
            pole_range_m=300.0,
        ),
    )
