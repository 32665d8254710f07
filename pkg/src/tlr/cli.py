"""Command-line entry point orchestrating all workflows.

Subcommands: simulate, build-map, curate, run, eval. Every flag can also be
supplied through an environment variable named TLR_<FLAG> (dashes become
underscores, e.g. --activation-range -> TLR_ACTIVATION_RANGE); explicit flags
win. Exit codes: 0 success, 2 usage error, 3 data error, 4 service error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .detection import (
    NoiseModel,
    RemoteDetector,
    ScriptedDetector,
    size_pool_from_frames,
    write_detections,
)
from .errors import (
    DetectorUnavailable,
    InvalidScenario,
    LengthMismatch,
    NoGroundTruth,
    ParseError,
    TlrError,
    UnknownRoute,
    VersionMismatch,
)
from .evaluation import (
    DetectionTally,
    build_report,
    confusion,
    early_detection,
    mean_ap,
    relevant_group_track,
    render_report_text,
    write_timeline_csv,
)
from .geometry import CameraModel, camera_from_wire, camera_to_wire
from .mapping import (
    CandidateStatus,
    MappingConfig,
    accepted_to_map,
    load_candidates,
    load_prior_map,
    run_mapping,
    save_candidates,
    save_prior_map,
)
from .recognition import RecognizerConfig, read_verdicts, run_log, write_verdicts
from .replay import load_log, load_scenario, save_rddf, save_scenario, write_log
from .replay import generate as generate_scenario

DATA_ERRORS = (ParseError, VersionMismatch, InvalidScenario, UnknownRoute,
               LengthMismatch, NoGroundTruth, FileNotFoundError, ValueError, KeyError)
SERVICE_ERRORS = (DetectorUnavailable,)


class UsageError(Exception):
    """Inconsistent flag combination (exit code 2, like argparse errors)."""


def _env_default(flag: str, fallback=None):
    return os.environ.get("TLR_" + flag.replace("-", "_").upper(), fallback)


def _add(parser: argparse.ArgumentParser, flag: str, **kwargs):
    """add_argument with a TLR_* environment fallback for the default."""
    env = _env_default(flag)
    if env is not None:
        if kwargs.get("action") == "store_true":
            kwargs["default"] = env.lower() in ("1", "true", "yes")
        else:
            cast = kwargs.get("type", str)
            kwargs["default"] = cast(env)
        kwargs.pop("required", None)
    parser.add_argument("--" + flag, **kwargs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tlr", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tlr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic log with ground truth")
    _add(p, "scenario", required=True, help="scenario JSON file")
    _add(p, "out-log", required=True, help="output log JSONL path")
    _add(p, "out-map", help="output truth prior-map JSON path")
    _add(p, "out-rddf", help="output reference-trajectory JSON path")
    _add(p, "out-camera", help="output camera-model JSON path")
    _add(p, "seed", type=int, help="override the scenario rng seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("build-map", help="replay a log into traffic-light candidates")
    _add(p, "log", required=True, help="input log JSONL")
    _add(p, "camera", help="camera-model JSON (or use --scenario)")
    _add(p, "scenario", help="scenario JSON supplying camera/noise defaults")
    _add(p, "route", help="route id for the produced map/candidates")
    _add(p, "out-candidates", help="write pending candidates JSON here")
    _add(p, "out-map", help="with --auto-accept: write the finished map here")
    _add(p, "auto-accept", action="store_true", default=False,
         help="accept every candidate and auto-link groups (no curation)")
    _add(p, "tau", type=float, default=0.5, help="detector confidence threshold while mapping")
    _add(p, "flush-gap", type=int, default=8, help="frames without a detection before clustering")
    _add(p, "eps", type=float, default=0.5, help="clustering neighborhood radius, meters")
    _add(p, "min-pts", type=int, default=6, help="minimum cluster support")
    _add(p, "group-radius", type=float, default=20.0, help="group linking distance, meters")
    _add(p, "bbox-shrink", type=float, default=0.1, help="box tightening fraction before gating")
    _add(p, "detector", choices=("scripted", "remote"), default="scripted")
    _add(p, "detector-url", help="remote detector base URL")
    _add(p, "detector-noise", help="noise JSON file, inline JSON, 'scenario', or 'none'")
    _add(p, "seed", type=int, help="override detector noise seed")
    p.set_defaults(func=cmd_build_map)

    p = sub.add_parser("curate", help="serve the human curation API over a candidate set")
    _add(p, "candidates", required=True, help="candidates JSON from build-map")
    _add(p, "log", help="source log JSONL (enables overlays and manual picks)")
    _add(p, "camera", help="camera-model JSON (or use --scenario)")
    _add(p, "scenario", help="scenario JSON supplying the camera")
    _add(p, "out-map", required=True, help="where saves land")
    _add(p, "group-radius", type=float, default=20.0)
    _add(p, "bind", default="127.0.0.1:8714", help="host:port to listen on")
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("run", help="online recognition over a log")
    _add(p, "log", required=True, help="input log JSONL")
    _add(p, "map", required=True, help="prior-map JSON")
    _add(p, "camera", help="camera-model JSON (or use --scenario)")
    _add(p, "scenario", help="scenario JSON supplying camera/noise defaults")
    _add(p, "tau", type=float, default=0.5, help="detector confidence threshold")
    _add(p, "activation-range", type=float, default=100.0, help="meters")
    _add(p, "gate-radius", type=float, default=1.5, help="meters")
    _add(p, "out", required=True, help="output verdict JSONL")
    _add(p, "out-detections", help="also record raw detector output JSONL")
    _add(p, "detector", choices=("scripted", "remote"), default="scripted")
    _add(p, "detector-url", help="remote detector base URL")
    _add(p, "detector-noise", help="noise JSON file, inline JSON, 'scenario', or 'none'")
    _add(p, "seed", type=int, help="override detector noise seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="score verdict streams against a ground-truth log")
    _add(p, "log", required=True, help="truth log JSONL")
    _add(p, "map", required=True, help="prior map used for approach segmentation")
    p.add_argument("--verdicts", action="append", required=True, metavar="LABEL=PATH",
                   help="verdict stream to score (repeatable)")
    p.add_argument("--detections", action="append", default=[], metavar="LABEL=PATH",
                   help="raw detection stream for detector metrics (repeatable)")
    _add(p, "out", required=True, help="output directory")
    _add(p, "iou-threshold", type=float, default=0.5)
    _add(p, "activation-range", type=float, default=100.0)
    _add(p, "taus", default="0.2,0.5", help="comma-separated detector thresholds to tabulate")
    p.set_defaults(func=cmd_eval)

    return parser


# ---------------------------------------------------------------------------
# helpers

def _load_camera(args) -> CameraModel:
    if getattr(args, "camera", None):
        with open(args.camera, "r", encoding="utf-8") as f:
            return camera_from_wire(json.load(f))
    if getattr(args, "scenario", None):
        return load_scenario(args.scenario).camera
    raise ParseError("a camera model is required: pass --camera or --scenario")


def _make_detector(args, camera: CameraModel, frames=None):
    if args.detector == "remote":
        if not args.detector_url:
            raise UsageError("--detector remote needs --detector-url")
        return RemoteDetector(args.detector_url, camera, tau=getattr(args, "tau", 0.0))
    noise = _load_noise(args)
    if noise is not None and getattr(args, "seed", None) is not None:
        noise = NoiseModel.from_wire({**noise.to_wire(), "rng_seed": args.seed})
    if noise is not None and noise.fp_rate > 0 and not noise.fp_size_pool and frames:
        noise = noise.with_size_pool(size_pool_from_frames(frames))
    return ScriptedDetector(camera, noise)


def _load_noise(args) -> NoiseModel | None:
    spec = getattr(args, "detector_noise", None)
    if spec in (None, "", "none"):
        return None
    if spec == "scenario":
        if not getattr(args, "scenario", None):
            raise UsageError("--detector-noise scenario needs --scenario")
        return load_scenario(args.scenario).detector_noise
    if spec.strip().startswith("{"):
        return NoiseModel.from_wire(json.loads(spec))
    with open(spec, "r", encoding="utf-8") as f:
        return NoiseModel.from_wire(json.load(f))


def _route_id(args, default="route-0") -> str:
    if getattr(args, "route", None):
        return args.route
    if getattr(args, "scenario", None):
        return load_scenario(args.scenario).route_id
    return default


def _parse_labeled(entries) -> dict[str, str]:
    out = {}
    for entry in entries:
        label, sep, path = entry.partition("=")
        if not sep or not label or not path:
            raise ParseError(f"expected LABEL=PATH, got {entry!r}")
        out[label] = path
    return out


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(args) -> int:
    import dataclasses

    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, rng_seed=args.seed)
    frames, truth, rddf = generate_scenario(scenario)
    write_log(frames, args.out_log)
    if args.out_map:
        save_prior_map(truth, args.out_map)
    if args.out_rddf:
        save_rddf(rddf, args.out_rddf)
    if args.out_camera:
        with open(args.out_camera, "w", encoding="utf-8") as f:
            json.dump(camera_to_wire(scenario.camera), f, indent=2)
            f.write("\n")
    print(f"wrote {len(frames)} frames to {args.out_log}")
    return 0


def cmd_build_map(args) -> int:
    if args.auto_accept and not args.out_map:
        raise UsageError("--auto-accept needs --out-map")
    if not args.auto_accept and not args.out_candidates:
        raise UsageError("pass --out-candidates, or --auto-accept with --out-map")
    camera = _load_camera(args)
    frames = load_log(args.log)
    detector = _make_detector(args, camera, frames)
    cfg = MappingConfig(flush_gap_frames=args.flush_gap, dbscan_eps=args.eps,
                        dbscan_min_pts=args.min_pts, group_link_radius=args.group_radius,
                        tight_bbox_shrink=args.bbox_shrink)
    candidates = run_mapping(frames, detector, camera, cfg, tau=args.tau)
    route = _route_id(args)
    if args.out_candidates:
        save_candidates(candidates, route, args.out_candidates, source_log=args.log)
        print(f"wrote {len(candidates)} candidates to {args.out_candidates}")
    if args.auto_accept:
        for c in candidates:
            c.status = CandidateStatus.ACCEPTED
        prior = accepted_to_map(candidates, route, cfg.group_link_radius)
        save_prior_map(prior, args.out_map)
        print(f"auto-accepted {len(prior.lights)} lights in {len(prior.groups)} groups "
              f"-> {args.out_map}")
    return 0


def cmd_curate(args) -> int:
    from .curation import CurationSession, SessionLock
    from .curation_http import serve

    candidates, route_id, _ = load_candidates(args.candidates)
    frames = load_log(args.log) if args.log else []
    camera = None
    if args.camera or args.scenario:
        camera = _load_camera(args)
    cfg = MappingConfig(group_link_radius=args.group_radius)
    host, _, port = args.bind.partition(":")
    if not port:
        raise UsageError(f"--bind must be host:port, got {args.bind!r}")
    session = CurationSession.open(candidates, route_id, frames=frames, camera=camera,
                                   config=cfg)
    with SessionLock(args.candidates):
        print(f"curation API at http://{host}:{port}/api/v1 "
              f"({len(candidates)} candidates, saving to {args.out_map})")
        serve(session, args.out_map, host, int(port))
    return 0


def cmd_run(args) -> int:
    camera = _load_camera(args)
    prior = load_prior_map(args.map)
    frames = load_log(args.log)
    detector = _make_detector(args, camera, frames)
    cfg = RecognizerConfig(activation_range=args.activation_range,
                           gate_radius=args.gate_radius, tau=args.tau)
    recorded: list[tuple[float, list]] = []
    on_det = (lambda t, dets: recorded.append((t, dets))) if args.out_detections else None
    verdicts = run_log(frames, prior, detector, camera, cfg, on_detections=on_det)
    write_verdicts(verdicts, args.out)
    if args.out_detections:
        write_detections(recorded, args.out_detections)
    states = [v.state.wire for _, v in verdicts]
    print(f"wrote {len(verdicts)} verdicts to {args.out} "
          f"(red={states.count('red')}, green={states.count('green')}, "
          f"off={states.count('off')}, none={states.count('none')})")
    return 0


def cmd_eval(args) -> int:
    import os as _os

    frames = load_log(args.log)
    prior = load_prior_map(args.map)
    times = [f.t for f in frames]
    gt_states = [f.gt_state for f in frames]
    group_ids, distances = relevant_group_track([f.pose for f in frames], prior,
                                                args.activation_range)

    streams = {}
    for label, path in _parse_labeled(args.verdicts).items():
        verdicts = read_verdicts(path)
        if len(verdicts) != len(frames):
            raise LengthMismatch(
                f"stream {label!r} has {len(verdicts)} verdicts for {len(frames)} frames")
        for (tv, _), tl in zip(verdicts, times):
            if abs(tv - tl) > 1e-9:
                raise LengthMismatch(f"stream {label!r} timestamps diverge at t={tl}")
        streams[label] = [v.state for _, v in verdicts]

    early = {
        label: early_detection(times, gt_states, preds, group_ids, distances,
                               args.activation_range, log_id=label)
        for label, preds in streams.items()
    }

    detector_metrics = {}
    taus = [float(x) for x in str(args.taus).split(",") if x]
    for label, path in _parse_labeled(args.detections).items():
        from .detection import read_detections

        det_stream = read_detections(path)
        if len(det_stream) != len(frames):
            raise LengthMismatch(
                f"detections {label!r}: {len(det_stream)} records for {len(frames)} frames")
        tally = DetectionTally(iou_threshold=args.iou_threshold)
        for (_, dets), frame in zip(det_stream, frames):
            tally.add_frame(dets, frame.gt_detections)
        aps = tally.average_precision("voc2007")
        detector_metrics[label] = {
            "ap": aps,
            "map": mean_ap(aps) if any(v is not None for v in aps.values()) else None,
            "precision_recall": {f"tau={tau:g}": tally.precision_recall(tau) for tau in taus},
        }

    report = build_report(gt_states, times, streams, early=early,
                          detector_metrics=detector_metrics or None)
    _os.makedirs(args.out, exist_ok=True)
    report_json = _os.path.join(args.out, "report.json")
    with open(report_json, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    report_txt = _os.path.join(args.out, "report.txt")
    text = render_report_text(report)
    with open(report_txt, "w", encoding="utf-8") as f:
        f.write(text)
    write_timeline_csv(_os.path.join(args.out, "timeline.csv"), times, gt_states, streams)
    print(text)
    print(f"report in {args.out}/ (report.json, report.txt, timeline.csv)")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"tlr: usage: {e}", file=sys.stderr)
        return 2
    except SERVICE_ERRORS as e:
        print(f"tlr: service error: {e}", file=sys.stderr)
        return 4
    except DATA_ERRORS as e:
        print(f"tlr: {e}", file=sys.stderr)
        return 3
    except TlrError as e:
        print(f"tlr: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
