"""Close the loop on synthetic data: simulate a drive past six traffic lights,
rebuild their map from the log, run online recognition against it, and score
the verdicts. Everything happens through the CLI, exactly as you would script
it in CI.

Run:  python3 demos/01_full_pipeline.py
"""

import json
import tempfile
from pathlib import Path

from tlr.cli import main
from tlr.mapping import load_prior_map
from tlr.replay import save_scenario
from tlr.scenarios import six_lights_three_groups

work = Path(tempfile.mkdtemp(prefix="tlr-demo-"))
print(f"working in {work}\n")

# Three intersections, two lights each, 400 m of straight avenue at 10 m/s.
scenario = six_lights_three_groups(seed=0)
scenario_path = work / "scenario.json"
save_scenario(scenario, scenario_path)
print(f"[1/4] scenario: {len(scenario.lights)} lights in 3 groups, "
      f"{scenario.duration_s:.0f} s at {scenario.frame_rate_hz:.0f} fps")

log = work / "log.jsonl"
truth_map = work / "truth_map.json"
main(["simulate", "--scenario", str(scenario_path), "--out-log", str(log),
      "--out-map", str(truth_map), "--out-rddf", str(work / "route.json"),
      "--out-camera", str(work / "camera.json")])

print("\n[2/4] offline phase: detection-gated LiDAR accumulation -> clustering")
built_map = work / "built_map.json"
main(["build-map", "--log", str(log), "--scenario", str(scenario_path),
      "--auto-accept", "--out-map", str(built_map)])

built = load_prior_map(built_map)
truth = load_prior_map(truth_map)
print("    recovered light positions vs truth:")
for light in built.lights:
    nearest = min(truth.lights,
                  key=lambda t: sum((a - b) ** 2 for a, b in zip(t.position, light.position)))
    err = sum((a - b) ** 2 for a, b in zip(nearest.position, light.position)) ** 0.5
    print(f"      {light.id:>16}  ->  {nearest.id}  ({err * 100:.1f} cm off)")

print("\n[3/4] online phase: project mapped lights, gate detections, pick closest")
verdicts = work / "verdicts.jsonl"
main(["run", "--log", str(log), "--map", str(built_map), "--scenario", str(scenario_path),
      "--tau", "0.5", "--out", str(verdicts), "--out-detections", str(work / "dets.jsonl")])

print("\n[4/4] scoring against per-frame ground truth")
main(["eval", "--log", str(log), "--map", str(built_map),
      "--verdicts", f"tau05={verdicts}", "--detections", f"tau05={work / 'dets.jsonl'}",
      "--out", str(work / "report")])

report = json.loads((work / "report" / "report.json").read_text())
acc = report["streams"]["tau05"]["accuracy_lit"]
print(f"done: lit-frame accuracy {acc:.3f}; full report in {work / 'report'}")
