"""The human-in-the-loop step, scripted: build candidates from a log, serve
the curation API, then act as the operator over HTTP: inspect overlays,
reject a false positive added by hand, accept the real lights, and save.

Run:  python3 demos/04_curation_workflow.py
"""

import subprocess
import sys
import tempfile
import time
from pathlib import Path

import requests

from tlr.cli import main
from tlr.mapping import load_prior_map
from tlr.replay import save_scenario
from tlr.scenarios import six_lights_three_groups

work = Path(tempfile.mkdtemp(prefix="tlr-curation-"))
scenario_path = work / "scenario.json"
save_scenario(six_lights_three_groups(seed=1, ground_points=500), scenario_path)

log = work / "log.jsonl"
cands = work / "candidates.json"
out_map = work / "curated_map.json"
main(["simulate", "--scenario", str(scenario_path), "--out-log", str(log)])
main(["build-map", "--log", str(log), "--scenario", str(scenario_path),
      "--out-candidates", str(cands)])

port = 8714
proc = subprocess.Popen(
    [sys.executable, "-m", "tlr.cli", "curate", "--candidates", str(cands),
     "--log", str(log), "--scenario", str(scenario_path),
     "--out-map", str(out_map), "--bind", f"127.0.0.1:{port}"],
    stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
base = f"http://127.0.0.1:{port}/api/v1"

try:
    for _ in range(50):
        try:
            requests.get(f"{base}/candidates", timeout=0.5)
            break
        except requests.RequestException:
            time.sleep(0.2)

    items = requests.get(f"{base}/candidates").json()["candidates"]
    print(f"{len(items)} pending candidates:")
    for c in items:
        print(f"  {c['id']:>16}  support={c['support']:>4}  "
              f"centroid=({c['centroid'][0]:7.2f}, {c['centroid'][1]:6.2f}, {c['centroid'][2]:5.2f})  "
              f"overlay={c['overlay_ref']}")

    # a stray manual pick, as an operator might misclick, then reject it
    manual = requests.post(f"{base}/candidates/manual",
                           json={"t": items[0]["source_frame_range"][0], "point_index": 0},
                           headers={"X-Curation-Actor": "demo-operator"}).json()
    print(f"\nmanual candidate {manual['id']} added at a raw LiDAR point; rejecting it")
    requests.post(f"{base}/candidates/{manual['id']}/decision",
                  json={"decision": "reject"}, headers={"X-Curation-Actor": "demo-operator"})

    png = requests.get(f"http://127.0.0.1:{port}" + items[0]["overlay_ref"])
    overlay_path = work / "overlay.png"
    overlay_path.write_bytes(png.content)
    print(f"overlay for the first candidate written to {overlay_path}")

    blocked = requests.post(f"{base}/save", json={"force": False})
    print(f"\nsaving with pending candidates -> HTTP {blocked.status_code} "
          f"({blocked.json()['error']})")

    for c in items:
        requests.post(f"{base}/candidates/{c['id']}/decision",
                      json={"decision": "accept", "relevant_for": ["avenue-east"]},
                      headers={"X-Curation-Actor": "demo-operator"})
    saved = requests.post(f"{base}/save", json={"force": False}).json()
    print(f"all decided; saved to {saved['path']}")
finally:
    proc.terminate()
    proc.wait(timeout=10)

prior = load_prior_map(out_map)
print(f"\ncurated map: {len(prior.lights)} lights in {len(prior.groups)} groups "
      f"(the rejected manual pick is gone)")
