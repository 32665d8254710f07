"""Record real curation-service responses into the UI test fixture.

Runs the demo scenario through mapping, serves it with the actual FastAPI
app, and captures canonical responses for every endpoint the UI touches.

Run from the repository root:  python3 frontend/scripts/record_fixtures.py
"""

import json
import pathlib
import tempfile

from fastapi.testclient import TestClient

from tlr.curation import CurationSession
from tlr.curation_http import create_app
from tlr.detection import ScriptedDetector
from tlr.mapping import MappingConfig, run_mapping
from tlr.replay import generate
from tlr.scenarios import six_lights_three_groups

OUT = pathlib.Path(__file__).resolve().parent.parent / "test" / "fixtures" / "recorded_api.json"


def main():
    scenario = six_lights_three_groups(seed=1)
    frames, _, _ = generate(scenario)
    detector = ScriptedDetector(scenario.camera)
    candidates = run_mapping(frames, detector, scenario.camera, MappingConfig(), tau=0.5)
    session = CurationSession.open(candidates, scenario.route_id, frames=frames,
                                   camera=scenario.camera)
    out_map = pathlib.Path(tempfile.mkdtemp()) / "map.json"
    client = TestClient(create_app(session, out_map))

    fixture = {"recorded_from": "tlr curation-service (demo scenario, seed 1)"}

    listed = client.get("/api/v1/candidates")
    fixture["candidates_initial"] = listed.json()
    ids = [c["id"] for c in listed.json()["candidates"]]

    missing = client.post("/api/v1/candidates/does-not-exist/decision",
                          json={"decision": "accept"})
    fixture["unknown_candidate"] = {"status": missing.status_code, "body": missing.json()}

    blocked = client.post("/api/v1/save", json={"force": False})
    fixture["save_pending_conflict"] = {"status": blocked.status_code, "body": blocked.json()}

    accepted = client.post(f"/api/v1/candidates/{ids[0]}/decision",
                           json={"decision": "accept", "group": None,
                                 "relevant_for": ["avenue-east"]})
    fixture["candidate_accepted"] = accepted.json()

    rejected = client.post(f"/api/v1/candidates/{ids[1]}/decision",
                           json={"decision": "reject", "group": None, "relevant_for": []})
    fixture["candidate_rejected"] = rejected.json()

    fixture["candidates_after_decisions"] = client.get("/api/v1/candidates").json()

    for cid in ids[1:]:
        client.post(f"/api/v1/candidates/{cid}/decision",
                    json={"decision": "accept", "group": None,
                          "relevant_for": ["avenue-east"]})
    saved = client.post("/api/v1/save", json={"force": False})
    fixture["save_success"] = {"status": saved.status_code, "body": saved.json()}
    fixture["draft_map"] = client.get("/api/v1/map").json()

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n")
    print(f"recorded {len(fixture)} response groups -> {OUT}")


if __name__ == "__main__":
    main()
