import json
import subprocess
import sys

import pytest

from tlr.cli import build_parser, main
from tlr.mapping import load_prior_map
from tlr.recognition import FinalState, read_verdicts
from tlr.replay import save_scenario
from tlr.scenarios import single_light_approach, six_lights_three_groups


@pytest.fixture()
def workdir(tmp_path):
    scenario = six_lights_three_groups(seed=5, ground_points=600)
    scenario_path = tmp_path / "scenario.json"
    save_scenario(scenario, scenario_path)
    return tmp_path, scenario_path


class TestPipeline:
    def test_simulate_build_run_eval(self, workdir):
        tmp, scenario_path = workdir
        log = tmp / "log.jsonl"
        truth_map = tmp / "truth_map.json"
        built_map = tmp / "built_map.json"
        rddf = tmp / "route.json"
        camera = tmp / "camera.json"
        verdicts = tmp / "verdicts.jsonl"
        dets = tmp / "dets.jsonl"
        report = tmp / "report"

        assert main(["simulate", "--scenario", str(scenario_path), "--out-log", str(log),
                     "--out-map", str(truth_map), "--out-rddf", str(rddf),
                     "--out-camera", str(camera)]) == 0
        assert log.exists() and truth_map.exists() and rddf.exists() and camera.exists()

        assert main(["build-map", "--log", str(log), "--scenario", str(scenario_path),
                     "--auto-accept", "--out-map", str(built_map),
                     "--out-candidates", str(tmp / "cands.json")]) == 0
        built = load_prior_map(built_map)
        assert len(built.lights) == 6
        assert len(built.groups) == 3

        assert main(["run", "--log", str(log), "--map", str(built_map),
                     "--camera", str(camera), "--tau", "0.5",
                     "--out", str(verdicts), "--out-detections", str(dets)]) == 0
        loaded = read_verdicts(verdicts)
        assert len(loaded) == 640
        states = {v.state for _, v in loaded}
        assert FinalState.RED in states and FinalState.GREEN in states

        assert main(["eval", "--log", str(log), "--map", str(built_map),
                     "--verdicts", f"tau05={verdicts}",
                     "--detections", f"tau05={dets}",
                     "--out", str(report)]) == 0
        report_data = json.loads((report / "report.json").read_text())
        assert report_data["frames"] == 640
        stream = report_data["streams"]["tau05"]
        assert stream["accuracy_lit"] is not None and stream["accuracy_lit"] > 0.9
        assert len(stream["early_detection"]) == 3
        det_metrics = report_data["detector"]["tau05"]
        assert det_metrics["map"] == pytest.approx(1.0)  # noiseless pass-through
        timeline = (report / "timeline.csv").read_text().splitlines()
        assert timeline[0] == "t,gt,pred_tau05"
        assert len(timeline) == 641
        assert (report / "report.txt").read_text().startswith("Detector metrics")

    def test_simulate_seed_determinism(self, tmp_path):
        scenario_path = tmp_path / "s.json"
        save_scenario(single_light_approach(seed=0, ground_points=200), scenario_path)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert main(["simulate", "--scenario", str(scenario_path), "--out-log", str(a),
                     "--seed", "77"]) == 0
        assert main(["simulate", "--scenario", str(scenario_path), "--out-log", str(b),
                     "--seed", "77"]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestErrors:
    def test_missing_map_file(self, workdir, capsys):
        tmp, scenario_path = workdir
        log = tmp / "log.jsonl"
        main(["simulate", "--scenario", str(scenario_path), "--out-log", str(log)])
        rc = main(["run", "--log", str(log), "--map", str(tmp / "missing.json"),
                   "--scenario", str(scenario_path), "--out", str(tmp / "v.jsonl")])
        assert rc == 3
        assert "missing.json" in capsys.readouterr().err

    def test_corrupt_log_reports_line(self, workdir, capsys):
        tmp, scenario_path = workdir
        bad = tmp / "bad.jsonl"
        bad.write_text('{"broken\n')
        rc = main(["build-map", "--log", str(bad), "--scenario", str(scenario_path),
                   "--out-candidates", str(tmp / "c.json")])
        assert rc == 3
        assert "line 1" in capsys.readouterr().err

    def test_usage_error_exit_2(self, workdir):
        tmp, scenario_path = workdir
        rc = main(["build-map", "--log", str(tmp / "log.jsonl"),
                   "--scenario", str(scenario_path), "--auto-accept"])
        assert rc == 2

    def test_bad_scenario_exit_3(self, tmp_path):
        bad = tmp_path / "bad_scenario.json"
        bad.write_text('{"route_id": "x"}')
        rc = main(["simulate", "--scenario", str(bad), "--out-log", str(tmp_path / "l.jsonl")])
        assert rc == 3


class TestFlagsAndEnv:
    def test_version_subprocess(self):
        out = subprocess.run([sys.executable, "-m", "tlr.cli", "--version"],
                             capture_output=True, text=True)
        assert out.returncode == 0
        assert out.stdout.strip() == "tlr 0.1.0"

    def test_env_fallback_and_flag_priority(self, monkeypatch):
        monkeypatch.setenv("TLR_GATE_RADIUS", "2.5")
        parser = build_parser()
        args = parser.parse_args(["run", "--log", "l", "--map", "m", "--out", "o"])
        assert args.gate_radius == 2.5
        args = parser.parse_args(["run", "--log", "l", "--map", "m", "--out", "o",
                                  "--gate-radius", "1.0"])
        assert args.gate_radius == 1.0

    def test_help_lists_subcommands(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for name in ("simulate", "build-map", "curate", "run", "eval"):
            assert name in out
