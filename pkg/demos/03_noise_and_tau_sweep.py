"""Reproduce the headline behavioral finding: with a detector whose confidence
collapses on small (distant) boxes, lowering the confidence threshold from
0.5 to 0.2 buys earlier first-correct detections and better long-range frame
accuracy, because the prior map soaks up the extra false positives.

Run:  python3 demos/03_noise_and_tau_sweep.py
"""

import numpy as np

from tlr.detection import ScriptedDetector, size_pool_from_frames
from tlr.evaluation import confusion, early_detection, relevant_group_track
from tlr.recognition import RecognizerConfig, run_log
from tlr.replay import generate
from tlr.scenarios import distance_degraded_detector, platform_localization_noise, six_lights_three_groups

noise = distance_degraded_detector(seed=0)
scenario = six_lights_three_groups(seed=0, detector_noise=noise,
                                   localization_noise=platform_localization_noise())
print("scenario: 3 approaches; localization drift sigma 0.28 m lon / 0.14 m lat;")
print("detector misses and low confidence on small boxes, 0.5 false positives/frame\n")

frames, truth, _ = generate(scenario)
detector = ScriptedDetector(scenario.camera,
                            noise.with_size_pool(size_pool_from_frames(frames)))
times = [f.t for f in frames]
gt = [f.gt_state for f in frames]
group_ids, dists = relevant_group_track([f.pose for f in frames], truth, 100.0)

print(f"{'tau':>5} | {'lit accuracy':>12} | {'mean delay s':>12} | {'mean dist m':>12}")
print("-" * 52)
for tau in (0.5, 0.2):
    verdicts = run_log(frames, truth, detector, scenario.camera, RecognizerConfig(tau=tau))
    preds = [v.state for _, v in verdicts]
    acc = confusion(preds, gt).accuracy_lit()
    recs = [r for r in early_detection(times, gt, preds, group_ids, dists, 100.0)
            if r.correct_found]
    print(f"{tau:>5.1f} | {acc:>12.3f} | {np.mean([r.delay_s for r in recs]):>12.2f} "
          f"| {np.mean([r.distance_m for r in recs]):>12.1f}")

print("""
Same detector output stream, different threshold: the tau=0.2 row sees the
lights seconds earlier and many meters farther out. False positives admitted
by the lower threshold land outside the projected gate circles and are
discarded before they can flip a verdict.
""")
