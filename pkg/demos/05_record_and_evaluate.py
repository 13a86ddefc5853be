"""Record training data, score a next-step predictor, evaluate policies.

Run:  python3 demos/05_record_and_evaluate.py
Writes demo_out/train.nrd and prints a small evaluation table.
"""

import os

import numpy as np

from navbench import (
    PredictedState,
    StraightPolicy,
    StopPolicy,
    generate_training_dataset,
    make_test_suite,
    read_dataset,
    read_dataset_meta,
    worldmodel_error,
)
from navbench.evaluate import evaluate_suite, format_report

OUT = "demo_out"
os.makedirs(OUT, exist_ok=True)
path = os.path.join(OUT, "train.nrd")

# An avoidance-driven robot roams crowded procedural worlds; every step is
# recorded as (scan, goal/velocity state, action, reward, done).
steps = generate_training_dataset(path, total_steps=400, seed=1)
meta = read_dataset_meta(path)
episodes = read_dataset(path)
print(
    f"recorded {steps} steps over {len(episodes)} episodes "
    f"(dt={meta.dt:.1f} s, {os.path.getsize(path)} bytes)"
)

# The worldmodel error scores any next-step predictor against ground truth.
# The naive "nothing changes" predictor makes a useful baseline.
ep = episodes[0].steps
pred = [
    PredictedState(s_l_hat=ep["s_l"][t].astype(float), s_r_hat=ep["s_r"][t].astype(float))
    for t in range(len(ep) - 1)
]
truth = [
    (ep["s_l"][t + 1].astype(float), ep["s_r"][t + 1].astype(float))
    for t in range(len(ep) - 1)
]
e_lidar, e_sr = worldmodel_error(pred, truth)
print(f"persistence predictor: lidar error {e_lidar:.4f}, goal/velocity error {e_sr:.4f}\n")

# Evaluate simple baselines on the trivial scenario from each map.
cases = [c for c in make_test_suite() if c.scenario_id == 7]
for name, policy in (("straight", StraightPolicy()), ("stop", StopPolicy())):
    report = evaluate_suite(cases, policy, episodes_per_scenario=5, max_steps=60)
    print(f"policy {name!r} on the trivial scenario:")
    print(format_report(report))
    print()
