"""Command-line harness: run, bench, eval, render, gen-maps, gen-dataset.

Exit codes: 0 success, 1 runtime error, 2 usage error.  Every command honors
--seed, so outputs (other than wall-clock timings) are reproducible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .dataset import (
    EpisodeRecord,
    generate_training_dataset,
    read_dataset,
    read_dataset_meta,
    write_dataset,
)
from .env import (
    EpisodeSpec,
    FileMap,
    NamedMap,
    ProceduralMap,
    SpecFormatError,
    spec_from_dict,
    spec_to_dict,
)
from .evaluate import (
    evaluate_suite,
    format_report,
    report_to_csv,
    run_benchmark,
    run_episode,
)
from .geometry import MapFormatError, PlacementExhaustedError, generate_map, save_map
from .maps import MAP_NAMES, builtin_map
from .policies import PolicyProtocolError, make_policy
from .render import render_frames, render_trajectory
from .scenarios import ScenarioCase, load_scenario, make_test_suite

_RUNTIME_ERRORS = (
    RuntimeError,
    OSError,
    ValueError,
    SpecFormatError,
    MapFormatError,
    PolicyProtocolError,
    PlacementExhaustedError,
)


def _map_source_from_arg(map_arg: str, n_polygons: int):
    if map_arg == "procedural":
        return ProceduralMap(n_polygons=n_polygons)
    if map_arg in MAP_NAMES:
        return NamedMap(map_arg)
    return FileMap(map_arg)


def _spec_from_args(args) -> EpisodeSpec:
    if getattr(args, "scenario", None):
        return load_scenario(args.scenario)
    return EpisodeSpec(
        seed=0,
        map_source=_map_source_from_arg(args.map, args.polygons),
        n_agents=args.agents,
        max_steps=args.max_steps,
        representation="rings" if args.representation == "rings" else "lidar1d",
    )


def cmd_run(args) -> int:
    spec = _spec_from_args(args)
    policy = make_policy(args.policy)
    records: list[EpisodeRecord] = []
    sidecar_specs = []
    had_error = False
    try:
        for i in range(args.episodes):
            # --seed offsets the spec's own seed, as in eval, so scenario
            # files keep their scripted base seed.
            seed = spec.seed + args.seed + i
            try:
                run = run_episode(
                    spec, policy, seed=seed, collect_record=bool(args.record)
                )
            except PolicyProtocolError as exc:
                print(f"episode {i}: outcome=error ({exc})", file=sys.stderr)
                had_error = True
                continue
            print(
                f"episode {i}: outcome={run.outcome} steps={run.n_steps} "
                f"reward={run.reward_total:.3f}"
            )
            if args.record:
                records.append(run.record)
                from dataclasses import replace

                sidecar_specs.append(spec_to_dict(replace(spec, seed=seed)))
    finally:
        policy.close()
    if args.record:
        write_dataset(args.record, records, dt=spec.kinematics.dt)
        with open(str(args.record) + ".spec.json", "w", encoding="utf-8") as fh:
            json.dump({"episodes": sidecar_specs}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        total = sum(len(r.steps) for r in records)
        print(f"recorded {total} steps over {len(records)} episodes to {args.record}")
    return 1 if had_error else 0


def cmd_bench(args) -> int:
    result = run_benchmark(
        n_steps=args.steps,
        n_agents=args.agents,
        n_polygons=args.polygons,
        seed=args.seed,
    )
    print(
        f"{result.n_steps} steps in {result.elapsed_seconds:.3f} s -> "
        f"{result.steps_per_second:.1f} steps/s"
    )
    print(f"transcript sha256: {result.transcript_digest}")
    return 0


def _load_suite(suite_arg: str) -> list[ScenarioCase]:
    if suite_arg == "builtin":
        return make_test_suite()
    if not os.path.isdir(suite_arg):
        raise SpecFormatError(f"--suite must be 'builtin' or a directory: {suite_arg}")
    cases = []
    for name in sorted(os.listdir(suite_arg)):
        if not name.endswith(".json"):
            continue
        spec = load_scenario(os.path.join(suite_arg, name))
        cases.append(
            ScenarioCase(
                scenario_id=spec.scenario_id if spec.scenario_id is not None else 0,
                map_name=spec.map_label if spec.map_label is not None else name,
                spec=spec,
            )
        )
    if not cases:
        raise SpecFormatError(f"no scenario files found in {suite_arg}")
    return cases


def cmd_eval(args) -> int:
    cases = _load_suite(args.suite)
    policy = make_policy(args.policy)
    try:
        report = evaluate_suite(
            cases,
            policy,
            episodes_per_scenario=args.episodes_per_scenario,
            seed_offset=args.seed,
            max_steps=args.max_steps,
            progress=lambda msg: print(msg, file=sys.stderr),
        )
    finally:
        policy.close()
    csv_text = report_to_csv(report)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    print(format_report(report))
    print(f"wrote {args.out}")
    return 0


def cmd_render(args) -> int:
    episodes = read_dataset(args.record)
    os.makedirs(args.out, exist_ok=True)
    if args.mode == "frames":
        paths = render_frames(episodes, args.out)
        print(f"wrote {len(paths)} frames to {args.out}")
        return 0
    # Trajectory mode replays recorded actions, so it needs the episode specs.
    spec_path = args.spec if args.spec else str(args.record) + ".spec.json"
    if not os.path.exists(spec_path):
        raise SpecFormatError(
            f"trajectory mode needs the sidecar spec file ({spec_path}); "
            "record with 'navbench run --record' or pass --spec"
        )
    with open(spec_path, "r", encoding="utf-8") as fh:
        sidecar = json.load(fh)
    spec_dicts = sidecar.get("episodes", [])
    if len(spec_dicts) < len(episodes):
        raise SpecFormatError(
            f"{spec_path}: {len(spec_dicts)} specs for {len(episodes)} episodes"
        )
    for i, episode in enumerate(episodes):
        spec = spec_from_dict(spec_dicts[i])
        out_path = os.path.join(args.out, f"trajectory_{i:03d}.png")
        render = render_trajectory(spec, episode.steps["a"], out_path)
        print(f"episode {i}: outcome={render.outcome} -> {render.path}")
    return 0


def cmd_gen_maps(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if args.builtin:
        for name in MAP_NAMES:
            path = os.path.join(args.out, f"{name}.json")
            save_map(builtin_map(name), path)
            print(path)
        return 0
    for i in range(args.count):
        map_model = generate_map(args.seed + i, args.polygons)
        path = os.path.join(args.out, f"map_{i:03d}.json")
        save_map(map_model, path)
        print(path)
    return 0


def cmd_gen_dataset(args) -> int:
    total = generate_training_dataset(args.out, total_steps=args.steps, seed=args.seed)
    meta = read_dataset_meta(args.out)
    print(
        f"wrote {total} steps ({meta.n_episodes} episodes, dt={meta.dt}) to {args.out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="navbench",
        description="Deterministic 2D LiDAR navigation simulator and benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run episodes under a policy")
    p.add_argument("--map", default="procedural", help="'procedural', a built-in name, or a map JSON path")
    p.add_argument("--scenario", default=None, help="scenario JSON overriding --map/--agents")
    p.add_argument("--policy", default="orca", help="orca | straight | stop | subprocess:CMD")
    p.add_argument("--episodes", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--agents", type=int, default=5)
    p.add_argument("--polygons", type=int, default=10)
    p.add_argument("--max-steps", type=int, default=1000)
    p.add_argument("--record", default=None, help="write episodes to this NRD1 file")
    p.add_argument("--representation", choices=("1d", "rings"), default="1d")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="single-threaded throughput benchmark")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--agents", type=int, default=5)
    p.add_argument("--polygons", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("eval", help="evaluate a policy over a scenario suite")
    p.add_argument("--suite", default="builtin", help="'builtin' or a directory of scenario JSONs")
    p.add_argument("--policy", default="orca")
    p.add_argument("--episodes-per-scenario", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--out", default="eval_report.csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="render an NRD1 record to images")
    p.add_argument("--record", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("frames", "trajectory"), default="trajectory")
    p.add_argument("--spec", default=None, help="sidecar spec JSON (trajectory mode)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("gen-maps", help="generate and save procedural maps")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--polygons", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--builtin", action="store_true", help="export the built-in maps instead")
    p.set_defaults(func=cmd_gen_maps)

    p = sub.add_parser("gen-dataset", help="generate a training dataset (NRD1)")
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_dataset)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
