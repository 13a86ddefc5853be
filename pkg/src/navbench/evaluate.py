"""Episode runner, scenario-suite evaluation, and the throughput benchmark."""

from __future__ import annotations

import csv
import hashlib
import io
import time
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .agents import Action
from .dataset import EpisodeRecord, STEP_DTYPE, make_step_record
from .env import EpisodeSpec, NavEnv, ProceduralMap, spec_hash
from .policies import OrcaRobotPolicy, Policy
from .scenarios import ScenarioCase


@dataclass
class EpisodeRun:
    outcome: str
    n_steps: int
    reward_total: float
    record: EpisodeRecord | None = None


def run_episode(
    spec: EpisodeSpec,
    policy: Policy,
    seed: int | None = None,
    max_steps: int | None = None,
    collect_record: bool = False,
) -> EpisodeRun:
    """Run one episode to termination under the given policy."""
    if seed is not None:
        spec = replace(spec, seed=seed)
    if max_steps is not None:
        spec = replace(spec, max_steps=max_steps)
    env = NavEnv(spec)
    obs = env.reset()
    records: list[np.ndarray] = []
    total = 0.0
    outcome = "running"
    n = 0
    while True:
        action = policy.act(obs, env)
        result = env.step(action)
        total += result.reward.total
        n += 1
        if collect_record:
            records.append(
                make_step_record(
                    obs.scan.ranges,
                    obs.s_r,
                    action.as_array(),
                    result.reward.total,
                    result.done,
                )
            )
        obs = result.observation
        if result.done:
            outcome = result.outcome
            break
    record = None
    if collect_record:
        steps = np.stack(records) if records else np.empty(0, dtype=STEP_DTYPE)
        record = EpisodeRecord(steps=steps, spec_hash=spec_hash(spec))
    return EpisodeRun(outcome=outcome, n_steps=n, reward_total=total, record=record)


# --------------------------------------------------------------------------
# Suite evaluation
# --------------------------------------------------------------------------

@dataclass
class ScenarioResult:
    scenario_id: int
    map_name: str
    episodes: int
    successes: int
    collisions: int
    timeouts: int

    @property
    def success_rate(self) -> float:
        return self.successes / self.episodes

    @property
    def collision_rate(self) -> float:
        return self.collisions / self.episodes

    @property
    def timeout_rate(self) -> float:
        return self.timeouts / self.episodes


@dataclass
class EvalReport:
    rows: list[ScenarioResult]

    @property
    def overall_success_rate(self) -> float:
        return sum(r.success_rate for r in self.rows) / len(self.rows)

    @property
    def overall_collision_rate(self) -> float:
        return sum(r.collision_rate for r in self.rows) / len(self.rows)

    @property
    def overall_timeout_rate(self) -> float:
        return sum(r.timeout_rate for r in self.rows) / len(self.rows)


def evaluate_suite(
    cases: Sequence[ScenarioCase],
    policy: Policy,
    episodes_per_scenario: int = 300,
    seed_offset: int = 0,
    max_steps: int | None = None,
    progress: Callable[[str], None] | None = None,
) -> EvalReport:
    """Run every case episodes_per_scenario times and tally outcomes.

    Episode i of a case reuses the case spec with seed = spec.seed +
    seed_offset + i, so scripted geometry stays fixed while seeded elements
    (initial robot heading, gait phases, random agents) vary per episode.
    """
    rows = []
    for case in cases:
        successes = collisions = timeouts = 0
        for i in range(episodes_per_scenario):
            run = run_episode(
                case.spec,
                policy,
                seed=case.spec.seed + seed_offset + i,
                max_steps=max_steps,
            )
            if run.outcome == "success":
                successes += 1
            elif run.outcome == "collision":
                collisions += 1
            else:
                timeouts += 1
        rows.append(
            ScenarioResult(
                scenario_id=case.scenario_id,
                map_name=case.map_name,
                episodes=episodes_per_scenario,
                successes=successes,
                collisions=collisions,
                timeouts=timeouts,
            )
        )
        if progress is not None:
            r = rows[-1]
            progress(
                f"scenario {r.map_name}/{r.scenario_id}: "
                f"success_rate={r.success_rate:.3f}"
            )
    return EvalReport(rows=rows)


CSV_COLUMNS = (
    "scenario_id",
    "map",
    "episodes",
    "successes",
    "collisions",
    "timeouts",
    "success_rate",
)


def report_to_csv(report: EvalReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.rows:
        writer.writerow(
            [
                r.scenario_id,
                r.map_name,
                r.episodes,
                r.successes,
                r.collisions,
                r.timeouts,
                repr(r.success_rate),
            ]
        )
    return out.getvalue()


def report_from_csv(text: str) -> EvalReport:
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for rec in reader:
        rows.append(
            ScenarioResult(
                scenario_id=int(rec["scenario_id"]),
                map_name=rec["map"],
                episodes=int(rec["episodes"]),
                successes=int(rec["successes"]),
                collisions=int(rec["collisions"]),
                timeouts=int(rec["timeouts"]),
            )
        )
    return EvalReport(rows=rows)


def format_report(report: EvalReport) -> str:
    lines = [
        f"{'map':<12}{'scenario':>9}{'episodes':>10}{'success':>9}"
        f"{'collide':>9}{'timeout':>9}{'rate':>8}"
    ]
    for r in report.rows:
        lines.append(
            f"{r.map_name:<12}{r.scenario_id:>9}{r.episodes:>10}{r.successes:>9}"
            f"{r.collisions:>9}{r.timeouts:>9}{r.success_rate:>8.3f}"
        )
    lines.append(
        f"overall: success={report.overall_success_rate:.3f} "
        f"collision={report.overall_collision_rate:.3f} "
        f"timeout={report.overall_timeout_rate:.3f}"
    )
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Throughput benchmark
# --------------------------------------------------------------------------

@dataclass
class BenchResult:
    n_steps: int
    elapsed_seconds: float
    steps_per_second: float
    transcript_digest: str


def run_benchmark(
    n_steps: int,
    n_agents: int = 5,
    n_polygons: int = 10,
    seed: int = 0,
) -> BenchResult:
    """Step one avoidance-driven environment single-threaded and time it.

    The digest fingerprints every reward and scan, so two runs with the same
    seed can be checked for bit-identical behavior independent of timing.
    """
    spec = EpisodeSpec(
        seed=seed,
        map_source=ProceduralMap(n_polygons=n_polygons),
        n_agents=n_agents,
    )
    policy = OrcaRobotPolicy()
    digest = hashlib.sha256()
    env = NavEnv(spec)
    obs = env.reset()
    episode = 0
    start = time.perf_counter()
    for _ in range(n_steps):
        action = policy.act(obs, env)
        result = env.step(action)
        digest.update(np.float64(result.reward.total).tobytes())
        digest.update(np.asarray(result.observation.scan.ranges, dtype=np.float64).tobytes())
        obs = result.observation
        if result.done:
            episode += 1
            env = NavEnv(replace(spec, seed=seed + episode))
            obs = env.reset()
    elapsed = time.perf_counter() - start
    return BenchResult(
        n_steps=n_steps,
        elapsed_seconds=elapsed,
        steps_per_second=n_steps / elapsed,
        transcript_digest=digest.hexdigest(),
    )
