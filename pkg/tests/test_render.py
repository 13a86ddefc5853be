import os

import numpy as np
import pytest
from PIL import Image

from navbench import EpisodeSpec, ProceduralMap
from navbench.cli import main
from navbench.dataset import EpisodeRecord, STEP_DTYPE, make_step_record, write_dataset
from navbench.render import (
    FAILURE_COLOR,
    RINGS_GRAYS,
    RINGS_REGION,
    SUCCESS_COLOR,
    frame_image,
    render_trajectory,
)


def one_step_record(tmp_path):
    rng = np.random.default_rng(0)
    rec = make_step_record(
        rng.uniform(0.5, 25.0, 1080), np.zeros(5), np.zeros(3), 0.0, True
    )
    path = tmp_path / "one.nrd"
    write_dataset(path, [EpisodeRecord(steps=np.stack([rec]), spec_hash=1)])
    return path


class TestFrames:
    def test_one_step_record_gives_exactly_one_frame(self, tmp_path):
        record = one_step_record(tmp_path)
        out = tmp_path / "frames"
        rc = main(["render", "--record", str(record), "--out", str(out), "--mode", "frames"])
        assert rc == 0
        files = sorted(os.listdir(out))
        assert len(files) == 1

    def test_rings_panel_uses_exactly_three_grays(self):
        rng = np.random.default_rng(1)
        ranges = rng.uniform(0.0, 25.0, 1080)
        img = frame_image(ranges)
        arr = np.asarray(img)
        x0, y0, x1, y1 = RINGS_REGION
        panel = arr[y0:y1, x0:x1]
        assert panel[..., 0].tolist() == panel[..., 1].tolist()  # gray
        levels = set(np.unique(panel[..., 0]).tolist())
        assert levels.issubset(set(RINGS_GRAYS.values()))
        assert len(levels) >= 2


class TestTrajectory:
    def _spec(self, goal):
        return EpisodeSpec(
            seed=0,
            map_source=ProceduralMap(n_polygons=0),
            robot_spawn=(0.0, 0.0, 0.0),
            goal=goal,
            max_steps=20,
        )

    def test_success_uses_success_color(self, tmp_path):
        actions = np.tile(np.array([1.0, 0.0, 0.0], dtype=np.float32), (10, 1))
        out = tmp_path / "ok.png"
        render = render_trajectory(self._spec((1.0, 0.0)), actions, out)
        assert render.outcome == "success"
        arr = np.asarray(Image.open(out))
        assert (arr == np.array(SUCCESS_COLOR)).all(axis=-1).any()
        assert not (arr == np.array(FAILURE_COLOR)).all(axis=-1).any()

    def test_failure_uses_failure_color(self, tmp_path):
        actions = np.tile(np.array([0.0, 0.0, 0.0], dtype=np.float32), (25, 1))
        out = tmp_path / "fail.png"
        render = render_trajectory(self._spec((8.0, 0.0)), actions, out)
        assert render.outcome == "timeout"
        arr = np.asarray(Image.open(out))
        assert (arr == np.array(FAILURE_COLOR)).all(axis=-1).any()

    def test_trajectory_mode_requires_sidecar(self, tmp_path, capsys):
        record = one_step_record(tmp_path)
        rc = main(
            ["render", "--record", str(record), "--out", str(tmp_path / "t"), "--mode", "trajectory"]
        )
        assert rc == 1
        assert "sidecar" in capsys.readouterr().err

    def test_cli_trajectory_via_sidecar(self, tmp_path, capsys):
        record = tmp_path / "ep.nrd"
        rc = main(
            [
                "run",
                "--map",
                "procedural",
                "--polygons",
                "2",
                "--agents",
                "1",
                "--policy",
                "orca",
                "--episodes",
                "1",
                "--seed",
                "8",
                "--record",
                str(record),
            ]
        )
        assert rc == 0
        out = tmp_path / "traj"
        rc = main(["render", "--record", str(record), "--out", str(out), "--mode", "trajectory"])
        assert rc == 0
        assert sorted(os.listdir(out)) == ["trajectory_000.png"]
