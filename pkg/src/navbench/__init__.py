"""navbench: deterministic 2D LiDAR navigation simulation and benchmarking.

Polygon worlds with a bounding wall, reciprocal-collision-avoidance
pedestrians rendered as moving legs, a shaped navigation reward, two LiDAR
state encodings (normalized 1D and polar rings), adaptive difficulty, binary
episode recording for world-model training, and a 27-scenario evaluation
protocol.
"""

from .agents import (
    Action,
    CollisionReport,
    HumanAgent,
    KinematicsConfig,
    RobotState,
    advance_gait,
    check_collision,
    ellipse_circles,
    leg_circles,
    rendered_circles,
    step_robot,
)
from .dataset import (
    EpisodeRecord,
    concat_datasets,
    generate_training_dataset,
    read_dataset,
    read_dataset_meta,
    write_dataset,
)
from .env import (
    AgentSpec,
    CircleLayout,
    Difficulty,
    EpisodeSpec,
    FileMap,
    NamedMap,
    NavEnv,
    Observation,
    ProceduralMap,
    RandomLayout,
    RewardBreakdown,
    ScriptedLayout,
    SpecFormatError,
    StepResult,
    compute_reward,
    curriculum_update,
    make_validation_suite,
    spec_canonical_json,
    spec_from_dict,
    spec_hash,
    spec_to_dict,
)
from .evaluate import (
    EvalReport,
    ScenarioResult,
    evaluate_suite,
    format_report,
    report_from_csv,
    report_to_csv,
    run_benchmark,
    run_episode,
)
from .geometry import (
    LidarConfig,
    MapFormatError,
    MapModel,
    PlacementExhaustedError,
    Pose,
    Scan,
    distance_to_surfaces,
    generate_map,
    load_map,
    raycast_scan,
    save_map,
    wrap_angle,
)
from .maps import MAP_NAMES, builtin_map
from .orca import OrcaDisk, OrcaParams, orca_velocity
from .policies import (
    OrcaRobotPolicy,
    PolicyProtocolError,
    StopPolicy,
    StraightPolicy,
    SubprocessPolicy,
    make_policy,
)
from .representations import (
    PredictedState,
    RingsConfig,
    RingsGrid,
    normalize_1d,
    radial_bin,
    rings_encode,
    worldmodel_error,
)
from .scenarios import (
    ScenarioCase,
    export_test_suite,
    load_scenario,
    make_test_suite,
    save_scenario,
)

__version__ = "0.1.0"
