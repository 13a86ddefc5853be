"""Gym-style binding for the navbench navigation simulator.

Exposes make/reset/step/render/close over the native environment with zero
behavioral divergence: every transition is produced by the native engine and
only reshaped here.  Environment ids cover the training curriculum, the
fixed-difficulty validation set, and each evaluation scenario:

    make("train-curriculum")   adaptive difficulty across resets
    make("validation")         cycles the 100 deterministic validation specs
    make("test-simple-7")      one evaluation scenario (map: simple..realistic,
                               scenario: 1..9)

or pass an EpisodeSpec directly.
"""

from .envs import (
    ActionSpace,
    BoxSpace,
    GymNavEnv,
    close,
    list_presets,
    make,
    render,
    reset,
    step,
)

__version__ = "0.1.0"
