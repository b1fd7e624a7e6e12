"""Evaluation tools for randomized and deterministic adversarial defenses."""

from randcheck._randcheck import *  # noqa: F401,F403
from randcheck._randcheck import __version__  # noqa: F401
