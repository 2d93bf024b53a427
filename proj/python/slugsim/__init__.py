"""SLUG amplifier simulator."""

from ._slugsim import *  # noqa: F401,F403
from ._slugsim import SlugsimError, execute, validate_config

__all__ = [name for name in dir() if not name.startswith("_")]
