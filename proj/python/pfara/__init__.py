"""Joint platoon routing for shared last-mile fleets."""

from ._core import *  # noqa: F401,F403
from ._core import PfaraError, run, solve

__all__ = [name for name in dir() if not name.startswith("_")]
