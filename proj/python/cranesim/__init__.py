"""Replica migration planning and flow-level simulation toolkit."""

from cranesim._core import *  # noqa: F401,F403
from cranesim._core import __version__  # noqa: F401
