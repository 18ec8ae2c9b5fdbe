"""Synthetic shallow depth-of-field rendering from an image and a disparity map."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
