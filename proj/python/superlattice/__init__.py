"""Interference patterns of nonlinear crystal superlattices.

Lengths and wavelengths are in metres, angles in radians.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
