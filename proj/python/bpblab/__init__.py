"""Constructive norm-attainment corrections for positive operators on
finite-dimensional Banach lattices."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
