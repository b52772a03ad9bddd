"""Python bindings for the protoneuro toolkit."""

from ._protoneuro import *  # noqa: F401,F403
from ._protoneuro import __version__  # noqa: F401
