"""Collective destination choice under congestion: solvers and simulation."""

from ._cct import *  # noqa: F401,F403
from ._cct import CctError, commands

__all__ = [name for name in dir() if not name.startswith("_")]
