"""Polarization statistics of macroscopic Bell states."""

from ._macrobell import *  # noqa: F401,F403
