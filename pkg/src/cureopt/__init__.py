"""Autoclave cure simulation, physics-informed operator surrogates, and design optimization."""

__version__ = "0.1.0"

from . import autodiff, cure_cycle, fd_sim, material, nn_core  # noqa: F401
