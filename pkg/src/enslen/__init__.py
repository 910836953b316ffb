"""Rank analysis of the mixing function and ensemble-length search for separable states."""
from ._backend import BACKEND
from .herm import SystemShape
from .mixing import GeneralEnsemble, PureEnsemble, jacobian, jacobian_fd, mix

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "GeneralEnsemble",
    "PureEnsemble",
    "SystemShape",
    "jacobian",
    "jacobian_fd",
    "mix",
]
