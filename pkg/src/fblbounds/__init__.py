"""Finite-blocklength rate bounds and approximations for memoryless channels."""

from .channels import (Channel, InputDist, OutputDist, capacity, load_channel,
                       make_channel, mutual_information, output_marginal)
from .config import DEFAULT, SolverConfig
from .errors import FBLError, NumericalError, PreconditionError
from .kernels import IMPL

__version__ = "0.1.0"

__all__ = [
    "Channel", "InputDist", "OutputDist", "SolverConfig", "DEFAULT",
    "FBLError", "PreconditionError", "NumericalError", "IMPL",
    "make_channel", "load_channel", "output_marginal", "mutual_information",
    "capacity",
]
