"""Simulation and numeric audit of GHZ-based four-party secret sharing
through an amplitude-damping channel."""

from . import channels, discrimination, metrics, protocol, qmath
from .channels import KrausChannel, amplitude_damping, apply, dephasing, depolarizing
from .discrimination import GenMeasurement, discrepancy_report, evaluate, optimize
from .protocol import LAMBDA_TABLE, encode, ghz4, run_ideal, run_ideal_exhaustive

__version__ = "0.1.0"
