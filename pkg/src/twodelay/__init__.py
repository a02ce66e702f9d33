"""Scalar DDE with two state-dependent delays: Hopf curves, Hopf-Hopf normal forms and locking."""
from .errors import TwoDelayError
from .model import Parameters
from .spectral import HopfHopfPoint, find_hopf_hopf, trace_hopf_curve
from .normalform import normal_form
from .integrator import History, IntegrationOptions, integrate
from .dynamics import detect_locking, poincare_trace, sweep

__version__ = "0.1.0"

__all__ = [
    "TwoDelayError", "Parameters", "HopfHopfPoint", "find_hopf_hopf", "trace_hopf_curve",
    "normal_form", "History", "IntegrationOptions", "integrate", "detect_locking",
    "poincare_trace", "sweep",
]
