"""Flow integration and the verification battery."""

from .flows import FlowConfig, Trajectory, conservation_report, integrate_flow
from .verify import VerificationReport, verify_suite

__all__ = ["FlowConfig", "Trajectory", "conservation_report", "integrate_flow",
           "VerificationReport", "verify_suite"]
