"""Fixed-step integration, trajectories and conservation drift."""
from .integrate import (DriftStats, IntegrationError, IntegratorConfig, Trajectory,
                        conservation_drift, evaluate_along, integrate_dynamic, integrate_hamilton)
from .kernels import jit_available, jit_requested, using_jit
from .program import Program, compile_exprs

__all__ = [
    "DriftStats", "IntegrationError", "IntegratorConfig", "Program", "Trajectory",
    "compile_exprs", "conservation_drift", "evaluate_along", "integrate_dynamic",
    "integrate_hamilton", "jit_available", "jit_requested", "using_jit",
]
