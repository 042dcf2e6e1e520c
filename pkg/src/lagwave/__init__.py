"""Lagrangian Navier-Stokes-Maxwell wave-pattern simulator and verification harness."""
from .euler_riemann import FluidState, GasParams, RiemannDecomposition, solve_intermediate_states
from .composite_wave import CompositeWave, ConstantBackground
from .contact_wave import ContactWaveSpec, solve_selfsimilar
from .solver import Grid1D, NSMSolver, Perturbation, SolverConfig, State

__all__ = [
    "CompositeWave", "ConstantBackground", "ContactWaveSpec", "FluidState", "GasParams", "Grid1D",
    "NSMSolver", "Perturbation", "RiemannDecomposition", "SolverConfig", "State",
    "solve_intermediate_states", "solve_selfsimilar",
]
__version__ = "0.1.0"
