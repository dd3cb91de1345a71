"""Nodal solver, boundary conditions and corrector updates."""

from hyperlag.solver.boundary import (
    BcDescriptor,
    BcKind,
    BoundaryConditions,
    ContactState,
    ContactTracker,
    apply_bc,
    evolve_bc,
)
from hyperlag.solver.nodal import (
    NodalBalance,
    assemble_nodal_balance,
    corner_matrices,
    entropy_production,
    nodal_solve,
    subcell_force,
    subcell_matrix,
)
from hyperlag.solver.update import (
    corrector_update,
    move_nodes,
    update_B_crank_nicolson,
    update_B_first_order,
    velocity_gradient,
)

__all__ = [
    "BcDescriptor",
    "BcKind",
    "BoundaryConditions",
    "ContactState",
    "ContactTracker",
    "NodalBalance",
    "apply_bc",
    "assemble_nodal_balance",
    "corner_matrices",
    "corrector_update",
    "entropy_production",
    "evolve_bc",
    "move_nodes",
    "nodal_solve",
    "subcell_force",
    "subcell_matrix",
    "update_B_crank_nicolson",
    "update_B_first_order",
    "velocity_gradient",
]
