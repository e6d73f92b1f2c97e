"""LQ differential games: feedback Nash solutions, near-potential distances,
and closed-loop trajectory error bounds."""

from .errors import (
    BlockMismatchError,
    DivergedError,
    GameFileError,
    GridMismatchError,
    MaxIterationsError,
    NonFiniteMatrixError,
    NotNormalizedError,
    NotStabilizableError,
    NpdgError,
    PartitionError,
    SolverError,
)
from .families import FamilyParams, LinearFit, SweepReport, SweepRow, family_x0, generate_family, sweep_delta
from .gamefiles import game_to_doc, load_game, parse_game, save_game
from .games import (
    GameSpec,
    PlayerSpec,
    PotentialSpec,
    ValidationReport,
    Violation,
    aggregate_inputs,
    make_potential,
    normalize_potential_scaling,
    rescale_player_cost,
    rescale_potential_cost,
    validate_game,
    validate_potential,
)
from .linalg import frobenius_norm, matrix_exponential, solve_lyapunov, spectral_norm
from .metrics import (
    BoundChain,
    DeltaKReport,
    DistanceReport,
    closed_loop_matrix_error,
    dd_trajectory,
    delta_star,
    deltaK_bound_chain,
    is_exact_potential,
)
from .riccati import (
    ClosedLoop,
    RiccatiSolution,
    care_residual,
    closed_loop_nash,
    closed_loop_potential,
    coupled_residuals,
    solve_care,
    solve_coupled_riccati,
)
from .simulate import (
    BoundReport,
    PiecewiseDelta,
    Trajectory,
    c_npdg_bound,
    default_grid,
    piecewise_delta,
    rk4_reference,
    simulate_closed_loop,
    trajectory_error,
    verify_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BlockMismatchError",
    "BoundChain",
    "BoundReport",
    "ClosedLoop",
    "DeltaKReport",
    "DistanceReport",
    "DivergedError",
    "FamilyParams",
    "GameFileError",
    "GameSpec",
    "GridMismatchError",
    "LinearFit",
    "MaxIterationsError",
    "NonFiniteMatrixError",
    "NotNormalizedError",
    "NotStabilizableError",
    "NpdgError",
    "PartitionError",
    "PiecewiseDelta",
    "PlayerSpec",
    "PotentialSpec",
    "RiccatiSolution",
    "SolverError",
    "SweepReport",
    "SweepRow",
    "Trajectory",
    "ValidationReport",
    "Violation",
    "aggregate_inputs",
    "c_npdg_bound",
    "care_residual",
    "closed_loop_matrix_error",
    "closed_loop_nash",
    "closed_loop_potential",
    "coupled_residuals",
    "dd_trajectory",
    "default_grid",
    "delta_star",
    "deltaK_bound_chain",
    "family_x0",
    "frobenius_norm",
    "game_to_doc",
    "generate_family",
    "is_exact_potential",
    "load_game",
    "make_potential",
    "matrix_exponential",
    "normalize_potential_scaling",
    "parse_game",
    "piecewise_delta",
    "rescale_player_cost",
    "rescale_potential_cost",
    "rk4_reference",
    "save_game",
    "simulate_closed_loop",
    "solve_care",
    "solve_coupled_riccati",
    "solve_lyapunov",
    "spectral_norm",
    "sweep_delta",
    "trajectory_error",
    "validate_game",
    "validate_potential",
    "verify_bound",
]
