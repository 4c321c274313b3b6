"""Polynomial flows, Turing machines and discrete learning dynamics embedded in replicator dynamics."""

from .errors import NumericFailure, RejectedInput
from .game import MatrixGame, logit, replicator_field, simulate_replicator
from .glv import EmbeddingMap, GlvSystem, embed_glv, poly_to_glv, simulate_with_clock
from .integrate import Trajectory, integrate_adaptive, integrate_fixed, reach
from .mwu import global_error_bound, local_error_bound, select_step_size, simulate_mwu
from .poly import PolynomialField, count_monomials, game_size_bound
from .sphere import sphere_poly_to_game
from .turing import TapeConfig, TuringMachine, encode, decode, tm_run, tm_step

__version__ = "0.1.0"
