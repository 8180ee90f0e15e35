"""Exact and Monte Carlo statistics of the dense O(1) loop model on a cylinder."""

from .patterns import DefectPattern, LinkPattern, PatternError, enumerate_states, format_pattern, parse
from .transfer import Distribution, ResourceError, TransferError, stationary, transition_matrix
from .glue import spanning_visit_prob, surround_distribution, winding_edge_prob
from .algebra import OMEGA, GaussianInt, I, OmegaInt, pascal_charpoly, shifted_det
from .formulas import aht, asm_count, q_lm, q_row
from .asymptotics import fit_a_coefficients
from .montecarlo import estimate_strip, estimate_walks, walk_single

__version__ = "0.1.0"
