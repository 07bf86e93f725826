"""Stackelberg interference pricing for D2D underlay networks."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    GameOutcome,
    NetworkInstance,
    TopologyConfig,
    bs_revenue,
    ipn,
    rate,
    sample_network,
    sinr,
    total_interference,
    user_payoff,
)
from .game import NeResult, best_response, best_response_map, solve_ne  # noqa: E402
from .uniform import price_lower_bound, price_upper_bound, solve_uniform  # noqa: E402
from .differentiated import (  # noqa: E402
    build_lp,
    prices_from_powers,
    solve_optimal,
    solve_suboptimal,
)
from .lp import LpProblem, LpSolution, LpStatus, solve_lp  # noqa: E402
