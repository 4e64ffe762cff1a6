"""Rates and bounds for a nomadic multi-antenna transmitter.

The transmitter is received by distributed agents that forward compressed
observations to a destination over finite-capacity links. The package
evaluates achievable rates, upper bounds, outage probabilities and
diversity-multiplexing tradeoff curves over Rayleigh fading.
"""

__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    DmtCurve,
    dmt_ceo,
    dmt_ec,
    dmt_link_capacity,
    dmt_upper,
    estimate_diversity,
    fit_diversity,
    horizontal_gap_db,
    multiplexing_gain,
    supported_rate,
)
from .bounds import (  # noqa: E402
    BoundReport,
    EpiTerm,
    cutset_ergodic,
    cutset_outage,
    epi_F,
    epi_G,
    ub_fast,
    ub_fast_partitioned,
    ub_outage,
    ub_symmetric,
)
from .channel import (  # noqa: E402
    ChannelEnsemble,
    ChannelMatrix,
    CovarianceQ,
    SystemConfig,
    db_to_linear,
    linear_to_db,
    load_ensemble,
    make_ensemble,
    save_ensemble,
)
from .errors import *  # noqa: E402,F401,F403
from .rates import *  # noqa: E402,F401,F403
