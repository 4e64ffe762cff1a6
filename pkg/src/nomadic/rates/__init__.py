"""Achievable rates: elementary compression, CEO compression and DPC evaluation."""

from ._types import (
    CompressionProfile,
    DpcParams,
    RateReport,
    TwoAgentSolution,
    format_family,
    format_subset,
    parse_subset,
)
from .ceo import (
    Q_HEADROOM,
    ceo_asymptotic_limit,
    ceo_constant_q,
    ceo_optimize_joint,
    ceo_optimize_per_channel,
    ceo_outage,
    ceo_outage_values,
    ceo_per_sample_values,
    ceo_rate,
    ceo_subset_terms,
    ceo_symmetric_constant_q,
)
from .dpc import dpc_rate_eval, dpc_terms
from .ec import (
    ec_asymptotic_limit,
    ec_constant_q,
    ec_constraint,
    ec_optimize,
    ec_outage,
    ec_outage_values,
    ec_pinned_factor,
    ec_rate,
)
from .mimo import mimo_agents_optimize, mimo_agents_rate, rotated_rows
from .two_agent import THETA_BRACKET, two_agent_determinants, two_agent_q, two_agent_solve

__all__ = [
    "CompressionProfile", "DpcParams", "RateReport", "TwoAgentSolution",
    "format_family", "format_subset", "parse_subset",
    "Q_HEADROOM", "ceo_asymptotic_limit", "ceo_constant_q", "ceo_optimize_joint",
    "ceo_optimize_per_channel", "ceo_outage", "ceo_outage_values", "ceo_per_sample_values",
    "ceo_rate", "ceo_subset_terms", "ceo_symmetric_constant_q",
    "dpc_rate_eval", "dpc_terms",
    "ec_asymptotic_limit", "ec_constant_q", "ec_constraint", "ec_optimize", "ec_outage",
    "ec_outage_values", "ec_pinned_factor", "ec_rate",
    "mimo_agents_optimize", "mimo_agents_rate", "rotated_rows",
    "THETA_BRACKET", "two_agent_determinants", "two_agent_q", "two_agent_solve",
]
