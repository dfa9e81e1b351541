"""Rate/disturbance regions for channels with unintended receivers."""

from .channel import ChannelSpec, deterministic_channel, parse_channel, read_channel
from .coding import birthday_bound, gen_marton_codebook, independence_oracle, sim_1dc, sset_stats
from .errors import GuardError
from .frontier import RegionFrontier, frontier_compare
from .gaussian import GaussianScalarRegion, GaussianVectorRegion
from .info import JointPmf, cond_entropy, cond_mutual_info, entropy, mutual_info
from .partitions import SetPartition, join, meet, refines
from .polyhedra import IneqSystem, project, verify_thm4_projection
from .regions import (DeterministicRegion1DC, ExactRegion2DC, InnerBound2DC, OuterBound2DC,
                      Region1DC, check_exactness, inner_2dc, inner_2dc_roof, outer_2dc,
                      region_1dc, region_1dc_det, region_2dc_exact)

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec", "deterministic_channel", "parse_channel", "read_channel",
    "birthday_bound", "gen_marton_codebook", "independence_oracle", "sim_1dc", "sset_stats",
    "GuardError", "RegionFrontier", "frontier_compare",
    "GaussianScalarRegion", "GaussianVectorRegion",
    "JointPmf", "cond_entropy", "cond_mutual_info", "entropy", "mutual_info",
    "SetPartition", "join", "meet", "refines",
    "IneqSystem", "project", "verify_thm4_projection",
    "DeterministicRegion1DC", "ExactRegion2DC", "InnerBound2DC", "OuterBound2DC", "Region1DC",
    "check_exactness", "inner_2dc", "inner_2dc_roof", "outer_2dc",
    "region_1dc", "region_1dc_det", "region_2dc_exact",
]
