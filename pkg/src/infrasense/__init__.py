"""Infrastructure-assisted beam training for mmWave vehicle-to-infrastructure links.

Sub-modules: ``scene`` (urban-canyon drops), ``raytrace`` (LOS and
first-order reflections), ``phyarray`` (arrays, codebooks, channel),
``sensing`` (GNSS, RSU radar, passive-radar APS), ``beamselect`` (candidate
sets and overhead), and ``campaign``/``export``/``cli`` (the harness).
"""

from .beamselect import (CandidateSet, Strategy, aps_candidates, budget_position_candidates,
                         exhaustive_candidates, overhead, position_candidates, run_training)
from .campaign import CampaignResult, overhead_table, run_campaign
from .config import ExperimentConfig, aps_demo_config, campaign_config, load_config, overhead_config
from .export import emit_results, load_results
from .phyarray import ArrayGroup, Codebook, Ula, assemble_channel, dft_codebook, steering_vector
from .raytrace import classify_state, trace_paths
from .scene import SceneConfig, build_scene
from .sensing import (RadarSpec, estimate_aps, gnss_estimate, passive_radar_covariance,
                      rsu_radar_estimate, translate_aps)

__version__ = "0.1.0"

__all__ = [
    "ArrayGroup", "CampaignResult", "CandidateSet", "Codebook", "ExperimentConfig", "RadarSpec",
    "SceneConfig", "Strategy", "Ula", "aps_candidates", "aps_demo_config", "assemble_channel",
    "budget_position_candidates", "build_scene", "campaign_config", "classify_state",
    "dft_codebook", "emit_results", "estimate_aps", "exhaustive_candidates", "gnss_estimate",
    "load_config", "load_results", "overhead", "overhead_config", "overhead_table",
    "passive_radar_covariance", "position_candidates", "rsu_radar_estimate", "run_campaign",
    "run_training", "steering_vector", "trace_paths", "translate_aps",
]
