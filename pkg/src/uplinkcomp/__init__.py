"""Outage analysis of uplink cooperation between two neighbouring cells."""

from .analytic import (OutageValue, QuadratureError, Regime, a_complement, e_func, f_base, g_base,
                       outage_aw_dis, outage_aw_dis_home_forwarding, outage_aw_sic,
                       outage_aw_sic_asymptotic, outage_aw_sic_asymptotic_symmetric,
                       outage_dis, outage_location_averaged, outage_marp,
                       outage_marp_asymptotic, outage_marp_asymptotic_symmetric)
from .channel import (FadingDraw, LinkAttenuations, PowerConfig, PppRealization,
                      ScenarioGeometry, apply_power_control, attenuations, db_to_linear,
                      link_attenuations, linear_to_db, rate_to_threshold, sample_fading,
                      sample_interference, sample_ppp)
from .events import (DecodeOutcome, LinkState, Scheme, Site, clean_decode, effective_powers,
                     event_A, event_E, outcome, outcome_mmse_sic)
from .montecarlo import (EstimateRow, OutageEstimate, Scenario, curve_gap_db, estimate_db_gap,
                         estimate_outage, estimate_reduction)
from .ppp import (PppModel, asymptotic_aw_ppp, asymptotic_aw_ppp_symmetric, asymptotic_marp_ppp,
                  asymptotic_marp_ppp_symmetric, outage_aw_ppp, outage_marp_ppp,
                  threshold_functionals)
from .protocol import (ProtocolTrace, run_aw_dis_protocol, run_aw_sic_protocol,
                       run_protocol_batch, verify_protocol_equivalence)

__version__ = "0.1.0"
