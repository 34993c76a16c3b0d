"""Adaptive spatial modulation for indoor visible light links.

Lambertian LOS channels, closed-form average SER, a Monte-Carlo ML
detector, and modulation-order search under a spectral-efficiency budget.
"""

from .channel import (
    ChannelMatrix,
    Scenario,
    build_channel_matrix,
    channel_gain,
    lambertian_order,
    load_scenario,
)
from .errors import (
    ConfigError,
    InfeasibleConstraintError,
    InvalidParameterError,
    NotApplicableError,
    SingularGeometryError,
)
from .modulation import (
    Constellation,
    ModOrderCombo,
    constellation,
    enumerate_combos,
    selection_probability,
    spectral_efficiency,
)
from .montecarlo import SimConfig, SimResult, draw_symbol, ml_detect, simulate_ser
from .optimizer import SearchReport, asm_search, combo_variance, cr_asm_search
from .ser import (
    SerBreakdown,
    average_ser,
    cross_min_distance,
    min_intra_distance,
    per_led_ser,
    q_function,
    signal_domain_error,
    sms_ser,
    spatial_domain_error,
    ssk_ser,
)

__version__ = "0.1.0"
