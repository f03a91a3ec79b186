"""Exact small-scale toolkit for finite-state multiple-access channels with
per-symbol output feedback: directed information under causal policies,
inner/outer rate-region bounds, random-coding error exponents, and Monte
Carlo validation of code-tree ensembles.
"""

__version__ = "0.1.0"

from .channels import (
    FeedbackFn,
    FsMac,
    NoiseChain,
    additive_modq_mac,
    erasure_p2p,
    gilbert_elliott_mac,
    load_channel,
    mux_p2p_compose,
    save_channel,
)
from .dirinfo import (
    directed_info,
    directed_info_cc,
    directed_info_given_state,
    entropy_rate_bounds,
    functional_I,
    ge_sumrate_identity_check,
    mutual_info,
    zero_region_check,
)
from .errors import FsmacError, SizingError, SpecError
from .exponents import (
    ExponentEval,
    error_bound,
    exponent_achievability,
    exponent_curve,
    gallager_E,
    gallager_F,
)
from .hot import BACKEND
from .probcore import (
    Alphabet,
    CausalChannelLaw,
    CausalKernel,
    JointLaw,
    causal_conditional,
    channel_causal_law,
    joint_law,
)
from .regions import (
    Pentagon,
    PolicyGrid,
    RatePoint,
    RateRegion,
    hausdorff_distance,
    limit_region_estimate,
    minkowski_sum,
    pentagon_inner,
    pentagon_outer,
    region_union,
    scale_region,
    supadditivity_check,
)
from .simulate import SimConfig, run_ensemble, sample_code_trees, theorem6_bound
