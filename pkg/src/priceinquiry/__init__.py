"""When should an appliance pay to learn the real-time power price?"""

from .estimator import InquiryPolicy
from .exceptions import ConvergenceError, InputError
from .kernel import TransitionKernel, build_kernel, kernel_entry, law_for
from .lmp_curve import LmpCurve, LmpTable, build_curve, load_curves, parse_table, price_of_load
from .load_model import LoadLaw, conditional_cdf, sample_step, std_normal_cdf
from .mdp import (
    HOLD,
    INQUIRE,
    MdpState,
    ModelConfig,
    ValueFunction,
    consumption,
    evaluate_policy,
    net_utility,
    reward_hold,
    reward_inquire,
    solve,
)
from .policies import PolicySpec, make_policy, myopic_action
from .simulator import EpisodeStats, SimConfig, run_episode, run_experiment, sweep

__version__ = "0.1.0"

__all__ = [
    "HOLD", "INQUIRE", "ConvergenceError", "EpisodeStats", "InputError", "InquiryPolicy",
    "LmpCurve", "LmpTable", "LoadLaw", "MdpState", "ModelConfig", "PolicySpec",
    "SimConfig", "TransitionKernel", "ValueFunction", "build_curve", "build_kernel",
    "conditional_cdf", "consumption", "evaluate_policy", "kernel_entry", "law_for",
    "load_curves", "make_policy", "myopic_action", "net_utility", "parse_table",
    "price_of_load", "reward_hold", "reward_inquire", "run_episode", "run_experiment",
    "sample_step", "solve", "std_normal_cdf", "sweep",
]
