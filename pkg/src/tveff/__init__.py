"""Time-varying joint market efficiency and bootstrap event studies."""

from .errors import TvEffError
from .events import EventSpec, EventStudyResult, abnormal_returns, bootstrap_car, cumulative_ar, event_study
from .series import PriceSeries, ReturnPanel, align_panel, describe, impute_gaps, log_returns
from .stability import ConstancyReport, hansen_lc
from .synth import ScenarioSpec, generate, mask_gaps, truncated_vma_zeta
from .tvvar import EfficiencyPath, TvVarFit, efficiency_path, fit_tvvar, null_bands, select_weight
from .unitroot import UnitRootReport, adf_gls, gls_detrend, mbic_lag_select
from .var import VarFit, efficiency_degree, fit_var, longrun_sum, select_lag_bic, vma_coefficients

__all__ = [
    "ConstancyReport",
    "EfficiencyPath",
    "EventSpec",
    "EventStudyResult",
    "PriceSeries",
    "ReturnPanel",
    "ScenarioSpec",
    "TvEffError",
    "TvVarFit",
    "UnitRootReport",
    "VarFit",
    "abnormal_returns",
    "adf_gls",
    "align_panel",
    "bootstrap_car",
    "cumulative_ar",
    "describe",
    "efficiency_degree",
    "efficiency_path",
    "event_study",
    "fit_tvvar",
    "fit_var",
    "generate",
    "gls_detrend",
    "hansen_lc",
    "impute_gaps",
    "log_returns",
    "longrun_sum",
    "mask_gaps",
    "mbic_lag_select",
    "null_bands",
    "select_lag_bic",
    "select_weight",
    "truncated_vma_zeta",
    "vma_coefficients",
]
