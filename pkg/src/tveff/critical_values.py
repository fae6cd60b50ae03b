"""Static critical-value tables.

ADF-GLS
    Elliott, Rothenberg and Stock (1996), Table 1, asymptotic row. The
    constant-only case shares the Dickey-Fuller no-deterministics
    distribution. For the constant+trend case the 1% entry is -3.42, a
    finite-sample value for samples of about 600 observations; the original
    table lists -3.46 at T = 200 and -3.48 asymptotically.

Hansen L_C
    Hansen (1992), "Testing for parameter instability in linear models",
    Table 1: asymptotic critical values of the joint L statistic indexed by
    the number of parameters tested (1..20). Beyond 20 parameters use
    :func:`tveff.stability.lc_asymptotic_quantile`.
"""

ADF_GLS = {
    "constant": {"1%": -2.58, "5%": -1.95, "10%": -1.62},
    "constant+trend": {"1%": -3.42, "5%": -2.89, "10%": -2.57},
}

# n_params -> (1%, 5%, 10%)
HANSEN_LC = {
    1: (0.748, 0.470, 0.353),
    2: (1.07, 0.749, 0.610),
    3: (1.35, 1.01, 0.846),
    4: (1.60, 1.24, 1.07),
    5: (1.88, 1.47, 1.28),
    6: (2.12, 1.68, 1.49),
    7: (2.35, 1.90, 1.69),
    8: (2.59, 2.11, 1.89),
    9: (2.82, 2.32, 2.10),
    10: (3.05, 2.54, 2.29),
    11: (3.27, 2.75, 2.49),
    12: (3.51, 2.96, 2.69),
    13: (3.69, 3.15, 2.89),
    14: (3.90, 3.34, 3.08),
    15: (4.07, 3.54, 3.26),
    16: (4.30, 3.75, 3.46),
    17: (4.51, 3.95, 3.64),
    18: (4.73, 4.14, 3.83),
    19: (4.92, 4.33, 4.03),
    20: (5.13, 4.52, 4.22),
}

HANSEN_LEVELS = (0.01, 0.05, 0.10)
