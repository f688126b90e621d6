"""Numerical tolerances shared by every check in the package.

Reports reference these by name so a failing check can be traced back to the
constant that decided it.
"""

# Slack added on the right-hand side of pointwise smoothness checks.
POINTWISE_SLACK = 1e-12

# Absolute slack on guarantee inequalities (bounds, coverage conditions, ...).
INEQUALITY_ATOL = 1e-9

# Relative error allowed when comparing gradients to finite differences.
GRADIENT_RTOL = 1e-6

# Symmetry tolerance when parsing matrices from instance files.
SYMMETRY_ATOL = 1e-12

# A gradient component below this aborts the greedy run.
NEGATIVE_GRADIENT_ATOL = 1e-9

# Pair blocks in the coverage construction are skipped below this weight.
NEGLIGIBLE_WEIGHT = 1e-12

# Tolerance on "weights sum to one" for basis decompositions.
WEIGHT_SUM_ATOL = 1e-9

TOLERANCES = {
    "POINTWISE_SLACK": POINTWISE_SLACK,
    "INEQUALITY_ATOL": INEQUALITY_ATOL,
    "GRADIENT_RTOL": GRADIENT_RTOL,
    "SYMMETRY_ATOL": SYMMETRY_ATOL,
    "NEGATIVE_GRADIENT_ATOL": NEGATIVE_GRADIENT_ATOL,
    "NEGLIGIBLE_WEIGHT": NEGLIGIBLE_WEIGHT,
    "WEIGHT_SUM_ATOL": WEIGHT_SUM_ATOL,
}
