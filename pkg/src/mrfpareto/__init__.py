"""Multiple risk factor dependence for Pareto-II default times."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    InfiniteMean,
    MrfError,
    NumericalError,
    ValidationError,
)
from .extremes import (  # noqa: E402
    bivariate_decompose,
    last_default_ddf,
    minima_law,
    simultaneous_default_prob,
)
from .gammaconv import GammaComponent, RandomizedLomax, moschopoulos_pmf  # noqa: E402
from .model import (  # noqa: E402
    ExposureMatrix,
    MrfPortfolio,
    aggregate_powers,
    joint_ddf,
    marginal,
    sample,
)
from .moments import pearson_corr, product_moment  # noqa: E402
from .risk import (  # noqa: E402
    cte_marginal,
    cte_maxima,
    cte_minima,
    solvency_bonus,
    var_marginal,
)

__all__ = [
    "ExposureMatrix",
    "GammaComponent",
    "InfiniteMean",
    "MrfError",
    "MrfPortfolio",
    "NumericalError",
    "RandomizedLomax",
    "ValidationError",
    "__version__",
    "aggregate_powers",
    "bivariate_decompose",
    "cte_marginal",
    "cte_maxima",
    "cte_minima",
    "joint_ddf",
    "last_default_ddf",
    "marginal",
    "minima_law",
    "moschopoulos_pmf",
    "pearson_corr",
    "product_moment",
    "sample",
    "simultaneous_default_prob",
    "solvency_bonus",
    "var_marginal",
]
