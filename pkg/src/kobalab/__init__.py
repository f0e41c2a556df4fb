"""Numerical lab for lower bounds of the Kobayashi metric on model domains."""

__version__ = "0.1.0"

from .domains import DOMAIN_NAMES, get_domain  # noqa: E402
from .errors import KobalabError  # noqa: E402
from .rates import RateFunction, RateTransforms  # noqa: E402

__all__ = ["DOMAIN_NAMES", "KobalabError", "RateFunction", "RateTransforms", "get_domain", "__version__"]
