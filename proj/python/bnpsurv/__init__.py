"""Bayesian non-parametric survival estimation with spliced Beta-Stacy priors."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
