"""Exact laws, survival certificates and Monte Carlo estimators for
single-type and cooperative two-type growth chains.

Everything lives in the compiled extension; this package re-exports it.
"""

from branchsim._core import *  # noqa: F401,F403
from branchsim._core import __doc__  # noqa: F401

__version__ = "0.1.0"
