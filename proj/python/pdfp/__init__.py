"""Primal-dual fixed-point solvers for min f1(Dx) + f2(x)."""

from ._pdfp import *  # noqa: F401,F403
from ._pdfp import __doc__  # noqa: F401

__version__ = "0.1.0"
