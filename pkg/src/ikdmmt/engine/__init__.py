"""Tensor operations, gradient checks and the TNSR file format."""

from . import functional, tnsr
from .functional import DTYPE
from .gradcheck import GradCheckReport, grad_check, grad_check_parameters
