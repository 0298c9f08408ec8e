"""Access-optimal conversion of linear MDS convertible codes."""

from .framework import ConversionParams, ConversionPlan, ConvertibleCodeSpec
from .galois import FieldSpec, GfMatrix

__version__ = "1.0.0"
