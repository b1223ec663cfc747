"""Interactive exploration of symbolic regression model sets in an e-graph."""

from .egraph import EGraph, ENode
from .expr import parse_expression, parse_pattern, render
from .fitdata import Dataset, FitRecord, load_dataset
from .session import Session

__all__ = [
    "EGraph",
    "ENode",
    "Dataset",
    "FitRecord",
    "Session",
    "load_dataset",
    "parse_expression",
    "parse_pattern",
    "render",
]
