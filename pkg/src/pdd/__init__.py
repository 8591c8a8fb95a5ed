"""Pattern discovery and disentanglement for categorical survey data."""

from pdd.association import (
    ArvMatrix,
    AvIndex,
    ContingencyModel,
    adjusted_residual,
    build_arv,
    build_contingency,
)
from pdd.baseline import apriori, apriori_inverse, compare_criteria
from pdd.config import TAU_PRESETS, AnalysisConfig
from pdd.discretize import BinSpec, DiscretizedTable, discretize_table, equal_frequency_cutpoints
from pdd.disentangle import eigendecompose, reproject, select_spaces
from pdd.errors import InvariantViolation, PDDError
from pdd.patterns import KnowledgeBase, classify_ava
from pdd.pipeline import analyze
from pdd.report import read_kb, render, write_kb
from pdd.schema import AttributeSchema, load_schema, load_table
from pdd.synth import GeneratorSpec, evaluate_recovery, generate

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "ArvMatrix",
    "AttributeSchema",
    "AvIndex",
    "BinSpec",
    "ContingencyModel",
    "DiscretizedTable",
    "GeneratorSpec",
    "InvariantViolation",
    "KnowledgeBase",
    "PDDError",
    "TAU_PRESETS",
    "adjusted_residual",
    "analyze",
    "apriori",
    "apriori_inverse",
    "build_arv",
    "build_contingency",
    "classify_ava",
    "compare_criteria",
    "discretize_table",
    "eigendecompose",
    "equal_frequency_cutpoints",
    "evaluate_recovery",
    "generate",
    "load_schema",
    "load_table",
    "read_kb",
    "render",
    "reproject",
    "select_spaces",
    "write_kb",
]
