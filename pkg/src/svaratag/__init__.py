"""Vedic pitch-accent restoration toolkit.

Subpackages and modules:

- :mod:`svaratag.text` reversible accent handling on Devanagari text
- :mod:`svaratag.corpus` parallel corpus construction and stratified splits
- :mod:`svaratag.metrics` WER / CER / DER and correlation
- :mod:`svaratag.tagger` BiLSTM-CRF accent tagger (numpy, from scratch)
- :mod:`svaratag.analysis` accent error taxonomy and aggregation
- :mod:`svaratag.synthetic` rule-based synthetic corpora for tests and demos
- :mod:`svaratag.config` toolkit configuration file handling
- :mod:`svaratag.cli` command-line interface
"""

from .errors import (
    ContractError,
    RecordError,
    StructuralTextError,
    SvaratagError,
    TrainingDiverged,
)
from .text import (
    ANUDATTA,
    DEFAULT_INVENTORY,
    EMPTY_TAG,
    SVARITA,
    AccentMark,
    AccentTag,
    GraphemeCluster,
    apply_labels,
    extract_labels,
    normalize,
    parse_inventory,
    segment,
    strip_accents,
)

__version__ = "0.1.0"

__all__ = [
    "ANUDATTA",
    "DEFAULT_INVENTORY",
    "EMPTY_TAG",
    "SVARITA",
    "AccentMark",
    "AccentTag",
    "ContractError",
    "GraphemeCluster",
    "RecordError",
    "StructuralTextError",
    "SvaratagError",
    "TrainingDiverged",
    "apply_labels",
    "extract_labels",
    "normalize",
    "parse_inventory",
    "segment",
    "strip_accents",
    "__version__",
]
