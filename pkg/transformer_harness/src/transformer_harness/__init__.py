"""Transformer arm for Vedic accent restoration.

Fine-tunes a pretrained byte-level encoder-decoder, either fully or through
low-rank adapters on the self-attention projections, and writes hypothesis
JSONL consumed by the ``svaratag eval`` and ``svaratag analyze`` commands.
The only coupling to the main toolkit is the file contract: corpus,
manifest, and hypothesis schemas.
"""

from .config import FinetuneConfig
from .errors import CheckpointError, DataError, HarnessError

__version__ = "0.1.0"

__all__ = [
    "CheckpointError",
    "DataError",
    "FinetuneConfig",
    "HarnessError",
    "__version__",
]
