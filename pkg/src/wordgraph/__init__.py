"""Word-recurrence graph analysis of literary texts across grade levels."""

from wordgraph.graphcore import ATTRIBUTES, AttributeVector, WindowGraph
from wordgraph.pipeline import CorpusRecord, TextProfile, WindowingConfig
from wordgraph.textprep import CleanRules, TokenStream

__version__ = "0.1.0"

__all__ = [
    "ATTRIBUTES",
    "AttributeVector",
    "CleanRules",
    "CorpusRecord",
    "TextProfile",
    "TokenStream",
    "WindowGraph",
    "WindowingConfig",
]
