"""Random linear disequations over ``Z_{p^k}^n``.

Deciding whether characters are drawn nearly uniformly or from a source that
avoids the kernel of a hidden ``u``, and recovering ``<u>`` from such a source.
"""

from .charsample import SampleSource, sample
from .decision import DecisionResult, Verdict, decide, required_sample_size
from .groups import AbelianPGroup, Subgroup
from .polyenc import MultiPoly, witness_poly
from .ring import GroupParams, RingVec
from .search import SearchResult, search

__all__ = [
    "AbelianPGroup",
    "DecisionResult",
    "GroupParams",
    "MultiPoly",
    "RingVec",
    "SampleSource",
    "SearchResult",
    "Subgroup",
    "Verdict",
    "decide",
    "required_sample_size",
    "sample",
    "search",
    "witness_poly",
]

__version__ = "0.1.0"
