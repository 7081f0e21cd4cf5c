"""Almost disjoint families, weak separation and tree encodings at desk scale."""
from .lazyset import AdFamily, Arith, Finite, LazySet, Patched, Poly, Union
from .verdict import Verdict

__all__ = ["AdFamily", "Arith", "Finite", "LazySet", "Patched", "Poly", "Union", "Verdict"]
__version__ = "0.1.0"
