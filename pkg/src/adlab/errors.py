"""Exceptions raised by adlab operations.

Verification outcomes are reported as :class:`adlab.verdict.Verdict` values;
exceptions are reserved for broken preconditions and exhausted search fuel.
"""


class AdlabError(Exception):
    pass


class InsufficientDepth(AdlabError, ValueError):
    """The requested depth cannot decide the question asked."""


class TreeTruncated(AdlabError, IndexError):
    """A level beyond the stored truncation of a tree was queried."""


class NoBranchWithinFuel(AdlabError):
    pass


class UniverseTooLarge(AdlabError, ValueError):
    pass


class SubsetViolation(AdlabError, ValueError):
    def __init__(self, index, element):
        super().__init__(f"refined set {index} contains {element}, absent from the original")
        self.index = index
        self.element = element


class StemMismatch(AdlabError, ValueError):
    pass


class WitnessExhausted(AdlabError):
    pass


class TooFewSets(AdlabError, ValueError):
    pass


class CoverGap(AdlabError, ValueError):
    def __init__(self, n, point):
        super().__init__(f"cover {n} has no member containing point {point}")
        self.n = n
        self.point = point
