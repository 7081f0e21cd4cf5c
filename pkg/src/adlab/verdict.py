from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class Verdict:
    """Outcome of a depth-bounded check.

    ``witness`` carries the counterexample of a violated check (or auxiliary
    data of a certified one, e.g. a computed cutoff).
    """

    certified: bool
    witness: Any = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.certified

    def __repr__(self) -> str:
        if self.certified:
            return "Certified" if self.witness is None else f"Certified({self.witness!r})"
        return f"Violated({self.witness!r}{', ' + self.reason if self.reason else ''})"


CERTIFIED = Verdict(True)


def certified(info: Any = None) -> Verdict:
    return CERTIFIED if info is None else Verdict(True, info)


def violated(witness: Any = None, reason: str = "") -> Verdict:
    return Verdict(False, witness, reason)
