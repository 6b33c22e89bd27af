"""Bounded-check verdicts shared by the hom, automaton, and analyze modules."""

from __future__ import annotations

from dataclasses import dataclass

OK = "ok"
WITNESS = "witness"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a bounded check: clean up to ``bound`` or a concrete witness."""

    status: str
    bound: int
    witness: object = None
    detail: str = ""

    def __post_init__(self):
        if self.status not in (OK, WITNESS):
            raise ValueError(f"bad verdict status: {self.status!r}")
        if (self.witness is not None) != (self.status == WITNESS):
            raise ValueError("witness must be present exactly when status is 'witness'")

    @property
    def is_ok(self) -> bool:
        return self.status == OK


def verified(bound: int) -> Verdict:
    return Verdict(OK, bound)


def violated(bound: int, witness, detail: str = "") -> Verdict:
    return Verdict(WITNESS, bound, witness, detail)
