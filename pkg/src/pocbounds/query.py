"""Counterfactual query parsing and canonicalization.

A query is a conjunction of counterfactual atoms ``y<o>_x<t>`` (the event
"Y would equal y_o had X been x_t"), optionally joined with an observed
treatment ``x<p>`` and/or an observed outcome ``y<q>``, either as further
conjuncts or behind ``|`` as conditioning evidence.  Grammar::

    query  := "P(" atoms ")" | "P(" atoms "|" evlist ")" | "P(" atoms "," evlist ")"
    atoms  := atom ("," atom)*
    atom   := "y" INDEX "_x" INDEX
    evlist := ev ("," ev)*
    ev     := "x" INDEX | "y" INDEX
    INDEX  := nonzero decimal integer

Whitespace is insignificant; indices are 1-based.  The ``|`` form asks for a
conditional probability, the ``,`` form for the joint.

``canonicalize`` classifies a query into one of four families -- a bare
conjunction, a conjunction with observed treatment, with observed outcome, or
with both -- and relabels treatments so the atoms occupy canonical slots
1..k.  Outcomes are never relabeled: each slot records which outcome it
queries, and the bound evaluators substitute those outcomes into the closed
forms.  Treatment relabeling is justified by label symmetry of the underlying
model; the LP oracle, which is label-explicit, cross-checks it in the tests.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .dist import Dims
from .errors import (
    DuplicateTreatment,
    EvidenceConflict,
    IndexOutOfRange,
    MultipleEvidence,
    QuerySyntaxError,
    ShapeMismatch,
)


class Family(enum.Enum):
    PNS = "PNS"    # atoms only
    PSUB = "PSUB"  # atoms + observed treatment
    PREP = "PREP"  # atoms + observed outcome
    PN = "PN"      # atoms + both

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Atom:
    """One counterfactual conjunct: outcome `outcome` under do(X = x_treatment)."""

    treatment: int
    outcome: int

    def __post_init__(self):
        if self.treatment < 1 or self.outcome < 1:
            raise IndexOutOfRange("atom", min(self.treatment, self.outcome), 1)


@dataclass(frozen=True)
class Query:
    atoms: tuple[Atom, ...]
    x_evidence: Optional[int] = None
    y_evidence: Optional[int] = None
    conditional: bool = False

    def __post_init__(self):
        if not self.atoms:
            raise QuerySyntaxError(0, "at least one atom")
        seen = set()
        for a in self.atoms:
            if a.treatment in seen:
                raise DuplicateTreatment(a.treatment)
            seen.add(a.treatment)
        if self.x_evidence is not None and self.x_evidence in seen:
            raise EvidenceConflict(self.x_evidence)
        if self.conditional and self.x_evidence is None and self.y_evidence is None:
            raise QuerySyntaxError(0, "evidence term before conditioning")

    @property
    def k(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class CanonicalQuery:
    """A query in canonical slot form.

    ``treatment_perm[j-1]`` is the original treatment occupying canonical slot
    j; slots 1..k hold the atoms in input order and the remaining treatments
    follow in ascending order.  ``outcome_map[j-1]`` is the (original, never
    relabeled) outcome queried by slot j.  ``p_slot`` is the canonical slot of
    the x-evidence treatment (always > k), ``q_outcome`` the y-evidence
    outcome index.
    """

    family: Family
    k: int
    treatment_perm: tuple[int, ...]
    outcome_map: tuple[int, ...]
    p_slot: Optional[int] = None
    q_outcome: Optional[int] = None
    conditional: bool = False

    @property
    def n(self) -> int:
        return len(self.treatment_perm)

    @property
    def p_treatment(self) -> Optional[int]:
        return None if self.p_slot is None else self.treatment_perm[self.p_slot - 1]


# --- parsing -----------------------------------------------------------------


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, token: str) -> None:
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            raise QuerySyntaxError(self.pos, repr(token))
        self.pos += len(token)

    def index(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise QuerySyntaxError(start, "an index")
        value = int(self.text[start : self.pos])
        if value == 0:
            raise QuerySyntaxError(start, "a nonzero index")
        return value


def parse_query(text: str) -> Query:
    """Parse query text into a :class:`Query`; see the module grammar."""
    sc = _Scanner(text)
    sc.expect("P")
    sc.expect("(")

    atoms: list[Atom] = []
    x_ev: Optional[int] = None
    y_ev: Optional[int] = None
    conditional = False
    in_evidence = False

    def add_ev(kind: str, value: int) -> None:
        nonlocal x_ev, y_ev
        if kind == "x":
            if x_ev is not None:
                raise MultipleEvidence("x")
            x_ev = value
        else:
            if y_ev is not None:
                raise MultipleEvidence("y")
            y_ev = value

    while True:
        ch = sc.peek()
        if ch == "y":
            here = sc.pos
            sc.pos += 1
            o = sc.index()
            if sc.text.startswith("_x", sc.pos):
                if in_evidence:
                    raise QuerySyntaxError(here, "evidence term (atoms precede evidence)")
                sc.pos += 2
                t = sc.index()
                atoms.append(Atom(t, o))
            else:
                in_evidence = True
                add_ev("y", o)
        elif ch == "x":
            sc.pos += 1
            in_evidence = True
            add_ev("x", sc.index())
        else:
            raise QuerySyntaxError(sc.pos, "'x' or 'y'")

        sep = sc.peek()
        if sep == ",":
            sc.pos += 1
            continue
        if sep == "|":
            if conditional:
                raise QuerySyntaxError(sc.pos, "','")
            sc.pos += 1
            conditional = True
            in_evidence = True
            continue
        sc.expect(")")
        break

    sc.skip_ws()
    if sc.pos != len(sc.text):
        raise QuerySyntaxError(sc.pos, "end of input")
    if conditional and x_ev is None and y_ev is None:
        raise QuerySyntaxError(len(text), "evidence after '|'")
    return Query(tuple(atoms), x_ev, y_ev, conditional)


def render_query(q: Query) -> str:
    """Inverse of :func:`parse_query` (up to whitespace and evidence order)."""
    parts = [f"y{a.outcome}_x{a.treatment}" for a in q.atoms]
    evs = []
    if q.x_evidence is not None:
        evs.append(f"x{q.x_evidence}")
    if q.y_evidence is not None:
        evs.append(f"y{q.y_evidence}")
    if not evs:
        return f"P({','.join(parts)})"
    sep = "|" if q.conditional else ","
    return f"P({','.join(parts)}{sep}{','.join(evs)})"


# --- canonicalization --------------------------------------------------------


def classify(q: Query) -> Family:
    if q.x_evidence is not None and q.y_evidence is not None:
        return Family.PN
    if q.x_evidence is not None:
        return Family.PSUB
    if q.y_evidence is not None:
        return Family.PREP
    return Family.PNS


def canonicalize(q: Query, dims: Dims) -> CanonicalQuery:
    """Assign canonical slots for a query over a square dimension space."""
    if not dims.is_square:
        raise ShapeMismatch(
            f"canonicalize needs a square dimension space; got "
            f"{dims.n_treatments}x{dims.n_outcomes} (squarify the dataset first)"
        )
    n = dims.side
    for a in q.atoms:
        if a.treatment > n:
            raise IndexOutOfRange("treatment", a.treatment, n)
        if a.outcome > n:
            raise IndexOutOfRange("outcome", a.outcome, n)
    if q.x_evidence is not None and q.x_evidence > n:
        raise IndexOutOfRange("treatment", q.x_evidence, n)
    if q.y_evidence is not None and q.y_evidence > n:
        raise IndexOutOfRange("outcome", q.y_evidence, n)
    if q.k > n:
        raise IndexOutOfRange("atom count", q.k, n)

    queried = [a.treatment for a in q.atoms]
    rest = sorted(set(range(1, n + 1)) - set(queried))
    perm = tuple(queried + rest)
    p_slot = perm.index(q.x_evidence) + 1 if q.x_evidence is not None else None
    return CanonicalQuery(
        family=classify(q),
        k=q.k,
        treatment_perm=perm,
        outcome_map=tuple(a.outcome for a in q.atoms),
        p_slot=p_slot,
        q_outcome=q.y_evidence,
        conditional=q.conditional,
    )
