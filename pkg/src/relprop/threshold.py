"""Belief store and threshold ("relative truth") queries.

Statements are keyed by topic and claim with polarity, or by topic and an
exact numeric value.  A claim and its negation are stored under separate
keys and never influence each other.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

from .algebra import Reliability, align_dimensions, average, lift_elementwise, or_combine
from .errors import NotAStatement, UnknownStatement
from .network import Message, Numeric, Polarity, Proposition


def _value_token(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


@dataclass(frozen=True)
class PropositionKey:
    topic: str
    claim: str
    polarity: Polarity

    def __str__(self):
        return f"{self.topic}:{self.claim}:{self.polarity}"


@dataclass(frozen=True)
class NumericKey:
    topic: str
    value: str

    def __str__(self):
        return f"{self.topic}={self.value}"


@dataclass(frozen=True)
class OrKey:
    left: "StatementKey"
    right: "StatementKey"

    def __str__(self):
        return f"({self.left}|{self.right})"


StatementKey = Union[PropositionKey, NumericKey, OrKey]


def key_for(content) -> StatementKey:
    if isinstance(content, Numeric):
        return NumericKey(content.topic, _value_token(content.value))
    if isinstance(content, Proposition):
        return PropositionKey(content.topic, content.claim, content.polarity)
    raise NotAStatement(f"{type(content).__name__} content is not a statement")


@dataclass(frozen=True)
class Statement:
    key: StatementKey
    reliability: Reliability
    supporters: tuple[str, ...] = ()


class BeliefStore:
    def __init__(self):
        self.statements: dict = {}

    def copy(self) -> "BeliefStore":
        other = BeliefStore()
        other.statements = dict(self.statements)
        return other

    def __len__(self):
        return len(self.statements)

    def __contains__(self, key):
        return key in self.statements

    def get(self, key) -> Optional[Statement]:
        return self.statements.get(key)

    def assert_key(self, key: StatementKey, reliability: Reliability, supporter: Optional[str] = None) -> Statement:
        """Add support for ``key``; an existing reliability is OR-combined."""
        old = self.statements.get(key)
        if old is None:
            st = Statement(key, reliability, (supporter,) if supporter else ())
        else:
            supporters = old.supporters
            if supporter and supporter not in supporters:
                supporters = supporters + (supporter,)
            st = Statement(key, lift_elementwise(or_combine, old.reliability, reliability), supporters)
        self.statements[key] = st
        return st

    def assert_statement(self, msg: Message) -> Statement:
        return self.assert_key(key_for(msg.content), msg.reliability, msg.id)

    def revise(self, key: StatementKey, reliability: Reliability) -> Statement:
        """Overwrite the reliability of an existing statement.

        Used when supporting messages were re-evaluated and the statement
        must follow them down as well as up.
        """
        if key not in self.statements:
            raise UnknownStatement(str(key))
        st = replace(self.statements[key], reliability=reliability)
        self.statements[key] = st
        return st

    def accepted_at(self, tau: float, per_dimension: bool = False) -> set:
        """Statements whose reliability reaches ``tau``.

        By default the average over dimensions is compared; with
        ``per_dimension`` every dimension has to reach the level.
        """
        out = set()
        for st in self.statements.values():
            if len(st.reliability) == 0:
                continue
            if per_dimension:
                ok = all(v >= tau for v in st.reliability.values())
            else:
                ok = average(st.reliability) >= tau
            if ok:
                out.add(st)
        return out

    def compound_or(self, key1: StatementKey, key2: StatementKey) -> Statement:
        """Build (or refresh) the disjunction of two stored statements.

        Its reliability is at least the elementwise max of the disjuncts; a
        stronger directly asserted value for the disjunction is kept.
        """
        for k in (key1, key2):
            if k not in self.statements:
                raise UnknownStatement(str(k))
        a, b = self.statements[key1], self.statements[key2]
        floor = lift_elementwise(or_combine, a.reliability, b.reliability)
        key = OrKey(key1, key2)
        direct = self.statements.get(key)
        if direct is None:
            st = Statement(key, floor, a.supporters + b.supporters)
        else:
            left, right = align_dimensions(direct.reliability, floor)
            st = Statement(key, lift_elementwise(or_combine, left, right), direct.supporters)
        self.statements[key] = st
        return st

    def conflict_report(self, tau: float) -> list[tuple[str, str]]:
        """(topic, claim) pairs held at level ``tau`` in both polarities."""
        accepted = {st.key for st in self.accepted_at(tau)}
        out = []
        for key in accepted:
            if isinstance(key, PropositionKey) and key.polarity is Polarity.AFFIRMED:
                if PropositionKey(key.topic, key.claim, Polarity.NEGATED) in accepted:
                    out.append((key.topic, key.claim))
        return sorted(out)
