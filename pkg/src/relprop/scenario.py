"""Line-oriented scenario language.

One event per line, ``#`` starts a comment, keywords are lowercase and
fields are ``key=value`` pairs::

    agent A rel=0.9 inertia=1
    config epsilon=1.5
    send M1 from=A to=B topic=size value=101 rel=0.8
    forward M2 prior=M1 from=B to=C value=100
    judge J1 from=C to=B target=msg:M2 judged=0.9
    reconcile topic=size
    observe M2 against=R1
    expect agent:A cmp=gt val=0.5
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

from .algebra import DEFAULT_DIM, Reliability
from .errors import ParseError
from .network import Numeric, Polarity, Proposition
from .propagation import PropagationConfig

_ID = re.compile(r"^[A-Za-z0-9_.'\-]+$")
_DIM = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")
COMPARATORS = ("lt", "le", "eq", "ge", "gt")


@dataclass(frozen=True)
class DeclareAgent:
    id: str
    reliability: Reliability
    inertia: float = 1.0
    line: int = 0


@dataclass(frozen=True)
class Configure:
    parameter: str
    value: float
    line: int = 0


@dataclass(frozen=True)
class Send:
    message_id: str
    chain_id: Optional[str]
    source: str
    destination: str
    content: Union[Numeric, Proposition]
    declared: Optional[Reliability] = None
    line: int = 0


@dataclass(frozen=True)
class Forward:
    message_id: str
    prior: str
    source: str
    destination: str
    value: Optional[float] = None
    line: int = 0


@dataclass(frozen=True)
class Reconcile:
    topic: str
    line: int = 0


@dataclass(frozen=True)
class Judge:
    message_id: str
    source: str
    destination: str
    target_kind: str  # "agent" or "msg"
    target: str
    judged: Reliability
    declared: Optional[Reliability] = None
    line: int = 0


@dataclass(frozen=True)
class Observe:
    message_id: str
    reference: str
    line: int = 0


@dataclass(frozen=True)
class Expect:
    entity_kind: str  # "agent" or "msg"
    entity: str
    dimension: Optional[str]
    comparator: str
    value: float
    line: int = 0


ScenarioEvent = Union[DeclareAgent, Configure, Send, Forward, Reconcile, Judge, Observe, Expect]


def _number(text, lineno, what):
    try:
        x = float(text)
    except ValueError:
        raise ParseError(lineno, f"{what}: not a number: {text!r}") from None
    if not math.isfinite(x):
        raise ParseError(lineno, f"{what}: not finite: {text!r}")
    return x


def _reliability(text, lineno, what="rel"):
    """``0.7`` or ``dim:0.7,dim2:-0.1``."""
    if ":" not in text:
        values = {DEFAULT_DIM: _number(text, lineno, what)}
    else:
        values = {}
        for item in text.split(","):
            name, sep, num = item.partition(":")
            if not sep or not _DIM.match(name):
                raise ParseError(lineno, f"{what}: bad dimension entry {item!r}")
            if name in values:
                raise ParseError(lineno, f"{what}: dimension {name!r} given twice")
            values[name] = _number(num, lineno, what)
    for name, v in values.items():
        if not -1.0 <= v <= 1.0:
            raise ParseError(lineno, f"{what}: {v} outside [-1, 1]")
    return Reliability(values)


def _ident(text, lineno, what):
    if not _ID.match(text):
        raise ParseError(lineno, f"bad {what} {text!r}")
    return text


def _ref(text, lineno, what):
    kind, sep, ident = text.partition(":")
    if not sep or kind not in ("agent", "msg"):
        raise ParseError(lineno, f"{what} must be agent:<id> or msg:<id>, got {text!r}")
    return kind, _ident(ident, lineno, what)


class _Fields:
    """key=value fields of one line, with bookkeeping of which were used."""

    def __init__(self, tokens, lineno):
        self.lineno = lineno
        self.values = {}
        for tok in tokens:
            key, sep, value = tok.partition("=")
            if not sep or not key or not value:
                raise ParseError(lineno, f"expected key=value, got {tok!r}")
            if key in self.values:
                raise ParseError(lineno, f"field {key!r} given twice")
            self.values[key] = value

    def required(self, key):
        if key not in self.values:
            raise ParseError(self.lineno, f"missing field {key!r}")
        return self.values.pop(key)

    def optional(self, key):
        return self.values.pop(key, None)

    def finish(self):
        if self.values:
            raise ParseError(self.lineno, f"unexpected field {sorted(self.values)[0]!r}")


def _positional(tokens, lineno, keyword):
    if not tokens or "=" in tokens[0]:
        raise ParseError(lineno, f"{keyword} needs an id")
    return _ident(tokens[0], lineno, "id"), tokens[1:]


def _parse_agent(rest, lineno):
    ident, rest = _positional(rest, lineno, "agent")
    f = _Fields(rest, lineno)
    rel = _reliability(f.required("rel"), lineno)
    inertia_text = f.optional("inertia")
    f.finish()
    inertia = 1.0 if inertia_text is None else _number(inertia_text, lineno, "inertia")
    if inertia < 0:
        raise ParseError(lineno, "inertia must be >= 0")
    return [DeclareAgent(ident, rel, inertia, lineno)]


def _parse_config(rest, lineno):
    if not rest:
        raise ParseError(lineno, "config needs at least one name=value")
    f = _Fields(rest, lineno)
    out = []
    cfg = PropagationConfig()
    for name, text in f.values.items():
        if name not in PropagationConfig.ALIASES:
            raise ParseError(lineno, f"unknown config parameter {name!r}")
        value = _number(text, lineno, name)
        try:
            cfg.with_param(name, value)
        except Exception as exc:
            raise ParseError(lineno, str(exc)) from None
        out.append(Configure(name, value, lineno))
    return out


def _parse_send(rest, lineno):
    ident, rest = _positional(rest, lineno, "send")
    f = _Fields(rest, lineno)
    chain = f.optional("chain")
    if chain is not None:
        _ident(chain, lineno, "chain id")
    source = _ident(f.required("from"), lineno, "agent id")
    dest = _ident(f.required("to"), lineno, "agent id")
    topic = _ident(f.required("topic"), lineno, "topic")
    value = f.optional("value")
    claim = f.optional("claim")
    pol = f.optional("pol")
    rel = f.optional("rel")
    f.finish()
    if source == dest:
        raise ParseError(lineno, "message sent from an agent to itself")
    if value is not None:
        if claim is not None or pol is not None:
            raise ParseError(lineno, "value= excludes claim=/pol=")
        content = Numeric(topic, _number(value, lineno, "value"))
    else:
        if claim is None or pol is None:
            raise ParseError(lineno, "send needs value= or claim= with pol=")
        if pol not in ("+", "-"):
            raise ParseError(lineno, f"pol must be + or -, got {pol!r}")
        content = Proposition(topic, _ident(claim, lineno, "claim"), Polarity(pol))
    declared = None if rel is None else _reliability(rel, lineno)
    return [Send(ident, chain, source, dest, content, declared, lineno)]


def _parse_forward(rest, lineno):
    ident, rest = _positional(rest, lineno, "forward")
    f = _Fields(rest, lineno)
    prior = _ident(f.required("prior"), lineno, "message id")
    source = _ident(f.required("from"), lineno, "agent id")
    dest = _ident(f.required("to"), lineno, "agent id")
    value = f.optional("value")
    f.finish()
    if source == dest:
        raise ParseError(lineno, "message forwarded from an agent to itself")
    number = None if value is None else _number(value, lineno, "value")
    return [Forward(ident, prior, source, dest, number, lineno)]


def _parse_judge(rest, lineno):
    ident, rest = _positional(rest, lineno, "judge")
    f = _Fields(rest, lineno)
    source = _ident(f.required("from"), lineno, "agent id")
    dest = _ident(f.required("to"), lineno, "agent id")
    kind, target = _ref(f.required("target"), lineno, "target")
    judged = _reliability(f.required("judged"), lineno, "judged")
    rel = f.optional("rel")
    f.finish()
    if source == dest:
        raise ParseError(lineno, "judgement sent from an agent to itself")
    declared = None if rel is None else _reliability(rel, lineno)
    return [Judge(ident, source, dest, kind, target, judged, declared, lineno)]


def _parse_reconcile(rest, lineno):
    f = _Fields(rest, lineno)
    topic = _ident(f.required("topic"), lineno, "topic")
    f.finish()
    return [Reconcile(topic, lineno)]


def _parse_observe(rest, lineno):
    ident, rest = _positional(rest, lineno, "observe")
    f = _Fields(rest, lineno)
    ref = _ident(f.required("against"), lineno, "message id")
    f.finish()
    return [Observe(ident, ref, lineno)]


def _parse_expect(rest, lineno):
    if not rest or "=" in rest[0]:
        raise ParseError(lineno, "expect needs agent:<id> or msg:<id>")
    kind, ident = _ref(rest[0], lineno, "expect target")
    f = _Fields(rest[1:], lineno)
    dim = f.optional("dim")
    if dim is not None and not _DIM.match(dim):
        raise ParseError(lineno, f"bad dimension {dim!r}")
    cmp = f.required("cmp")
    if cmp not in COMPARATORS:
        raise ParseError(lineno, f"cmp must be one of {', '.join(COMPARATORS)}")
    val = _number(f.required("val"), lineno, "val")
    f.finish()
    return [Expect(kind, ident, dim, cmp, val, lineno)]


_KEYWORDS = {
    "agent": _parse_agent,
    "config": _parse_config,
    "send": _parse_send,
    "forward": _parse_forward,
    "judge": _parse_judge,
    "reconcile": _parse_reconcile,
    "observe": _parse_observe,
    "expect": _parse_expect,
}


def parse_scenario(text: str) -> list:
    """Parse scenario text into events; raises ParseError with a line number."""
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *rest = line.split()
        handler = _KEYWORDS.get(keyword)
        if handler is None:
            raise ParseError(lineno, f"unknown keyword {keyword!r}")
        events.extend(handler(rest, lineno))
    return events
