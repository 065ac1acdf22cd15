"""Agents, messages and the hop histories used to detect cycles.

All entity types are frozen dataclasses; updates produce new values.  A
message carries the full history of its chain up to and including its own
hop, so any holder of the message can tell whether a new hop would
re-traverse an edge.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .algebra import Reliability
from .errors import CycleDetected, DuplicateEntity, InvalidParameter, UnknownAgent


class Direction(str, enum.Enum):
    FORWARD = "fwd"
    BACKWARD = "back"

    def __str__(self):
        return self.value


class Polarity(str, enum.Enum):
    AFFIRMED = "+"
    NEGATED = "-"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Numeric:
    topic: str
    value: float

    def __post_init__(self):
        if not self.topic:
            raise InvalidParameter("numeric content needs a topic")


@dataclass(frozen=True)
class Proposition:
    topic: str
    claim: str
    polarity: Polarity = Polarity.AFFIRMED

    def __post_init__(self):
        if not self.topic:
            raise InvalidParameter("proposition needs a topic")


@dataclass(frozen=True)
class ReliabilityJudgement:
    """A statement about how reliable some agent or message is."""

    target: str
    judged: Reliability
    target_kind: str = "agent"  # "agent" or "msg"


MessageContent = Union[Numeric, Proposition, ReliabilityJudgement]


@dataclass(frozen=True)
class Hop:
    source: str
    destination: str
    direction: Direction
    value: Optional[MessageContent] = None
    reliability: Optional[Reliability] = None

    def __post_init__(self):
        if self.source == self.destination:
            raise InvalidParameter(f"hop from {self.source!r} to itself")

    @property
    def edge(self) -> tuple[str, str, Direction]:
        return (self.source, self.destination, self.direction)


@dataclass(frozen=True)
class Message:
    id: str
    chain: str
    content: MessageContent
    reliability: Reliability
    hops: tuple[Hop, ...] = ()
    prior: Optional[str] = None
    inertia: float = 1.0

    def __post_init__(self):
        seen = set()
        for hop in self.hops:
            if hop.edge in seen:
                raise InvalidParameter(f"duplicate edge {hop.edge} in message {self.id}")
            seen.add(hop.edge)

    @property
    def source(self) -> str:
        return self.hops[-1].source

    @property
    def destination(self) -> str:
        return self.hops[-1].destination


@dataclass(frozen=True)
class HistoryEntry:
    prior: Reliability
    cause: str


@dataclass(frozen=True)
class Agent:
    id: str
    reliability: Reliability
    inertia: float = 1.0
    history: tuple[HistoryEntry, ...] = field(default=())

    def __post_init__(self):
        if not self.id:
            raise InvalidParameter("agent id must be non-empty")
        if self.inertia < 0:
            raise InvalidParameter(f"negative inertia {self.inertia!r}")

    def updated(self, reliability: Reliability, cause: str, inertia: Optional[float] = None) -> "Agent":
        """Return the agent with a new reliability and one more history entry."""
        inertia = self.inertia if inertia is None else inertia
        if inertia < self.inertia:
            raise InvalidParameter("inertia never decreases")
        return replace(
            self,
            reliability=reliability,
            inertia=inertia,
            history=self.history + (HistoryEntry(self.reliability, cause),),
        )


def has_traversed(msg: Message, edge: tuple[str, str, Direction]) -> bool:
    return any(hop.edge == edge for hop in msg.hops)


def extend_chain(msg: Message, hop: Hop) -> Message:
    """Append ``hop`` to the message history.

    Raises CycleDetected, leaving ``msg`` untouched, when the directed edge
    is already present.  Coming back to an earlier agent along a different
    edge (e.g. backward feedback to the original sender) is allowed.
    """
    if has_traversed(msg, hop.edge):
        raise CycleDetected(hop.edge)
    return replace(msg, hops=msg.hops + (hop,))


class Network:
    """Registry of agents and messages, plus the chain-id counter."""

    def __init__(self):
        self.agents: dict[str, Agent] = {}
        self.messages: dict[str, Message] = {}
        self._chains: set[str] = set()
        self._counter = 0

    def copy(self) -> "Network":
        other = Network.__new__(Network)
        other.agents = dict(self.agents)
        other.messages = dict(self.messages)
        other._chains = set(self._chains)
        other._counter = self._counter
        return other

    def add_agent(self, agent: Agent) -> None:
        if agent.id in self.agents:
            raise DuplicateEntity(agent.id)
        self.agents[agent.id] = agent

    def new_chain(self, origin: str) -> str:
        """Allocate the next sequential chain id (C1, C2, ...)."""
        if origin not in self.agents:
            raise UnknownAgent(origin)
        while True:
            self._counter += 1
            cid = f"C{self._counter}"
            if cid not in self._chains:
                break
        self._chains.add(cid)
        return cid

    def claim_chain(self, cid: str) -> bool:
        """Register an explicitly named chain; returns False if it already existed."""
        if cid in self._chains:
            return False
        self._chains.add(cid)
        return True

    def has_chain(self, cid: str) -> bool:
        return cid in self._chains
