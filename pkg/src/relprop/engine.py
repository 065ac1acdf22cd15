"""Deterministic event engine.

Applies scenario events to a state of agents, messages, chain histories
and the belief store, and records every reliability change as a trace
record.  Changes that would travel along an already traversed edge of a
chain are dropped and recorded as ``suppressed``.

Chains are tracked by a chain record: a message whose hop list is the
complete forward and backward history of that chain.  Cycle checks run
against the chain record, so a closing message is caught no matter which
message of the chain it pretends to be.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .algebra import Reliability, align_dimensions, average, clamp
from .errors import (
    CycleDetected,
    ExpectFailed,
    InvalidParameter,
    NotAStatement,
    NotEnoughMessages,
    UnknownEntity,
)
from .network import Agent, Direction, Hop, Message, Network, Numeric, Proposition, ReliabilityJudgement, extend_chain
from .propagation import (
    PropagationConfig,
    backpropagate_to_agent,
    chain_combine,
    chain_decompose,
    merge_reliability_judgements,
    message_initial_reliability,
    reconcile_pair,
    reconcile_set,
)
from .scenario import Configure, DeclareAgent, Expect, Forward, Judge, Observe, Reconcile, Send
from .threshold import BeliefStore, key_for

TRACE_HEADER = ("step", "kind", "entity", "dimension", "old", "new", "cause")


@dataclass(frozen=True)
class TraceRecord:
    step: int
    kind: str  # update | suppressed | assert
    entity: str
    dimension: str
    old: float
    new: float
    cause: str

    def to_tsv(self) -> str:
        return (
            f"{self.step}\t{self.kind}\t{self.entity}\t{self.dimension}\t"
            f"{self.old:.9f}\t{self.new:.9f}\t{self.cause}"
        )


def format_trace(records: Iterable[TraceRecord]) -> str:
    out = io.StringIO()
    out.write("\t".join(TRACE_HEADER) + "\n")
    for rec in records:
        out.write(rec.to_tsv() + "\n")
    return out.getvalue()


_COMPARE = {
    "lt": lambda a, v: a < v,
    "le": lambda a, v: a <= v + 1e-9,
    "eq": lambda a, v: abs(a - v) <= 1e-9,
    "ge": lambda a, v: a >= v - 1e-9,
    "gt": lambda a, v: a > v,
}


class EngineState:
    """Mutable simulation state; use :meth:`copy` for a functional step."""

    def __init__(self, config: Optional[PropagationConfig] = None):
        self.config = config or PropagationConfig()
        self.network = Network()
        self.chains: dict[str, Message] = {}
        self.store = BeliefStore()
        self.forwarded: set[str] = set()
        # reliability of each agent/message when it came into existence
        self.initial: dict[str, Reliability] = {}
        self.step = 0

    @property
    def agents(self) -> dict[str, Agent]:
        return self.network.agents

    @property
    def messages(self) -> dict[str, Message]:
        return self.network.messages

    def copy(self) -> "EngineState":
        other = EngineState.__new__(EngineState)
        other.config = self.config
        other.network = self.network.copy()
        other.chains = dict(self.chains)
        other.store = self.store.copy()
        other.forwarded = set(self.forwarded)
        other.initial = dict(self.initial)
        other.step = self.step
        return other

    # -- lookups -----------------------------------------------------------

    def agent(self, ident: str) -> Agent:
        try:
            return self.network.agents[ident]
        except KeyError:
            raise UnknownEntity(ident) from None

    def message(self, ident: str) -> Message:
        try:
            return self.network.messages[ident]
        except KeyError:
            raise UnknownEntity(ident) from None

    def path(self, msg: Message) -> list[Message]:
        """Messages of the forward path ending at ``msg``, origin first."""
        out = [msg]
        while out[-1].prior is not None:
            out.append(self.network.messages[out[-1].prior])
        out.reverse()
        return out

    def combined(self, msg: Message) -> Reliability:
        """Reliability of the whole forward path that delivered ``msg``."""
        return chain_combine([m.reliability for m in self.path(msg)], self.config)

    # -- event dispatch ----------------------------------------------------

    def apply(self, event) -> list[TraceRecord]:
        records: list[TraceRecord] = []
        if isinstance(event, DeclareAgent):
            self._declare(event)
        elif isinstance(event, Configure):
            self.config = self.config.with_param(event.parameter, event.value)
        elif isinstance(event, Send):
            self._send(event, records)
        elif isinstance(event, Forward):
            self._forward(event, records)
        elif isinstance(event, Judge):
            self._judge(event, records)
        elif isinstance(event, Reconcile):
            self._reconcile(event, records)
        elif isinstance(event, Observe):
            self._observe(event, records)
        elif isinstance(event, Expect):
            self._expect(event)
        else:
            raise TypeError(f"not a scenario event: {event!r}")
        return records

    # -- trace helpers -----------------------------------------------------

    def _emit(self, records, kind, entity, old: Reliability, new: Reliability, cause, changed_only=True):
        default = self.config.dimension_default
        for n in sorted(set(old) | set(new)):
            o = old.get_or(n, default)
            v = new.get_or(n, default)
            # a dimension new to the entity is always recorded
            if changed_only and o == v and n in old:
                continue
            self.step += 1
            records.append(TraceRecord(self.step, kind, entity, n, o, v, cause))

    def _suppressed(self, records, entity, rel: Reliability, cause):
        if len(rel) == 0:
            self.step += 1
            records.append(TraceRecord(self.step, "suppressed", entity, "-", 0.0, 0.0, cause))
            return
        self._emit(records, "suppressed", entity, rel, rel, cause, changed_only=False)

    # -- statements --------------------------------------------------------

    def _assert(self, msg: Message, records):
        key = key_for(msg.content)
        old = self.store.get(key)
        st = self.store.assert_key(key, self.combined(msg), msg.id)
        if old is None:
            self._emit(records, "assert", f"stmt:{key}", st.reliability, st.reliability, msg.chain, changed_only=False)
        else:
            self._emit(records, "assert", f"stmt:{key}", old.reliability, st.reliability, msg.chain)

    def _refresh_statements(self, chain: str, records):
        """Re-derive statements supported by messages of ``chain``."""
        keys = []
        for m in self.network.messages.values():
            if m.chain == chain and isinstance(m.content, (Numeric, Proposition)):
                key = key_for(m.content)
                if key not in keys:
                    keys.append(key)
        for key in keys:
            st = self.store.get(key)
            if st is None:
                continue
            value = None
            for sid in st.supporters:
                rel = self.combined(self.network.messages[sid])
                if value is None:
                    value = rel
                else:
                    left, right = align_dimensions(value, rel, self.config.dimension_default)
                    value = Reliability({n: max(left[n], right[n]) for n in left})
            if value is not None and value != st.reliability:
                self.store.revise(key, value)
                self._emit(records, "assert", f"stmt:{key}", st.reliability, value, chain)

    # -- events ------------------------------------------------------------

    def _declare(self, e: DeclareAgent):
        self.network.add_agent(Agent(e.id, e.reliability, e.inertia))
        self.initial[f"agent:{e.id}"] = e.reliability

    def _open(self, ident, cid, content, rel, source, dest, records, prior=None) -> Optional[Message]:
        """Create a message by extending its chain; None if suppressed."""
        hop = Hop(source, dest, Direction.FORWARD, content, rel)
        record = self.chains.get(cid) or Message(cid, cid, content, rel)
        try:
            record = extend_chain(record, hop)
        except CycleDetected:
            self._suppressed(records, f"msg:{ident}", rel, cid)
            return None
        self.chains[cid] = record
        return Message(ident, cid, content, rel, record.hops, prior)

    def _register(self, msg: Message, records):
        self.network.messages[msg.id] = msg
        self.initial[f"msg:{msg.id}"] = msg.reliability
        if isinstance(msg.content, (Numeric, Proposition)):
            self._assert(msg, records)

    def _resend(self, msg: Message, source, dest, records, chain=None):
        if chain is not None and chain != msg.chain:
            raise InvalidParameter(f"message {msg.id} belongs to chain {msg.chain}, not {chain}")
        self.agent(source)
        self.agent(dest)
        hop = Hop(source, dest, Direction.FORWARD, msg.content, msg.reliability)
        try:
            self.chains[msg.chain] = extend_chain(self.chains[msg.chain], hop)
        except CycleDetected:
            self._suppressed(records, f"msg:{msg.id}", msg.reliability, msg.chain)
            return
        if isinstance(msg.content, ReliabilityJudgement):
            self._apply_judgement(msg, records)

    def _send(self, e: Send, records):
        if e.message_id in self.network.messages:
            self._resend(self.network.messages[e.message_id], e.source, e.destination, records, e.chain_id)
            return
        agent = self.agent(e.source)
        self.agent(e.destination)
        if e.chain_id is None:
            cid = self.network.new_chain(e.source)
        else:
            cid = e.chain_id
            self.network.claim_chain(cid)
        rel = message_initial_reliability(agent, e.declared, self.config)
        msg = self._open(e.message_id, cid, e.content, rel, e.source, e.destination, records)
        if msg is not None:
            self._register(msg, records)

    def _forward(self, e: Forward, records):
        if e.message_id in self.network.messages:
            self._resend(self.network.messages[e.message_id], e.source, e.destination, records)
            return
        prior = self.message(e.prior)
        agent = self.agent(e.source)
        self.agent(e.destination)
        content = prior.content
        if e.value is not None:
            if not isinstance(content, Numeric):
                raise InvalidParameter(f"line {e.line}: value= only applies to numeric messages")
            content = Numeric(content.topic, e.value)
        rel = message_initial_reliability(agent, None, self.config)
        msg = self._open(e.message_id, prior.chain, content, rel, e.source, e.destination, records, prior.id)
        if msg is not None:
            self.forwarded.add(prior.id)
            self._register(msg, records)

    def _judge(self, e: Judge, records):
        if e.message_id in self.network.messages:
            self._resend(self.network.messages[e.message_id], e.source, e.destination, records)
            return
        agent = self.agent(e.source)
        self.agent(e.destination)
        if e.target_kind == "agent":
            self.agent(e.target)
        else:
            self.message(e.target)
        cid = self.network.new_chain(e.source)
        rel = message_initial_reliability(agent, e.declared, self.config)
        content = ReliabilityJudgement(e.target, e.judged, e.target_kind)
        msg = self._open(e.message_id, cid, content, rel, e.source, e.destination, records)
        if msg is not None:
            self._register(msg, records)
            self._apply_judgement(msg, records)

    def _apply_judgement(self, msg: Message, records):
        content = msg.content
        default = self.config.dimension_default
        judgements = [(content.judged, msg.reliability)]
        if content.target_kind == "agent":
            target = self.agent(content.target)
            nu, iota = merge_reliability_judgements(target.reliability, target.inertia, judgements, default)
            self.network.agents[target.id] = target.updated(nu, msg.id, inertia=iota)
            self._emit(records, "update", f"agent:{target.id}", target.reliability, nu, msg.chain)
        else:
            target = self.message(content.target)
            nu, iota = merge_reliability_judgements(self.combined(target), target.inertia, judgements, default)
            self.network.messages[target.id] = replace(target, inertia=iota)
            self._adjust_chain(self.network.messages[target.id], nu, records)

    def _adjust_chain(self, tip: Message, target: Reliability, records):
        """Move the combined reliability of ``tip``'s path to ``target``.

        The change is split over the path's messages, and each message's
        change travels back to its sender as a backward hop.
        """
        cfg = self.config
        path = self.path(tip)
        parts = [m.reliability for m in path]
        old = chain_combine(parts, cfg)
        floor = -cfg.alpha
        goal = Reliability({n: max(floor, clamp(v)) for n, v in target.items()})
        new_parts = chain_decompose(parts, old, goal, cfg)
        default = cfg.dimension_default
        for m, new in zip(reversed(path), reversed(new_parts)):
            if new == m.reliability:
                continue
            self.network.messages[m.id] = replace(m, reliability=new)
            self._emit(records, "update", f"msg:{m.id}", m.reliability, new, tip.chain)
            delta = {n: new[n] - m.reliability.get_or(n, default) for n in new}
            delta = {n: d for n, d in delta.items() if d != 0.0}
            if not delta:
                continue
            source = self.network.agents[m.source]
            try:
                agent, record = backpropagate_to_agent(
                    source, delta, self.chains[m.chain], m.destination, cause=m.id, default=default
                )
            except CycleDetected:
                self._suppressed(records, f"agent:{source.id}", source.reliability, m.chain)
                continue
            self.chains[m.chain] = record
            self.network.agents[agent.id] = agent
            self._emit(records, "update", f"agent:{agent.id}", source.reliability, agent.reliability, m.chain)
        self._refresh_statements(tip.chain, records)

    def _live(self, topic: str) -> list[Message]:
        latest: dict[str, Message] = {}
        for m in self.network.messages.values():
            c = m.content
            if isinstance(c, (Numeric, Proposition)) and c.topic == topic and m.id not in self.forwarded:
                latest[m.chain] = m
        return list(latest.values())

    def _reconcile(self, e: Reconcile, records):
        live = self._live(e.topic)
        if len(live) < 2:
            raise NotEnoughMessages(f"line {e.line}: topic {e.topic!r} has {len(live)} live message(s)")
        views = {m.id: replace(m, reliability=self.combined(m)) for m in live}
        deltas = reconcile_set(list(views.values()), self.config)
        for delta in deltas:
            self._shift(views[delta.target], delta.changes, records)

    def _shift(self, view: Message, changes: dict, records):
        default = self.config.dimension_default
        names = set(view.reliability) | set(changes)
        target = Reliability(
            {n: clamp(view.reliability.get_or(n, default) + changes.get(n, 0.0)) for n in names}
        )
        self._adjust_chain(self.network.messages[view.id], target, records)

    def _observe(self, e: Observe, records):
        msg = self.message(e.message_id)
        ref = self.message(e.reference)
        for m in (msg, ref):
            if not isinstance(m.content, (Numeric, Proposition)):
                raise NotAStatement(f"line {e.line}: {m.id} is not a statement")
        view = replace(msg, reliability=self.combined(msg))
        ref_view = replace(ref, reliability=self.combined(ref))
        delta, _ = reconcile_pair(view, ref_view, self.config)
        self._shift(view, delta.changes, records)

    def _expect(self, e: Expect):
        if e.entity_kind == "agent":
            rel = self.agent(e.entity).reliability
        else:
            rel = self.message(e.entity).reliability
        default = self.config.dimension_default
        if e.dimension is not None:
            actual = rel.get_or(e.dimension, default)
        else:
            actual = average(rel) if len(rel) else default
        if not _COMPARE[e.comparator](actual, e.value):
            raise ExpectFailed(e.line, f"{e.entity_kind}:{e.entity}", f"{e.comparator} {e.value:g}", actual)


def run_event(state: EngineState, event, cfg: Optional[PropagationConfig] = None):
    """Apply one event without touching ``state``; returns (new state, records)."""
    new = state.copy()
    if cfg is not None:
        new.config = cfg
    records = new.apply(event)
    return new, records


def run_scenario(events, cfg: Optional[PropagationConfig] = None):
    """Run events in order; returns (final state, trace)."""
    state = EngineState(cfg)
    trace: list[TraceRecord] = []
    for event in events:
        trace.extend(state.apply(event))
    return state, trace
