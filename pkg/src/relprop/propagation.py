"""Update rules: how reliabilities flow between agents and messages.

Covers the default reliability of a freshly sent message, inertia-damped
feedback to the sender, composition and decomposition of chained messages,
pairwise reconciliation of parallel messages, and merging of reliability
judgements.  Everything here is a pure function; the stateful driver lives
in :mod:`relprop.engine`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from functools import partial
from itertools import combinations
from typing import Optional

from .algebra import TOL, Reliability, align_all, and_combine, average, clamp, lift_elementwise, weighted_mean
from .errors import (
    EmptyInput,
    InconsistentChain,
    InvalidNumeric,
    InvalidParameter,
    NotComparable,
    NotEnoughMessages,
)
from .network import Agent, Direction, Hop, Message, Numeric, Proposition, extend_chain


@dataclass(frozen=True)
class PropagationConfig:
    alpha: float = 1.0
    lambda_agree: float = 0.2
    lambda_disagree: float = 0.2
    epsilon_numeric: float = 0.0
    dimension_default: float = 0.0
    tau: float = 0.5

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidNumeric(f"{f.name} must be a finite real, got {v!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidParameter(f"alpha must lie in [0, 1], got {self.alpha}")
        for name in ("lambda_agree", "lambda_disagree", "epsilon_numeric"):
            if getattr(self, name) < 0:
                raise InvalidParameter(f"{name} must be >= 0")
        for name in ("dimension_default", "tau"):
            if not -1.0 <= getattr(self, name) <= 1.0:
                raise InvalidParameter(f"{name} must lie in [-1, 1]")

    # Names as written in scenario files and on the command line.
    ALIASES = {
        "alpha": "alpha",
        "lambda_agree": "lambda_agree",
        "lambda_disagree": "lambda_disagree",
        "epsilon": "epsilon_numeric",
        "dim_default": "dimension_default",
        "tau": "tau",
    }

    def with_param(self, name: str, value: float) -> "PropagationConfig":
        try:
            attr = self.ALIASES[name]
        except KeyError:
            raise InvalidParameter(f"unknown parameter {name!r}") from None
        return replace(self, **{attr: value})


@dataclass(frozen=True)
class ReliabilityDelta:
    target: str
    changes: dict  # dimension -> signed change; sums may leave [-1, 1]
    cause: str


def conf(r: float) -> float:
    """Map a reliability in [-1, 1] to a confidence in [0, 1]."""
    return (1.0 + r) / 2.0


def spread(r: float) -> float:
    """Room left above ``r``; zero at maximal reliability."""
    return (1.0 - r) / 2.0


def message_initial_reliability(
    agent: Agent, declared: Optional[Reliability], cfg: PropagationConfig
) -> Reliability:
    if declared is None:
        return agent.reliability
    return lift_elementwise(
        partial(and_combine, alpha=cfg.alpha), agent.reliability, declared, cfg.dimension_default
    )


def backpropagate_to_agent(
    agent: Agent,
    delta_m: dict,
    chain: Message,
    sender: str,
    cause: str = "",
    default: float = 0.0,
) -> tuple[Agent, Message]:
    """Push a change of message reliability back to its source agent.

    Each dimension moves by ``delta / (inertia + 1)`` and inertia grows by
    one.  The update is recorded as a backward hop ``sender -> agent`` on
    ``chain``; if that edge was already traversed, CycleDetected propagates
    and nothing is changed.  Returns the updated agent and chain.
    """
    for v in delta_m.values():
        if not math.isfinite(v):
            raise InvalidNumeric(f"non-finite delta {v!r}")
    scale = 1.0 / (agent.inertia + 1.0)
    names = set(agent.reliability) | set(delta_m)
    new_rel = Reliability(
        {n: clamp(agent.reliability.get_or(n, default) + delta_m.get(n, 0.0) * scale) for n in names}
    )
    hop = Hop(sender, agent.id, Direction.BACKWARD, chain.content, new_rel)
    new_chain = extend_chain(chain, hop)
    new_agent = agent.updated(new_rel, cause or chain.id, inertia=agent.inertia + 1.0)
    return new_agent, new_chain


def chain_combine(parts: list, cfg: PropagationConfig) -> Reliability:
    """Reliability of a chain: ``alpha * min`` over its parts, per dimension."""
    if not parts:
        raise EmptyInput("chain_combine needs at least one part")
    aligned = align_all(parts, cfg.dimension_default)
    alpha = cfg.alpha
    return Reliability._trusted({n: alpha * min(p[n] for p in aligned) for n in aligned[0]})


def chain_decompose(
    old_parts: list,
    old_combined: Reliability,
    new_combined: Reliability,
    cfg: PropagationConfig,
) -> list[Reliability]:
    """Spread a change of the combined chain reliability over its parts.

    Where old and new combined values share a sign, every part is scaled by
    the same factor; across zero the same additive shift ``delta / alpha``
    is applied to every part.  Parts are clamped afterwards, so
    ``chain_combine(result) <= new_combined`` with equality unless a clamp
    fired.  ``new_combined`` must not fall below ``-alpha``, the smallest
    value a chain can reach.
    """
    if not old_parts:
        raise EmptyInput("chain_decompose needs at least one part")
    aligned = align_all(list(old_parts) + [old_combined, new_combined], cfg.dimension_default)
    parts, old_c, new_c = aligned[:-2], aligned[-2], aligned[-1]
    recomputed = chain_combine(parts, cfg)
    for n in old_c:
        if abs(recomputed[n] - old_c[n]) > TOL:
            raise InconsistentChain(
                f"dimension {n}: combined {old_c[n]!r} but parts give {recomputed[n]!r}"
            )
    alpha = cfg.alpha
    out = [dict(p) for p in parts]
    for n in old_c:
        o, nv = old_c[n], new_c[n]
        if nv == o:
            continue
        if nv < -alpha - TOL:
            raise InvalidParameter(f"dimension {n}: {nv!r} is below the chain floor {-alpha!r}")
        if abs(o) > TOL and o * nv > 0:
            k = nv / o
            for p in out:
                p[n] = clamp(p[n] * k)
        else:
            if alpha == 0.0:
                raise InvalidParameter("alpha = 0 pins every chain at 0")
            shift = (nv - o) / alpha
            for p in out:
                p[n] = clamp(p[n] + shift)
    return [Reliability(p) for p in out]


def _agrees(c1, c2, cfg: PropagationConfig) -> bool:
    if isinstance(c1, Numeric):
        return abs(c1.value - c2.value) <= cfg.epsilon_numeric + TOL
    return c1.claim == c2.claim and c1.polarity == c2.polarity


def _check_comparable(m1: Message, m2: Message) -> None:
    c1, c2 = m1.content, m2.content
    if not isinstance(c1, (Numeric, Proposition)) or type(c1) is not type(c2):
        raise NotComparable(f"{m1.id} and {m2.id} carry different kinds of content")
    if c1.topic != c2.topic:
        raise NotComparable(f"{m1.id} is about {c1.topic!r}, {m2.id} about {c2.topic!r}")
    if m1.chain == m2.chain:
        raise NotComparable(f"{m1.id} and {m2.id} belong to the same chain {m1.chain}")


def reconcile_pair(m1: Message, m2: Message, cfg: PropagationConfig) -> tuple[ReliabilityDelta, ReliabilityDelta]:
    """Deltas for two parallel messages on the same topic.

    Agreement raises both, disagreement lowers both, and in either case the
    less reliable message moves more:
    ``delta_i = +/- lambda * conf(r_other) * spread(r_i)``.
    """
    _check_comparable(m1, m2)
    r1, r2 = align_all([m1.reliability, m2.reliability], cfg.dimension_default)
    if _agrees(m1.content, m2.content, cfg):
        lam = cfg.lambda_agree
    else:
        lam = -cfg.lambda_disagree
    d1 = {n: lam * conf(r2[n]) * spread(r1[n]) for n in r1}
    d2 = {n: lam * conf(r1[n]) * spread(r2[n]) for n in r2}
    return (
        ReliabilityDelta(m1.id, d1, m1.chain),
        ReliabilityDelta(m2.id, d2, m2.chain),
    )


def reconcile_set(msgs: list, cfg: PropagationConfig) -> list[ReliabilityDelta]:
    """Reconcile every unordered pair and sum the deltas per message.

    Pairs are visited in lexicographic message-id order and the result is
    returned in that order too.
    """
    if len(msgs) < 2:
        raise NotEnoughMessages(f"need at least two messages, got {len(msgs)}")
    ordered = sorted(msgs, key=lambda m: m.id)
    totals = {m.id: {} for m in ordered}
    for a, b in combinations(ordered, 2):
        da, db = reconcile_pair(a, b, cfg)
        for delta in (da, db):
            acc = totals[delta.target]
            for n, v in delta.changes.items():
                acc[n] = acc.get(n, 0.0) + v
    return [ReliabilityDelta(m.id, totals[m.id], m.chain) for m in ordered]


def merge_reliability_judgements(
    nu: Reliability,
    iota: float,
    judgements: list,
    default: float = 0.0,
) -> tuple[Reliability, float]:
    """Fold judgements ``(mu, rho)`` about one target into its reliability ``nu``.

    The old value weighs ``iota`` and each judgement weighs the confidence
    of its carrier, ``(1 + av(rho)) / 2``.  Inertia grows by the number of
    judgements absorbed.
    """
    if not judgements:
        raise EmptyInput("no judgements to merge")
    if iota < 0:
        raise InvalidParameter(f"negative inertia {iota!r}")
    raw = [iota] + [conf(average(rho)) for _, rho in judgements]
    total = math.fsum(raw)
    new_iota = iota + len(judgements)
    if total <= 0.0:
        return nu, new_iota
    weights = [u / total for u in raw]
    aligned = align_all([nu] + [mu for mu, _ in judgements], default)
    merged = {
        n: weighted_mean([(w, r[n]) for w, r in zip(weights, aligned)]) for n in aligned[0]
    }
    return Reliability(merged), new_iota
