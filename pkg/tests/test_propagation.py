import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relprop.algebra import Reliability
from relprop.errors import (
    CycleDetected,
    EmptyInput,
    InconsistentChain,
    InvalidParameter,
    NotComparable,
    NotEnoughMessages,
)
from relprop.network import Agent, Direction, Hop, Message, Numeric, Proposition, Polarity
from relprop.propagation import (
    PropagationConfig,
    backpropagate_to_agent,
    chain_combine,
    chain_decompose,
    merge_reliability_judgements,
    message_initial_reliability,
    reconcile_pair,
    reconcile_set,
)

S = Reliability.scalar
CFG = PropagationConfig()
rel = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


def numeric(ident, value, r, chain=None):
    return Message(ident, chain or f"C{ident}", Numeric("temp", value), S(r))


def chain_msg(*edges):
    return Message("M", "C1", Numeric("temp", 1), S(0.5), tuple(Hop(s, d, k) for s, d, k in edges))


class TestConfig:
    def test_defaults(self):
        assert (CFG.alpha, CFG.lambda_agree, CFG.lambda_disagree, CFG.epsilon_numeric) == (1.0, 0.2, 0.2, 0.0)

    @pytest.mark.parametrize("kw", [{"alpha": 1.5}, {"lambda_agree": -1}, {"epsilon_numeric": -0.1}, {"tau": 2}])
    def test_ranges(self, kw):
        with pytest.raises(InvalidParameter):
            PropagationConfig(**kw)

    def test_with_param_aliases(self):
        cfg = CFG.with_param("epsilon", 1.5).with_param("dim_default", -0.5)
        assert cfg.epsilon_numeric == 1.5 and cfg.dimension_default == -0.5
        with pytest.raises(InvalidParameter):
            CFG.with_param("beta", 1)


class TestInitialReliability:
    def test_default_is_agent_reliability(self):
        assert message_initial_reliability(Agent("A", S(0.7)), None, CFG) == S(0.7)

    def test_and_with_declared(self):
        assert message_initial_reliability(Agent("A", S(1.0)), S(0.8), CFG) == S(0.8)
        assert message_initial_reliability(Agent("A", S(0.6)), S(0.9), CFG) == S(0.6)

    def test_dimensions_aligned(self):
        agent = Agent("A", Reliability({"chem": 0.9}))
        out = message_initial_reliability(agent, Reliability({"math": 0.5}), CFG)
        assert out == {"chem": 0.0, "math": 0.0}


class TestBackpropagate:
    def test_examples(self):
        chain = chain_msg(("A", "B", Direction.FORWARD))
        agent, new_chain = backpropagate_to_agent(Agent("A", S(0.5)), {"default": 0.4}, chain, "B")
        # 0.5 + 0.4 / (1 + 1)
        assert agent.reliability["default"] == pytest.approx(0.7)
        assert agent.inertia == 2
        assert len(agent.history) == 1
        assert new_chain.hops[-1].edge == ("B", "A", Direction.BACKWARD)

        agent, _ = backpropagate_to_agent(Agent("A", S(0.5), 3.0), {"default": 0.0}, chain, "B")
        assert agent.reliability == S(0.5) and agent.inertia == 4

        # 0.9 + 2.0 / 10 = 1.1, clamped
        agent, _ = backpropagate_to_agent(Agent("A", S(0.9), 9.0), {"default": 2.0}, chain, "B")
        assert agent.reliability == S(1.0)

    def test_cycle_leaves_agent_alone(self):
        chain = chain_msg(("A", "B", Direction.FORWARD), ("B", "A", Direction.BACKWARD))
        with pytest.raises(CycleDetected):
            backpropagate_to_agent(Agent("A", S(0.5)), {"default": 0.4}, chain, "B")

    @given(rel, st.floats(-2, 2), st.floats(0, 20), st.floats(0, 20))
    def test_dampening_monotone(self, r, delta, i1, i2):
        lo, hi = sorted((i1, i2))
        chain = chain_msg(("A", "B", Direction.FORWARD))
        a_lo, _ = backpropagate_to_agent(Agent("A", S(r), lo), {"default": delta}, chain, "B")
        a_hi, _ = backpropagate_to_agent(Agent("A", S(r), hi), {"default": delta}, chain, "B")
        assert abs(a_hi.reliability["default"] - r) <= abs(a_lo.reliability["default"] - r) + 1e-12


class TestChains:
    def test_combine_examples(self):
        assert chain_combine([S(0.8), S(0.6)], CFG) == S(0.6)
        # 0.5 * 0.6
        assert chain_combine([S(0.8), S(0.6)], CFG.with_param("alpha", 0.5))["default"] == pytest.approx(0.3)
        assert chain_combine([S(-0.4)], CFG) == S(-0.4)
        with pytest.raises(EmptyInput):
            chain_combine([], CFG)

    def test_decompose_multiplicative(self):
        parts = chain_decompose([S(0.8), S(0.6)], S(0.6), S(0.3), CFG)
        # k = 0.3 / 0.6 = 0.5
        assert [p["default"] for p in parts] == pytest.approx([0.4, 0.3])
        assert chain_combine(parts, CFG)["default"] == pytest.approx(0.3)

    def test_decompose_unchanged(self):
        assert chain_decompose([S(0.8), S(0.6)], S(0.6), S(0.6), CFG) == [S(0.8), S(0.6)]

    def test_decompose_additive_from_zero(self):
        parts = chain_decompose([S(0.0), S(0.0)], S(0.0), S(0.2), CFG)
        assert [p["default"] for p in parts] == pytest.approx([0.2, 0.2])

    def test_decompose_sign_flip(self):
        # old 0.2 -> new -0.1 crosses zero: shift every part by -0.3 / 0.5
        cfg = CFG.with_param("alpha", 0.5)
        parts = chain_decompose([S(0.4), S(0.9)], S(0.2), S(-0.1), cfg)
        assert [p["default"] for p in parts] == pytest.approx([-0.2, 0.3])
        assert chain_combine(parts, cfg)["default"] == pytest.approx(-0.1)

    def test_inconsistent(self):
        with pytest.raises(InconsistentChain):
            chain_decompose([S(0.8), S(0.6)], S(0.5), S(0.3), CFG)

    def test_below_floor(self):
        with pytest.raises(InvalidParameter):
            chain_decompose([S(-0.4)], S(-0.2), S(-0.9), CFG.with_param("alpha", 0.5))

    @settings(max_examples=300)
    @given(
        st.lists(rel, min_size=1, max_size=4),
        st.floats(0.05, 1.0),
        st.floats(0.0, 1.0),
    )
    def test_soundness(self, values, alpha, u):
        cfg = CFG.with_param("alpha", alpha)
        parts = [S(v) for v in values]
        old = chain_combine(parts, cfg)
        new = S(-alpha + u * (1 + alpha))
        out = chain_decompose(parts, old, new, cfg)
        got = chain_combine(out, cfg)["default"]
        assert got <= new["default"] + 1e-9
        if all(abs(p["default"]) < 1.0 for p in out):
            assert got == pytest.approx(new["default"], abs=1e-9)


class TestReconcile:
    def test_agree(self):
        d1, d2 = reconcile_pair(numeric("a", 5, 0.5), numeric("b", 5, 0.5), CFG)
        # 0.2 * conf(0.5) * spread(0.5) = 0.2 * 0.75 * 0.25
        assert d1.changes["default"] == pytest.approx(0.0375)
        assert d2.changes["default"] == pytest.approx(0.0375)

    def test_disagree_smaller_moves_more(self):
        d1, d2 = reconcile_pair(numeric("a", 1, 0.2), numeric("b", 2, 0.8), CFG)
        # -0.2 * 0.9 * 0.4 and -0.2 * 0.6 * 0.1
        assert d1.changes["default"] == pytest.approx(-0.072)
        assert d2.changes["default"] == pytest.approx(-0.012)

    def test_fixed_point_at_one(self):
        d1, _ = reconcile_pair(numeric("a", 1, 1.0), numeric("b", 1, 0.3), CFG)
        assert d1.changes["default"] == 0.0

    def test_epsilon_boundary_inclusive(self):
        cfg = CFG.with_param("epsilon", 1.0)
        d1, _ = reconcile_pair(numeric("a", 8, 0.5), numeric("b", 9, 0.5), cfg)
        assert d1.changes["default"] > 0

    def test_propositions(self):
        m1 = Message("a", "C1", Proposition("earth", "flat", Polarity.NEGATED), S(0.5))
        m2 = Message("b", "C2", Proposition("earth", "flat", Polarity.AFFIRMED), S(0.5))
        d1, _ = reconcile_pair(m1, m2, CFG)
        assert d1.changes["default"] < 0

    def test_not_comparable(self):
        with pytest.raises(NotComparable):
            reconcile_pair(numeric("a", 1, 0.5), Message("b", "C2", Numeric("size", 1), S(0.5)), CFG)
        with pytest.raises(NotComparable):
            reconcile_pair(numeric("a", 1, 0.5), Message("b", "C2", Proposition("temp", "x"), S(0.5)), CFG)
        with pytest.raises(NotComparable):
            reconcile_pair(numeric("a", 1, 0.5, "C1"), numeric("b", 1, 0.5, "C1"), CFG)

    def test_set_makinson_sign_pattern(self):
        cfg = CFG.with_param("epsilon", 1.5)
        deltas = reconcile_set([numeric("m8", 8, 0.5), numeric("m9", 9, 0.5), numeric("mm1", -1, 0.5)], cfg)
        by = {d.target: d.changes["default"] for d in deltas}
        # +0.0375 - 0.0375 for 8 and 9; -2 * 0.0375 for -1
        assert by["m8"] == pytest.approx(0.0) and by["m9"] == pytest.approx(0.0)
        assert by["mm1"] == pytest.approx(-0.075)
        assert by["mm1"] < by["m8"] and by["mm1"] < by["m9"]

    def test_set_two_equal(self):
        deltas = reconcile_set([numeric("a", 3, 0.1), numeric("b", 3, 0.1)], CFG)
        assert deltas[0].changes == deltas[1].changes and deltas[0].changes["default"] > 0

    def test_set_order_independent(self):
        msgs = [numeric("x", 1, 0.3), numeric("b", 2, -0.2), numeric("q", 1, 0.9)]
        a = reconcile_set(msgs, CFG)
        b = reconcile_set(list(reversed(msgs)), CFG)
        assert a == b and [d.target for d in a] == ["b", "q", "x"]

    def test_set_too_small(self):
        with pytest.raises(NotEnoughMessages):
            reconcile_set([numeric("a", 1, 0.1)], CFG)

    @given(rel, rel, rel, st.booleans())
    def test_sign_and_ordering(self, r_i, r_j, r_other, agree):
        lo, hi = sorted((r_i, r_j))
        value = 1 if agree else 2
        d_lo, _ = reconcile_pair(numeric("a", 1, lo), numeric("b", value, r_other), CFG)
        d_hi, _ = reconcile_pair(numeric("a", 1, hi), numeric("b", value, r_other), CFG)
        for d in (d_lo, d_hi):
            assert (d.changes["default"] >= 0) if agree else (d.changes["default"] <= 0)
        assert abs(d_lo.changes["default"]) >= abs(d_hi.changes["default"])


class TestMerge:
    def test_examples(self):
        nu, iota = merge_reliability_judgements(S(0.4), 1.0, [(S(0.8), S(1.0))])
        # weights 1/2, 1/2
        assert nu["default"] == pytest.approx(0.6) and iota == 2

        nu, iota = merge_reliability_judgements(S(0.4), 3.0, [(S(0.9), S(-1.0)), (S(-0.9), S(-1.0))])
        assert nu == S(0.4) and iota == 5

        nu, iota = merge_reliability_judgements(S(0.0), 0.0, [(S(0.5), S(0.2)), (S(0.5), S(0.2))])
        assert nu["default"] == pytest.approx(0.5) and iota == 2

    def test_all_weights_zero(self):
        nu, iota = merge_reliability_judgements(S(0.3), 0.0, [(S(0.9), S(-1.0))])
        assert nu == S(0.3) and iota == 1

    def test_errors(self):
        with pytest.raises(EmptyInput):
            merge_reliability_judgements(S(0.3), 1.0, [])
        with pytest.raises(InvalidParameter):
            merge_reliability_judgements(S(0.3), -1.0, [(S(0.1), S(0.1))])

    @given(rel, st.floats(0, 10), st.lists(st.tuples(rel, rel), min_size=1, max_size=4))
    def test_stays_between_inputs(self, nu, iota, raw):
        judgements = [(S(m), S(r)) for m, r in raw]
        out, new_iota = merge_reliability_judgements(S(nu), iota, judgements)
        values = [nu] + [m for m, _ in raw]
        assert min(values) - 1e-9 <= out["default"] <= max(values) + 1e-9
        assert new_iota == iota + len(raw)
