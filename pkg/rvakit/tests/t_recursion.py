"""Tests for the memoized recursive attention engine"""
import unittest
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
from scipy.special import softmax
from rvakit.globals import Precision
from rvakit.modules import (RecursionEngine, AttentionState, infer_decision,
                            pair_decision, attend_feature)
from rvakit.tensor import Rng, Tensor
from rvakit.exceptions import (RecursionCacheMiss, ShapeError,
                               ValidationError)


class FrozenDialog:
    "Question-guided attention and decision samples fixed in advance."
    def __init__(self, rng, rounds, k, d_v=5, unambiguous=0.4):
        self.k = k
        self.regions = Tensor(rng.normal(1.0, (k, d_v)))
        self.att_logits = [rng.normal(2.0, k) for _ in range(rounds + 1)]
        cond = rng.random(rounds + 1) < unambiguous
        # logits favour index 0 (unambiguous) exactly where cond holds
        self.infer_logits = [np.array([1.0, -1.0]) if c
                             else np.array([-1.0, 1.0]) for c in cond]
        self.infer_lam = [rng.uniform(-2, 2, 2) for _ in range(rounds + 1)]
        self.pair_noise = [rng.normal(1.0, max(t, 1))
                           for t in range(rounds + 1)]
        self.pair_logits = [rng.normal(1.0, max(t, 1))
                            for t in range(rounds + 1)]

    def att(self, t):
        "Question-guided attention of round t."
        return Tensor(softmax(self.att_logits[t]))

    def infer(self, t):
        "Frozen Infer outcome; lam comes from separate logits."
        return infer_decision(Tensor(self.infer_lam[t]), t, "train",
                              noise=10*self.infer_logits[t])

    def pair(self, t):
        "Frozen Pair outcome."
        return pair_decision(Tensor(self.pair_logits[t]), t, "train",
                             noise=self.pair_noise[t] if t > 1 else None)

    def engine(self, **flags):
        "A fresh engine over these stubs."
        return RecursionEngine(self.att, self.infer, self.pair,
                               self.regions, **flags)

    def naive(self, t):
        "The literal recursion, recomputing every visited round."
        att = self.att(t).value
        decision = self.infer(t)
        if decision.cond:
            return att
        t_p = self.pair(t).t_p
        lam = decision.lam.item()
        return (1 - lam) * self.naive(t_p) + lam * att


class TestRecursionEngine(unittest.TestCase):
    """TestCase for RecursionEngine"""

    def setUp(self):
        self.precision = Precision("float64")
        self.precision.__enter__()

    def tearDown(self):
        self.precision.__exit__(None, None, None)

    def test_matches_literal_recursion(self):
        "Bit-identical attention to the unmemoized recursion."
        rng = Rng(4, "data")
        for _ in range(100):
            rounds = int(rng.integers(1, 11))
            dialog = FrozenDialog(rng, rounds, int(rng.integers(2, 9)))
            engine = dialog.engine()
            states = engine.run(rounds)
            for t, state in enumerate(states):
                assert_array_equal(state.alpha.value, dialog.naive(t))
                state.check(dialog.regions)

    def test_traces(self):
        rng = Rng(5, "data")
        for _ in range(200):
            rounds = int(rng.integers(1, 11))
            dialog = FrozenDialog(rng, rounds, 4, unambiguous=0.2)
            engine = dialog.engine()
            engine.run(rounds)
            for t in range(rounds + 1):
                trace = engine.cache[t][1]
                self.assertEqual(trace.root.round, t)
                rounds_visited = [node.round for node in trace]
                self.assertEqual(rounds_visited,
                                 sorted(rounds_visited, reverse=True))
                self.assertEqual(len(set(rounds_visited)), trace.depth)
                for a, b in trace.edges:
                    self.assertLess(b, a)
                last = trace.nodes[-1]
                self.assertIsNone(last.t_p)
                self.assertTrue(last.cond or last.round == 0)

    def test_round_zero_terminates(self):
        dialog = FrozenDialog(Rng(6, "data"), 3, 4, unambiguous=0.0)
        state, trace = dialog.engine().rva(0)
        assert_array_equal(state.alpha.value, dialog.att(0).value)
        self.assertEqual(trace.depth, 1)
        self.assertTrue(trace.root.cond)

    def test_rv_only(self):
        dialog = FrozenDialog(Rng(7, "data"), 6, 4, unambiguous=0.0)
        engine = dialog.engine(rv_only=True)
        for t, state in enumerate(engine.run(6)):
            assert_array_equal(state.alpha.value, dialog.att(t).value)
            self.assertEqual(engine.cache[t][1].edges, [])

    def test_pair_last(self):
        dialog = FrozenDialog(Rng(8, "data"), 6, 4, unambiguous=0.0)
        engine = dialog.engine(pair_last=True)
        engine.run(6)
        for t in range(1, 7):
            self.assertEqual(engine.cache[t][1].root.t_p, t - 1)
            self.assertIsNone(engine.decisions[t][1])

    def test_memoized_decisions(self):
        calls = []
        dialog = FrozenDialog(Rng(9, "data"), 5, 4, unambiguous=0.0)
        engine = RecursionEngine(dialog.att, lambda t: calls.append(t)
                                 or dialog.infer(t), dialog.pair,
                                 dialog.regions)
        engine.run(5)
        engine.rva(3)
        self.assertEqual(calls, [0, 1, 2, 3, 4, 5])

    def test_cache_miss(self):
        dialog = FrozenDialog(Rng(10, "data"), 4, 4, unambiguous=0.0)
        with self.assertRaises(RecursionCacheMiss):
            dialog.engine().rva(3)
        with self.assertRaises(ValidationError):
            dialog.engine().rva(-1)

    def test_three_round_chain(self):
        "Round 2 sends back to round 0 with lam = 0.3."
        atts = [np.array([0.6, 0.3, 0.1]), np.array([0.2, 0.2, 0.6]),
                np.array([0.1, 0.1, 0.8])]
        infers = {0: infer_decision(Tensor([2.0, 0.0]), 0, "greedy"),
                  1: infer_decision(Tensor([2.0, 0.0]), 1, "greedy"),
                  2: infer_decision(Tensor(np.log([0.3, 0.7])), 2, "train",
                                    noise=np.array([-20.0, 20.0]))}
        pair = pair_decision(Tensor([3.0, -3.0]), 2, "greedy")
        regions = Tensor(np.eye(3))
        engine = RecursionEngine(lambda t: Tensor(atts[t]), infers.get,
                                 lambda t: pair, regions)
        states = engine.run(2)
        expected = 0.7*atts[0] + 0.3*atts[2]
        assert_allclose(states[2].alpha.value, expected, atol=1e-12)
        assert_allclose(states[2].v_hat.value, expected, atol=1e-12)
        assert_array_equal(states[1].alpha.value, atts[1])
        self.assertEqual(engine.cache[2][1].edges, [(2, 0)])

    def test_simplex_checked(self):
        off = Tensor([0.7, 0.0, 0.5])
        regions = Tensor(np.eye(3))
        terminal = infer_decision(Tensor([1.0, 0.0]), 0, "greedy")
        with self.assertRaises(ValidationError):
            RecursionEngine(lambda t: off, lambda t: terminal, None,
                            regions).rva(0)
        with Precision("float32"):
            off, regions = Tensor([0.7, 0.0, 0.5]), Tensor(np.eye(3))
            terminal = infer_decision(Tensor([1.0, 0.0]), 0, "greedy")
            state, _ = RecursionEngine(lambda t: off, lambda t: terminal,
                                       None, regions).rva(0)
            self.assertAlmostEqual(float(state.alpha.value.sum()), 1.2,
                                   places=5)
            with self.assertRaises(ValidationError):
                RecursionEngine(lambda t: off, lambda t: terminal, None,
                                regions, debug=True).rva(0)

    def test_attend_feature(self):
        regions = Tensor(np.arange(6.0).reshape(3, 2))
        v_hat = attend_feature(Tensor([0.5, 0.0, 0.5]), regions)
        assert_array_equal(v_hat.value, [2.0, 3.0])
        with self.assertRaises(ShapeError):
            attend_feature(Tensor([0.5, 0.5]), regions)
        state = AttentionState(Tensor([0.5, 0.0, 0.5]), Tensor([2.0, 2.0]),
                               1)
        with self.assertRaises(ValidationError):
            state.check(regions)
        state = AttentionState(Tensor([0.7, 0.0, 0.5]), v_hat, 1)
        with self.assertRaises(ValidationError):
            state.check(regions)


TESTS = [TestRecursionEngine]
