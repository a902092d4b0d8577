"""Tests for the tensor core: ops, graphs, parameters, streams and files"""
import os
import tempfile
import unittest
from unittest import mock
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
from ad import adnumber
from ad import admath
import rvakit.tensor as tn
from rvakit.tensor import Tensor, Graph, ParameterSet, Rng, OPS
from rvakit.tensor import io as tensor_io
from rvakit.globals import Precision, active_graph
from rvakit.exceptions import (ShapeError, GraphError, NonFiniteError,
                               CheckpointError, ValidationError)
from rvakit.tools.gradcheck import (check_ops, finite_diff_check,
                                    relative_error)


def leaf(values):
    "A tensor that requires grad."
    return Tensor(values, requires_grad=True)


class TestTensor(unittest.TestCase):
    """TestCase for Tensor construction and operators"""

    def test_precision(self):
        self.assertEqual(Tensor([1, 2]).value.dtype, np.float32)
        with Precision("float64"):
            self.assertEqual(Tensor([1, 2]).value.dtype, np.float64)
        self.assertEqual(Tensor([1, 2]).value.dtype, np.float32)

    def test_nonfinite(self):
        with self.assertRaises(NonFiniteError):
            Tensor([1.0, np.inf])
        with self.assertRaises(NonFiniteError) as cm:
            tn.log(Tensor([0.0, 1.0]))
        self.assertEqual(cm.exception.op, "log")

    def test_operators(self):
        with Precision("float64"):
            a, b = Tensor([1.0, 2.0]), Tensor([3.0, 5.0])
            assert_array_equal((a + b).value, [4, 7])
            assert_array_equal((a - b).value, [-2, -3])
            assert_array_equal((a * b).value, [3, 10])
            assert_array_equal((2 * a).value, [2, 4])
            assert_array_equal((1 - a).value, [0, -1])
            assert_array_equal((a / 2).value, [0.5, 1])
            assert_array_equal((-a).value, [-1, -2])
            self.assertEqual((a @ b).item(), 13)
            self.assertEqual(a[1].item(), 2)

    def test_shape_errors(self):
        with self.assertRaises(ShapeError) as cm:
            tn.add(Tensor([1, 2]), Tensor([1, 2, 3]))
        self.assertEqual(cm.exception.op, "add")
        with self.assertRaises(ShapeError):
            tn.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))
        with self.assertRaises(ShapeError):
            tn.concat([Tensor(np.ones((2, 3))), Tensor(np.ones((2, 2)))])
        with self.assertRaises(ValidationError):
            tn.embedding_lookup(Tensor(np.ones((3, 2))), [0, 3])
        with self.assertRaises(ValidationError):
            Tensor([1, 2]).item()

    def test_l2_normalize_zero(self):
        with Precision("float64"):
            x = leaf(np.zeros((2, 3)))
            with Graph() as graph:
                loss = tn.sum(tn.l2_normalize(x, axis=1))
            graph.backward(loss)
            assert_array_equal(x.grad, np.zeros((2, 3)))

    def test_softmax_shift(self):
        rng = Rng(2, "data")
        with Precision("float64"):
            for _ in range(100):
                logits = rng.normal(3.0, 7)
                plain = tn.softmax(Tensor(logits)).value
                self.assertTrue((plain > 0).all())
                self.assertAlmostEqual(float(plain.sum()), 1.0, delta=1e-6)
                for c in (-50.0, 0.5, 700.0):
                    shifted = tn.softmax(Tensor(logits + c)).value
                    assert_allclose(shifted, plain, atol=1e-6)
            rows = tn.softmax(Tensor([[0.0, 1000.0], [2.0, 2.0]]),
                              axis=1).value
            assert_allclose(rows, [[0.0, 1.0], [0.5, 0.5]], atol=1e-6)

    def test_dropout(self):
        x = Tensor(np.ones((50, 40)))
        self.assertIs(tn.dropout(x, 0.5, Rng(0, "dropout"), train=False), x)
        self.assertIs(tn.dropout(x, 0.0, Rng(0, "dropout")), x)
        y = tn.dropout(x, 0.5, Rng(0, "dropout")).value
        self.assertEqual(set(np.unique(y)), {0.0, 2.0})
        self.assertAlmostEqual(y.mean(), 1.0, delta=0.1)
        with self.assertRaises(ValidationError):
            tn.dropout(x, 1.0, Rng(0, "dropout"))


class TestGraph(unittest.TestCase):
    """TestCase for reverse-mode differentiation"""

    def test_no_graph_no_record(self):
        x = leaf([1.0, 2.0])
        self.assertIsNone(active_graph())
        y = tn.sum(x * x)
        self.assertEqual(y.op, "sum")
        self.assertFalse(y.requires_grad)

    def test_constants_not_recorded(self):
        with Graph() as graph:
            tn.sum(Tensor([1.0, 2.0]) * Tensor([3.0, 4.0]))
        self.assertEqual(len(graph), 0)

    def test_backward(self):
        with Precision("float64"):
            x = leaf([1.0, 2.0, 3.0])
            w = leaf([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
            with Graph() as graph:
                loss = tn.sum(tn.tanh(x @ w))
            grads = graph.backward(loss)
            z = np.array([1.0, 2.0, 3.0]) @ w.value
            dz = 1 - np.tanh(z)**2
            assert_allclose(grads[x], w.value @ dz)
            assert_allclose(w.grad, np.outer(x.value, dz))
            assert_array_equal(graph.grad(x), x.grad)

    def test_reused_tensor_accumulates(self):
        with Precision("float64"):
            x = leaf([3.0])
            with Graph() as graph:
                loss = tn.sum(x * x + x)
            graph.backward(loss)
            assert_allclose(x.grad, [7.0])

    def test_graph_errors(self):
        x = leaf([1.0, 2.0])
        with Graph() as graph:
            y = x * x
            loss = tn.sum(y)
        with self.assertRaises(GraphError):
            graph.backward(y)
        graph.backward(loss)
        with self.assertRaises(GraphError):
            graph.backward(loss)
        with self.assertRaises(GraphError):
            graph.grad(Tensor([1.0]))
        graph.reset()
        self.assertIsNone(x.grad)
        with self.assertRaises(GraphError):
            graph.grad(x)
        with Graph() as graph:
            constant = tn.sum(Tensor([1.0]))
        with self.assertRaises(GraphError):
            graph.backward(constant)

    def test_straight_through_identity(self):
        "Forward is the hard value; gradient is the soft one's."
        rng = Rng(3, "data")
        with Precision("float64"):
            for _ in range(1000):
                n = int(rng.integers(2, 7))
                logits = leaf(rng.normal(1.0, n))
                with Graph() as graph:
                    soft = tn.softmax(logits)
                    hard = np.eye(n)[int(np.argmax(soft.value))]
                    value = tn.straight_through(hard, soft)
                    weights = rng.normal(1.0, n)
                    loss = value @ Tensor(weights)
                graph.backward(loss)
                assert_array_equal(value.value, hard)
                s = soft.value
                expected = s * (weights - (weights*s).sum())
                assert_allclose(logits.grad, expected, atol=1e-12)

    def test_against_ad(self):
        "Element-wise chains agree with forward-mode derivatives."
        values = [0.3, -1.2, 2.5]
        with Precision("float64"):
            x = leaf(values)
            with Graph() as graph:
                loss = tn.sum(tn.sigmoid(tn.tanh(x) * 2) + tn.exp(x / 3))
            graph.backward(loss)
        for i, v in enumerate(values):
            a = adnumber(v)
            f = 1/(1 + admath.exp(-2*admath.tanh(a))) + admath.exp(a/3)
            self.assertAlmostEqual(x.grad[i], f.d(a), places=12)


class TestOps(unittest.TestCase):
    """TestCase for every registered backward rule"""

    def test_all_ops_pass(self):
        errors = check_ops(seed=1)
        self.assertEqual(set(errors), set(OPS))
        for name, err in errors.items():
            self.assertLess(err, 1e-4, name)

    def test_corrupted_rule_is_named(self):
        def bad_tanh(a):
            y = np.tanh(a)
            return y, lambda g: (g * (1 - y),)
        with mock.patch.dict(OPS, {"tanh": bad_tanh}):
            errors = check_ops(seed=1)
        self.assertGreater(errors["tanh"], 1e-2)
        self.assertLess(errors["sigmoid"], 1e-4)

    def test_fused_ops_match_their_parts(self):
        rng = Rng(2, "data")
        with Precision("float64"):
            z, c = Tensor(rng.normal(1.0, 12)), Tensor(rng.normal(1.0, 3))
            i, f = tn.sigmoid(z[0:3]), tn.sigmoid(z[3:6])
            g, o = tn.tanh(z[6:9]), tn.sigmoid(z[9:12])
            cell = f * c + i * g
            out = tn.lstm_cell(z, c)
            self.assertEqual(out.shape, (2, 3))
            assert_allclose(out.value[1], cell.value, rtol=1e-14)
            assert_allclose(out.value[0], (o * tn.tanh(cell)).value,
                            rtol=1e-14)
            a, b = Tensor(rng.normal(1.0, 4)), Tensor(rng.normal(1.0, 4))
            assert_allclose(tn.gated(a, b).value,
                            (tn.tanh(a) * tn.sigmoid(b)).value, rtol=1e-14)
        with self.assertRaises(ShapeError):
            tn.lstm_cell(Tensor(np.ones(8)), Tensor(np.ones(3)))

    def test_finite_diff_check(self):
        rng = Rng(0, "init")
        with Precision("float64"):
            params = ParameterSet()
            params.uniform("layer.w", (4, 3), rng, 1.0)
            params.uniform("layer.b", (3,), rng, 1.0)
            x = Tensor(rng.normal(1.0, 4))

            def loss_fn():
                h = tn.tanh(x @ params["layer.w"] + params["layer.b"])
                return -tn.log_softmax(h)[1]
            error = finite_diff_check(loss_fn, params)
            self.assertIsInstance(error, float)
            self.assertLess(error, 1e-7)
            square = ParameterSet()
            square.add("x", [3.0])
            self.assertLess(finite_diff_check(
                lambda: tn.sum(square["x"] * square["x"]), square, eps=1e-5),
                            1e-8)
            self.assertEqual(finite_diff_check(lambda: Tensor(2.0), square),
                             0.0)
            with self.assertRaises(ValidationError):
                finite_diff_check(loss_fn, params, eps=0)
        with self.assertRaises(ValidationError):
            finite_diff_check(loss_fn, params)

    def test_finite_diff_check_sees_every_coordinate(self):
        with Precision("float64"):
            params = ParameterSet()
            params.add("w", np.ones(40))

            def wrong_last():
                # the recorded gradient of w[39] is 1 but the loss moves by 3
                w = params["w"]
                return tn.sum(w) + Tensor(2.0 * w.value[39])
            self.assertAlmostEqual(finite_diff_check(wrong_last, params), 2.0,
                                   places=6)

    def test_relative_error_scale(self):
        assert_allclose(relative_error([1e-9], [2e-9]), [1e-9])
        assert_allclose(relative_error([4.0], [4.002]), [0.0005])
        assert_allclose(relative_error([-0.5], [0.5]), [1.0])


class TestParameterSet(unittest.TestCase):
    """TestCase for named parameter collections"""

    def setUp(self):
        self.params = ParameterSet()
        rng = Rng(0, "init")
        self.params.uniform("att.f_v.weight", (3, 2), rng)
        self.params.zeros("att.w", (2,))
        self.params.uniform("pair.score.weight", (2, 1), rng)

    def test_groups(self):
        self.assertEqual(self.params.groups(),
                         {"att": ["att.f_v.weight", "att.w"],
                          "pair": ["pair.score.weight"]})
        self.assertEqual(self.params.count(), 10)
        self.assertTrue(all(p.requires_grad for p in self.params.values()))
        self.assertTrue((np.abs(self.params["att.f_v.weight"].value)
                         <= 0.08).all())

    def test_load_and_digest(self):
        digest = self.params.digest()
        arrays = self.params.arrays()
        arrays["att.w"] = arrays["att.w"] + 1
        self.params.load(arrays)
        self.assertNotEqual(self.params.digest(), digest)
        with self.assertRaises(ValidationError):
            self.params.load({"att.w": np.zeros(2)})
        arrays["att.w"] = np.zeros(3)
        with self.assertRaises(ValidationError):
            self.params.load(arrays)
        with self.assertRaises(ValidationError):
            self.params.zeros("att.w", (2,))

    def test_copy(self):
        copied = self.params.copy()
        self.assertEqual(copied.digest(), self.params.digest())
        copied["att.w"].value += 1
        self.assertNotEqual(copied.digest(), self.params.digest())
        self.assertTrue(isinstance(copied, ParameterSet))


class TestRng(unittest.TestCase):
    """TestCase for keyed random streams"""

    def test_keys(self):
        a = Rng(5, "gumbel", 2, 3).random(4)
        assert_array_equal(a, Rng(5, "gumbel", 2, 3).random(4))
        self.assertFalse(np.array_equal(a, Rng(5, "gumbel", 3, 2).random(4)))
        self.assertFalse(np.array_equal(a, Rng(5, "dropout", 2, 3).random(4)))
        self.assertFalse(np.array_equal(a, Rng(6, "gumbel", 2, 3).random(4)))
        assert_array_equal(Rng(5, "gumbel", 2).spawn(3).random(4), a)

    def test_errors(self):
        with self.assertRaises(ValidationError):
            Rng(0, "sampling")
        with self.assertRaises(ValidationError):
            Rng(-1, "init")


class TestCheckpointCodec(unittest.TestCase):
    """TestCase for the RVA1 binary format"""

    def setUp(self):
        self.arrays = {"a.w": np.arange(6, dtype=float).reshape(2, 3) / 7,
                       "scalar": np.array(2.5), "empty": np.zeros((0, 4))}

    def test_round_trip(self):
        for precision, dtype in (("float32", np.float32),
                                 ("float64", np.float64)):
            data = tensor_io.dumps(self.arrays, precision, {"epoch": 3})
            arrays, prec, meta = tensor_io.loads(data)
            self.assertEqual(prec, precision)
            self.assertEqual(meta, {"epoch": 3})
            self.assertEqual(list(arrays), list(self.arrays))
            for name, value in self.arrays.items():
                assert_array_equal(arrays[name], value.astype(dtype))
                self.assertEqual(arrays[name].shape, value.shape)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "x.rva")
            tensor_io.save(path, self.arrays, "float64")
            assert_array_equal(tensor_io.load(path)[0]["a.w"],
                               self.arrays["a.w"])

    def test_rank_zero(self):
        data = tensor_io.dumps({"s": np.array(2.5)}, "float64")
        arrays, _, _ = tensor_io.loads(data)
        self.assertEqual(arrays["s"].shape, ())
        self.assertEqual(arrays["s"].item(), 2.5)
        # rank 0 is written as a zero extent count and one value
        self.assertEqual(len(data), 4 + 5 + 4 + 1 + 4 + 8 + 4 + 2)
        transposed = np.arange(6.0).reshape(2, 3).T
        loaded = tensor_io.loads(tensor_io.dumps({"t": transposed},
                                                 "float64"))[0]["t"]
        assert_array_equal(loaded, transposed)

    def test_layout(self):
        data = tensor_io.dumps({"w": np.array([1.0])}, "float32")
        self.assertEqual(data[:4], b"RVA1")
        self.assertEqual(data[4], 0)
        self.assertEqual(data[5:9], (1).to_bytes(4, "little"))
        self.assertEqual(data[9:13], (1).to_bytes(4, "little"))
        self.assertEqual(data[13:14], b"w")

    def test_corruption(self):
        data = tensor_io.dumps(self.arrays, "float64")
        with self.assertRaises(CheckpointError):
            tensor_io.loads(b"RVA2" + data[4:])
        with self.assertRaises(CheckpointError) as cm:
            tensor_io.loads(data[:40])
        self.assertIn("record", str(cm.exception))
        with self.assertRaises(CheckpointError):
            tensor_io.loads(data + b"\x00")
        with self.assertRaises(CheckpointError):
            tensor_io.load(os.path.join("no", "such", "file.rva"))


TESTS = [TestTensor, TestGraph, TestOps, TestParameterSet, TestRng,
         TestCheckpointCodec]
