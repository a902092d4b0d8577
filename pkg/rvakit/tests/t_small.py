"""Tests for small_classes.py, small_scripts.py and config.py"""
import os
import tempfile
import unittest
import numpy as np
from rvakit.small_classes import TrainLog, DictOfLists, Count
from rvakit.small_scripts import (stable_ranking, strip_pads, round_sig,
                                  parse_bool, lowest_argmax, check_finite)
from rvakit.repr_conventions import table, arraystr
from rvakit.config import (RunConfig, DialogConfig, parse_config,
                           format_config, write_config, load_config,
                           default_config)
from rvakit.exceptions import ConfigError, NonFiniteError, ValidationError


class TestSmallClasses(unittest.TestCase):
    """TestCase for Count, TrainLog and DictOfLists"""

    def test_count(self):
        c = Count()
        self.assertEqual([c.next() for _ in range(3)], [0, 1, 2])

    def test_trainlog(self):
        log = TrainLog()
        log.write("first line\n")
        log.write("\n")
        log.write("second")
        self.assertEqual(list(log), ["first line", "second"])
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "log.txt")
            log.save(path)
            with open(path) as f:
                self.assertEqual(f.read(), "first line\nsecond\n")

    def test_dictoflists(self):
        dol = DictOfLists()
        dol.append({"a": 1, "b": 2.0})
        dol.append({"a": 3, "b": 4.0})
        self.assertEqual(dol, {"a": [1, 3], "b": [2.0, 4.0]})
        self.assertEqual(dol.atindex(-1), {"a": 3, "b": 4.0})
        with self.assertRaises(KeyError):
            dol.append({"a": 5})
        dol.to_arrays()
        self.assertTrue(isinstance(dol["a"], np.ndarray))


class TestSmallScripts(unittest.TestCase):
    """TestCase for rvakit.small_scripts"""

    def test_stable_ranking(self):
        ranking = stable_ranking([0.5, 2.0, 0.5, 2.0, -1])
        self.assertEqual(list(ranking), [1, 3, 0, 2, 4])

    def test_lowest_argmax(self):
        self.assertEqual(lowest_argmax([1, 3, 3, 0]), 1)

    def test_strip_pads(self):
        self.assertEqual(strip_pads([5, 6, 0, 0]), [5, 6])
        self.assertEqual(strip_pads([5, 6]), [5, 6])
        self.assertEqual(strip_pads([0, 0]), [])
        self.assertIsNone(strip_pads([5, 0, 6]))

    def test_round_sig(self):
        self.assertEqual(round_sig(1.23456789123), 1.23456789)
        self.assertEqual(round_sig(-0.000123456789123), -0.000123456789)

    def test_parse_bool(self):
        for string in ("true", "Yes", "1", " on "):
            self.assertTrue(parse_bool(string))
        for string in ("false", "NO", "0", "off"):
            self.assertFalse(parse_bool(string))
        with self.assertRaises(ConfigError):
            parse_bool("maybe")

    def test_check_finite(self):
        check_finite("ok", np.ones(3))
        with self.assertRaises(NonFiniteError) as cm:
            check_finite("log", np.array([1, np.nan]))
        self.assertEqual(cm.exception.op, "log")


class TestReprConventions(unittest.TestCase):
    """TestCase for tables and array strings"""

    def test_table(self):
        lines = table([("mrr", 0.5), ("count", 12)], "Metrics",
                      ("key", "value"))
        self.assertEqual(lines[1:3], ["Metrics", "-------"])
        self.assertEqual(lines[3].split(), ["key", "value"])
        self.assertEqual(lines[-1].split(), ["count", "12"])
        self.assertEqual(table([], "Empty")[-1], "(none)")

    def test_arraystr(self):
        self.assertEqual(arraystr([0.25, 1]), "[0.250 1.000]")
        self.assertIn("...", arraystr(np.arange(30), "%i", 6))


class TestConfig(unittest.TestCase):
    """TestCase for the key = value configuration files"""

    def test_parse(self):
        config = parse_config("# comment\nseed = 3\n\nrv_only = yes  # x\n"
                              "precision = float64\n", RunConfig)
        self.assertEqual(config.seed, 3)
        self.assertTrue(config.rv_only)
        self.assertEqual(config.precision, "float64")
        self.assertEqual(config.d_h, 512)

    def test_rejects(self):
        for text in ("colour = red", "seed = 1\nseed = 2", "seed 3",
                     "seed = three", "lr_floor = 0.1", "precision = half",
                     "dropout = 1.0", "d_h = 0"):
            with self.assertRaises(ConfigError):
                parse_config(text, RunConfig)
        with self.assertRaises(ConfigError):
            parse_config("num_rounds = 11", DialogConfig)
        with self.assertRaises(ConfigError):
            parse_config("seed = 1", DialogConfig)

    def test_round_trip(self):
        config = RunConfig(seed=7, lr_initial=3e-3, no_filter=True,
                           train_data="data/train.jsonl")
        self.assertEqual(parse_config(format_config(config), RunConfig),
                         config)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "run.cfg")
            write_config(config, path)
            self.assertEqual(load_config(path), config)
        with self.assertRaises(ConfigError):
            load_config(os.path.join("no", "such", "file.cfg"))

    def test_schedule(self):
        config = RunConfig()
        rates = [config.learning_rate(e) for e in range(8)]
        self.assertEqual(rates[:3], [1e-3, 5e-4, 2.5e-4])
        self.assertEqual(rates[-1], 5e-5)
        self.assertTrue(all(a >= b for a, b in zip(rates, rates[1:])))

    def test_shipped(self):
        self.assertEqual(default_config(), RunConfig())
        self.assertEqual(default_config("dialog"), DialogConfig())
        mini = default_config("mini")
        self.assertEqual((mini.d_h, mini.num_candidates), (8, 10))
        dialog = default_config("dialog_mini")
        self.assertEqual(dialog.num_regions, mini.num_regions)
        self.assertEqual(dialog.d_v, mini.d_v)
        gradcheck = default_config("gradcheck")
        self.assertEqual((gradcheck.d_h, gradcheck.d_emb,
                          gradcheck.num_regions), (8, 6, 3))
        self.assertTrue(isinstance(ConfigError("x"), ValidationError))

    def test_benchmark_configs(self):
        bench = default_config("dialog_bench")
        self.assertEqual((bench.num_regions, bench.num_rounds,
                          bench.ambiguity_rate, bench.skip_rate),
                         (36, 10, 0.5, 0.2))
        model = default_config("bench")
        self.assertEqual((model.num_regions, model.d_v, model.num_candidates),
                         (bench.num_regions, bench.d_v, bench.num_candidates))

    def test_d_q(self):
        self.assertEqual(RunConfig(d_emb=6, d_h=8).d_q, 6)
        self.assertEqual(RunConfig(d_emb=6, d_h=8, attend_hidden=True).d_q,
                         16)


TESTS = [TestSmallClasses, TestSmallScripts, TestReprConventions, TestConfig]
