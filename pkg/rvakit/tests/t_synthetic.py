"""Tests for the synthetic dialog generator, dataset files and resolver"""
import json
import os
import tempfile
import unittest
import numpy as np
from numpy.testing import assert_array_equal
from rvakit.synthetic import (generate_episode, generate_dataset,
                              build_candidates, feature_basis,
                              ScriptedResolver, ANSWER_POOL, dataset)
from rvakit.synthetic.world import Region, code_width
from rvakit.tensor import Rng
from rvakit.metrics import EvalRecord, mrr
from rvakit.small_scripts import stable_ranking
from rvakit.exceptions import ConfigError, DatasetError
from rvakit.tests.helpers import mini_dialog_config

MINIMAL = [
    {"schema": "rvakit.dialog", "version": 1, "episodes": 1},
    {"seed": 5, "index": 0, "caption": ["a", "picture", "of", "a", "lamp"],
     "caption_region": 1, "topics": [1],
     "regions": [{"category": "cup", "color": "red", "size": "small",
                  "state": "on", "position": ["top", "left"]},
                 {"category": "lamp", "color": "blue", "size": "large",
                  "state": "off", "position": ["bottom", "right"]}],
     "features": [[0.5, -1.0, 0.25], [1.0, 0.0, -0.75]],
     "rounds": [{"question": ["what", "color", "is", "it"],
                 "answer": ["blue"], "qtype": "color", "ambiguous": True,
                 "antecedent": 0, "gt_region": 1,
                 "candidates": [["red"], ["blue"], ["no"]], "gt_index": 1,
                 "relevances": [0.5, 1.0, 0.0]}]}]


class TestGenerator(unittest.TestCase):
    """TestCase for generate_episode"""

    def setUp(self):
        self.config = mini_dialog_config()

    def test_deterministic(self):
        first = generate_dataset(3, 5, self.config)
        again = generate_dataset(3, 5, self.config)
        self.assertEqual(dataset.dumps(first), dataset.dumps(again))
        self.assertEqual(dataset.dumps([generate_episode(3, self.config, 4)]),
                         dataset.dumps([first[4]]))

    def test_distinct_seeds(self):
        config = self.config.replace(num_rounds=2, skip_rate=0.0)
        seen = set()
        for seed in range(10000):
            seen.add(dataset.dumps([generate_episode(seed, config)])
                     .split("\n", 1)[1].replace('"seed": %i' % seed, ""))
        self.assertEqual(len(seen), 10000)

    def test_no_ambiguity(self):
        config = self.config.replace(ambiguity_rate=0.0, skip_rate=0.0)
        for episode in generate_dataset(0, 50, config):
            for rnd in episode.rounds:
                self.assertFalse(rnd.ambiguous)
                self.assertIsNone(rnd.antecedent)
                self.assertNotIn("it", rnd.question)

    def test_ambiguity_rate(self):
        config = self.config.replace(ambiguity_rate=0.5, skip_rate=0.0,
                                     num_rounds=10)
        flags = [rnd.ambiguous for episode in generate_dataset(1, 1000, config)
                 for rnd in episode.rounds]
        self.assertAlmostEqual(np.mean(flags), 0.5, delta=0.02)

    def test_round_invariants(self):
        config = self.config.replace(num_rounds=6)
        for episode in generate_dataset(2, 100, config):
            self.assertTrue(any(rnd.is_skip for rnd in episode.rounds))
            self.assertEqual(episode.features.shape,
                             (config.num_regions, config.d_v))
            for rnd in episode.rounds:
                self.assertEqual(len(rnd.candidates), config.num_candidates)
                self.assertEqual(rnd.relevances.count(1.0), 1)
                self.assertEqual(rnd.relevances[rnd.gt_index], 1.0)
                self.assertEqual(rnd.candidates[rnd.gt_index], rnd.answer)
                if rnd.ambiguous:
                    self.assertTrue(0 <= rnd.antecedent < rnd.index)
                    self.assertEqual(rnd.gt_region,
                                     episode.referent(rnd.antecedent))
                elif rnd.gt_region is not None:
                    category = episode.world.regions[rnd.gt_region].category
                    self.assertIn(category, rnd.question)

    def test_features_injective(self):
        basis = feature_basis(6, 40)
        self.assertEqual(basis.shape, (40, code_width(6)))
        a = Region("lamp", "red", "small", "on", ("top", "left"))
        b = Region("lamp", "red", "small", "off", ("top", "left"))
        self.assertFalse(np.allclose(basis @ a.code(6), basis @ b.code(6)))
        self.assertEqual(Region.fromdict(a.asdict()), a)

    def test_build_candidates(self):
        rng = Rng(0, "data")
        candidates, gt, relevances = build_candidates(rng, ["red"], 20, 4)
        self.assertEqual(candidates[gt], ["red"])
        self.assertGreaterEqual(relevances.count(0.5), 4)
        self.assertEqual(len({tuple(c) for c in candidates}), 20)
        candidates, _, _ = build_candidates(rng, ["yes"], len(ANSWER_POOL), 4)
        self.assertEqual(len(candidates), len(ANSWER_POOL))
        with self.assertRaises(ConfigError):
            build_candidates(rng, ["red"], len(ANSWER_POOL) + 1, 4)

    def test_candidate_lengths_match_answer(self):
        rng = Rng(1, "data")
        for answer in (["red"], ["top", "left"], ["small"]):
            candidates, _, _ = build_candidates(rng, answer, 10, 2)
            self.assertEqual({len(c) for c in candidates}, {len(answer)})
        candidates, _, relevances = build_candidates(rng, ["no"], 10, 2)
        self.assertEqual({len(c) for c, r in zip(candidates, relevances)
                          if r == 0.0}, {1})
        for episode in generate_dataset(4, 50, self.config):
            for rnd in episode.rounds:
                lengths = {len(c) for c, r in zip(rnd.candidates,
                                                  rnd.relevances) if r == 0}
                self.assertEqual(lengths, {len(rnd.answer)})

    def test_infeasible(self):
        for changes in ({"num_categories": 17}, {"num_topics": 5},
                        {"num_categories": 2}, {"d_v": 10},
                        {"num_candidates": len(ANSWER_POOL) + 1},
                        {"num_rounds": 1}):
            with self.assertRaises(ConfigError):
                generate_episode(0, self.config.replace(**changes))


class TestDataset(unittest.TestCase):
    """TestCase for dataset files"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "data.jsonl")

    def tearDown(self):
        self.tmp.cleanup()

    def test_round_trip(self):
        episodes = generate_dataset(7, 100, mini_dialog_config())
        dataset.save(self.path, episodes)
        loaded = dataset.load(self.path)
        self.assertEqual(dataset.dumps(loaded), dataset.dumps(episodes))
        for a, b in zip(episodes, loaded):
            assert_array_equal(a.features, b.features)
            self.assertEqual(a.world.regions, b.world.regions)
            self.assertEqual([r.is_skip for r in a.rounds],
                             [r.is_skip for r in b.rounds])

    def test_empty(self):
        dataset.save(self.path, [])
        self.assertEqual(dataset.load(self.path), [])

    def test_minimal_file(self):
        text = "\n".join(json.dumps(x) for x in MINIMAL) + "\n"
        episode, = dataset.loads(text)
        self.assertEqual(len(episode.world), 2)
        self.assertEqual(episode.features.shape, (2, 3))
        self.assertEqual(episode.world.topics, [1])
        rnd, = episode.rounds
        self.assertEqual(rnd.index, 1)
        self.assertEqual(rnd.answer, ["blue"])
        self.assertEqual(rnd.antecedent, 0)
        self.assertFalse(rnd.is_skip)
        self.assertEqual(episode.referent(0), 1)
        resolver = ScriptedResolver()
        self.assertEqual(resolver.resolve_region(episode, 1), 1)
        assert_array_equal(resolver.scores(episode, 1), [0, 1, 0])

    def test_errors(self):
        episodes = generate_dataset(0, 3, mini_dialog_config())
        lines = dataset.dumps(episodes).splitlines()
        with self.assertRaises(DatasetError) as cm:
            dataset.loads("\n".join(lines[:-1]))
        self.assertEqual(cm.exception.record, 2)
        broken = json.loads(lines[2])
        del broken["rounds"][0]["gt_index"]
        lines[2] = json.dumps(broken)
        with self.assertRaises(DatasetError) as cm:
            dataset.loads("\n".join(lines))
        self.assertEqual(cm.exception.record, 1)
        header = json.loads(lines[0])
        for key, value in (("version", 2), ("schema", "other")):
            changed = dict(header, **{key: value})
            with self.assertRaises(DatasetError):
                dataset.loads(json.dumps(changed))
        with self.assertRaises(DatasetError):
            dataset.loads("")
        with self.assertRaises(DatasetError):
            dataset.load(os.path.join(self.tmp.name, "missing.jsonl"))


class TestResolver(unittest.TestCase):
    """TestCase for the scripted solvability oracle"""

    def test_solves_everything(self):
        resolver = ScriptedResolver()
        for config in (mini_dialog_config(),
                       mini_dialog_config(num_rounds=10, ambiguity_rate=0.8)):
            episodes = generate_dataset(11, 200, config)
            self.assertEqual(resolver.region_accuracy(episodes), 1.0)
            records = []
            for episode in episodes:
                self.assertEqual(resolver.resolve_region(episode, 0),
                                 episode.caption_region)
                for rnd in episode.rounds:
                    self.assertEqual(resolver.answer(episode, rnd.index),
                                     rnd.answer)
                    scores = resolver.scores(episode, rnd.index)
                    records.append(EvalRecord(stable_ranking(scores),
                                              rnd.gt_index, rnd.relevances))
            self.assertEqual(mrr(records), 1.0)


TESTS = [TestGenerator, TestDataset, TestResolver]
