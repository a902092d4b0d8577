"""Convenience classes and functions for unit testing"""
import unittest
import sys
from ..config import default_config
from ..globals import Precision
from ..modules import RvAModel, Vocabulary
from ..synthetic import generate_dataset


def mini_config(**changes):
    "The tiny RunConfig of rvakit/env/mini.cfg, with overrides."
    return default_config("mini").replace(**changes)


def mini_dialog_config(**changes):
    "The DialogConfig of rvakit/env/dialog_mini.cfg, with overrides."
    return default_config("dialog_mini").replace(**changes)


def mini_episodes(count=4, seed=0, **changes):
    "A few mini-mode episodes."
    return generate_dataset(seed, count, mini_dialog_config(**changes))


def mini_model(episodes, **changes):
    "An untrained model fitted to episodes' vocabulary."
    config = mini_config(**changes)
    with Precision(config.precision):
        return RvAModel(config, Vocabulary.from_episodes(episodes))


def run_tests(tests, xmloutput=None, verbosity=2):
    """Default way to run tests, to be used in __main__.

    Arguments
    ---------
    tests: iterable of unittest.TestCase
    xmloutput: string or None
        if not None, generate xml output for continuous integration,
        with name given by the input string
    verbosity: int
        verbosity level for unittest.TextTestRunner
    """
    suite = unittest.TestSuite()
    loader = unittest.TestLoader()
    for t in tests:
        suite.addTests(loader.loadTestsFromTestCase(t))
    if xmloutput:
        import xmlrunner  # pylint: disable=import-error
        return xmlrunner.XMLTestRunner(output=xmloutput).run(suite)
    return unittest.TextTestRunner(verbosity=verbosity).run(suite)


class NullFile:
    "A fake file interface that does nothing"
    def write(self, string):
        "Do not write, do not pass go."

    def flush(self):
        "Nothing to flush."

    def close(self):
        "Having not written, cease."


class StdoutCaptured:
    "Sends everything that would have printed to stdout to a TrainLog"
    def __init__(self, log=None):
        self.log = log if log is not None else NullFile()
        self.original_stdout = None

    def __enter__(self):
        "Capture stdout"
        self.original_stdout = sys.stdout
        sys.stdout = self.log
        return self.log

    def __exit__(self, *args):
        "Return stdout"
        sys.stdout = self.original_stdout
