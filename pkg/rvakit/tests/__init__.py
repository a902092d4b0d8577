"rvakit testing module"

from .run_tests import run
