"Recursive visual attention for visual dialog, on a numpy autodiff core"
#pylint:disable=wrong-import-position
__version__ = "0.1.0"

from .globals import Precision
from .config import RunConfig, DialogConfig, load_config, default_config
from .tensor import Tensor, Graph, ParameterSet, Rng
from .modules import RvAModel, ForwardContext, Vocabulary
from .synthetic import generate_episode, generate_dataset, ScriptedResolver
from .metrics import EvalRecord, summarize
from .training import train, Checkpoint
from .evaluation import evaluate
from .tests.run_tests import run as run_unit_tests
