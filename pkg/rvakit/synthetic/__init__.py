"Synthetic co-reference dialogs"
from .world import Region, World, generate_world, feature_basis
from .generator import (Episode, DialogRound, generate_episode,
                        generate_dataset, build_candidates, ANSWER_POOL)
from .resolver import ScriptedResolver
from . import dataset
