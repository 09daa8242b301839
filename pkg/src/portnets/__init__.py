"""Labeled portnets: asynchronous interface models, mirrors and their verification."""

from .foundation import Bag, LabeledNet, NetSystem, fire, enabled, structure, isomorphic
from .portnet import (
    Direction,
    LabeledPortnet,
    OpenNet,
    closure,
    compose,
    direction,
    skeleton,
    validate_portnet,
)
from .mirror import MirrorMap, derive_full_mirror, derive_partial_mirror, validate_partial_mirror
from .wellformed import well_formed
from .verify import ExplorationCaps, check_weak_termination, explore, find_deadlocks
from .patterns import build_pmpp, build_sync_pattern, refine_place
from .specdsl import emit_dsl, lower, parse

__all__ = [
    "Bag", "LabeledNet", "NetSystem", "fire", "enabled", "structure", "isomorphic",
    "Direction", "LabeledPortnet", "OpenNet", "closure", "compose", "direction", "skeleton",
    "validate_portnet", "MirrorMap", "derive_full_mirror", "derive_partial_mirror",
    "validate_partial_mirror", "well_formed", "ExplorationCaps", "check_weak_termination",
    "explore", "find_deadlocks", "build_pmpp", "build_sync_pattern", "refine_place",
    "emit_dsl", "lower", "parse",
]
