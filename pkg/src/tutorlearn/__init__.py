"""Tutored skill-induction agents, simulated tutors, and their experiment harness."""

from .agent import Agent, AgentConfig, ConflictSet, HintRequest, Skill, SkillApplication, augment_state, which_utility
from .functions import FunctionSpec, default_registry, registry_from_ids
from .how import (
    ConsistentComposition,
    EmptySearch,
    HowSearchConfig,
    bottom_out,
    consistent_compositions,
    eval_term,
    how_search,
    reachable_values,
)
from .model import (
    ActionType,
    Apply,
    Binding,
    Const,
    ElementState,
    Explanation,
    FunctionTerm,
    InterfaceState,
    MalformedState,
    SAI,
    SignalSource,
    TrainingSignal,
    Var,
    WidgetType,
    decode_state,
    encode_state,
    press_button,
    update_field,
)
from .tree import CategoricalDecisionTree
from .when import (
    AugmentedState,
    FeatureMap,
    WhenExample,
    equality_relations,
    fit_tree,
    predict_tree,
    preprocess_append,
    preprocess_relative,
)
from .where import WherePart, generalize_where, init_where, match_where

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "AgentConfig",
    "ActionType",
    "Apply",
    "AugmentedState",
    "Binding",
    "CategoricalDecisionTree",
    "ConflictSet",
    "Const",
    "ConsistentComposition",
    "ElementState",
    "EmptySearch",
    "Explanation",
    "FeatureMap",
    "FunctionSpec",
    "FunctionTerm",
    "HintRequest",
    "HowSearchConfig",
    "InterfaceState",
    "MalformedState",
    "SAI",
    "SignalSource",
    "Skill",
    "SkillApplication",
    "TrainingSignal",
    "Var",
    "WhenExample",
    "WherePart",
    "WidgetType",
    "augment_state",
    "bottom_out",
    "consistent_compositions",
    "decode_state",
    "default_registry",
    "encode_state",
    "eval_term",
    "equality_relations",
    "fit_tree",
    "generalize_where",
    "how_search",
    "init_where",
    "match_where",
    "predict_tree",
    "preprocess_append",
    "preprocess_relative",
    "press_button",
    "reachable_values",
    "registry_from_ids",
    "update_field",
    "which_utility",
]
