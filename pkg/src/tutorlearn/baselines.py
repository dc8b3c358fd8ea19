"""Comparison models: state-action decision-tree responders and the
single-mechanism-LHS agent.

The state-action responders frame each step as multiclass prediction over the
full SAI table from a one-hot encoded state and are refit once per problem;
per the shared protocol they attempt once and are then handed the correct
action.  The single-LHS agent keeps how-learning but replaces the
where/when decomposition with one decision tree per skill that picks a best
binding (or NoBinding) from absolute state features.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse
from sklearn.tree import DecisionTreeClassifier

warnings.filterwarnings(
    "ignore", message="The number of unique classes is greater than 50%"
)

from .agent import Agent, AgentConfig, HintRequest
from .how import EmptySearch, bottom_out, eval_term, how_search, HowSearchConfig, preference_key
from .functions import default_registry
from .model import (
    ActionType,
    Binding,
    InterfaceState,
    SAI,
    SignalSource,
    TrainingSignal,
    press_button,
    term_key,
    update_field,
)
from .tree import CategoricalDecisionTree
from .tutors import FRACTIONS, MC_ADDITION, gen_problem
from .when import preprocess_append, WhenExample
from .where import match_where


def _domain_layout(domain: str):
    session = gen_problem(domain, random.Random(0))
    state = session.state
    element_ids = sorted(state.ids())
    editable = [el.id for el in state if not el.locked and el.widget_type.value == "TextField"]
    buttons = [el.id for el in state if el.widget_type.value == "Button"]
    return element_ids, sorted(editable), sorted(buttons)


def _value_vocab(domain: str) -> list[str]:
    if domain == MC_ADDITION:
        return [""] + [str(d) for d in range(10)]
    if domain == FRACTIONS:
        return ["", "x", "no", "+", "*"] + [str(v) for v in range(1, 451)]
    raise ValueError(f"unknown domain: {domain!r}")


class OneHotCodec:
    """Fixed-layout binary encoding of a state plus the enumerated SAI table."""

    def __init__(self, domain: str):
        self.domain = domain
        self.element_ids, editable, buttons = _domain_layout(domain)
        self.vocab = _value_vocab(domain)
        self._vocab_index = {v: i for i, v in enumerate(self.vocab)}
        self.group = len(self.vocab) + 1  # symbol one-hot + locked bit
        self.n_features = len(self.element_ids) * self.group

        inputs = [str(d) for d in range(10)] if domain == MC_ADDITION else [str(v) for v in range(1, 451)]
        actions: list[SAI] = []
        for el_id in editable:
            if el_id == "check_convert":
                actions.extend([update_field(el_id, "x"), update_field(el_id, "no")])
                continue
            actions.extend(update_field(el_id, v) for v in inputs)
        actions.extend(press_button(b) for b in buttons)
        self.actions = actions
        self._action_index = {a: i for i, a in enumerate(actions)}

    def encode(self, state: InterfaceState) -> np.ndarray:
        vec = np.zeros(self.n_features, dtype=np.uint8)
        for i, el_id in enumerate(self.element_ids):
            el = state[el_id]
            base = i * self.group
            vec[base + self._vocab_index.get(el.value, 0)] = 1
            if el.locked:
                vec[base + self.group - 1] = 1
        return vec

    def action_id(self, sai: SAI) -> Optional[int]:
        return self._action_index.get(sai)

    def action(self, idx: int) -> SAI:
        return self.actions[idx]


class SingleDTResponder:
    """One multiclass tree from one-hot states to the full SAI table."""

    def __init__(self, domain: str, seed: int = 0):
        self.codec = OneHotCodec(domain)
        self.seed = seed
        self._rows: list[np.ndarray] = []
        self._labels: list[int] = []
        self._tree: Optional[DecisionTreeClassifier] = None

    def step(self, state: InterfaceState) -> SAI:
        if self._tree is None:
            return self.codec.action(0)  # untrained: arbitrary but deterministic
        x = sparse.csr_matrix(self.codec.encode(state)[None, :])
        return self.codec.action(int(self._tree.predict(x)[0]))

    def learn(self, state: InterfaceState, correct: SAI) -> None:
        idx = self.codec.action_id(correct)
        if idx is None:
            return
        self._rows.append(self.codec.encode(state))
        self._labels.append(idx)

    def end_problem(self) -> None:
        if not self._rows:
            return
        x = sparse.csr_matrix(np.stack(self._rows))
        self._tree = DecisionTreeClassifier(random_state=self.seed)
        self._tree.fit(x, np.asarray(self._labels))


class DoubleDTResponder:
    """Separate trees for the selection and for the (action-type, input) token."""

    def __init__(self, domain: str, seed: int = 0):
        self.codec = OneHotCodec(domain)
        self.seed = seed
        self.selections = sorted({a.selection for a in self.codec.actions})
        self.tokens = sorted({self._token(a) for a in self.codec.actions})
        self._sel_index = {s: i for i, s in enumerate(self.selections)}
        self._tok_index = {t: i for i, t in enumerate(self.tokens)}
        self._rows: list[np.ndarray] = []
        self._sel_labels: list[int] = []
        self._tok_labels: list[int] = []
        self._sel_tree: Optional[DecisionTreeClassifier] = None
        self._tok_tree: Optional[DecisionTreeClassifier] = None

    @staticmethod
    def _token(sai: SAI) -> str:
        return f"{sai.action_type.value}|{sai.value}"

    def step(self, state: InterfaceState) -> Optional[SAI]:
        if self._sel_tree is None:
            return self.codec.action(0)
        x = sparse.csr_matrix(self.codec.encode(state)[None, :])
        selection = self.selections[int(self._sel_tree.predict(x)[0])]
        token = self.tokens[int(self._tok_tree.predict(x)[0])]
        action_type, _, value = token.partition("|")
        try:
            if action_type == ActionType.PRESS_BUTTON.value:
                return press_button(selection)
            return update_field(selection, value)
        except ValueError:
            return None  # independently predicted parts can clash

    def learn(self, state: InterfaceState, correct: SAI) -> None:
        self._rows.append(self.codec.encode(state))
        self._sel_labels.append(self._sel_index[correct.selection])
        self._tok_labels.append(self._tok_index[self._token(correct)])

    def end_problem(self) -> None:
        if not self._rows:
            return
        x = sparse.csr_matrix(np.stack(self._rows))
        self._sel_tree = DecisionTreeClassifier(random_state=self.seed)
        self._sel_tree.fit(x, np.asarray(self._sel_labels))
        self._tok_tree = DecisionTreeClassifier(random_state=self.seed)
        self._tok_tree.fit(x, np.asarray(self._tok_labels))


NO_BINDING = "NoBinding"


@dataclass
class _LHSSkill:
    id: str
    how_part: object
    action_type: ActionType
    examples: list  # WhenExample with multiclass labels (binding token)
    tree: Optional[CategoricalDecisionTree] = None
    dirty: bool = False
    bindings: dict = None  # token -> Binding
    positive: int = 0
    total: int = 0


class SingleLHSAgent:
    """How-learning plus one per-skill multiclass binding tree (no where/when).

    Classes are the bindings observed so far plus NoBinding; features are the
    absolute-id-keyed state (AppendBinding style, without the binding blocks,
    since the binding is the prediction target).
    """

    def __init__(self, domain: str, seed: int = 0):
        self.domain = domain
        self.seed = seed
        self.registry = default_registry()
        self.skills: dict[str, _LHSSkill] = {}
        self._counter = 0
        self._last: Optional[tuple[str, Binding]] = None
        self._search_cache: dict[tuple, list] = {}

    # -- features --------------------------------------------------------------

    @staticmethod
    def _features(state: InterfaceState) -> dict:
        out: dict[str, str] = {}
        for el in sorted(state, key=lambda e: e.id):
            out[f"{el.id}.value"] = el.value
            out[f"{el.id}.locked"] = "T" if el.locked else "F"
            out[f"{el.id}.empty"] = "T" if el.value == "" else "F"
        return out

    @staticmethod
    def _token(binding: Binding) -> str:
        return "|".join(binding.all_ids())

    def _tree_for(self, skill: _LHSSkill) -> Optional[CategoricalDecisionTree]:
        if skill.dirty:
            tree = CategoricalDecisionTree(min_samples=2, seed=self.seed)
            tree.fit(
                [e.features for e in skill.examples],
                [e.label for e in skill.examples],
                sort_keys=[e.sort_key for e in skill.examples],
            )
            skill.tree = tree
            skill.dirty = False
        return skill.tree

    # -- protocol ---------------------------------------------------------------

    def act(self, state: InterfaceState):
        feats = self._features(state)
        proposals = []
        for sid in sorted(self.skills):
            skill = self.skills[sid]
            tree = self._tree_for(skill)
            if tree is None:
                continue
            token = tree.predict_one(feats)
            if token == NO_BINDING:
                continue
            binding = skill.bindings.get(token)
            if binding is None or any(i not in state for i in binding.all_ids()):
                continue
            sel = state[binding.selection]
            if sel.locked:
                continue
            sai = eval_term(skill.how_part, binding, state, skill.action_type, self.registry)
            if sai is None:
                continue
            utility = (skill.positive + 1) / (skill.total + 2)
            proposals.append((-utility, sid, binding.selection, binding.args, sai, binding))
        if not proposals:
            self._last = None
            return HintRequest()
        proposals.sort(key=lambda p: p[:4])
        _, sid, _, _, sai, binding = proposals[0]
        self._last = (sid, binding)
        return sai

    def train(self, signal: TrainingSignal) -> None:
        feats = self._features(signal.state)
        if signal.source is SignalSource.FEEDBACK:
            if self._last is None:
                return
            sid, binding = self._last
            skill = self.skills[sid]
            skill.total += 1
            skill.positive += 1 if signal.reward > 0 else 0
            label = self._token(binding) if signal.reward > 0 else NO_BINDING
            skill.examples.append(WhenExample(feats, label))
            skill.dirty = True
            return
        skill, binding = self._explain(signal)
        token = self._token(binding)
        skill.bindings.setdefault(token, binding)
        skill.examples.append(WhenExample(feats, token))
        skill.dirty = True

    def _explain(self, signal: TrainingSignal):
        sai = signal.sai
        if sai.action_type is ActionType.PRESS_BUTTON:
            explanations = [(bottom_out(sai), Binding(sai.selection, ()))]
        else:
            key = (signal.state.fingerprint(), sai)
            explanations = self._search_cache.get(key)
            if explanations is None:
                try:
                    explanations = how_search(
                        signal.state, sai, HowSearchConfig(max_depth=2), self.registry
                    )
                except EmptySearch:
                    explanations = [(bottom_out(sai), Binding(sai.selection, ()))]
                if len(self._search_cache) > 128:
                    self._search_cache.clear()
                self._search_cache[key] = explanations
        known = {term_key(s.how_part): s for s in self.skills.values()
                 if s.action_type is sai.action_type}
        for term, binding in explanations:
            skill = known.get(term_key(term))
            if skill is not None:
                return skill, binding
        term, binding = explanations[0]
        self._counter += 1
        skill = _LHSSkill(
            id=f"L{self._counter:03d}",
            how_part=term,
            action_type=sai.action_type,
            examples=[],
            bindings={},
        )
        self.skills[skill.id] = skill
        return skill, binding

    def last_skill_id(self) -> str:
        return self._last[0] if self._last else ""

    def export_skills(self) -> list:
        return [
            {
                "id": s.id,
                "how": repr(s.how_part),
                "action_type": s.action_type.value,
                "bindings": sorted(s.bindings),
                "n_examples": len(s.examples),
            }
            for s in self.skills.values()
        ]
