"""The tutored learning agent: skill induction plus where/when/which refinement.

Act() factors as a fixed pipeline: where-parts generate candidate bindings,
when-parts filter them, how-parts evaluate the survivors into concrete
actions, and which-utilities order the resulting conflict set.  Train()
attributes each signal to an explaining skill -- the producing application
for feedback, a known or newly induced how-part for demonstrations -- and
refines that skill's parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence, Union

from .functions import default_registry, registry_from_ids
from .how import (
    EmptySearch,
    eval_term_values,
    HowSearchConfig,
    bottom_out,
    consistent_compositions,
    eval_term,
    how_search,
    preference_key,
)
from .model import (
    ActionType,
    Binding,
    Const,
    FunctionTerm,
    InterfaceState,
    SAI,
    SignalSource,
    TrainingSignal,
    term_arity,
    term_key,
    term_to_wire,
)
from .tree import CategoricalDecisionTree
from .when import (
    RELATIVE,
    predict_with_confidence,
    AugmentedState,
    IMPLICIT_NEGATIVE,
    PREPROCESSORS,
    WhenExample,
    _arg_blocks,
    _element_features,
    _equality_features,
    equality_relations,
    fit_tree,
    predict_tree,
    relative_names,
    when_rules,
)
from .where import generalization_cost, init_where, literal_count, match_where


@dataclass(frozen=True)
class AgentConfig:
    where_variant: str = "AntiUnify"
    when_preprocessor: str = RELATIVE
    when_config: Mapping = field(default_factory=lambda: {"criterion": "info_gain", "min_samples": 2, "radius": 2})
    how_config: Mapping = field(default_factory=lambda: {"max_depth": 2})
    implicit_negatives: bool = True
    which_enabled: bool = True
    general_features: tuple[str, ...] = ("Equals",)
    functions: Optional[tuple[str, ...]] = None
    where_generalize_on_positive_feedback: bool = False
    mint_cost: float = 0.4  # LGG-conservatism: absorb below this ratio, mint above
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "when_config", dict(self.when_config))
        object.__setattr__(self, "how_config", dict(self.how_config))


@dataclass(frozen=True)
class HintRequest:
    """Returned by act() when the conflict set is empty."""


@dataclass(frozen=True)
class SkillApplication:
    skill_id: str
    binding: Binding
    sai: SAI
    utility: float


ConflictSet = list[SkillApplication]


@dataclass
class Skill:
    """An induced production rule.  Owned and mutated only by its agent."""

    id: str
    how_part: FunctionTerm
    action_type: ActionType
    where_part: object
    label: Optional[str] = None
    when_tree: Optional[CategoricalDecisionTree] = None
    when_examples: list = field(default_factory=list)
    which_positive: int = 0
    which_total: int = 0
    recent_rewards: list = field(default_factory=list)
    _dirty: bool = False
    _created: int = 0

    @property
    def arity(self) -> int:
        return term_arity(self.how_part)


def augment_state(
    state: InterfaceState, general_features: Sequence[str] = ("Equals",)
) -> Union[InterfaceState, AugmentedState]:
    """Attach domain-general derived relations (currently: value equality)."""
    unknown = set(general_features) - {"Equals"}
    if unknown:
        raise ValueError(f"unknown general features: {sorted(unknown)}")
    if "Equals" not in general_features:
        return state
    return AugmentedState(state, equality_relations(state))


def which_utility(skill: Skill) -> float:
    """Proportion of positive reward; 0.5 before any feedback."""
    if skill.which_total == 0:
        return 0.5
    return skill.which_positive / skill.which_total


def _ordering_utility(skill: Skill) -> float:
    """Laplace-smoothed recent success rate used for conflict ordering.

    A short window lets a skill whose when-part has matured shed its
    early-training record quickly, and one lucky outcome still cannot outrank
    thirty confirmations."""
    recent = skill.recent_rewards
    return (sum(recent) + 1) / (len(recent) + 2)


@dataclass
class _Candidate:
    skill_id: str
    binding: Binding
    features: Mapping[str, str]
    sai: Optional[SAI]
    accepted: bool
    confidence: float = 0.5


class Agent:
    """One tutorable learner session; train/act are not thread-safe."""

    def __init__(self, config: Optional[AgentConfig] = None):
        self.config = config or AgentConfig()
        if self.config.functions is not None:
            self.registry = registry_from_ids(self.config.functions)
        else:
            self.registry = default_registry()
        if self.config.when_preprocessor not in PREPROCESSORS:
            raise ValueError(f"unknown when preprocessor: {self.config.when_preprocessor!r}")
        self.skills: dict[str, Skill] = {}
        self._counter = 0
        self._label_demos: dict[str, list[tuple]] = {}
        self._sel_demos: dict[str, list[tuple]] = {}
        self._cache_key: Optional[str] = None
        self._cache: list[_Candidate] = []
        self._last_emitted: Optional[_Candidate] = None
        self._feat_cache: dict[tuple, tuple] = {}
        self._expl_cache: dict[tuple, dict] = {}

    # -- feature plumbing -----------------------------------------------------

    def _augment(self, state: InterfaceState):
        return augment_state(state, self.config.general_features)

    def _features(
        self, aug, binding: Binding, term: Optional[FunctionTerm] = None
    ) -> Mapping[str, str]:
        out = self._positional_features(aug, binding)
        if term is not None:
            raw = aug.state if isinstance(aug, AugmentedState) else aug
            values = eval_term_values(term, binding, raw, self.registry)
            if values is None:
                out["how.value"] = "UNDEF"
            else:
                out["how.value"] = values[0]
                for i, v in enumerate(values[1:], start=1):
                    out[f"how.step{i}"] = v
        return out

    def _positional_features(self, aug, binding: Binding) -> dict:
        if self.config.when_preprocessor != RELATIVE:
            return PREPROCESSORS[self.config.when_preprocessor](aug, binding)
        # Relative maps share everything but roles and arg blocks across the
        # bindings of one (state, selection); cache that base.
        raw = aug.state if isinstance(aug, AugmentedState) else aug
        equals = aug.equals if isinstance(aug, AugmentedState) else None
        radius = self.config.when_config.get("radius", 2)
        key = (raw.fingerprint(), binding.selection)
        cached = self._feat_cache.get(key)
        if cached is None:
            names, dists = relative_names(raw, binding.selection, radius)
            base: dict[str, str] = {}
            for el_id, name in names.items():
                _element_features(base, name, raw[el_id])
                base[f"{name}.role"] = "sel" if el_id == binding.selection else "none"
            if equals is not None:
                near = {i: n for i, n in names.items() if dists[i] <= 2}
                _equality_features(base, equals, near)
            if len(self._feat_cache) > 512:
                self._feat_cache.clear()
            self._feat_cache[key] = (names, base)
            cached = (names, base)
        names, base = cached
        out = dict(base)
        for arg_id in binding.args:
            name = names.get(arg_id)
            if name is not None:
                out[f"{name}.role"] = "arg"
        _arg_blocks(out, raw, binding, include_ids=False)
        return out

    def _tree(self, skill: Skill) -> Optional[CategoricalDecisionTree]:
        if skill._dirty:
            cfg = {
                "criterion": self.config.when_config.get("criterion", "info_gain"),
                "min_samples": self.config.when_config.get("min_samples", 2),
                "seed": self.config.seed,
            }
            skill.when_tree = fit_tree(skill.when_examples, cfg)
            skill._dirty = False
        return skill.when_tree

    def _how_search_config(self, foci) -> HowSearchConfig:
        return HowSearchConfig(
            max_depth=self.config.how_config.get("max_depth", 2),
            foci=tuple(foci) if foci else None,
        )

    # -- acting ---------------------------------------------------------------

    def _candidates(self, state: InterfaceState, aug) -> list[_Candidate]:
        key = state.fingerprint()
        if self._cache_key == key:
            return self._cache
        out: list[_Candidate] = []
        for sid in sorted(self.skills):
            skill = self.skills[sid]
            tree = self._tree(skill)
            for binding in match_where(skill.where_part, state):
                feats = self._features(aug, binding, skill.how_part)
                accepted, confidence = predict_with_confidence(tree, feats)
                # general-solution bias: one stray negative in a leaf does not
                # muzzle the region -- attempting elicits feedback, a hint
                # request teaches nothing
                if not accepted and confidence > 0.3:
                    accepted = True
                sai = eval_term(skill.how_part, binding, state, skill.action_type, self.registry)
                out.append(_Candidate(sid, binding, feats, sai, accepted, confidence))
        self._cache_key = key
        self._cache = out
        return out

    def last_skill_id(self) -> str:
        """Skill behind the most recent act() emission (for transcripts)."""
        return self._last_emitted.skill_id if self._last_emitted else ""

    def conflict_set(self, state: InterfaceState) -> ConflictSet:
        """Ranked candidate actions: where -> when -> evaluate -> which-order."""
        aug = self._augment(state)
        apps = []
        order = {}
        for c in self._candidates(state, aug):
            if not c.accepted or c.sai is None:
                continue
            skill = self.skills[c.skill_id]
            apps.append(
                SkillApplication(
                    c.skill_id,
                    c.binding,
                    c.sai,
                    which_utility(skill) if self.config.which_enabled else 0.5,
                )
            )
            util = _ordering_utility(skill) if self.config.which_enabled else 0.5
            # the reached when-leaf's purity separates two applications of
            # equally reliable skills: a premature one routes to a mixed leaf
            order[(c.skill_id, c.binding)] = (-util, -round(c.confidence, 3))
        apps.sort(
            key=lambda a: order[(a.skill_id, a.binding)]
            + (a.skill_id, a.binding.selection, a.binding.args)
        )
        return apps

    def act(self, state: InterfaceState) -> Union[SAI, HintRequest]:
        apps = self.conflict_set(state)
        if not apps:
            self._last_emitted = None
            return HintRequest()
        top = apps[0]
        self._last_emitted = _Candidate(
            top.skill_id,
            top.binding,
            next(c.features for c in self._cache if c.skill_id == top.skill_id and c.binding == top.binding),
            top.sai,
            True,
        )
        return top.sai

    # -- training -------------------------------------------------------------

    def train(self, signal: TrainingSignal) -> None:
        state = signal.state
        aug = self._augment(state)
        candidates = self._candidates(state, aug)

        if signal.source is SignalSource.FEEDBACK:
            resolved = self._attribute_feedback(signal, candidates)
            if resolved is None:
                return
            skill, binding, feats = resolved
            absorb = self.config.where_generalize_on_positive_feedback
            train_when = True
        else:
            skill, binding, absorb, train_when = self._explain_demo(state, aug, signal)
            feats = self._features(aug, binding, skill.how_part)
            if signal.skill_label is not None:
                self._label_demos.setdefault(signal.skill_label, []).append(
                    (state, signal.sai, signal.foci)
                )
            history = self._sel_demos.setdefault(signal.sai.selection, [])
            history.append((state, signal.sai, signal.foci))
            del history[:-6]

        positive = signal.reward > 0
        if signal.source is SignalSource.FEEDBACK:
            # which-stats track reward on the skill's own attempts (the spec's
            # "total-feedback count"); demonstration credits train the other
            # parts but say nothing about how the skill performs when it fires.
            skill.which_total += 1
            skill.which_positive += 1 if positive else 0
            skill.recent_rewards.append(1 if positive else 0)
            del skill.recent_rewards[:-12]
        if train_when:
            skill.when_examples.append(WhenExample(feats, positive))
            skill._dirty = True

        if absorb and positive:
            skill.where_part = skill.where_part.absorb(state, binding)

        if positive and self.config.implicit_negatives:
            # Competing skill applications -- when-accepted candidates at the
            # confirmed selection -- would have written something else into
            # this cell, so they receive implicit negatives.  Proposals at
            # other selections may be simultaneously correct (the carry cell
            # while the ones digit is confirmed, say) and are left to explicit
            # feedback; already-rejected candidates need no more rejecting,
            # which keeps the example stores self-limiting.
            for cand in candidates:
                if not cand.accepted or cand.binding.selection != signal.sai.selection:
                    continue
                if cand.skill_id == skill.id and cand.binding == binding:
                    continue
                if cand.sai is not None and cand.sai == signal.sai:
                    continue  # an agreeing application is not a competitor
                other = self.skills[cand.skill_id]
                other.when_examples.append(
                    WhenExample(cand.features, False, IMPLICIT_NEGATIVE)
                )
                other._dirty = True

        self._cache_key = None  # stored trees/wheres changed

    def _attribute_feedback(self, signal: TrainingSignal, candidates: list[_Candidate]):
        if (
            self._last_emitted is not None
            and self._last_emitted.sai == signal.sai
            and self._last_emitted.skill_id in self.skills
        ):
            c = self._last_emitted
            return self.skills[c.skill_id], c.binding, c.features
        matches = [c for c in candidates if c.sai == signal.sai]
        if matches:
            best = min(
                matches,
                key=lambda c: (
                    not c.accepted,
                    preference_key(self.skills[c.skill_id].how_part, c.binding),
                    -self.skills[c.skill_id]._created,
                ),
            )
            return self.skills[best.skill_id], best.binding, best.features
        return None  # feedback on an action no current skill accounts for

    # -- demonstration explanation -------------------------------------------

    def _label_compatible(self, skill: Skill, signal: TrainingSignal) -> bool:
        if signal.skill_label is None:
            return True
        return skill.label == signal.skill_label

    def _explain_demo(self, state: InterfaceState, aug, signal: TrainingSignal):
        """Attribute a demonstration to an explaining skill, minting if needed.

        Returns (skill, binding, may_absorb).  Where-parts only ever
        generalize through geometry-verified evidence: a where-matched credit
        (which absorbs nothing new) or the consistency path (whose per-demo
        bindings were chosen to preserve structure).  Search-found credits and
        single-demo mints never touch an established where-part -- one
        coincidental binding would permanently dissolve its load-bearing
        relations.
        """
        sai = signal.sai
        known_terms: dict[str, list[Skill]] = {}
        for sid in sorted(self.skills):
            skill = self.skills[sid]
            if skill.action_type is sai.action_type and self._label_compatible(skill, signal):
                known_terms.setdefault(term_key(skill.how_part), []).append(skill)

        # Consistency is the primary explainer: an explanation confirmed across
        # repeated demonstrations at this selection (or, with labels, across
        # the label's demos), grounded in recurring geometry, beats any
        # single-state coincidence.
        if signal.skill_label is None:
            consistent = self._mint_consistent(state, aug, signal, known_terms)
            if consistent is not None:
                return consistent

        where_matched: list[tuple[tuple, Skill, Binding]] = []
        for cand in self._candidates(state, aug):
            if cand.sai != sai:
                continue
            skill = self.skills[cand.skill_id]
            if not self._label_compatible(skill, signal):
                continue
            rank = (
                not cand.accepted,
                preference_key(skill.how_part, cand.binding),
                -skill._created,
            )
            where_matched.append((rank, skill, cand.binding))
        where_matched.sort(key=lambda o: o[0])
        if where_matched:
            _, skill, binding = where_matched[0]
            return skill, binding, True, True

        if signal.skill_label is not None:
            credited = self._credit_labeled(state, aug, signal, known_terms)
            if credited is not None:
                return credited
            refit = self._refit_labeled(state, signal)
            if refit is not None:
                skill, binding = refit
                return skill, binding, False, True

        searched = self._search_explanations(state, signal)
        for term, binding in searched:
            owners = known_terms.get(term_key(term))
            if owners:
                # weak credit: ambiguity dump -- neither where nor when learns
                return owners[-1], binding, False, False
            skill = self._mint_skill(term, sai.action_type, state, binding, signal.skill_label)
            return skill, binding, False, True

        term, binding = bottom_out(sai), Binding(sai.selection, ())
        skill = self._mint_skill(term, sai.action_type, state, binding, signal.skill_label)
        return skill, binding, False, True

    def _mint_consistent(self, state: InterfaceState, aug, signal: TrainingSignal, known_terms):
        """Prefer a composition consistent with recent demos at this selection.

        The interface is the grouping signal: on a static board, repeated
        demonstrations at one element are (almost always) the same skill, so
        their explanation intersection rapidly kills coincidental terms --
        the unlabeled analog of label-driven consistency search.  Among the
        surviving terms, the one whose per-demo bindings leave the most
        where-part structure intact wins: how-learning seeds where-learning,
        and honest explanations recur in the same geometry while coincidences
        scatter.
        """
        sai = signal.sai
        if sai.action_type is ActionType.PRESS_BUTTON:
            return None
        history = self._sel_demos.get(sai.selection, [])[-6:]
        current = (state, sai, signal.foci)
        current_groups = self._explanation_groups(current)
        if not current_groups or not history:
            return None
        history_groups = [self._explanation_groups(d) for d in history]

        screened = self._screen_terms(state, current_groups, history, history_groups)
        candidates = []
        for key, anchor in screened[:8]:
            term = current_groups[key][0][0]
            wp = init_where(state, anchor, self.config.where_variant)
            base = max(literal_count(wp), 1)
            chosen: list[tuple] = []  # (state, value, binding), newest first
            for i in reversed(range(len(history))):
                if len(chosen) >= 4:
                    break
                groups_i = history_groups[i]
                if key not in groups_i:
                    continue
                best = None
                for _, b in groups_i[key][:6]:
                    widened = wp.absorb(history[i][0], b)
                    count = literal_count(widened)
                    if best is None or count > best[0]:
                        best = (count, b, widened)
                if best is not None and best[0] / base >= 0.5:
                    wp = best[2]
                    chosen.append((history[i][0], history[i][1].value, best[1]))
            if not chosen:
                continue
            states = [c[0] for c in chosen[::-1]] + [state]
            values = [c[1] for c in chosen[::-1]] + [sai.value]
            if not self._decisive(wp, term, states, values, sai.selection):
                continue  # the widened where would also propose wrong values
            retention = literal_count(wp) / base
            candidates.append(
                (
                    (-len(chosen), -retention, preference_key(term, anchor)),
                    key,
                    term,
                    anchor,
                    wp,
                    chosen,
                    states,
                    values,
                )
            )
        if not candidates:
            return None
        candidates.sort(key=lambda c: c[0])
        _, key, term, anchor, wp, chosen, states, values = candidates[0]

        owners = known_terms.get(key, [])
        best_owner = None
        for owner in owners:
            costed = sorted(
                ((generalization_cost(owner.where_part, state, b), b.args, b)
                 for _, b in current_groups[key][:8]),
                key=lambda t: (t[0], t[1]),
            )
            absorb_cost, _, owner_binding = costed[0]
            if best_owner is None or absorb_cost < best_owner[0]:
                best_owner = (absorb_cost, owner, owner_binding)
        if best_owner is not None:
            absorb_cost, owner, owner_binding = best_owner
            if absorb_cost == 0.0:
                return owner, owner_binding, True, True  # already admitted; no risk
            widened = (
                owner.where_part.absorb(state, owner_binding)
                if owner.where_part.variant == "AntiUnify"
                else owner.where_part
            )
            # Cheap absorption generalizes the owner -- but never at the price
            # of relational structure an established where-part has already
            # confirmed, and only while the widened part still retrodicts the
            # evidence decisively.
            structural_damage = (
                owner.where_part.variant == "AntiUnify"
                and owner.where_part.examples >= 3
                and widened.relational_count() < owner.where_part.relational_count()
            )
            if absorb_cost <= self.config.mint_cost and not structural_damage:
                if self._decisive(widened, term, states, values, sai.selection):
                    return owner, owner_binding, True, True
                return owner, owner_binding, False, True  # ambiguous: evidence only
            if len(owners) >= 3:
                return owner, owner_binding, False, False  # enough hypotheses already
            # Structurally different use of a known composition: give it its
            # own where hypothesis rather than dissolving the owner's.

        skill = self._mint_skill(term, sai.action_type, state, anchor, None)
        skill.where_part = wp
        for past_state, _, past_binding in chosen:
            past_aug = augment_state(past_state, self.config.general_features)
            skill.when_examples.append(
                WhenExample(self._features(past_aug, past_binding, term), True)
            )
        skill._dirty = bool(skill.when_examples)
        return skill, anchor, False, True

    def _credit_labeled(self, state: InterfaceState, aug, signal: TrainingSignal, known_terms):
        """A label names the skill outright: if a holder's how-part explains
        the demo, credit it (absorbing conservatively); the label carries the
        grouping evidence that consistency search supplies when unlabeled."""
        if signal.sai.action_type is ActionType.PRESS_BUTTON:
            return None
        groups = self._explanation_groups((state, signal.sai, signal.foci))
        holders = [s for s in self.skills.values() if s.label == signal.skill_label]
        best = None
        for holder in sorted(holders, key=lambda s: -s._created):
            key = term_key(holder.how_part)
            if key not in groups:
                continue
            costed = sorted(
                ((generalization_cost(holder.where_part, state, b), b.args, b)
                 for _, b in groups[key][:8]),
                key=lambda t: (t[0], t[1]),
            )
            cost, _, binding = costed[0]
            if best is None or cost < best[0]:
                best = (cost, holder, binding)
        if best is None:
            return None
        cost, holder, binding = best
        widened = (
            holder.where_part.absorb(state, binding)
            if holder.where_part.variant == "AntiUnify"
            else holder.where_part
        )
        structural_damage = (
            holder.where_part.variant == "AntiUnify"
            and holder.where_part.examples >= 3
            and widened.relational_count() < holder.where_part.relational_count()
        )
        absorb = cost <= self.config.mint_cost and not structural_damage
        return holder, binding, absorb, True

    def _screen_terms(self, state, current_groups, history, history_groups):
        """Rank (term, anchor) pairs by how often the anchor's exact argument
        tuple recurs among past explanations of the same term at this
        selection.  Honest explanations keep grounding in the same cells;
        value coincidences drift."""
        screened = []
        for key, explanations in current_groups.items():
            best = None
            for _, anchor in explanations[:6]:
                exact = sum(
                    1
                    for g in history_groups
                    if key in g and any(b.args == anchor.args for _, b in g[key])
                )
                if best is None or exact > best[0]:
                    best = (exact, anchor)
            if best is None or best[0] == 0:
                continue
            term = explanations[0][0]
            if len(best[1].args) >= 3 and best[0] < 2:
                continue  # wide arity + single recurrence: too coincidence-prone
            screened.append((-best[0], preference_key(term, best[1]), key, best[1]))
        screened.sort(key=lambda s: s[:2])
        return [(key, anchor) for _, _, key, anchor in screened]

    def _explanation_groups(self, demo: tuple) -> dict:
        """Cached how-search output for a demo, grouped by term key."""
        state, sai, foci = demo
        cache_key = (state.fingerprint(), sai, foci)
        cached = self._expl_cache.get(cache_key)
        if cached is not None:
            return cached
        cfg = HowSearchConfig(
            max_depth=self.config.how_config.get("max_depth", 2),
            foci=tuple(foci) if foci else None,
        )
        groups: dict[str, list] = {}
        try:
            for term, binding in how_search(state, sai, cfg, self.registry):
                groups.setdefault(term_key(term), []).append((term, binding))
        except EmptySearch:
            pass
        if len(self._expl_cache) > 256:
            self._expl_cache.clear()
        self._expl_cache[cache_key] = groups
        return groups

    def _decisive(self, wp, term, states, values, selection) -> bool:
        """The rebuilt where-part must retrodict its demos nearly uniquely:
        coincidental terms propose many bindings with wrong values."""
        right = wrong = 0
        for state_i, value_i in zip(states, values):
            for b in wp.match(state_i):
                if b.selection != selection:
                    continue
                out = eval_term(term, b, state_i, ActionType.UPDATE_TEXT_FIELD, self.registry)
                if out is not None and out.value == value_i:
                    right += 1
                else:
                    wrong += 1
        return right > 0 and wrong <= right / 3

    def _retained_where(self, states, bindings_per_demo):
        """Greedily pick per-demo bindings that preserve the most literals."""
        wp = None
        chosen: list[Binding] = []
        for state_i, options in zip(states, bindings_per_demo):
            if wp is None:
                best = options[0]
                wp = init_where(state_i, best, self.config.where_variant)
            else:
                best = None
                best_wp = None
                best_count = -1
                for b in options[:8]:
                    candidate = wp.absorb(state_i, b)
                    count = literal_count(candidate)
                    if count > best_count:
                        best, best_wp, best_count = b, candidate, count
                wp = best_wp
            chosen.append(best)
        return wp, chosen

    def _search_explanations(self, state: InterfaceState, signal: TrainingSignal):
        """Preference-ordered how-search output; constants for unexplainables."""
        sai = signal.sai
        if sai.action_type is ActionType.PRESS_BUTTON:
            return [(bottom_out(sai), Binding(sai.selection, ()))]
        try:
            return how_search(state, sai, self._how_search_config(signal.foci), self.registry)
        except EmptySearch:
            return [(bottom_out(sai), Binding(sai.selection, ()))]

    def _refit_labeled(self, state: InterfaceState, signal: TrainingSignal):
        """Re-search a composition consistent with every demo stored for this label."""
        label = signal.skill_label
        stored = self._label_demos.get(label, [])
        holders = [s for s in self.skills.values() if s.label == label]
        if not stored or not holders:
            return None
        demos = [(st, sa, fo) for st, sa, fo in stored] + [(state, signal.sai, signal.foci)]
        if any(sa.action_type is ActionType.PRESS_BUTTON for _, sa, _ in demos):
            return None
        try:
            consistent = consistent_compositions(
                demos, HowSearchConfig(max_depth=self.config.how_config.get("max_depth", 2)), self.registry
            )
        except EmptySearch:
            return None
        choice = consistent[0]
        skill = max(holders, key=lambda s: s._created)
        skill.how_part = choice.term
        bindings = [per_demo[0] for per_demo in choice.bindings_per_demo]
        states = [d[0] for d in demos]
        skill.where_part = init_where(states[0], bindings[0], self.config.where_variant)
        for st, b in zip(states[1:], bindings[1:]):
            skill.where_part = skill.where_part.absorb(st, b)
        # when-examples for the old how-part grounded different bindings; rebuild
        # from the stored positive demonstrations.
        skill.when_examples = [
            WhenExample(
                self._features(augment_state(st, self.config.general_features), b, skill.how_part),
                True,
            )
            for st, b in zip(states[:-1], bindings[:-1])
        ]
        skill._dirty = bool(skill.when_examples)
        skill.when_tree = None
        return skill, bindings[-1]

    def _mint_skill(
        self,
        term: FunctionTerm,
        action_type: ActionType,
        state: InterfaceState,
        binding: Binding,
        label: Optional[str],
    ) -> Skill:
        self._counter += 1
        skill = Skill(
            id=f"s{self._counter:03d}",
            how_part=term,
            action_type=action_type,
            where_part=init_where(state, binding, self.config.where_variant),
            label=label,
            _created=self._counter,
        )
        self.skills[skill.id] = skill
        return skill

    # -- introspection ---------------------------------------------------------

    def pipeline_trace(self, state: InterfaceState) -> dict:
        """Stage-by-stage act() outputs, for verifying the decomposed policy form."""
        aug = self._augment(state)
        self._cache_key = None
        candidates = self._candidates(state, aug)
        return {
            "where": {
                sid: [c.binding for c in candidates if c.skill_id == sid]
                for sid in sorted(self.skills)
            },
            "when": [(c.skill_id, c.binding) for c in candidates if c.accepted],
            "how": [
                (c.skill_id, c.binding, c.sai)
                for c in candidates
                if c.accepted and c.sai is not None
            ],
            "conflict_set": self.conflict_set(state),
        }

    def export_skills(self) -> list[dict]:
        out = []
        for sid in sorted(self.skills):
            skill = self.skills[sid]
            tree = self._tree(skill) if skill.when_examples else None
            out.append(
                {
                    "id": skill.id,
                    "label": skill.label,
                    "action_type": skill.action_type.value,
                    "how": {"term": term_to_wire(skill.how_part), "pretty": repr(skill.how_part)},
                    "where": skill.where_part.to_wire(),
                    "when": {"rules": when_rules(tree)},
                    "which": {
                        "positive": skill.which_positive,
                        "total": skill.which_total,
                        "utility": which_utility(skill),
                    },
                }
            )
        return out
