from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tutorlearn.agent import Agent, HintRequest
from tutorlearn.harness import default_agent_config
from tutorlearn.model import SignalSource, TrainingSignal
from tutorlearn.tutors import gen_problem


FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def drive_agent(domain: str, n_problems: int, seed: int = 0, use_extras: bool = True,
                agent: Agent | None = None) -> tuple[Agent, list[float]]:
    """Run the standard tutoring protocol; returns (agent, per-problem errors)."""
    agent = agent or Agent(default_agent_config(domain, seed))
    rng = random.Random(9000 + seed)
    errors = []
    for _ in range(n_problems):
        sess = gen_problem(domain, rng)
        wrong = steps = 0
        while not sess.complete:
            steps += 1
            tried = set()
            first = True
            while True:
                action = agent.act(sess.state)
                if isinstance(action, HintRequest) or action in tried:
                    if first:
                        wrong += 1
                    hint = sess.hint()
                    agent.train(TrainingSignal(
                        sess.state, hint.sai, 1.0,
                        foci=hint.foci or None if use_extras else None,
                        skill_label=hint.skill_label if use_extras else None,
                        source=SignalSource.DEMONSTRATION))
                    sess.apply(hint.sai, 1.0)
                    break
                reward = sess.grade(action)
                if first and reward < 0:
                    wrong += 1
                agent.train(TrainingSignal(sess.state, action, reward, source=SignalSource.FEEDBACK))
                if reward > 0:
                    sess.apply(action, reward)
                    break
                tried.add(action)
                first = False
        errors.append(wrong / steps)
    return agent, errors
