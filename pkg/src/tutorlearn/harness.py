"""Experiment runner: tutoring protocols, error curves, smoothing, mastery.

A step's error is decided by the agent's first response (hint request or
incorrect attempt); per-problem error rates are averaged per agent and then
across agents.  State-skill agents retry after negative feedback and fall
back to a requested demonstration; state-action baselines get one attempt and
an automatic demonstration.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional, Sequence

from scipy.ndimage import gaussian_filter1d

from .agent import Agent, AgentConfig, HintRequest
from .model import SAI, SignalSource, TrainingSignal
from .tutors import gen_problem, problem_to_dict, session_for

AGENT_KINDS = ("dipl", "single-lhs", "dt-single", "dt-double")
STATE_ACTION_KINDS = ("dt-single", "dt-double")
WORKERS_ENV = "TUTORLEARN_WORKERS"


@dataclass(frozen=True)
class RunConfig:
    domain: str
    agent: str = "dipl"
    n_agents: int = 20
    max_problems: int = 25
    seed: int = 0
    stop_error: Optional[float] = None  # early stop when trailing error falls below
    out_dir: Optional[str] = None
    problems_file: Optional[str] = None
    workers: Optional[int] = None
    use_foci: bool = True   # tutor hints carry foci for the skill-induction agent
    use_labels: bool = True  # and knowledge-component labels
    agent_config: Optional[dict] = None

    def __post_init__(self):
        if self.agent not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind: {self.agent!r}")


@dataclass(frozen=True)
class SmoothingSpec:
    """Piecewise Gaussian sigma by 1-indexed problem interval."""

    intervals: tuple = (((1, 10), 0.0), ((11, 100), 2.0), ((101, None), 10.0))


@dataclass
class StepRecord:
    agent: int
    problem: int
    step: int
    kind: str  # attempt-correct | attempt-incorrect | hint
    kc: str
    skill: str
    selection: str
    value: str


@dataclass
class RunResult:
    config: RunConfig
    records: list  # list[StepRecord]
    errors: list  # per agent: list of per-problem error rates
    skills: list  # per agent: exported skill JSON

    def curve(self) -> list[float]:
        n = max(len(e) for e in self.errors)
        out = []
        for p in range(n):
            vals = [e[p] for e in self.errors if len(e) > p]
            out.append(sum(vals) / len(vals))
        return out


def default_agent_config(domain: str, seed: int) -> AgentConfig:
    return AgentConfig(
        when_config={"criterion": "info_gain", "min_samples": 2, "radius": 4},
        mint_cost=0.45,
        seed=seed,
    )


def _make_learner(config: RunConfig, agent_seed: int):
    if config.agent == "dipl":
        overrides = dict(config.agent_config or {})
        if overrides:
            base = default_agent_config(config.domain, agent_seed)
            params = {**base.__dict__, **overrides, "seed": agent_seed}
            params.pop("when_config_frozen", None)
            return Agent(AgentConfig(**params))
        return Agent(default_agent_config(config.domain, agent_seed))
    from . import baselines

    if config.agent == "single-lhs":
        return baselines.SingleLHSAgent(config.domain, seed=agent_seed)
    if config.agent == "dt-single":
        return baselines.SingleDTResponder(config.domain, seed=agent_seed)
    return baselines.DoubleDTResponder(config.domain, seed=agent_seed)


def _problem_stream(config: RunConfig, rng: random.Random):
    if config.problems_file:
        from .tutors import load_problems

        problems = load_problems(config.problems_file)
        for spec in problems[: config.max_problems]:
            yield session_for(spec)
        return
    for _ in range(config.max_problems):
        yield gen_problem(config.domain, rng)


def _run_state_skill_agent(config: RunConfig, idx: int):
    agent_seed = config.seed * 10_000 + idx
    agent = _make_learner(config, agent_seed)
    rng = random.Random(agent_seed)
    records: list[StepRecord] = []
    errors: list[float] = []
    for p_idx, sess in enumerate(_problem_stream(config, rng)):
        step_errors = 0
        step_idx = 0
        while not sess.complete:
            step_idx += 1
            tried: set[SAI] = set()
            first = True
            while True:
                action = agent.act(sess.state)
                if isinstance(action, HintRequest) or action in tried:
                    hint = sess.hint()
                    if first:
                        step_errors += 1
                        records.append(
                            StepRecord(idx, p_idx + 1, step_idx, "hint", hint.skill_label,
                                       "", hint.sai.selection, hint.sai.value)
                        )
                    agent.train(
                        TrainingSignal(
                            sess.state,
                            hint.sai,
                            1.0,
                            foci=hint.foci or None if config.use_foci else None,
                            skill_label=hint.skill_label if config.use_labels else None,
                            source=SignalSource.DEMONSTRATION,
                        )
                    )
                    sess.apply(hint.sai, 1.0)
                    break
                reward = sess.grade(action)
                if first:
                    kind = "attempt-correct" if reward > 0 else "attempt-incorrect"
                    if reward < 0:
                        step_errors += 1
                    kc = sess.kc_of(action) or ""
                    skill_id = getattr(agent, "last_skill_id", lambda: "")()
                    records.append(
                        StepRecord(idx, p_idx + 1, step_idx, kind, kc, skill_id,
                                   action.selection, action.value)
                    )
                agent.train(TrainingSignal(sess.state, action, reward, source=SignalSource.FEEDBACK))
                if reward > 0:
                    sess.apply(action, reward)
                    break
                tried.add(action)
                first = False
        errors.append(step_errors / max(step_idx, 1))
        if config.stop_error is not None and len(errors) >= 5:
            if sum(errors[-5:]) / 5 < config.stop_error:
                break
    skills = agent.export_skills() if hasattr(agent, "export_skills") else []
    return records, errors, skills


def _run_state_action_model(config: RunConfig, idx: int):
    agent_seed = config.seed * 10_000 + idx
    model = _make_learner(config, agent_seed)
    rng = random.Random(agent_seed)
    records: list[StepRecord] = []
    errors: list[float] = []
    for p_idx, sess in enumerate(_problem_stream(config, rng)):
        step_errors = 0
        step_idx = 0
        while not sess.complete:
            step_idx += 1
            action = model.step(sess.state)
            reward = sess.grade(action) if action is not None else -1.0
            correct = sess.correct_actions()[0] if reward <= 0 else action
            kind = "attempt-correct" if reward > 0 else "attempt-incorrect"
            if reward <= 0:
                step_errors += 1
            records.append(
                StepRecord(idx, p_idx + 1, step_idx, kind, sess.kc_of(correct) or "", "",
                           (action or correct).selection, (action or correct).value)
            )
            # one attempt, then the correct next action is provided automatically
            model.learn(sess.state, correct)
            sess.apply(correct, 1.0)
        model.end_problem()
        errors.append(step_errors / max(step_idx, 1))
        if config.stop_error is not None and len(errors) >= 5:
            if sum(errors[-5:]) / 5 < config.stop_error:
                break
    return records, errors, []


def _run_one(args) -> tuple:
    config, idx = args
    if config.agent in STATE_ACTION_KINDS:
        return _run_state_action_model(config, idx)
    return _run_state_skill_agent(config, idx)


def run_experiment(config: RunConfig) -> RunResult:
    """Run n_agents independent agents; deterministic given config.seed."""
    workers = config.workers
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "0")) or None
    tasks = [(config, i) for i in range(config.n_agents)]
    if workers and workers > 1 and config.n_agents > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_one, tasks))
    else:
        outcomes = [_run_one(t) for t in tasks]
    records = [r for out in outcomes for r in out[0]]
    errors = [out[1] for out in outcomes]
    skills = [out[2] for out in outcomes]
    result = RunResult(config, records, errors, skills)
    if config.out_dir:
        write_artifacts(result, Path(config.out_dir))
    return result


# --- curves ------------------------------------------------------------------


def smooth_curve(curve: Sequence[float], spec: Optional[SmoothingSpec] = None) -> list[float]:
    """Piecewise Gaussian smoothing with reflective boundaries per interval."""
    spec = spec or SmoothingSpec()
    out: list[float] = []
    n = len(curve)
    for (lo, hi), sigma in spec.intervals:
        start = lo - 1
        end = n if hi is None else min(hi, n)
        if start >= end:
            continue
        chunk = list(curve[start:end])
        if sigma <= 0 or len(chunk) < 2:
            out.extend(chunk)
        else:
            out.extend(float(v) for v in gaussian_filter1d(chunk, sigma, mode="reflect"))
    return out


def mastery_intercept(curve: Sequence[float], threshold: float = 0.10,
                      spec: Optional[SmoothingSpec] = None,
                      presmoothed: bool = False) -> Optional[int]:
    """First 1-indexed problem where the smoothed curve drops below threshold."""
    smoothed = list(curve) if presmoothed else smooth_curve(curve, spec)
    for i, v in enumerate(smoothed):
        if v < threshold:
            return i + 1
    return None


# --- emission ----------------------------------------------------------------


def curve_csv(curve: Sequence[float], n_agents: int, spec: Optional[SmoothingSpec] = None) -> str:
    smoothed = smooth_curve(curve, spec)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["problem", "mean_error", "n_agents", "smoothed_error"])
    for i, (raw, sm) in enumerate(zip(curve, smoothed)):
        writer.writerow([i + 1, f"{raw:.10g}", n_agents, f"{sm:.10g}"])
    return buf.getvalue()


def transcript_csv(records: Sequence[StepRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["agent", "problem", "step", "kind", "kc", "skill", "selection", "value"])
    for r in records:
        writer.writerow([r.agent, r.problem, r.step, r.kind, r.kc, r.skill, r.selection, r.value])
    return buf.getvalue()


def emit_svg(
    curves: dict[str, Sequence[float]],
    log_x: bool = True,
    width: int = 640,
    height: int = 400,
    threshold: float = 0.10,
) -> str:
    """Minimal deterministic SVG line plot (error rate by problem, log-x)."""
    pad = 48
    plot_w, plot_h = width - 2 * pad, height - 2 * pad
    n_max = max((len(c) for c in curves.values()), default=1)

    def x_pos(i: int) -> float:
        if log_x:
            return pad + plot_w * math.log10(i) / max(math.log10(max(n_max, 2)), 1e-9)
        return pad + plot_w * (i - 1) / max(n_max - 1, 1)

    def y_pos(v: float) -> float:
        return pad + plot_h * (1.0 - max(0.0, min(1.0, v)))

    palette = ["#c8a200", "#4477aa", "#cc4444", "#44aa77", "#8866bb", "#666666"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad}" y="{pad - 10}" font-size="12">error rate by problem'
        + (" (log x)" if log_x else "")
        + "</text>",
    ]
    ticks = [1, 10, 100, 1000] if log_x else sorted({1, n_max // 2 or 1, n_max})
    for t in ticks:
        if t > n_max:
            continue
        parts.append(
            f'<text x="{x_pos(t):.1f}" y="{height - pad + 16}" font-size="10" '
            f'text-anchor="middle">{t}</text>'
        )
    for frac in (0.0, 0.5, 1.0):
        parts.append(
            f'<text x="{pad - 6}" y="{y_pos(frac):.1f}" font-size="10" '
            f'text-anchor="end">{frac:.1f}</text>'
        )
    ty = y_pos(threshold)
    parts.append(
        f'<line x1="{pad}" y1="{ty:.1f}" x2="{width - pad}" y2="{ty:.1f}" '
        f'stroke="#999999" stroke-dasharray="4,3"/>'
    )
    for k, (name, curve) in enumerate(sorted(curves.items())):
        color = palette[k % len(palette)]
        pts = " ".join(f"{x_pos(i + 1):.1f},{y_pos(v):.1f}" for i, v in enumerate(curve))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(
            f'<text x="{width - pad - 4}" y="{pad + 14 + 14 * k}" font-size="11" '
            f'text-anchor="end" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def write_artifacts(result: RunResult, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve = result.curve()
    (out_dir / "curves.csv").write_text(curve_csv(curve, result.config.n_agents))
    (out_dir / "transcript.csv").write_text(transcript_csv(result.records))
    (out_dir / "plot.svg").write_text(
        emit_svg({result.config.agent: smooth_curve(curve)})
    )
    skills_dir = out_dir / "skills"
    skills_dir.mkdir(exist_ok=True)
    for i, skills in enumerate(result.skills):
        (skills_dir / f"agent_{i}.json").write_text(json.dumps(skills, indent=2, sort_keys=True))
    meta = {
        "config": {**asdict(result.config)},
        "error_definition": "per step: first response is a hint request or incorrect attempt;"
        " per-problem rates averaged per agent, then across agents",
        "onehot_includes_lock_bits": True,
        "mastery": mastery_intercept(curve),
    }
    (out_dir / "run_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
