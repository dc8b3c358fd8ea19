"""Command-line interface: experiment runs, plotting, skill inspection, serving."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import click

from .harness import (
    AGENT_KINDS,
    RunConfig,
    emit_svg,
    mastery_intercept,
    run_experiment,
    smooth_curve,
)
from .tutors import DOMAINS


@click.group()
def main():
    """Tutored skill-induction agents and their experiment harness."""


@main.command()
@click.option("--domain", type=click.Choice(DOMAINS), required=True)
@click.option("--agent", type=click.Choice(AGENT_KINDS), default="dipl", show_default=True)
@click.option("--n-agents", type=int, default=20, show_default=True)
@click.option("--max-problems", type=int, default=25, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--problems", "problems_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--stop-error", type=float, default=None, help="early-stop error rate")
@click.option("--workers", type=int, default=None, help="parallel agents (env TUTORLEARN_WORKERS)")
@click.option("--use-foci/--no-foci", default=True, show_default=True)
@click.option("--use-labels/--no-labels", default=True, show_default=True)
def run(domain, agent, n_agents, max_problems, seed, out_dir, problems_file, stop_error,
        workers, use_foci, use_labels):
    """Run an experiment and write curves.csv, transcript.csv, skills, and a plot."""
    config = RunConfig(
        domain=domain,
        agent=agent,
        n_agents=n_agents,
        max_problems=max_problems,
        seed=seed,
        out_dir=out_dir,
        problems_file=problems_file,
        stop_error=stop_error,
        workers=workers,
        use_foci=use_foci,
        use_labels=use_labels,
    )
    result = run_experiment(config)
    curve = result.curve()
    mastery = mastery_intercept(curve)
    click.echo(f"wrote {out_dir}; mastery intercept: {mastery if mastery else 'not reached'}")


@main.command()
@click.option("--in", "inputs", "--input", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="curves.csv file (repeatable)")
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False), required=True)
@click.option("--log-x/--linear-x", default=True, show_default=True)
@click.option("--offset", type=int, default=0, show_default=True,
              help="shift every curve right by N problems (comparison alignment)")
def plot(inputs, svg_path, log_x, offset):
    """Plot one or more curves.csv files as an SVG."""
    curves = {}
    for path in inputs:
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        series = [float(r["smoothed_error"]) for r in rows]
        if offset:
            series = [series[0]] * offset + series
        curves[Path(path).parent.name or Path(path).stem] = series
    Path(svg_path).write_text(emit_svg(curves, log_x=log_x))
    click.echo(f"wrote {svg_path}")


@main.command("inspect-skills")
@click.option("--transcript", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--agent-state", type=click.Path(exists=True, dir_okay=False), required=True)
def inspect_skills(transcript, agent_state):
    """Summarize skill usage from a transcript and dump the skill JSON."""
    skills = json.loads(Path(agent_state).read_text())
    usage: dict[str, int] = {}
    with open(transcript) as fh:
        for row in csv.DictReader(fh):
            if row["skill"]:
                usage[row["skill"]] = usage.get(row["skill"], 0) + 1
    click.echo(f"{'skill':8s} {'label':14s} {'uses':>5s}  {'utility':>7s}  how")
    for skill in skills:
        sid = skill["id"]
        label = skill.get("label") or "-"
        utility = skill.get("which", {}).get("utility", 0.5)
        how = skill.get("how", {}).get("pretty", skill.get("how"))
        click.echo(f"{sid:8s} {label:14s} {usage.get(sid, 0):5d}  {utility:7.2f}  {how}")
    click.echo(json.dumps(skills, indent=2, sort_keys=True))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--event-log-dir", type=click.Path(file_okay=False), default=None)
@click.option("--frontend", "frontend_dir", type=click.Path(file_okay=False), default=None,
              help="serve a built frontend from this directory at /")
def serve(host, port, event_log_dir, frontend_dir):
    """Start the interactive training service."""
    import uvicorn

    from .service import create_app

    app = create_app(event_log_dir=event_log_dir, frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
