"""Command-line entry points.

Subcommands: `sim static`, `sim dynamic` (sweeps with CSV + figure output),
`oracle step` (deterministic interaction trace), `coach compare` (policy
comparison table), and `tutor serve` (the live session service).  Every flag
can also be supplied through a JSON config file; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import report
from .apps.coach import coach_experiment
from .dynamics import oracle_trace
from .equations import (
    DATA_ENV_VAR,
    load_equations,
    load_lexicon,
    load_sample_equations,
    load_sample_lexicon,
)
from .sweeps import MODES, run_dynamic_sweep, run_static_sweep

MODE_ALIASES = {"hidden": "agent-id-hidden", "known": "agent-id-known", "both": "both-known"}


def _load_data(act_data: str | None):
    """Equation set and dictionary: an explicit directory wins, then the
    environment override, then the bundled samples."""
    import os

    root = Path(act_data) if act_data else None
    if root is None and os.environ.get(DATA_ENV_VAR):
        candidate = Path(os.environ[DATA_ENV_VAR])
        if (candidate / "equations.txt").exists():
            root = candidate
    if root is not None:
        return (
            load_equations(root / "equations.txt"),
            load_lexicon(root / "identities.csv"),
        )
    return load_sample_equations(), load_sample_lexicon()


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    payload = json.loads(Path(args.config).read_text())
    if not isinstance(payload, dict):
        parser.error("config file must hold a JSON object")
    supplied = {
        token.lstrip("-").replace("-", "_").split("=")[0] for token in sys.argv if token.startswith("--")
    }
    for key, value in payload.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            parser.error(f"config key {key!r} does not match any flag")
        if attr not in supplied:
            setattr(args, attr, value)


def _floats(values) -> list[float]:
    if isinstance(values, (int, float)):
        return [float(values)]
    out = []
    for v in values:
        out.extend(float(p) for p in str(v).split(","))
    return out


def _ints(values) -> list[int]:
    return [int(v) for v in _floats(values)]


def _parse_epa(text: str, lexicon) -> np.ndarray:
    if "," in text:
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three EPA components, got {text!r}")
        return np.array(parts)
    return lexicon.epa(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affectagent",
        description="Affective-agent simulations, experiments and services",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="simulation sweeps")
    sim_sub = sim.add_subparsers(dest="sim_command", required=True)

    static = sim_sub.add_parser("static", help="fixed-identity learning sweep")
    static.add_argument("--n-samples", nargs="+", default=["50"], help="particle counts")
    static.add_argument("--env-noise", nargs="+", default=["0.0"], help="noise std devs")
    static.add_argument("--mode", default="agent-id-hidden")
    static.add_argument("--trials", type=int, default=20)
    static.add_argument("--reps", type=int, default=10)
    static.add_argument("--steps", type=int, default=50)
    static.add_argument("--seed", type=int, default=0)
    static.add_argument("--workers", type=int, default=1)
    static.add_argument("--out", default="results/static")
    static.add_argument("--config", help="JSON file supplying flag defaults")
    static.add_argument("--act-data", help=f"directory with equations.txt and identities.csv (or ${DATA_ENV_VAR})")

    dynamic = sim_sub.add_parser("dynamic", help="shifting-identity tracking sweep")
    dynamic.add_argument("--speed", nargs="+", default=["0.1"])
    dynamic.add_argument("--dwell", type=int, default=20)
    dynamic.add_argument("--env-noise", nargs="+", default=["0.5"])
    dynamic.add_argument("--n-samples", type=int, default=250)
    dynamic.add_argument("--episodes", type=int, default=10)
    dynamic.add_argument("--steps", type=int, default=200)
    dynamic.add_argument("--single-shift", action="store_true")
    dynamic.add_argument("--seed", type=int, default=0)
    dynamic.add_argument("--workers", type=int, default=1)
    dynamic.add_argument("--out", default="results/dynamic")
    dynamic.add_argument("--config")
    dynamic.add_argument("--act-data")

    oracle = sub.add_parser("oracle", help="deterministic interaction oracle")
    oracle_sub = oracle.add_subparsers(dest="oracle_command", required=True)
    step = oracle_sub.add_parser("step", help="print an alternating-turn trace")
    step.add_argument("--agent", required=True, help="identity label or E,P,A")
    step.add_argument("--client", required=True, help="identity label or E,P,A")
    step.add_argument("--steps", type=int, default=10)
    step.add_argument("--first-turn", choices=["agent", "client"], default="agent")
    step.add_argument("--config")
    step.add_argument("--act-data")

    coach = sub.add_parser("coach", help="assisted-task experiments")
    coach_sub = coach.add_subparsers(dest="coach_command", required=True)
    compare = coach_sub.add_parser("compare", help="affective-policy comparison")
    compare.add_argument("--identities", default="elder,patient,convalescent,boss")
    compare.add_argument("--policies", default="adaptive,prompt,confer,command")
    compare.add_argument("--trials", type=int, default=10)
    compare.add_argument("--n-samples", type=int, default=300)
    compare.add_argument("--seed", type=int, default=0)
    compare.add_argument("--out", default="results/coach")
    compare.add_argument("--config")
    compare.add_argument("--act-data")

    tutor = sub.add_parser("tutor", help="live tutoring demo")
    tutor_sub = tutor.add_subparsers(dest="tutor_command", required=True)
    serve = tutor_sub.add_parser("serve", help="run the session service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--config")
    serve.add_argument("--act-data")

    return parser


def cmd_sim_static(args) -> int:
    eq, lex = _load_data(args.act_data)
    mode = MODE_ALIASES.get(args.mode, args.mode)
    if mode not in MODES:
        print(f"unknown mode {args.mode!r}; expected one of {MODES}", file=sys.stderr)
        return 2
    cells = run_static_sweep(
        eq,
        lex,
        mode,
        n_list=_ints(args.n_samples),
        sigma_e_list=_floats(args.env_noise),
        trials=args.trials,
        reps=args.reps,
        steps=args.steps,
        seed=args.seed,
        workers=args.workers,
    )
    paths = report.emit_static_outputs(cells, args.out)
    for cell in cells:
        print(
            f"mode={cell.mode} sigma_e={cell.sigma_e} N={cell.n_particles}: "
            f"id-deflection {cell.id_deflection_mean[0]:.3f}±{cell.id_deflection_sd[0]:.3f} (agent) "
            f"{cell.id_deflection_mean[1]:.3f}±{cell.id_deflection_sd[1]:.3f} (client)"
        )
    for path in paths:
        print("wrote", path)
    return 0


def cmd_sim_dynamic(args) -> int:
    eq, lex = _load_data(args.act_data)
    cells = run_dynamic_sweep(
        eq,
        lex,
        speeds=_floats(args.speed),
        sigma_e_list=_floats(args.env_noise),
        n_particles=args.n_samples,
        dwell=args.dwell,
        steps=args.steps,
        episodes=args.episodes,
        seed=args.seed,
        workers=args.workers,
        single_shift=args.single_shift,
    )
    paths = report.emit_dynamic_outputs(cells, args.out)
    for cell in cells:
        mean, sd = cell.deflected_frames[1.0]
        print(
            f"sigma_e={cell.sigma_e} speed={cell.speed}: "
            f"frames(id-deflection>1.0) {mean:.2f}±{sd:.2f} of {args.steps}"
        )
    for path in paths:
        print("wrote", path)
    return 0


def cmd_oracle_step(args) -> int:
    eq, lex = _load_data(args.act_data)
    agent = _parse_epa(args.agent, lex)
    client = _parse_epa(args.client, lex)
    trace = oracle_trace(agent, client, eq, steps=args.steps, first_turn=args.first_turn)
    print(f"{'step':>4} {'turn':>6} {'behaviour EPA':>26} {'nearest':>18} {'deflection':>11}")
    for i, step in enumerate(trace):
        nearest = lex.nearest(step.behaviour, kind="behaviour").label
        epa = " ".join(f"{v:7.3f}" for v in step.behaviour)
        print(f"{i:>4} {step.turn:>6} {epa:>26} {nearest:>18} {step.deflection:>11.4f}")
    return 0


def cmd_coach_compare(args) -> int:
    eq, lex = _load_data(args.act_data)
    rows = []
    for label in [s.strip() for s in args.identities.split(",") if s.strip()]:
        identity = _parse_epa(label, lex)
        for policy in [s.strip() for s in args.policies.split(",") if s.strip()]:
            row = coach_experiment(
                identity,
                policy,
                trials=args.trials,
                seed=args.seed,
                eq=eq,
                identity_label=label,
                n_particles=args.n_samples,
            )
            rows.append(row)
            print(
                f"{label:>14} {policy:>9}: interactions {row.mean_interactions:.1f}±{row.se_interactions:.1f} "
                f"last planstep {row.mean_last_planstep:.2f}±{row.se_last_planstep:.2f} "
                f"finished {row.completed}/{row.trials}"
            )
    for path in report.emit_coach_outputs(rows, args.out):
        print("wrote", path)
    return 0


def cmd_tutor_serve(args) -> int:
    import uvicorn

    from .service import create_app

    eq, lex = _load_data(args.act_data)
    app = create_app(eq=eq, lexicon=lex)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config_file(args, parser)
    if args.command == "sim" and args.sim_command == "static":
        return cmd_sim_static(args)
    if args.command == "sim" and args.sim_command == "dynamic":
        return cmd_sim_dynamic(args)
    if args.command == "oracle" and args.oracle_command == "step":
        return cmd_oracle_step(args)
    if args.command == "coach" and args.coach_command == "compare":
        return cmd_coach_compare(args)
    if args.command == "tutor" and args.tutor_command == "serve":
        return cmd_tutor_serve(args)
    parser.error("unhandled command")
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
