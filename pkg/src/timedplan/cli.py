"""Command-line front end.

Subcommands:
  validate    parse a scenario and run every structural check
  synthesize  produce a plan, its human-readable timetable, and the sampled
              landing certificate in a run directory
  simulate    replay a plan against the continuous dynamics and record
              trajectories plus cell-membership verdicts
  stats       forward-reachability layer sizes of the joint abstraction

Exit codes: 0 success; 1 invalid input (scenario, plan file, or property
violation, with the failed property named); 2 negative verdict (infeasible
task set, or a simulation that left its planned cells); 3 search budget
exhausted before any verdict.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import integrate_closed, lyapunov
from .errors import BudgetExceeded, PlanMismatch, ScenarioError, TimedplanError
from .rational import decimal_str, frac_str
from .scenario import Built, build, load_scenario, plan_dumps, plan_loads
from .synthesis import (
    Infeasible,
    Plan,
    make_controller,
    reachable_layers,
    synthesize,
)
from .workspace import locate
from .wts import format_steps, product, simulation_check


def _threads() -> int:
    raw = os.environ.get("TIMEDPLAN_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ScenarioError(f"TIMEDPLAN_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise ScenarioError(f"TIMEDPLAN_THREADS must be >= 1, got {n}")
    return n


def _load_built(args) -> Built:
    s = load_scenario(args.scenario)
    if getattr(args, "seed", None) is not None:
        s = _replace(s, seed=args.seed)
    if getattr(args, "r_selec", None) is not None:
        s = _replace(s, r_selec=args.r_selec)
    if getattr(args, "max_states", None) is not None:
        s = _replace(s, max_states=args.max_states)
    return build(s)


def _replace(s, **kw):
    import dataclasses

    return dataclasses.replace(s, **kw)


def cmd_validate(args) -> int:
    try:
        b = _load_built(args)
    except (TimedplanError, OSError) as e:
        print(f"invalid: {type(e).__name__}: {e}")
        return 1
    s = b.scenario
    print(f"scenario '{s.name}': ok")
    print(f"  agents: {s.n_agents}, edges: {list(s.edges)}")
    print(f"  cells: {b.dec.n_cells} (diameter {b.dec.diameter:.6g})")
    print(f"  quantum: {frac_str(s.dt)}, contraction: {s.lam}")
    print(f"  step ball radius: {b.disc.radius:.6g}")
    for i, w in enumerate(b.wts_list, start=1):
        init = sorted(w.initial)
        print(f"  agent {i}: start cell {init[0]}, services {sorted(w.alphabet)}")
    return 0


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _plan_text(b: Built, plan: Plan) -> str:
    lines = [
        f"route: {plan.route}",
        f"quantum: {frac_str(plan.dt)}",
        f"stem: {plan.stem_len} positions, cycle: {plan.cycle_len} positions",
        "",
    ]
    for i, run in enumerate(plan.runs, start=1):
        w = b.wts_list[i - 1]
        lines.append(f"--- agent {i} ---")
        lines.append(format_steps(run.states, run.durations, run.stem_len))
        served = []
        for j, cell in enumerate(run.states):
            l = w.label(cell)
            if l:
                served.append(
                    f"  t={frac_str(run.time(j))}: cell {cell} provides "
                    + "{" + ",".join(sorted(l)) + "}"
                )
        lines.extend(served if served else ["  (no service cells visited)"])
        lines.append("")
    return "\n".join(lines)


def _certificate(b: Built, plan: Plan):
    p = product(b.wts_list)
    controller = make_controller(b.disc, b.graph)
    return simulation_check(
        p,
        b.disc,
        b.graph,
        plan.steps(),
        controller,
        n_samples=b.scenario.samples,
        seed=b.scenario.seed,
    )


def cmd_synthesize(args) -> int:
    try:
        b = _load_built(args)
    except (TimedplanError, OSError) as e:
        print(f"invalid: {type(e).__name__}: {e}")
        return 1
    s = b.scenario
    out = Path(args.out) if args.out else Path("runs") / s.name
    t0 = time.perf_counter()
    try:
        result = synthesize(
            b.graph, b.wts_list, b.formulas, r_selec=s.r_selec, max_states=s.max_states
        )
    except BudgetExceeded as e:
        print(f"budget exhausted: {e}")
        return 3
    elapsed = time.perf_counter() - t0
    if isinstance(result, Infeasible):
        print(f"infeasible: {result.reason}")
        return 2
    plan = result
    report = _certificate(b, plan)
    manifest = {
        "tool": "timedplan",
        "version": __version__,
        "command": "synthesize",
        "scenario": str(args.scenario),
        "scenario_sha256": s.fingerprint,
        "seed": s.seed,
        "r_selec": s.r_selec,
        "max_states": s.max_states,
        "samples": s.samples,
        "threads": _threads(),
        "route": plan.route,
        "combos_checked": plan.combos_checked,
        "elapsed_s": round(elapsed, 3),
    }
    cert = {
        "ok": report.ok,
        "total_misses": report.total_misses,
        "steps": [
            {
                "step": r.step,
                "samples": r.samples,
                "misses": r.misses,
                "worst_distance": r.worst_distance,
            }
            for r in report.steps
        ],
    }
    _write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    _write(out / "plan.json", plan_dumps(plan, s.fingerprint))
    _write(out / "plan.txt", _plan_text(b, plan))
    _write(out / "certificate.json", json.dumps(cert, indent=2, sort_keys=True) + "\n")
    print(f"plan found via {plan.route} route ({plan.combos_checked} combos checked)")
    print(f"certificate: {'all landings hit' if report.ok else 'MISSES RECORDED'}")
    print(f"written to {out}/")
    return 0


def cmd_simulate(args) -> int:
    try:
        b = _load_built(args)
        plan_path = Path(args.plan)
        plan = plan_loads(
            plan_path.read_text(encoding="utf-8"), b.scenario.fingerprint
        )
    except (TimedplanError, OSError) as e:
        print(f"invalid: {type(e).__name__}: {e}")
        return 1
    s = b.scenario
    g = b.graph
    disc = b.disc
    dec = b.dec
    start_cells = tuple(locate(dec, p) for p in s.starts)
    if start_cells != plan.joint.state(0):
        print(
            f"invalid: PlanMismatch: plan starts at {plan.joint.state(0)}, "
            f"scenario starts occupy {start_cells}"
        )
        return 1

    quanta = args.quanta if args.quanta is not None else len(plan.joint)
    controller = make_controller(disc, g)
    dt_sim = disc.dt / args.substeps
    x = np.array(s.starts, dtype=float)
    out = Path(args.out) if args.out else Path("runs") / f"{s.name}-sim"
    out.mkdir(parents=True, exist_ok=True)

    traj_rows = []
    lyap_rows = []
    cell_rows = []
    misses = 0
    for j in range(quanta):
        src = plan.joint.state(j)
        dst = plan.joint.state(j + 1)
        law = controller(src, dst)
        traj = integrate_closed(g, x, law, dt_sim, disc.dt, s.v_max)
        offset = j * disc.dt
        first = 1 if j > 0 else 0
        for k in range(first, len(traj.times)):
            t = offset + traj.times[k]
            for i in range(s.n_agents):
                row = [decimal_str(t), i + 1] + [
                    f"{v:.12g}" for v in traj.states[k][i]
                ]
                traj_rows.append(row)
            lyap_rows.append([decimal_str(t), f"{lyapunov(g, traj.states[k]):.12g}"])
        x = traj.final()
        for i in range(s.n_agents):
            try:
                landed = locate(dec, x[i])
            except TimedplanError:
                landed = 0
            ok = landed == dst[i]
            if not ok:
                misses += 1
            cell_rows.append([j, i + 1, dst[i], landed, "yes" if ok else "NO"])

    n_dim = len(s.starts[0])
    with open(out / "trajectory.csv", "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "agent"] + [f"x{k + 1}" for k in range(n_dim)])
        wr.writerows(traj_rows)
    with open(out / "lyapunov.csv", "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "disagreement"])
        wr.writerows(lyap_rows)
    with open(out / "reachable_cells.csv", "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["quantum", "agent", "planned_cell", "landed_cell", "ok"])
        wr.writerows(cell_rows)

    if misses:
        print(f"membership: {misses} landings missed their planned cell")
        print(f"written to {out}/")
        return 2
    print(f"membership: all {quanta * s.n_agents} landings in their planned cells")
    print(f"written to {out}/")
    return 0


def cmd_stats(args) -> int:
    try:
        b = _load_built(args)
    except (TimedplanError, OSError) as e:
        print(f"invalid: {type(e).__name__}: {e}")
        return 1
    p = product(b.wts_list)
    try:
        st = reachable_layers(p, args.steps, max_states=b.scenario.max_states)
    except BudgetExceeded as e:
        print(f"budget exhausted: {e}")
        return 3
    print(f"layers: {', '.join(str(c) for c in st.counts)}")
    print(f"elapsed: {st.seconds:.3f}s")
    if args.out:
        out = Path(args.out)
        _write(out / "stats.csv", st.csv())
        _write(
            out / "stats.txt",
            "\n".join(
                f"step {k}: {c} joint cells reachable"
                for k, c in enumerate(st.counts)
            )
            + f"\nelapsed: {st.seconds:.3f}s\n",
        )
        print(f"written to {out}/")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="timedplan",
        description="Timed service planning for coupled agents on a shared workspace.",
    )
    ap.add_argument("--version", action="version", version=f"timedplan {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, overrides=True):
        p.add_argument("scenario", help="scenario file (.cfg)")
        if overrides:
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--r-selec", dest="r_selec", type=int, default=None)
            p.add_argument("--max-states", dest="max_states", type=int, default=None)

    p = sub.add_parser("validate", help="check a scenario file end to end")
    common(p, overrides=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("synthesize", help="plan, timetable, and certificate")
    common(p)
    p.add_argument("--out", default=None, help="run directory (default runs/<name>)")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", help="replay a plan against the dynamics")
    common(p)
    p.add_argument("--plan", required=True, help="plan.json from a synthesize run")
    p.add_argument("--out", default=None)
    p.add_argument("--quanta", type=int, default=None, help="steps to replay")
    p.add_argument("--substeps", type=int, default=20, help="integrator substeps per quantum")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="forward-reachability layer sizes")
    common(p)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _threads()
    except ScenarioError as e:
        print(f"invalid: {e}", file=sys.stderr)
        return 1
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
