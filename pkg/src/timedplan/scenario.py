"""Scenario files (INI dialect) and plan persistence.

A scenario bundles everything one planning problem needs: the communication
graph, continuous-motion limits, the workspace box and its grid, per-agent
service labels, the abstraction knobs, one task formula per agent, and the
search budgets.  Parsing is strict — unknown sections or keys are errors,
since a typo that silently drops a constraint is the worst possible outcome
for a tool whose point is guarantees.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import re
from dataclasses import dataclass
from fractions import Fraction

from .abstraction import Discretization, build_wts
from .dynamics import condition_constants
from .errors import ScenarioError, PlanMismatch
from .graphs import build_graph, theorem1_constants
from .mitl import parse
from .rational import as_fraction, frac_str
from .synthesis import Plan
from .workspace import Box, ServiceLabeling, grid
from .wts import TimedRun

_KNOWN_SECTIONS = (
    "scenario", "graph", "dynamics", "workspace",
    "abstraction", "labels", "formulas", "synthesis",
)
_FIXED_KEYS = {
    "scenario": {"version", "name"},
    "graph": {"agents", "edges"},
    "workspace": {"bounds", "cell_size"},
    "abstraction": {"lambda", "dt", "radius_shrink"},
    "synthesis": {"r_selec", "max_states", "samples", "seed"},
}
_START_RE = re.compile(r"^start\.(\d+)$")
_LABEL_RE = re.compile(r"^(\d+)\.([a-z][a-z0-9_]*)$")
_PHI_RE = re.compile(r"^phi\.(\d+)$")


def _fail(msg):
    raise ScenarioError(msg)


def _point(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        _fail(f"bad point {text!r}")


def _parse_edges(text: str):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        m = re.fullmatch(r"(\d+)\s*-\s*(\d+)", part)
        if not m:
            _fail(f"bad edge {part!r} (want 'i-j')")
        out.append((int(m.group(1)), int(m.group(2))))
    if not out:
        _fail("no edges given")
    return out


def _parse_cells(text: str):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        m = re.fullmatch(r"(\d+)(?:\s*-\s*(\d+))?", part)
        if not m:
            _fail(f"bad cell list entry {part!r}")
        a = int(m.group(1))
        b = int(m.group(2)) if m.group(2) else a
        if b < a:
            _fail(f"reversed cell range {part!r}")
        out.extend(range(a, b + 1))
    return out


@dataclass(frozen=True)
class Scenario:
    name: str
    n_agents: int
    edges: tuple[tuple[int, int], ...]
    v_max: float
    margin: float
    starts: tuple[tuple[float, ...], ...]
    bounds_lo: tuple[float, ...]
    bounds_hi: tuple[float, ...]
    cell_size: float
    lam: float
    dt: Fraction
    radius_shrink: float
    labels: dict
    formula_text: tuple[str, ...]
    r_selec: int
    max_states: int | None
    samples: int
    seed: int
    fingerprint: str


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario(text)


def parse_scenario(text: str) -> Scenario:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as e:
        _fail(f"unparseable scenario file: {e}")

    for sec in cp.sections():
        if sec not in _KNOWN_SECTIONS:
            _fail(f"unknown section [{sec}]")
    for sec in ("scenario", "graph", "dynamics", "workspace", "abstraction", "formulas"):
        if sec not in cp:
            _fail(f"missing section [{sec}]")
    for sec, allowed in _FIXED_KEYS.items():
        if sec not in cp:
            continue
        for key in cp[sec]:
            if key not in allowed:
                _fail(f"unknown key {key!r} in [{sec}]")

    if cp["scenario"].get("version", "") != "1":
        _fail("scenario version missing or unsupported (expected version = 1)")
    name = cp["scenario"].get("name", "unnamed")

    try:
        n_agents = int(cp["graph"]["agents"])
    except (KeyError, ValueError):
        _fail("[graph] needs an integer 'agents'")
    edges = _parse_edges(cp["graph"].get("edges", ""))

    dyn = cp["dynamics"]
    starts: dict[int, tuple[float, ...]] = {}
    v_max = margin = None
    for key, val in dyn.items():
        if key == "v_max":
            v_max = float(val)
        elif key == "margin":
            margin = float(val)
        else:
            m = _START_RE.fullmatch(key)
            if not m:
                _fail(f"unknown key {key!r} in [dynamics]")
            starts[int(m.group(1))] = _point(val)
    if v_max is None:
        _fail("[dynamics] needs v_max")
    if margin is None:
        margin = 1.05
    if sorted(starts) != list(range(1, n_agents + 1)):
        _fail(f"need start.1 .. start.{n_agents} in [dynamics]")

    ws = cp["workspace"]
    if "bounds" not in ws or "cell_size" not in ws:
        _fail("[workspace] needs bounds and cell_size")
    halves = ws["bounds"].split(";")
    if len(halves) != 2:
        _fail("bounds must be 'lo_point ; hi_point'")
    lo, hi = _point(halves[0]), _point(halves[1])
    cell_size = float(ws["cell_size"])

    ab = cp["abstraction"]
    if "lambda" not in ab or "dt" not in ab:
        _fail("[abstraction] needs lambda and dt")
    lam = float(ab["lambda"])
    dt = as_fraction(ab["dt"])
    radius_shrink = float(ab.get("radius_shrink", "0"))

    labels: dict[int, dict[int, set]] = {i: {} for i in range(1, n_agents + 1)}
    if "labels" in cp:
        for key, val in cp["labels"].items():
            m = _LABEL_RE.fullmatch(key)
            if not m:
                _fail(f"bad label key {key!r} (want '<agent>.<service>')")
            agent, service = int(m.group(1)), m.group(2)
            if not 1 <= agent <= n_agents:
                _fail(f"label key {key!r} names agent {agent} of {n_agents}")
            for cell in _parse_cells(val):
                labels[agent].setdefault(cell, set()).add(service)

    phis: dict[int, str] = {}
    for key, val in cp["formulas"].items():
        m = _PHI_RE.fullmatch(key)
        if not m:
            _fail(f"bad formula key {key!r} (want 'phi.<agent>')")
        phis[int(m.group(1))] = val.strip()
    if sorted(phis) != list(range(1, n_agents + 1)):
        _fail(f"need phi.1 .. phi.{n_agents} in [formulas]")

    syn = cp["synthesis"] if "synthesis" in cp else {}
    r_selec = int(syn.get("r_selec", "100"))
    max_states = syn.get("max_states")
    max_states = int(max_states) if max_states is not None else None
    samples = int(syn.get("samples", "25"))
    seed = int(syn.get("seed", "0"))

    return Scenario(
        name=name,
        n_agents=n_agents,
        edges=tuple(edges),
        v_max=v_max,
        margin=margin,
        starts=tuple(starts[i] for i in range(1, n_agents + 1)),
        bounds_lo=lo,
        bounds_hi=hi,
        cell_size=cell_size,
        lam=lam,
        dt=dt,
        radius_shrink=radius_shrink,
        labels={a: {c: frozenset(s) for c, s in per.items()} for a, per in labels.items()},
        formula_text=tuple(phis[i] for i in range(1, n_agents + 1)),
        r_selec=r_selec,
        max_states=max_states,
        samples=samples,
        seed=seed,
        fingerprint=hashlib.sha256(text.encode("utf-8")).hexdigest(),
    )


@dataclass(frozen=True)
class Built:
    """Everything geometric/symbolic derived from one scenario."""

    scenario: Scenario
    graph: object
    bound_params: object
    constants: object
    dec: object
    labeling: ServiceLabeling
    disc: Discretization
    wts_list: tuple
    formulas: tuple


def build(s: Scenario) -> Built:
    """Construct and cross-validate every derived artifact.

    Raises the underlying validation error (graph shape, feasibility window,
    out-of-range cells, formula syntax, ...) so callers can report exactly
    which property failed.
    """
    g = build_graph(s.n_agents, s.edges)
    params = theorem1_constants(g, s.v_max, s.margin)
    consts = condition_constants(g, params)
    box = Box(s.bounds_lo, s.bounds_hi)
    dec = grid(box, s.cell_size)
    for agent, per in s.labels.items():
        for cell in per:
            if not 1 <= cell <= dec.n_cells:
                _fail(
                    f"agent {agent} labels cell {cell}, grid has {dec.n_cells}"
                )
    labeling = ServiceLabeling(s.labels)
    disc = Discretization(dec, s.dt, s.lam, consts, s.v_max, s.radius_shrink)
    wts_list = tuple(
        build_wts(disc, g, i, s.starts[i - 1], labeling)
        for i in range(1, s.n_agents + 1)
    )
    formulas = tuple(
        parse(txt, alphabet=labeling.alphabet(i))
        for i, txt in enumerate(s.formula_text, start=1)
    )
    return Built(
        scenario=s, graph=g, bound_params=params, constants=consts, dec=dec,
        labeling=labeling, disc=disc, wts_list=wts_list, formulas=formulas,
    )


# -- plan persistence ----------------------------------------------------------


def plan_to_dict(plan: Plan, fingerprint: str) -> dict:
    return {
        "scenario_sha256": fingerprint,
        "route": plan.route,
        "dt": frac_str(plan.dt),
        "stem_len": plan.joint.stem_len,
        "combos_checked": plan.combos_checked,
        "joint": [list(s) for s in plan.joint.states],
    }


def plan_dumps(plan: Plan, fingerprint: str) -> str:
    return json.dumps(plan_to_dict(plan, fingerprint), indent=2, sort_keys=True) + "\n"


def plan_loads(text: str, fingerprint: str | None = None) -> Plan:
    try:
        raw = json.loads(text)
        route = raw["route"]
        dt = as_fraction(raw["dt"])
        stem = int(raw["stem_len"])
        joint_states = tuple(tuple(int(c) for c in s) for s in raw["joint"])
        combos = int(raw.get("combos_checked", 0))
        sha = raw["scenario_sha256"]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise PlanMismatch(f"unreadable plan file: {e}") from None
    if fingerprint is not None and sha != fingerprint:
        raise PlanMismatch(
            "plan was synthesized for a different scenario file "
            f"(expected {fingerprint[:12]}..., got {sha[:12]}...)"
        )
    joint = TimedRun(joint_states, (dt,) * len(joint_states), stem)
    n = len(joint_states[0])
    runs = tuple(
        TimedRun(tuple(s[i] for s in joint_states), joint.durations, stem)
        for i in range(n)
    )
    return Plan(runs=runs, joint=joint, dt=dt, route=route, combos_checked=combos)
