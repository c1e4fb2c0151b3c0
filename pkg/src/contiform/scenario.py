"""Scenario ingestion: YAML/JSON schema, validation, defaults.

A scenario document is a mapping with the following keys (lengths in
meters, times in seconds, angles in radians):

    name: optional run label
    n: 2 or 3                      spatial dimension of the formation
    dt: required step size
    duration: required run length
    gain: tracking gain g (default 25)
    rho: interior margin (default 0.1 for n=2, 0.05 for n=3)
    xi: virtual-vertex scale (default 1)
    tolerances: {dx, dy, dz}       per-axis tracking bounds (default 0.1)
    vehicle_radius: collision radius epsilon (default 0.5)
    d_min: optional reference minimum-separation override
    containment: {half_size (default 40), norm l1|l2 (default l1),
                  center_policy frozen|tracking (default frozen)}
    cem: {u_inf (default 10), theta_inf (default 0),
          exclusion_radius (default 4), v_phi (default 10)}
    agents: list of {id, position [x, y] or [x, y, z]}
    leader_override: optional list of n+1 agent ids
    leader_trajectories: mapping id -> list of {time, position}
    failures: list of {agent, time, kind freeze|drift, velocity for drift}

Leader waypoints are linearly interpolated and clamped beyond the ends.
The simulator anchors each trajectory at the leader's position when a
reference network is (re)built, so waypoint lists act as displacement
profiles; writing absolute positions that start at the agent's reference
position keeps the two views identical for the initial build.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ScenarioError
from .refnet import DEFAULT_RHO

FAILURE_KINDS = ("freeze", "drift")

DEFAULTS = {
    "gain": 25.0,
    "xi": 1.0,
    "tolerances": {"dx": 0.1, "dy": 0.1, "dz": 0.1},
    "vehicle_radius": 0.5,
    "containment": {"half_size": 40.0, "norm": "l1", "center_policy": "frozen"},
    "cem": {"u_inf": 10.0, "theta_inf": 0.0, "exclusion_radius": 4.0,
            "v_phi": 10.0},
}


@dataclass(frozen=True)
class LeaderTrajectory:
    """Piecewise-linear waypoint trajectory for one leader."""

    agent_id: int
    times: np.ndarray
    positions: np.ndarray

    def position(self, t):
        """Clamped linear interpolation; t may be a scalar or an array."""
        t = np.asarray(t, dtype=np.float64)
        out = np.stack(
            [np.interp(t, self.times, self.positions[:, k]) for k in range(3)],
            axis=-1,
        )
        return out


@dataclass(frozen=True)
class FailureSpec:
    agent_id: int
    time: float
    kind: str
    velocity: np.ndarray | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    n: int
    dt: float
    duration: float
    gain: float
    rho: float
    xi: float
    tolerances: np.ndarray
    vehicle_radius: float
    d_min_override: float | None
    containment_half_size: float
    containment_norm: str
    center_policy: str
    cem_u_inf: float
    cem_theta_inf: float
    cem_radius: float
    cem_v_phi: float
    agent_ids: tuple
    ref_positions: np.ndarray
    leader_override: tuple | None
    trajectories: dict
    failures: tuple


def _require(mapping, key, path):
    if key not in mapping or mapping[key] is None:
        raise ScenarioError(f"{path}{key}: required")
    return mapping[key]


def _number(value, path, positive=False, nonnegative=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ScenarioError(f"{path}: must be finite")
    if positive and not value > 0.0:
        raise ScenarioError(f"{path}: must be positive, got {value}")
    if nonnegative and value < 0.0:
        raise ScenarioError(f"{path}: must be nonnegative, got {value}")
    return value


def _position(value, path):
    if not isinstance(value, (list, tuple)) or len(value) not in (2, 3):
        raise ScenarioError(f"{path}: expected [x, y] or [x, y, z], got {value!r}")
    coords = [_number(v, f"{path}[{k}]") for k, v in enumerate(value)]
    if len(coords) == 2:
        coords.append(0.0)
    return np.array(coords)


def _agent_id(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}: agent ids must be integers, got {value!r}")
    return value


def _mapping(value, path):
    if not isinstance(value, dict):
        raise ScenarioError(f"{path}: expected a mapping, got {type(value).__name__}")
    return value


def load_scenario(source):
    """Parse and validate a scenario from a file path or document text.

    source may be a filesystem path or the YAML/JSON text itself (anything
    containing a newline, or not naming an existing file, is treated as
    text).  Raises ScenarioError naming the offending field on any schema
    violation.
    """
    if isinstance(source, os.PathLike):
        text = open(os.fspath(source), "r", encoding="utf-8").read()
    elif isinstance(source, str) and "\n" not in source and os.path.exists(source):
        text = open(source, "r", encoding="utf-8").read()
    else:
        text = source
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"scenario document is not valid YAML/JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")

    known = {"name", "n", "dt", "duration", "gain", "rho", "xi", "tolerances",
             "vehicle_radius", "d_min", "containment", "cem", "agents",
             "leader_override", "leader_trajectories", "failures"}
    for key in doc:
        if key not in known:
            raise ScenarioError(f"{key}: unknown field")

    name = str(doc.get("name", "scenario"))
    n = _require(doc, "n", "")
    if n not in (2, 3):
        raise ScenarioError(f"n: must be 2 or 3, got {n!r}")
    dt = _number(_require(doc, "dt", ""), "dt", positive=True)
    # duration 0 is allowed: such a run logs only the initial state
    duration = _number(_require(doc, "duration", ""), "duration",
                       nonnegative=True)
    gain = _number(doc.get("gain", DEFAULTS["gain"]), "gain", positive=True)
    rho = _number(doc.get("rho", DEFAULT_RHO[n]), "rho", positive=True)
    xi = _number(doc.get("xi", DEFAULTS["xi"]), "xi")
    if xi == 0.0:
        raise ScenarioError("xi: must be nonzero")

    tol_doc = _mapping(doc.get("tolerances", {}), "tolerances")
    for key in tol_doc:
        if key not in ("dx", "dy", "dz"):
            raise ScenarioError(f"tolerances.{key}: unknown field")
    tol_defaults = DEFAULTS["tolerances"]
    tolerances = np.array([
        _number(tol_doc.get(k, tol_defaults[k]), f"tolerances.{k}", nonnegative=True)
        for k in ("dx", "dy", "dz")
    ])

    vehicle_radius = _number(doc.get("vehicle_radius", DEFAULTS["vehicle_radius"]),
                             "vehicle_radius", positive=True)
    d_min_override = None
    if doc.get("d_min") is not None:
        d_min_override = _number(doc["d_min"], "d_min", positive=True)

    con_doc = _mapping(doc.get("containment", {}), "containment")
    for key in con_doc:
        if key not in ("half_size", "norm", "center_policy"):
            raise ScenarioError(f"containment.{key}: unknown field")
    con_defaults = DEFAULTS["containment"]
    half_size = _number(con_doc.get("half_size", con_defaults["half_size"]),
                        "containment.half_size", positive=True)
    norm = con_doc.get("norm", con_defaults["norm"])
    if norm not in ("l1", "l2"):
        raise ScenarioError(f"containment.norm: must be l1 or l2, got {norm!r}")
    center_policy = con_doc.get("center_policy", con_defaults["center_policy"])
    if center_policy not in ("frozen", "tracking"):
        raise ScenarioError(
            f"containment.center_policy: must be frozen or tracking, "
            f"got {center_policy!r}"
        )

    cem_doc = _mapping(doc.get("cem", {}), "cem")
    for key in cem_doc:
        if key not in ("u_inf", "theta_inf", "exclusion_radius", "v_phi"):
            raise ScenarioError(f"cem.{key}: unknown field")
    cem_defaults = DEFAULTS["cem"]
    u_inf = _number(cem_doc.get("u_inf", cem_defaults["u_inf"]),
                    "cem.u_inf", positive=True)
    theta_inf = _number(cem_doc.get("theta_inf", cem_defaults["theta_inf"]),
                        "cem.theta_inf")
    radius = _number(cem_doc.get("exclusion_radius",
                                 cem_defaults["exclusion_radius"]),
                     "cem.exclusion_radius", positive=True)
    v_phi = _number(cem_doc.get("v_phi", cem_defaults["v_phi"]),
                    "cem.v_phi", positive=True)

    agents_doc = _require(doc, "agents", "")
    if not isinstance(agents_doc, list) or not agents_doc:
        raise ScenarioError("agents: expected a nonempty list")
    ids = []
    positions = []
    for k, item in enumerate(agents_doc):
        item = _mapping(item, f"agents[{k}]")
        for key in item:
            if key not in ("id", "position"):
                raise ScenarioError(f"agents[{k}].{key}: unknown field")
        agent_id = _agent_id(_require(item, "id", f"agents[{k}]."), f"agents[{k}].id")
        if agent_id in ids:
            raise ScenarioError(f"agents[{k}].id: duplicate id {agent_id}")
        ids.append(agent_id)
        positions.append(_position(_require(item, "position", f"agents[{k}]."),
                                   f"agents[{k}].position"))
    agent_ids = tuple(ids)
    ref_positions = np.array(positions)

    leader_override = None
    if doc.get("leader_override") is not None:
        raw = doc["leader_override"]
        if not isinstance(raw, list):
            raise ScenarioError("leader_override: expected a list of agent ids")
        override = [_agent_id(v, f"leader_override[{k}]") for k, v in enumerate(raw)]
        if len(override) != n + 1:
            raise ScenarioError(
                f"leader_override: expected {n + 1} ids for n={n}, "
                f"got {len(override)}"
            )
        if len(set(override)) != len(override):
            raise ScenarioError("leader_override: duplicate ids")
        for k, agent_id in enumerate(override):
            if agent_id not in agent_ids:
                raise ScenarioError(f"leader_override[{k}]: unknown id {agent_id}")
        leader_override = tuple(override)

    trajectories = {}
    traj_doc = _mapping(doc.get("leader_trajectories", {}), "leader_trajectories")
    for raw_id, waypoints in traj_doc.items():
        try:
            agent_id = int(raw_id)
        except (TypeError, ValueError):
            raise ScenarioError(
                f"leader_trajectories.{raw_id}: keys must be agent ids"
            ) from None
        path = f"leader_trajectories.{agent_id}"
        if agent_id not in agent_ids:
            raise ScenarioError(f"{path}: unknown id {agent_id}")
        if not isinstance(waypoints, list) or not waypoints:
            raise ScenarioError(f"{path}: expected a nonempty waypoint list")
        times = []
        points = []
        for k, wp in enumerate(waypoints):
            wp = _mapping(wp, f"{path}[{k}]")
            for key in wp:
                if key not in ("time", "position"):
                    raise ScenarioError(f"{path}[{k}].{key}: unknown field")
            times.append(_number(_require(wp, "time", f"{path}[{k}]."),
                                 f"{path}[{k}].time", nonnegative=True))
            points.append(_position(_require(wp, "position", f"{path}[{k}]."),
                                    f"{path}[{k}].position"))
        times = np.array(times)
        if np.any(np.diff(times) <= 0.0):
            raise ScenarioError(f"{path}: waypoint times must strictly increase")
        trajectories[agent_id] = LeaderTrajectory(
            agent_id=agent_id, times=times, positions=np.array(points))

    failures = []
    failures_doc = doc.get("failures", [])
    if not isinstance(failures_doc, list):
        raise ScenarioError("failures: expected a list")
    seen_failed = set()
    for k, item in enumerate(failures_doc):
        item = _mapping(item, f"failures[{k}]")
        for key in item:
            if key not in ("agent", "time", "kind", "velocity"):
                raise ScenarioError(f"failures[{k}].{key}: unknown field")
        agent_id = _agent_id(_require(item, "agent", f"failures[{k}]."),
                             f"failures[{k}].agent")
        if agent_id not in agent_ids:
            raise ScenarioError(f"failures[{k}].agent: unknown id {agent_id}")
        if agent_id in seen_failed:
            raise ScenarioError(
                f"failures[{k}].agent: agent {agent_id} already has a failure"
            )
        seen_failed.add(agent_id)
        time = _number(_require(item, "time", f"failures[{k}]."),
                       f"failures[{k}].time", nonnegative=True)
        kind = _require(item, "kind", f"failures[{k}].")
        if kind not in FAILURE_KINDS:
            raise ScenarioError(
                f"failures[{k}].kind: must be one of {FAILURE_KINDS}, got {kind!r}"
            )
        velocity = None
        if kind == "drift":
            velocity = _position(_require(item, "velocity", f"failures[{k}]."),
                                 f"failures[{k}].velocity")
        elif item.get("velocity") is not None:
            raise ScenarioError(f"failures[{k}].velocity: only valid for drift")
        failures.append(FailureSpec(agent_id=agent_id, time=time, kind=kind,
                                    velocity=velocity))

    return ScenarioConfig(
        name=name, n=n, dt=dt, duration=duration, gain=gain, rho=rho, xi=xi,
        tolerances=tolerances, vehicle_radius=vehicle_radius,
        d_min_override=d_min_override, containment_half_size=half_size,
        containment_norm=norm, center_policy=center_policy, cem_u_inf=u_inf,
        cem_theta_inf=theta_inf, cem_radius=radius, cem_v_phi=v_phi,
        agent_ids=agent_ids, ref_positions=ref_positions,
        leader_override=leader_override, trajectories=trajectories,
        failures=tuple(failures),
    )
