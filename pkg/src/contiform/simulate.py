"""Fixed-step simulation loop: dynamics, detection, supervision, logging.

Every agent is a single integrator tracking its local desired position,
r' = g (r_d - r), integrated per tick with the classical 4th-order scheme.
Within one tick every computation reads the previous tick's position
snapshot: follower desired positions are frozen over the tick while leader
commands are sampled at the three integration stage times.  The loop is
strictly sequential and free of randomness, so identical configurations
produce bit-identical trajectory logs.

Per tick, in order: (1) desired positions per mode, (2) RK4 position
update for every agent, (3) failure kinematics override, (4) anomaly
checks (HDM only; the flagged set is frozen while CEM is active),
(5) supervisor transition, (6) one log row.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import anomaly, cem, geometry, hdm, refnet
from .automaton import Event, Mode, ModeState, transition
from .errors import (ConnectivityError, DegeneracyError, NetworkError,
                     NumericError, ScenarioError, SelectionError)
from .scenario import FailureSpec, ScenarioConfig, load_scenario

MODE_CODE = {Mode.HDM: 0, Mode.CEM: 1}
HEALTH_OK, HEALTH_FLAGGED, HEALTH_EXCLUDED = 1, 0, -1

# margin_ok codes: 1 satisfied, 0 violated, -1 not applicable (CEM)
MARGIN_OK, MARGIN_VIOLATED, MARGIN_NA = 1, 0, -1


@dataclass
class TrajectoryLog:
    """Complete per-tick record of one run.

    Row k holds the state at time k * dt; row 0 is the initial state.
    Arrays indexed [tick, agent] follow the scenario's agent order.
    """

    agent_ids: tuple
    n: int
    dt: float
    times: np.ndarray           # (T+1,)
    actual: np.ndarray          # (T+1, N, 3)
    local_desired: np.ndarray   # (T+1, N, 3)
    global_desired: np.ndarray  # (T+1, N, 3)
    weights: np.ndarray         # (T+1, N, n+1) transient weights, NaN if n/a
    bounds_lo: np.ndarray       # (T+1, N, n+1)
    bounds_hi: np.ndarray       # (T+1, N, n+1)
    health: np.ndarray          # (T+1, N) int8
    mode: np.ndarray            # (T+1,) int8
    center: np.ndarray          # (T+1, 3) containment center
    sigma: np.ndarray           # (T+1, 3) deformation singular values
    margin_ok: np.ndarray       # (T+1,) int8
    events: list = field(default_factory=list)
    epochs: list = field(default_factory=list)

    def digest(self):
        """SHA-256 over every logged array and the serialized events."""
        h = hashlib.sha256()
        for arr in (self.times, self.actual, self.local_desired,
                    self.global_desired, self.weights, self.bounds_lo,
                    self.bounds_hi, self.health, self.mode, self.center,
                    self.sigma, self.margin_ok):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(json.dumps(
            [[e.time, e.kind, e.payload] for e in self.events],
            sort_keys=True).encode())
        return h.hexdigest()

    def events_of_kind(self, kind):
        return [e for e in self.events if e.kind == kind]

    def mode_changes(self):
        return self.events_of_kind("mode_change")


class _Epoch:
    """Precomputed index caches for one reference-network epoch."""

    def __init__(self, network, idx, start_tick, delta, threshold):
        self.network = network
        self.start_tick = start_tick
        self.delta = delta
        self.threshold = threshold
        self.leader_idx = np.array([idx[a] for a in network.leaders], dtype=int)
        self.follower_idx = np.array([idx[a] for a in network.followers],
                                     dtype=int)
        self.order_idx = np.array([idx[a] for a in network.agent_order],
                                  dtype=int)
        k = network.n + 1
        f_count = len(network.followers)
        self.nbr_idx = np.zeros((f_count, k), dtype=int)
        self.static_w = np.zeros((f_count, k))
        for j, fid in enumerate(network.followers):
            nbrs = network.in_neighbors[fid]
            self.nbr_idx[j] = [idx[a] for a in nbrs]
            self.static_w[j] = [network.weights[(fid, a)] for a in nbrs]
        self.leader_ref = np.stack(
            [network.ref_positions[a] for a in network.leaders])
        # Prefactored leader-fit system (rows [ref | 1]); for n = 2 the
        # fourth row is the virtual normal point, exactly as in
        # hdm.fit_homogeneous_transform, so sigma_of matches it to rounding.
        self.planar = network.n == 2
        ref_rows = self.leader_ref
        if self.planar:
            normal = geometry.plane_normal(ref_rows[0], ref_rows[1],
                                           ref_rows[2])
            ref_rows = np.vstack([ref_rows, ref_rows[0] + normal])
        m = np.ones((4, 4))
        m[:, :3] = ref_rows
        self._fit_inv = np.linalg.inv(m)

    def sigma_of(self, leader_cmd):
        """Singular values of the commanded deformation, or None if the
        commanded leader simplex is degenerate."""
        if self.planar:
            e1 = leader_cmd[1] - leader_cmd[0]
            e2 = leader_cmd[2] - leader_cmd[0]
            raw = np.array([e2[1] * e1[2] - e2[2] * e1[1],
                            e2[2] * e1[0] - e2[0] * e1[2],
                            e2[0] * e1[1] - e2[1] * e1[0]])
            nrm = math.sqrt(raw @ raw)
            scale = math.sqrt((e1 @ e1) * (e2 @ e2))
            if nrm <= 1e-9 * max(scale, 1e-300):
                return None
            rhs = np.empty((4, 3))
            rhs[:3] = leader_cmd
            rhs[3] = leader_cmd[0] + raw / nrm
        else:
            rhs = leader_cmd
        sol = self._fit_inv @ rhs   # rows [Q^T; d]; sigma(Q^T) = sigma(Q)
        return _sym3_sigma(sol[:3])

    def meta(self):
        net = self.network
        return {
            "start_tick": int(self.start_tick),
            "leaders": [int(a) for a in net.leaders],
            "followers": [int(a) for a in net.followers],
            "in_neighbors": {int(f): [int(a) for a in nbrs]
                             for f, nbrs in net.in_neighbors.items()},
            "Xi_max": float(net.Xi_max),
            "delta": float(self.delta),
            "d_min": float(net.d_min),
            "sigma_threshold": float(self.threshold),
        }


def _sym3_sigma(q):
    """Singular values of a 3x3 matrix, sorted descending.

    Closed-form trigonometric eigenvalues of q q^T; an order of magnitude
    faster than np.linalg.svd for the per-tick margin series.
    """
    m = q @ q.T
    (a, d, e), (_, b, f), (_, _, c) = m.tolist()
    p1 = d * d + e * e + f * f
    tr = a + b + c
    if p1 == 0.0:
        eigs = sorted((a, b, c), reverse=True)
    else:
        qm = tr / 3.0
        p2 = (a - qm) ** 2 + (b - qm) ** 2 + (c - qm) ** 2 + 2.0 * p1
        p = math.sqrt(p2 / 6.0)
        b00, b11, b22 = (a - qm) / p, (b - qm) / p, (c - qm) / p
        b01, b02, b12 = d / p, e / p, f / p
        half_det = (b00 * (b11 * b22 - b12 * b12)
                    - b01 * (b01 * b22 - b12 * b02)
                    + b02 * (b01 * b12 - b11 * b02)) / 2.0
        phi = math.acos(min(1.0, max(-1.0, half_det))) / 3.0
        e1 = qm + 2.0 * p * math.cos(phi)
        e3 = qm + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
        eigs = (e1, tr - e1 - e3, e3)
    return np.sqrt(np.maximum(np.array(eigs), 0.0))


def _rk4_track(r, rd1, rd2, rd3, g, dt):
    """RK4 step of r' = g (rd(t) - r), rd sampled at t, t+dt/2, t+dt."""
    k1 = g * (rd1 - r)
    k2 = g * (rd2 - (r + 0.5 * dt * k1))
    k3 = g * (rd2 - (r + 0.5 * dt * k2))
    k4 = g * (rd3 - (r + dt * k3))
    return r + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


class Simulation:
    """Mutable state of one run; use step() or run_scenario to advance."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.dt = config.dt
        self.g = config.gain
        self.ids = tuple(config.agent_ids)
        self.idx = {a: i for i, a in enumerate(self.ids)}
        self.n_agents = len(self.ids)
        self.n = config.n
        self.positions = config.ref_positions.copy()
        self.tick = 0
        self.total_ticks = int(math.floor(config.duration / config.dt + 1e-9))
        self.excluded = set()
        self.flagged = frozenset()
        self.mode = Mode.HDM
        self.entered_at = 0.0
        self._tracking_center = config.center_policy == "tracking"
        self._healthy_idx = np.arange(self.n_agents)
        self.center = self.positions.mean(axis=0)
        self.events = []
        self.epochs = []
        self._deviating_leaders = set()

        self.failures = {}
        self.failure_anchor = {}   # agent id -> (t_active, anchor position)
        for spec in config.failures:
            self._register_failure(spec, during_run=False)

        # CEM machinery, populated at mode entry
        self.flow = None
        self.cem_targets = None
        self.psi0 = None
        self.healthy_idx = None

        try:
            self._build_network(initial=True)
        except (DegeneracyError, SelectionError, ConnectivityError,
                NetworkError) as exc:
            raise ScenarioError(f"initial network build failed: {exc}") from exc

        self._alloc_log()
        self._detect(initial=True)
        self._stash_hdm_row()
        self._write_row(0)

    # -- construction helpers -------------------------------------------

    def _register_failure(self, spec: FailureSpec, during_run: bool):
        if spec.agent_id not in self.idx:
            raise ValueError(f"unknown agent {spec.agent_id} in failure spec")
        end_time = self.total_ticks * self.dt if during_run \
            else self.config.duration
        if spec.time >= end_time and not during_run:
            warnings.warn(
                f"failure of agent {spec.agent_id} at t={spec.time} is beyond "
                f"the run duration and has no effect", stacklevel=3)
            self.events.append(Event(
                time=0.0, kind="failure_ignored",
                payload={"agent": int(spec.agent_id), "time": float(spec.time)}))
            return
        self.failures[spec.agent_id] = spec

    def _build_network(self, initial):
        members = {a: self.positions[self.idx[a]]
                   for a in self.ids if a not in self.excluded}
        override = self.config.leader_override
        if override is not None and any(a not in members for a in override):
            override = None
        network = None
        if override is not None:
            try:
                network = refnet.build_reference_configuration(
                    members, n=self.n, rho=self.config.rho, xi=self.config.xi,
                    leader_override=list(override))
            except SelectionError as exc:
                if initial:
                    raise
                self.events.append(Event(
                    time=self.clock, kind="leader_fallback",
                    payload={"reason": str(exc)}))
        if network is None:
            network = refnet.build_reference_configuration(
                members, n=self.n, rho=self.config.rho, xi=self.config.xi)
        _, delta = refnet.deviation_bound(network.D, network.B,
                                          *self.config.tolerances)
        d_min = network.d_min if self.config.d_min_override is None \
            else self.config.d_min_override
        threshold, _ = hdm.collision_safety_margin(
            np.ones(3), delta, self.config.vehicle_radius, d_min)
        self.network = network
        self.epoch = _Epoch(network, self.idx, self.tick, delta, threshold)
        self.epochs.append(self.epoch)
        self.delta = delta
        self._deviating_leaders = set()
        self._anchor_trajectories()

    def _anchor_trajectories(self):
        """Precompute leader commands on the half-step stage grid.

        Waypoint profiles are re-anchored at the leader's position when the
        network is built: r_c(t) = r(t_anchor) + wp(t) - wp(t_anchor).
        Leaders without a waypoint list hold their anchor position.
        """
        t0 = self.tick * self.dt
        remaining = self.total_ticks - self.tick
        grid = t0 + 0.5 * self.dt * np.arange(2 * remaining + 1)
        leaders = self.network.leaders
        cmd = np.empty((len(leaders), grid.size, 3))
        for j, lid in enumerate(leaders):
            anchor = self.positions[self.idx[lid]]
            traj = self.config.trajectories.get(lid)
            if traj is None:
                cmd[j] = anchor
            else:
                wp0 = traj.position(t0)
                cmd[j] = anchor + traj.position(grid) - wp0
        self._leader_cmd = cmd
        self._grid_base_tick = self.tick

    def _alloc_log(self):
        rows = self.total_ticks + 1
        n, k = self.n_agents, self.n + 1
        self.log = TrajectoryLog(
            agent_ids=self.ids, n=self.n, dt=self.dt,
            times=np.arange(rows) * self.dt,
            actual=np.zeros((rows, n, 3)),
            local_desired=np.zeros((rows, n, 3)),
            global_desired=np.zeros((rows, n, 3)),
            weights=np.full((rows, n, k), np.nan),
            bounds_lo=np.full((rows, n, k), np.nan),
            bounds_hi=np.full((rows, n, k), np.nan),
            health=np.full((rows, n), HEALTH_OK, dtype=np.int8),
            mode=np.zeros(rows, dtype=np.int8),
            center=np.zeros((rows, 3)),
            sigma=np.full((rows, 3), np.nan),
            margin_ok=np.full(rows, MARGIN_NA, dtype=np.int8),
            events=self.events,
            epochs=[],
        )

    # -- per-tick pieces -------------------------------------------------

    @property
    def clock(self):
        return self.tick * self.dt

    def _leader_stages(self):
        base = 2 * (self.tick - self._grid_base_tick)
        return (self._leader_cmd[:, base, :],
                self._leader_cmd[:, base + 1, :],
                self._leader_cmd[:, base + 2, :])

    def _stash_hdm_row(self):
        """Prepare the logged desired positions for a non-integration row
        (the initial row and the row written right after a rebuild)."""
        ep = self.epoch
        rd = self.positions.copy()
        ordered = self.positions[ep.order_idx]
        rd[ep.follower_idx] = ep.network.W @ ordered
        base = 2 * (self.tick - self._grid_base_tick)
        cmd = self._leader_cmd[:, base, :]
        rd[ep.leader_idx] = cmd
        self._row_local = rd
        self._row_leader_cmd = cmd

    def _hdm_desired(self):
        """(rd1, rd2, rd3) for the current HDM tick, plus logging values."""
        ep = self.epoch
        rd = self.positions.copy()   # excluded and flagged rows hold position
        ordered = self.positions[ep.order_idx]
        rd[ep.follower_idx] = ep.network.W @ ordered
        c1, c2, c3 = self._leader_stages()
        rd1 = rd.copy()
        rd2 = rd.copy()
        rd3 = rd
        rd1[ep.leader_idx] = c1
        rd2[ep.leader_idx] = c2
        rd3[ep.leader_idx] = c3
        self._row_local = rd3
        self._row_leader_cmd = c3
        return rd1, rd2, rd3

    def _cem_desired(self):
        """Advance streamline targets one step; all stages track the result."""
        idx = self.healthy_idx
        targets = self.cem_targets[idx]
        stepped, stagnated, projected = cem.step_streamline_many(
            targets, self.flow, self.config.cem_v_phi, self.dt, self.psi0)
        self.cem_targets[idx] = stepped
        t_next = self.clock + self.dt
        for flag, kind in ((stagnated, "stagnation"),
                           (projected, "disk_projection")):
            if np.any(flag):
                for j in np.flatnonzero(flag):
                    agent = self.ids[idx[j]]
                    if agent not in self._cem_event_latch[kind]:
                        self._cem_event_latch[kind].add(agent)
                        self.events.append(Event(
                            time=t_next, kind=kind,
                            payload={"agent": int(agent)}))
        rd = self.positions.copy()
        rd[idx] = stepped
        return rd, rd, rd

    def _apply_failures(self, t_start, t_end):
        for agent_id, spec in self.failures.items():
            if t_start < spec.time - 1e-12:
                continue
            i = self.idx[agent_id]
            if agent_id not in self.failure_anchor:
                # anchor at the position held when the failure activates
                self.failure_anchor[agent_id] = (t_start, self._snapshot[i].copy())
                self.events.append(Event(
                    time=t_start, kind="failure_active",
                    payload={"agent": int(agent_id), "kind": spec.kind}))
            t_active, anchor = self.failure_anchor[agent_id]
            if spec.kind == "freeze":
                self.positions[i] = anchor
            else:
                self.positions[i] = anchor + spec.velocity * (t_end - t_active)

    def _detect(self, initial=False):
        """Run the per-follower bound checks; returns the flagged id set.

        Rows of the log are filled by _write_row from the stashed arrays.
        During CEM the detector is suspended and the flagged set frozen.
        """
        ep = self.epoch
        if self.mode is Mode.CEM:
            self._det_rows = None
            return self.flagged
        vertices = self.positions[ep.nbr_idx]
        queries = self.positions[ep.follower_idx]
        w, lo, hi, healthy = anomaly.evaluate_followers_batch(
            vertices, queries, ep.static_w, self.delta, self.n,
            xi=self.config.xi)
        self._det_rows = (ep.follower_idx, w, lo, hi)
        if initial:
            return frozenset()
        flagged = frozenset(
            ep.network.followers[j] for j in np.flatnonzero(~healthy))
        return flagged

    def _refresh_healthy(self):
        mask = np.ones(self.n_agents, dtype=bool)
        for a in self.excluded:
            mask[self.idx[a]] = False
        for a in self.flagged:
            mask[self.idx[a]] = False
        self._healthy_idx = np.flatnonzero(mask)

    def _update_center(self):
        if self._tracking_center or self.mode is Mode.HDM:
            self.center = self.positions[self._healthy_idx].mean(axis=0)

    def _enter_cem(self, clock):
        failed_xy = np.stack([self.positions[self.idx[a]][:2]
                              for a in sorted(self.flagged)])
        self.flow = cem.build_flow_from_failures(
            failed_xy, self.config.cem_u_inf, self.config.cem_theta_inf,
            radius_override=self.config.cem_radius)
        healthy = [a for a in self.ids
                   if a not in self.excluded and a not in self.flagged]
        self.healthy_idx = np.array([self.idx[a] for a in healthy], dtype=int)
        pos_map = {a: self.positions[self.idx[a]] for a in healthy}
        psi0 = cem.assign_stream_constants(pos_map, self.flow)
        self.psi0 = np.array([psi0[a] for a in healthy])
        self.cem_targets = self.positions.copy()
        self._cem_event_latch = {"stagnation": set(), "disk_projection": set()}

    def _exit_cem(self, clock):
        self.excluded |= set(self.flagged)
        self.flagged = frozenset()
        self._refresh_healthy()
        self.flow = None
        self.cem_targets = None
        self.psi0 = None
        self.healthy_idx = None
        try:
            self._build_network(initial=False)
        except (DegeneracyError, SelectionError, ConnectivityError,
                NetworkError) as exc:
            raise NumericError(
                f"reference rebuild failed at t={clock:.6f}: {exc}") from exc

    def _write_row(self, row):
        log = self.log
        log.actual[row] = self.positions
        log.mode[row] = MODE_CODE[self.mode]
        log.center[row] = self.center
        for a in self.excluded:
            log.health[row, self.idx[a]] = HEALTH_EXCLUDED
        for a in self.flagged:
            log.health[row, self.idx[a]] = HEALTH_FLAGGED
        if self._det_rows is not None:
            fol_idx, w, lo, hi = self._det_rows
            log.weights[row, fol_idx] = w
            log.bounds_lo[row, fol_idx] = lo
            log.bounds_hi[row, fol_idx] = hi
        ep = self.epoch
        if self.mode is Mode.HDM:
            leader_cmd = self._row_leader_cmd
            glob = np.full((self.n_agents, 3), np.nan)
            glob[ep.leader_idx] = leader_cmd
            glob[ep.follower_idx] = ep.network.W_L @ leader_cmd
            log.local_desired[row] = self._row_local
            log.global_desired[row] = glob
            sv = ep.sigma_of(leader_cmd)
            if sv is None:
                log.margin_ok[row] = MARGIN_VIOLATED
            else:
                log.sigma[row] = sv
                log.margin_ok[row] = MARGIN_OK if sv[-1] >= ep.threshold \
                    else MARGIN_VIOLATED
            diff = self.positions[ep.leader_idx] - leader_cmd
            lag = np.sqrt(np.einsum("ij,ij->i", diff, diff))
            for j in np.flatnonzero(lag > self.delta):
                lid = ep.network.leaders[j]
                if lid not in self._deviating_leaders:
                    self._deviating_leaders.add(lid)
                    self.events.append(Event(
                        time=row * self.dt, kind="leader_deviation",
                        payload={"agent": int(lid), "error": float(lag[j])}))
        else:
            desired = np.full((self.n_agents, 3), np.nan)
            desired[self.healthy_idx] = self.cem_targets[self.healthy_idx]
            log.local_desired[row] = desired
            log.global_desired[row] = desired
            log.margin_ok[row] = MARGIN_NA

    # -- main loop --------------------------------------------------------

    def step(self):
        """Advance exactly one tick."""
        if self.tick >= self.total_ticks:
            raise RuntimeError("simulation already complete")
        t_start = self.clock
        t_end = t_start + self.dt
        self._snapshot = self.positions

        if self.mode is Mode.HDM:
            rd1, rd2, rd3 = self._hdm_desired()
        else:
            rd1, rd2, rd3 = self._cem_desired()
        self.positions = _rk4_track(self.positions, rd1, rd2, rd3,
                                    self.g, self.dt)
        self._apply_failures(t_start, t_end)
        if not np.all(np.isfinite(self.positions)):
            bad = [self.ids[i] for i in
                   np.flatnonzero(~np.isfinite(self.positions).all(axis=1))]
            raise NumericError(
                f"non-finite position for agents {bad} at tick {self.tick}, "
                f"t={t_end:.6f}")
        self.tick += 1

        new_flags = self._detect()
        if new_flags != self.flagged:
            self.flagged = new_flags
            self._refresh_healthy()
        self._update_center()
        # HDM with nothing flagged is a fixed point of the automaton, so
        # the transition call is skipped on quiescent ticks
        if self.flagged or self.mode is Mode.CEM:
            state = ModeState(
                mode=self.mode, entered_at=self.entered_at,
                containment_center=self.center,
                containment_half_size=self.config.containment_half_size,
                norm_kind=self.config.containment_norm)
            flagged_pos = {a: self.positions[self.idx[a]]
                           for a in self.flagged}
            next_state, events = transition(state, None, self.flagged,
                                            flagged_pos, t_end)
            if next_state.mode is not self.mode:
                self.mode = next_state.mode
                self.entered_at = next_state.entered_at
                self.events.extend(events)
                if self.mode is Mode.CEM:
                    self._enter_cem(t_end)
                else:
                    self._exit_cem(t_end)
                    self._stash_hdm_row()
                    self._det_rows = None
        self._write_row(self.tick)

    def run(self):
        while self.tick < self.total_ticks:
            self.step()
        self.log.epochs = [ep.meta() for ep in self.epochs]
        return self.log


def step_simulation(sim: Simulation, dt=None):
    """Advance one tick; dt, if given, must equal the configured step."""
    if dt is not None and abs(dt - sim.dt) > 1e-15:
        raise ValueError(
            f"fixed-step integrator: dt must equal the configured "
            f"{sim.dt}, got {dt}")
    sim.step()
    return sim


def inject_failure(sim: Simulation, agent_id, kind, time, velocity=None):
    """Schedule a failure on a running simulation.

    kind "freeze" holds the agent's position from the given time;
    "drift" moves it at the constant velocity.  A time at or beyond the
    run's end warns and has no effect.
    """
    if agent_id not in sim.idx:
        raise ValueError(f"unknown agent {agent_id}")
    if kind not in ("freeze", "drift"):
        raise ValueError(f"failure kind must be freeze or drift, got {kind!r}")
    if kind == "drift":
        if velocity is None:
            raise ValueError("drift failure requires a velocity")
        velocity = np.asarray(velocity, dtype=np.float64)
        if velocity.shape == (2,):
            velocity = np.append(velocity, 0.0)
        if velocity.shape != (3,):
            raise ValueError("drift velocity must be a 2- or 3-vector")
    if agent_id in sim.failures:
        raise ValueError(f"agent {agent_id} already has a failure")
    spec = FailureSpec(agent_id=agent_id, time=float(time), kind=kind,
                       velocity=velocity)
    end_time = sim.total_ticks * sim.dt
    if spec.time >= end_time:
        warnings.warn(
            f"failure of agent {agent_id} at t={spec.time} is beyond the run "
            f"duration and has no effect", stacklevel=2)
        sim.events.append(Event(
            time=sim.clock, kind="failure_ignored",
            payload={"agent": int(agent_id), "time": float(spec.time)}))
        return sim
    sim.failures[agent_id] = spec
    return sim


def run_scenario(config) -> TrajectoryLog:
    """Execute a full scenario; accepts a ScenarioConfig, path, or text."""
    if not isinstance(config, ScenarioConfig):
        config = load_scenario(config)
    return Simulation(config).run()
