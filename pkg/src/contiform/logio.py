"""Writers and readers for simulation run artifacts.

A run directory holds:
  trajectory.csv   time, then per agent: x,y,z, xd,yd,zd, xc,yc,zc, health
  events.csv       time, kind, payload (JSON)
  meta.json        scenario identity, network epochs, log digest
  series.npz       every logged array at full precision

trajectory.csv is the human-facing export; series.npz is the exact record
and what `analyze` reads back.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

_AGENT_COLS = ("x", "y", "z", "xd", "yd", "zd", "xc", "yc", "zc", "health")


def _trajectory_matrix(log, stride):
    rows = log.times[::stride].shape[0]
    n = len(log.agent_ids)
    mat = np.empty((rows, 1 + 10 * n))
    mat[:, 0] = log.times[::stride]
    for i in range(n):
        base = 1 + 10 * i
        mat[:, base:base + 3] = log.actual[::stride, i, :]
        mat[:, base + 3:base + 6] = log.local_desired[::stride, i, :]
        mat[:, base + 6:base + 9] = log.global_desired[::stride, i, :]
        mat[:, base + 9] = log.health[::stride, i]
    return mat


def _trajectory_header(agent_ids):
    cols = ["time"]
    for a in agent_ids:
        cols.extend(f"{a}_{c}" for c in _AGENT_COLS)
    return cols


def write_outputs(log, out_dir, fmt="csv", stride=1):
    """Write one run's artifacts; returns the list of paths written."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    if fmt == "csv":
        traj_path = os.path.join(out_dir, "trajectory.csv")
        np.savetxt(traj_path, _trajectory_matrix(log, stride),
                   fmt="%.10g", delimiter=",",
                   header=",".join(_trajectory_header(log.agent_ids)),
                   comments="")
        paths.append(traj_path)
        ev_path = os.path.join(out_dir, "events.csv")
        with open(ev_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "kind", "payload"])
            for e in log.events:
                writer.writerow([f"{e.time:.10g}", e.kind,
                                 json.dumps(e.payload, sort_keys=True)])
        paths.append(ev_path)
    else:
        traj_path = os.path.join(out_dir, "trajectory.json")
        doc = {"time": log.times[::stride].tolist(), "agents": {}}
        for i, a in enumerate(log.agent_ids):
            doc["agents"][str(a)] = {
                "actual": log.actual[::stride, i, :].tolist(),
                "local_desired": log.local_desired[::stride, i, :].tolist(),
                "global_desired": log.global_desired[::stride, i, :].tolist(),
                "health": log.health[::stride, i].tolist(),
            }
        with open(traj_path, "w") as fh:
            json.dump(doc, fh)
        paths.append(traj_path)
        ev_path = os.path.join(out_dir, "events.json")
        with open(ev_path, "w") as fh:
            json.dump([{"time": e.time, "kind": e.kind, "payload": e.payload}
                       for e in log.events], fh, indent=2)
        paths.append(ev_path)

    npz_path = os.path.join(out_dir, "series.npz")
    np.savez(npz_path,
             agent_ids=np.array(log.agent_ids),
             times=log.times, actual=log.actual,
             local_desired=log.local_desired,
             global_desired=log.global_desired,
             weights=log.weights, bounds_lo=log.bounds_lo,
             bounds_hi=log.bounds_hi, health=log.health, mode=log.mode,
             center=log.center, sigma=log.sigma, margin_ok=log.margin_ok)
    paths.append(npz_path)

    meta_path = os.path.join(out_dir, "meta.json")
    with open(meta_path, "w") as fh:
        json.dump({
            "n": log.n, "dt": log.dt,
            "agent_ids": [int(a) for a in log.agent_ids],
            "rows": int(log.times.shape[0]),
            "stride": stride,
            "epochs": log.epochs,
            "digest": log.digest(),
            "mode_codes": {"0": "HDM", "1": "CEM"},
            "health_codes": {"1": "healthy", "0": "flagged", "-1": "excluded"},
        }, fh, indent=2)
    paths.append(meta_path)
    return paths


def load_outputs(path):
    """Load a run directory (or its meta.json / series.npz) for analysis."""
    if os.path.isdir(path):
        base = path
    else:
        base = os.path.dirname(path) or "."
    npz_path = os.path.join(base, "series.npz")
    meta_path = os.path.join(base, "meta.json")
    if not os.path.exists(npz_path):
        raise FileNotFoundError(f"no series.npz under {base!r}")
    data = dict(np.load(npz_path))
    if os.path.exists(meta_path):
        with open(meta_path) as fh:
            data["meta"] = json.load(fh)
    else:
        data["meta"] = {}
    return data
