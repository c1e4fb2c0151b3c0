"""Reference network construction.

From a static reference formation this module decides which agents sit
on the team boundary, which of those act as leaders, assigns every
follower an enclosing in-neighbor simplex, and assembles the weight
matrices

    W = [B | A],  D = -I + A,  W_L = -D^-1 B

whose rows reproduce each follower's reference position from its
in-neighbors. W_L maps leader positions to follower positions under any
homogeneous deformation, which is what makes local tracking equal
global tracking.

Search cost is combinatorial in team size (all (n+1)-tuples in the
worst case); intended for teams of a few dozen agents.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConnectivityError, DegeneracyError, NetworkError, SelectionError
from .geometry import DEFAULT_XI, as_position, lambda_nd, lambda_nd_batch, rank_simplex

# Inclusion-margin defaults per dimension; must stay below 1/(n+1).
DEFAULT_RHO = {2: 0.1, 3: 0.05}

# Fourth-weight tolerance for planar admissibility checks.
LAMBDA4_TOL = 1e-9

# Initial k-nearest candidate pool for the in-neighbor search.
SEARCH_K0 = 8

_CHUNK = 4096


@dataclass(frozen=True)
class ReferenceConfiguration:
    """Frozen result of a network build over one reference formation."""

    n: int
    rho: float
    xi: float
    ids: tuple                      # all agent ids, ascending
    ref_positions: dict             # id -> (3,) array
    boundary: frozenset
    interior: frozenset
    leaders: tuple                  # ordered, len n+1
    followers: tuple                # ordered ascending, len N-n-1
    in_neighbors: dict              # follower id -> tuple of n+1 ids
    weights: dict                   # (follower id, neighbor id) -> float
    W: np.ndarray                   # (F, N) rows = followers, cols = leaders then followers
    A: np.ndarray                   # (F, F) follower columns of W
    B: np.ndarray                   # (F, n+1) leader columns of W
    D: np.ndarray                   # -I + A, Hurwitz
    W_L: np.ndarray                 # (F, n+1) leader-to-follower map
    Xi_max: float                   # disturbance amplification factor
    d_min: float = field(default=np.nan)  # min pairwise reference distance

    @property
    def agent_order(self):
        """Column order of W: leaders first, then followers."""
        return tuple(self.leaders) + tuple(self.followers)


def _positions_array(ref_positions):
    ids = sorted(ref_positions)
    pos = np.stack([as_position(ref_positions[i]) for i in ids])
    return ids, pos


def _check_distinct(ids, pos):
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    np.fill_diagonal(dist, np.inf)
    dmin = float(dist.min())
    if dmin <= 1e-12:
        i, j = np.unravel_index(np.argmin(dist), dist.shape)
        raise DegeneracyError(f"agents {ids[i]} and {ids[j]} are coincident")
    return dmin


def _admissible_mask(vertices, query, n, rho, xi):
    """Admissibility of each candidate simplex: all real weights > rho."""
    queries = np.broadcast_to(query, (vertices.shape[0], 3))
    lam = lambda_nd_batch(vertices, queries, n, xi, on_degenerate="nan")
    ok = np.all(lam[:, : n + 1] > rho, axis=1) & np.all(np.isfinite(lam), axis=1)
    if n == 2:
        ok &= np.abs(lam[:, 3]) <= LAMBDA4_TOL
    return ok, lam


def _has_enclosing_simplex(own, cand_pos, n, rho, xi):
    """True if any (n+1)-tuple of candidates strictly encloses own."""
    k = cand_pos.shape[0]
    if k < n + 1:
        return False
    combos = itertools.combinations(range(k), n + 1)
    while True:
        chunk = np.array(list(itertools.islice(combos, _CHUNK)), dtype=int)
        if chunk.size == 0:
            return False
        ok, _ = _admissible_mask(cand_pos[chunk], own, n, rho, xi)
        if np.any(ok):
            return True


def classify_boundary_interior(ref_positions, n: int = 2, rho: float = None,
                               xi: float = DEFAULT_XI):
    """Split agents into (boundary_set, interior_set).

    An agent is interior exactly when some (n+1)-subset of the other
    agents encloses it with every weight above rho; everything else is
    boundary. For planar general-position formations with small rho the
    boundary set coincides with the convex hull vertices.
    """
    rho = DEFAULT_RHO[n] if rho is None else rho
    _validate_rho(rho, n)
    ids, pos = _positions_array(ref_positions)
    if len(ids) < n + 2:
        raise DegeneracyError(f"need at least {n + 2} agents for n={n}, got {len(ids)}")
    _check_distinct(ids, pos)
    boundary, interior = set(), set()
    for idx, agent in enumerate(ids):
        others = np.delete(pos, idx, axis=0)
        own = pos[idx]
        # Sort candidates by distance so enclosing tuples are found early.
        order = np.argsort(np.linalg.norm(others - own, axis=1), kind="stable")
        if _has_enclosing_simplex(own, others[order], n, rho, xi):
            interior.add(agent)
        else:
            boundary.add(agent)
    return frozenset(boundary), frozenset(interior)


def _validate_rho(rho, n):
    if not (0.0 < rho < 1.0 / (n + 1)):
        raise ValueError(f"rho must lie in (0, 1/{n + 1}) for n={n}, got {rho}")


def select_leaders(boundary, ref_positions, n: int = 2, override=None):
    """Pick the n+1 leader agents from the boundary set.

    With an override: validate membership, count and non-degeneracy and
    return it unchanged (order preserved). Otherwise choose the tuple of
    boundary agents maximizing simplex measure (triangle area for n=2,
    tetrahedron volume for n=3), ties broken by lexicographically
    smallest id tuple.
    """
    boundary = set(boundary)
    if override is not None:
        override = tuple(override)
        if len(override) != n + 1:
            raise SelectionError(f"leader override needs {n + 1} ids, got {len(override)}")
        if len(set(override)) != len(override):
            raise SelectionError(f"leader override has duplicate ids: {override}")
        missing = [i for i in override if i not in boundary]
        if missing:
            raise SelectionError(f"leader override ids not on boundary: {missing}")
        pts = [ref_positions[i] for i in override]
        if rank_simplex(pts, n) != n:
            raise SelectionError(f"leader override {override} is degenerate")
        return override
    cands = sorted(boundary)
    if len(cands) < n + 1:
        raise SelectionError(f"boundary has {len(cands)} agents, need {n + 1}")
    pos = {i: as_position(ref_positions[i]) for i in cands}
    best, best_measure = None, -1.0
    for combo in itertools.combinations(cands, n + 1):
        pts = [pos[i] for i in combo]
        if n == 2:
            measure = 0.5 * np.linalg.norm(np.cross(pts[1] - pts[0], pts[2] - pts[0]))
        else:
            edges = np.stack([pts[k] - pts[0] for k in range(1, 4)])
            measure = abs(np.linalg.det(edges)) / 6.0
        if measure > best_measure:
            best, best_measure = combo, measure
    if best is None or best_measure <= 0.0:
        raise SelectionError("boundary simplexes are all degenerate")
    return best


def find_in_neighbors(agent_id, ref_positions, n: int = 2, rho: float = None,
                      xi: float = DEFAULT_XI, leaders=None, interior=None):
    """In-neighbor tuple of one follower.

    Boundary followers receive the full leader tuple verbatim. Interior
    followers get the admissible enclosing simplex minimizing the summed
    distance to the agent; ties break to the lexicographically smallest
    id tuple. The candidate pool starts at the 8 nearest agents and
    grows until no farther tuple can beat the best sum found, so the
    result equals a full enumeration.
    """
    rho = DEFAULT_RHO[n] if rho is None else rho
    _validate_rho(rho, n)
    if leaders is None or interior is None:
        boundary_set, interior_set = classify_boundary_interior(ref_positions, n, rho, xi)
        leaders = select_leaders(boundary_set, ref_positions, n) if leaders is None else leaders
        interior = interior_set
    if agent_id not in interior:
        return tuple(leaders)
    own = as_position(ref_positions[agent_id])
    other_ids = np.array(sorted(i for i in ref_positions if i != agent_id))
    pos = np.stack([as_position(ref_positions[i]) for i in other_ids])
    dists = np.linalg.norm(pos - own, axis=1)
    order = np.lexsort((other_ids, dists))
    other_ids, pos, dists = other_ids[order], pos[order], dists[order]
    total = len(other_ids)

    k = min(SEARCH_K0, total)
    evaluated = 0  # combos among the first `evaluated` candidates are done
    best_sum, best_tuple = np.inf, None
    while True:
        combos = [c for c in itertools.combinations(range(k), n + 1) if c[-1] >= evaluated]
        if combos:
            combos = np.array(combos, dtype=int)
            ok, _ = _admissible_mask(pos[combos], own, n, rho, xi)
            if np.any(ok):
                sums = dists[combos[ok]].sum(axis=1)
                for row, s in zip(combos[ok], sums):
                    ids_tuple = tuple(sorted(int(other_ids[r]) for r in row))
                    if s < best_sum or (s == best_sum and ids_tuple < best_tuple):
                        best_sum, best_tuple = s, ids_tuple
        evaluated = k
        if k == total:
            break
        # A tuple using any unseen candidate costs at least its distance
        # plus the two (n) smallest distances; stop once that cannot win.
        if best_tuple is not None and dists[k] + dists[: n].sum() >= best_sum:
            break
        k = min(2 * k, total)
    if best_tuple is None:
        raise ConnectivityError(agent_id)
    return best_tuple


def communication_weights(agent_id, neighbor_ids, ref_positions, n: int = 2,
                          xi: float = DEFAULT_XI):
    """Static weights of one follower against its in-neighbor simplex."""
    pts = [ref_positions[i] for i in neighbor_ids]
    own = ref_positions[agent_id]
    if n == 2:
        lam = lambda_nd(pts[0], pts[1], pts[2], None, own, 2, xi)
    else:
        lam = lambda_nd(pts[0], pts[1], pts[2], pts[3], own, 3, xi)
    return lam[: n + 1]


def build_weight_matrices(leaders, followers, in_neighbors, weights):
    """Assemble W = [B | A], D = -I + A and W_L = -D^-1 B.

    Columns follow leaders-then-followers order; row j belongs to
    followers[j]. Raises NetworkError when D is singular or not Hurwitz
    (a follower subset feeding only on itself).
    """
    leaders, followers = tuple(leaders), tuple(followers)
    order = leaders + followers
    col = {a: k for k, a in enumerate(order)}
    f_count, l_count = len(followers), len(leaders)
    W = np.zeros((f_count, len(order)))
    for j, fid in enumerate(followers):
        for nid in in_neighbors[fid]:
            W[j, col[nid]] = weights[(fid, nid)]
    B = W[:, :l_count].copy()
    A = W[:, l_count:].copy()
    D = -np.eye(f_count) + A
    eig = np.linalg.eigvals(D)
    if np.any(eig.real >= 0.0):
        raise NetworkError(
            f"D is not Hurwitz (max real eigenvalue {eig.real.max():.3e}); "
            "followers are not connected through to the leaders"
        )
    try:
        W_L = np.linalg.solve(D, -B)
    except np.linalg.LinAlgError as exc:
        raise NetworkError("singular D: disconnected followers") from exc
    return W, A, B, D, W_L


def deviation_bound(D, B, delta_x, delta_y, delta_z):
    """(Xi_max, Delta): worst-case amplification and 3-D deviation bound.

    Xi_max = max over follower rows of (-sum_j D^-1_lj + sum_j B_lj);
    Delta = Xi_max * sqrt(dx^2 + dy^2 + dz^2) bounds every agent's
    distance to its global desired position when all local tracking
    errors stay within the per-axis tolerances.
    """
    for name, v in (("delta_x", delta_x), ("delta_y", delta_y), ("delta_z", delta_z)):
        if v < 0:
            raise ValueError(f"{name} must be >= 0, got {v}")
    try:
        Dinv = np.linalg.inv(np.asarray(D, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise NetworkError("singular D in deviation_bound") from exc
    xi_max = float(np.max(-Dinv.sum(axis=1) + np.asarray(B, dtype=float).sum(axis=1)))
    delta = xi_max * float(np.sqrt(delta_x ** 2 + delta_y ** 2 + delta_z ** 2))
    return xi_max, delta


def build_reference_configuration(ref_positions, n: int = 2, rho: float = None,
                                  xi: float = DEFAULT_XI, leader_override=None):
    """Full network build: classify, select leaders, wire followers.

    Validates the structural invariants the rest of the library leans
    on: weight rows sum to one, D Hurwitz, -D^-1 entrywise nonnegative,
    W_L rows sum to one.
    """
    rho = DEFAULT_RHO[n] if rho is None else rho
    _validate_rho(rho, n)
    ids, pos = _positions_array(ref_positions)
    if len(ids) < n + 2:
        raise DegeneracyError(f"need at least {n + 2} agents for n={n}, got {len(ids)}")
    d_min = _check_distinct(ids, pos)
    positions = {i: p for i, p in zip(ids, pos)}
    boundary, interior = classify_boundary_interior(positions, n, rho, xi)
    leaders = select_leaders(boundary, positions, n, leader_override)
    followers = tuple(i for i in ids if i not in set(leaders))
    in_neighbors, weights = {}, {}
    for fid in followers:
        nbrs = find_in_neighbors(fid, positions, n, rho, xi,
                                 leaders=leaders, interior=interior)
        w = communication_weights(fid, nbrs, positions, n, xi)
        in_neighbors[fid] = tuple(nbrs)
        for nid, wv in zip(nbrs, w):
            weights[(fid, nid)] = float(wv)
    W, A, B, D, W_L = build_weight_matrices(leaders, followers, in_neighbors, weights)
    row_err = np.abs(W.sum(axis=1) - 1.0)
    if np.any(row_err > 1e-9):
        raise NetworkError(f"weight row sum off by {row_err.max():.3e}")
    if np.any(-np.linalg.inv(D) < -1e-12):
        raise NetworkError("-D^-1 has negative entries")
    wl_err = np.abs(W_L.sum(axis=1) - 1.0)
    if np.any(wl_err > 1e-9):
        raise NetworkError(f"W_L row sum off by {wl_err.max():.3e}")
    xi_max, _ = deviation_bound(D, B, 1.0, 0.0, 0.0)
    return ReferenceConfiguration(
        n=n, rho=rho, xi=xi, ids=tuple(ids), ref_positions=positions,
        boundary=boundary, interior=interior, leaders=tuple(leaders),
        followers=followers, in_neighbors=in_neighbors, weights=weights,
        W=W, A=A, B=B, D=D, W_L=W_L, Xi_max=xi_max, d_min=d_min,
    )
