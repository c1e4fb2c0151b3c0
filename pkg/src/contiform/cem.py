"""Containment Exclusion Mode: uniform-plus-doublet planar flow fields.

The desired motion of every healthy agent in CEM follows an ideal planar
flow built by superposing a uniform stream (speed u_inf, heading theta_inf)
with one doublet per failed agent.  Each doublet wraps its agent with a
circular exclusion disk of radius sqrt(delta / u_inf); the combined stream
function vanishes on that circle, so no streamline crosses it.

Conventions.  A doublet with center (a, b), strength delta and orientation
gamma contributes the complex potential

    W_D(z) = -delta * exp(1j * gamma) / (z - (a + 1j b))

whose real and imaginary parts are

    phi_D = -delta * (cos(gamma) dx + sin(gamma) dy) / rho^2
    psi_D =  delta * (cos(gamma) dy - sin(gamma) dx) / rho^2

with dx = x - a, dy = y - b, rho^2 = dx^2 + dy^2.  The pair is a true
harmonic-conjugate pair (Cauchy-Riemann holds analytically), and with the
orientation gamma = theta_inf + pi the combined field is the classical flow
past a cylinder: stagnation points on the upstream/downstream axis and the
zero streamline on the circle of radius sqrt(delta / u_inf).

All evaluation routines are pure and accept scalars or numpy arrays.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field as dataclass_field
from typing import Protocol

import numpy as np

from .errors import FlowSingularityError, ScenarioError, StagnationError

log = logging.getLogger(__name__)

# default disk radius around a failed agent (meters)
DEFAULT_EXCLUSION_RADIUS = 4.0

# stagnation guard: |J| below this multiple of u_inf^2 raises StagnationError
STAGNATION_FLOOR_FACTOR = 1e-9

# relative tolerance for the streamline-restoring Newton projection
_PROJECTION_RTOL = 1e-12
_PROJECTION_MAX_ITER = 12


class HeightSurface(Protocol):
    """Height descriptor z = z(x, y) for the out-of-plane coordinate."""

    def height(self, x, y):
        ...

    def slope(self, x, y):
        """Return (dz/dx, dz/dy) at (x, y)."""
        ...


@dataclass(frozen=True)
class ConstantHeight:
    """Constant-z plane; the default surface.  Slope is identically zero."""

    z0: float = 0.0

    def height(self, x, y):
        return np.broadcast_to(np.float64(self.z0), np.shape(x)).copy() \
            if np.ndim(x) else float(self.z0)

    def slope(self, x, y):
        zero = np.zeros(np.shape(x)) if np.ndim(x) else 0.0
        return zero, (zero.copy() if np.ndim(x) else 0.0)


@dataclass(frozen=True)
class Doublet:
    """One doublet singularity: center (a, b), strength delta, heading gamma."""

    a: float
    b: float
    delta: float
    gamma: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("doublet center must be finite")
        if not (self.delta > 0.0 and np.isfinite(self.delta)):
            raise ValueError(f"doublet strength must be positive, got {self.delta}")


@dataclass(frozen=True)
class FlowField:
    """Immutable uniform-plus-doublet flow description."""

    u_inf: float
    theta_inf: float = 0.0
    doublets: tuple = ()
    height_surface: HeightSurface = dataclass_field(default_factory=ConstantHeight)

    def __post_init__(self):
        if not (self.u_inf > 0.0 and np.isfinite(self.u_inf)):
            raise ValueError(f"u_inf must be positive, got {self.u_inf}")
        object.__setattr__(self, "doublets", tuple(self.doublets))
        radii = [exclusion_radius(self.u_inf, d.delta) for d in self.doublets]
        for i in range(len(radii)):
            for j in range(i + 1, len(radii)):
                di, dj = self.doublets[i], self.doublets[j]
                gap = np.hypot(di.a - dj.a, di.b - dj.b)
                if gap < radii[i] + radii[j]:
                    warnings.warn(
                        f"exclusion disks {i} and {j} overlap "
                        f"(centers {gap:.3g} m apart, radii {radii[i]:.3g} + {radii[j]:.3g})",
                        stacklevel=2,
                    )

    @property
    def exclusion_radii(self):
        """Disk radius per doublet, as a (k,) array."""
        return np.array(
            [exclusion_radius(self.u_inf, d.delta) for d in self.doublets]
        )

    @property
    def stagnation_floor(self):
        return STAGNATION_FLOOR_FACTOR * self.u_inf**2


@dataclass(frozen=True)
class FlowSample:
    """Flow evaluation at one point.

    grad_phi equals (d psi/dy, -d psi/dx) analytically (Cauchy-Riemann) and
    jac_det = |grad_phi|^2 is the Jacobian determinant of (x, y) -> (phi, psi).
    unsafe is True when the point lies strictly inside an exclusion disk.
    """

    phi: float
    psi: float
    grad_phi: np.ndarray
    grad_psi: np.ndarray
    jac_det: float
    unsafe: bool = False


def exclusion_radius(u_inf, delta):
    """Radius of the exclusion disk: sqrt(delta / u_inf)."""
    if not u_inf > 0.0:
        raise ValueError(f"u_inf must be positive, got {u_inf}")
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    return float(np.sqrt(delta / u_inf))


def build_flow_from_failures(failed_positions, u_inf, theta_inf=0.0,
                             radius_override=None, height_surface=None):
    """Wrap each failed agent with a doublet sized for the exclusion radius.

    failed_positions is an (k, 2) or (k, 3) array-like of failed-agent
    positions (z ignored).  Each doublet gets strength radius^2 * u_inf, the
    exact inverse of exclusion_radius, and orientation theta_inf + pi so the
    combined stream function vanishes on the circle of that radius.
    Overlapping disks trigger a warning but are not fatal.
    """
    if not u_inf > 0.0:
        raise ValueError(f"u_inf must be positive, got {u_inf}")
    radius = DEFAULT_EXCLUSION_RADIUS if radius_override is None else float(radius_override)
    if not radius > 0.0:
        raise ValueError(f"exclusion radius must be positive, got {radius}")
    pts = np.atleast_2d(np.asarray(failed_positions, dtype=np.float64))
    if pts.size == 0:
        pts = pts.reshape(0, 2)
    if pts.shape[-1] not in (2, 3):
        raise ValueError(f"failed positions must be (k, 2) or (k, 3), got {pts.shape}")
    delta = radius**2 * u_inf
    doublets = tuple(
        Doublet(a=float(p[0]), b=float(p[1]), delta=delta, gamma=theta_inf + np.pi)
        for p in pts
    )
    surface = ConstantHeight() if height_surface is None else height_surface
    return FlowField(u_inf=u_inf, theta_inf=theta_inf, doublets=doublets,
                     height_surface=surface)


def _eval_arrays(field, x, y):
    """Vectorized core evaluation.

    Returns (phi, psi, phi_x, phi_y, unsafe) with the shape of x.  psi
    gradients follow from Cauchy-Riemann: psi_x = -phi_y, psi_y = phi_x.
    Raises FlowSingularityError if any query coincides with a doublet center.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    ct, st = np.cos(field.theta_inf), np.sin(field.theta_inf)
    u = field.u_inf
    phi = u * (x * ct + y * st)
    psi = u * (y * ct - x * st)
    phi_x = np.full(x.shape, u * ct)
    phi_y = np.full(x.shape, u * st)
    unsafe = np.zeros(x.shape, dtype=bool)
    for d in field.doublets:
        dx = x - d.a
        dy = y - d.b
        rho2 = dx * dx + dy * dy
        if np.any(rho2 == 0.0):
            raise FlowSingularityError(
                f"flow evaluated at doublet center ({d.a:.6g}, {d.b:.6g})"
            )
        c, s = np.cos(d.gamma), np.sin(d.gamma)
        phi = phi - d.delta * (c * dx + s * dy) / rho2
        psi = psi + d.delta * (c * dy - s * dx) / rho2
        rho4 = rho2 * rho2
        # W'(z) = delta e^{i gamma} / zeta^2, phi_x = Re W', phi_y = -Im W'
        phi_x = phi_x + d.delta * (c * (dx * dx - dy * dy) + 2.0 * s * dx * dy) / rho4
        phi_y = phi_y + d.delta * (2.0 * c * dx * dy - s * (dx * dx - dy * dy)) / rho4
        unsafe |= rho2 < d.delta / u
    return phi, psi, phi_x, phi_y, unsafe


def eval_flow(field, x, y):
    """Evaluate potential, stream function, gradients and |J| at one point."""
    phi, psi, phi_x, phi_y, unsafe = _eval_arrays(field, float(x), float(y))
    grad_phi = np.array([phi_x, phi_y])
    grad_psi = np.array([-phi_y, phi_x])
    jac_det = float(phi_x * phi_x + phi_y * phi_y)
    return FlowSample(phi=float(phi), psi=float(psi), grad_phi=grad_phi,
                      grad_psi=grad_psi, jac_det=jac_det, unsafe=bool(unsafe))


def assign_stream_constants(healthy_positions, field):
    """Stream constant psi_0 per agent, from positions at CEM entry.

    healthy_positions maps agent id to a position whose x, y components are
    used.  An agent strictly inside an exclusion disk cannot be put on a
    streamline, which is a fatal scenario error naming the agent.
    """
    constants = {}
    for agent_id, pos in healthy_positions.items():
        pos = np.asarray(pos, dtype=np.float64)
        sample = eval_flow(field, pos[0], pos[1])
        if sample.unsafe:
            raise ScenarioError(
                f"agent {agent_id} lies strictly inside an exclusion disk "
                f"at CEM activation: position ({pos[0]:.6g}, {pos[1]:.6g})"
            )
        constants[agent_id] = sample.psi
    return constants


def streamline_velocity(field, x, y, v_phi):
    """Desired velocity sliding along the streamline through (x, y).

    Planar part is (v_phi / |J|) * (psi_y, -psi_x); along it d(psi)/dt = 0
    and d(phi)/dt = v_phi analytically.  The z component follows the height
    surface: vz = dz/dx * vx + dz/dy * vy (zero for the constant plane).
    Raises StagnationError when |J| falls below 1e-9 * u_inf^2.
    """
    sample = eval_flow(field, x, y)
    floor = field.stagnation_floor
    if sample.jac_det < floor:
        raise StagnationError(x, y, sample.jac_det, floor)
    scale = v_phi / sample.jac_det
    # psi_y = phi_x and -psi_x = phi_y, so the planar velocity is along grad_phi
    vx = scale * sample.grad_phi[0]
    vy = scale * sample.grad_phi[1]
    zx, zy = field.height_surface.slope(x, y)
    return np.array([vx, vy, zx * vx + zy * vy])


def cem_shape_matrix(field, x, y, z_surface=None, failed_count=None):
    """Assemble the CEM shape matrix H and its generalized-coordinate layout.

    Columns follow the generalized-coordinate vector
    [u_inf, theta_inf, (a_i, b_i, delta_i) per doublet, v_phi], which has
    3 + 3k entries for k doublets.  The first two blocks carry the potential
    sensitivities to the stream parameters and to each doublet's center and
    strength; the last column is the streamline-tangent map, so with all
    parameter rates zero H @ qdot reduces to streamline_velocity.

    Returns (H, layout) with H of shape (3, 3 + 3k) and layout the list of
    column names.  Raises StagnationError on a singular Jacobian.
    """
    k = len(field.doublets)
    if failed_count is not None and failed_count != k:
        raise ValueError(
            f"failed_count {failed_count} does not match field with {k} doublets"
        )
    surface = field.height_surface if z_surface is None else z_surface
    sample = eval_flow(field, x, y)
    floor = field.stagnation_floor
    if sample.jac_det < floor:
        raise StagnationError(x, y, sample.jac_det, floor)

    # column [psi_y, -psi_x]^T shared by every block (equals grad_phi)
    col = sample.grad_phi.reshape(2, 1)
    inv_j = 1.0 / sample.jac_det

    ct, st = np.cos(field.theta_inf), np.sin(field.theta_inf)
    # stream-parameter sensitivities; doublet orientations held fixed
    dphi_du = x * ct + y * st
    dphi_dtheta = field.u_inf * (y * ct - x * st)
    h_s = -inv_j * col @ np.array([[dphi_du, dphi_dtheta]])

    blocks = [h_s]
    layout = ["u_inf", "theta_inf"]
    for i, d in enumerate(field.doublets, start=1):
        dx, dy = x - d.a, y - d.b
        rho2 = dx * dx + dy * dy
        if rho2 == 0.0:
            raise FlowSingularityError(
                f"shape matrix evaluated at doublet center ({d.a:.6g}, {d.b:.6g})"
            )
        rho4 = rho2 * rho2
        c, s = np.cos(d.gamma), np.sin(d.gamma)
        phi_d = -d.delta * (c * dx + s * dy) / rho2
        phi_d_x = d.delta * (c * (dx * dx - dy * dy) + 2.0 * s * dx * dy) / rho4
        phi_d_y = d.delta * (2.0 * c * dx * dy - s * (dx * dx - dy * dy)) / rho4
        # phi depends on (x - a, y - b) only, so d/da = -d/dx and d/db = -d/dy
        sens = np.array([[-phi_d_x, -phi_d_y, phi_d / d.delta]])
        blocks.append(-inv_j * col @ sens)
        layout += [f"a_{i}", f"b_{i}", f"delta_{i}"]
    h_t = inv_j * col
    blocks.append(h_t)
    layout.append("v_phi")

    planar = np.hstack(blocks)
    zx, zy = surface.slope(x, y)
    lift = np.array([[1.0, 0.0], [0.0, 1.0], [zx, zy]])
    return lift @ planar, layout


def _planar_rk4(field, x, y, v_phi, dt, floor):
    """One classical 4th-order step of the planar streamline ODE.

    Returns (x_next, y_next, stagnated).  A stage with |J| below the floor
    marks the step stagnated; the caller decides whether to raise or clamp.
    Works on scalars and on equal-shape arrays.
    """
    def rate(px, py):
        _, _, phi_x, phi_y, _ = _eval_arrays(field, px, py)
        jac = phi_x * phi_x + phi_y * phi_y
        bad = jac < floor
        safe = np.where(bad, 1.0, jac)
        scale = np.where(bad, 0.0, v_phi / safe)
        return scale * phi_x, scale * phi_y, bad

    k1x, k1y, b1 = rate(x, y)
    k2x, k2y, b2 = rate(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y)
    k3x, k3y, b3 = rate(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y)
    k4x, k4y, b4 = rate(x + dt * k3x, y + dt * k3y)
    stagnated = b1 | b2 | b3 | b4
    x_next = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    y_next = y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    return x_next, y_next, stagnated


def _restore_streamline(field, x, y, psi_target, floor):
    """Newton correction along grad_psi bringing psi(x, y) back to psi_target."""
    for _ in range(_PROJECTION_MAX_ITER):
        _, psi, phi_x, phi_y, _ = _eval_arrays(field, x, y)
        err = psi_target - psi
        if abs(err) <= _PROJECTION_RTOL * max(1.0, abs(psi_target)):
            break
        # grad_psi = (-phi_y, phi_x)
        norm2 = phi_x * phi_x + phi_y * phi_y
        if norm2 < floor:
            break
        x = x + err * (-phi_y) / norm2
        y = y + err * phi_x / norm2
    return x, y


def _push_out_of_disks(field, x, y):
    """Radially move (x, y) out of any exclusion disk it strictly entered."""
    moved = False
    for d, radius in zip(field.doublets, field.exclusion_radii):
        dx, dy = x - d.a, y - d.b
        rho = np.hypot(dx, dy)
        if rho >= radius:
            continue
        moved = True
        target = radius * (1.0 + 1e-12)
        if rho == 0.0:
            # entered exactly onto the center: push along the upstream axis
            x = d.a - target * np.cos(field.theta_inf)
            y = d.b - target * np.sin(field.theta_inf)
        else:
            x = d.a + dx * target / rho
            y = d.b + dy * target / rho
    return x, y, moved


def step_streamline(position, field, v_phi, dt):
    """Advance one RK4 step along the streamline through position.

    position is a length-3 array (x, y, z); the z component follows the
    field's height surface (unchanged for the constant plane).  dt = 0
    returns the position unchanged.  If numerical drift lands the step
    strictly inside an exclusion disk, the point is pushed back out and
    projected along grad_psi onto the original streamline, and the repair
    is logged.  Stage stagnation raises StagnationError.
    """
    position = np.asarray(position, dtype=np.float64)
    if position.shape != (3,):
        raise ValueError(f"position must have shape (3,), got {position.shape}")
    if dt == 0.0:
        return position.copy()
    if dt < 0.0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    x0, y0, z0 = position
    floor = field.stagnation_floor
    psi0 = eval_flow(field, x0, y0).psi

    x1, y1, stagnated = _planar_rk4(field, x0, y0, v_phi, dt, floor)
    if stagnated:
        sample = eval_flow(field, x0, y0)
        raise StagnationError(x0, y0, sample.jac_det, floor)

    x1, y1, entered = _push_out_of_disks(field, x1, y1)
    if entered:
        x1, y1 = _restore_streamline(field, x1, y1, psi0, floor)
        log.warning(
            "streamline step from (%.6g, %.6g) drifted into an exclusion disk; "
            "projected back to psi = %.9g", x0, y0, psi0,
        )

    zx, zy = field.height_surface.slope(x0, y0)
    z1 = z0 + zx * (x1 - x0) + zy * (y1 - y0)
    return np.array([x1, y1, z1])


def step_streamline_many(positions, field, v_phi, dt, psi_targets=None):
    """Vectorized streamline step for the simulation loop.

    positions is (m, 3).  Stagnating agents keep their position for the step
    (velocity clamped to zero) and are reported in the stagnated mask rather
    than raising, matching the supervisor's clamp-and-log policy.  Agents
    drifting strictly into a disk are pushed back out and re-projected onto
    psi_targets (their stream constants; defaults to the pre-step psi), and
    reported in the projected mask.

    Returns (next_positions (m, 3), stagnated (m,), projected (m,)).
    """
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim != 2 or positions.shape[1] != 3:
        raise ValueError(f"positions must be (m, 3), got {positions.shape}")
    m = positions.shape[0]
    if m == 0 or dt == 0.0:
        return positions.copy(), np.zeros(m, bool), np.zeros(m, bool)
    floor = field.stagnation_floor
    x0, y0, z0 = positions[:, 0].copy(), positions[:, 1].copy(), positions[:, 2].copy()
    if psi_targets is None:
        _, psi_targets, _, _, _ = _eval_arrays(field, x0, y0)
    else:
        psi_targets = np.asarray(psi_targets, dtype=np.float64)

    x1, y1, stagnated = _planar_rk4(field, x0, y0, v_phi, dt, floor)
    x1 = np.where(stagnated, x0, x1)
    y1 = np.where(stagnated, y0, y1)

    projected = np.zeros(m, dtype=bool)
    radii = field.exclusion_radii
    for d, radius in zip(field.doublets, radii):
        dx, dy = x1 - d.a, y1 - d.b
        rho = np.hypot(dx, dy)
        inside = rho < radius
        if not np.any(inside):
            continue
        projected |= inside
        target = radius * (1.0 + 1e-12)
        safe_rho = np.where(rho == 0.0, 1.0, rho)
        push_x = np.where(rho == 0.0, d.a - target * np.cos(field.theta_inf),
                          d.a + dx * target / safe_rho)
        push_y = np.where(rho == 0.0, d.b - target * np.sin(field.theta_inf),
                          d.b + dy * target / safe_rho)
        x1 = np.where(inside, push_x, x1)
        y1 = np.where(inside, push_y, y1)
    if np.any(projected):
        idx = np.flatnonzero(projected)
        for i in idx:
            x1[i], y1[i] = _restore_streamline(field, x1[i], y1[i],
                                               float(psi_targets[i]), floor)

    zx, zy = field.height_surface.slope(x0, y0)
    z1 = z0 + zx * (x1 - x0) + zy * (y1 - y0)
    return np.column_stack([x1, y1, z1]), stagnated, projected
