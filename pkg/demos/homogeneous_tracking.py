"""Homogeneous deformation tracking and the separation certificate.

Three leaders imply one affine map; every follower's global desired
position is the image of its reference spot, and the same point drops
out of the local weighted combination. Shrinking the map lowers the
smallest singular value until the collision certificate fails.
"""
import numpy as np

from contiform import hdm, refnet

formation = {
    1: np.array([0.0, 0.0, 0.0]),
    2: np.array([8.0, 0.0, 0.0]),
    3: np.array([0.0, 8.0, 0.0]),
    4: np.array([2.0, 2.0, 0.0]),
    5: np.array([4.0, 1.5, 0.0]),
    6: np.array([1.5, 4.0, 0.0]),
}
net = refnet.build_reference_configuration(formation, n=2, rho=0.1)
order = list(net.agent_order)
ref = np.stack([formation[a] for a in order])
lead_rows = [order.index(a) for a in net.leaders]

theta = 0.3
stretch = np.array([[1.4 * np.cos(theta), -0.8 * np.sin(theta)],
                    [1.4 * np.sin(theta), 0.8 * np.cos(theta)]])
shift = np.array([5.0, -2.0])

cur = ref.copy()
cur[:, :2] = ref[:, :2] @ stretch.T + shift

tf = hdm.fit_homogeneous_transform(ref[lead_rows], cur[lead_rows], n=2)
print(f"recovered singular values: {np.round(tf.singular_values, 6)}")

glob = hdm.global_desired_positions(net.W_L, cur[lead_rows])
local = net.W @ cur
gap = np.abs(glob - local).max()
print(f"global desired vs local weighted combination, max gap: {gap:.3e}")

xi_max, delta = refnet.deviation_bound(net.D, net.B, 0.02, 0.02, 0.02)
print(f"\ndeviation bound: {delta:.4f} m, d_min {net.d_min:.4f} m")
print("contraction sweep (uniform scale s, sigma_min = s):")
for s in (1.0, 0.6, 0.4, 0.2, 0.1):
    sv = np.array([s, s, 1.0])
    threshold, ok = hdm.collision_safety_margin(sv, delta, 0.5, net.d_min)
    print(f"  s={s:4.2f}  threshold {threshold:.4f}  "
          f"{'certified' if ok else 'UNSAFE'}")
