"""Reference network construction on a 22-agent planar formation.

The hull corners become the boundary set, three of them the leaders,
and every interior follower is wired to its best enclosing triple.
The weight matrices then give the deviation bound and the collision
threshold used by the running supervisor.
"""
import numpy as np

from contiform import hdm, refnet

LAYOUT = [
    (0, 2), (12, -3), (26, -5), (40, -2), (50, 6), (47, 20),
    (38, 32), (24, 39), (10, 33), (0, 18),
    (8, 10), (3, 13), (13, 4), (12, 17), (20, 10), (19, 24),
    (27, 17), (28, 6), (33, 12), (35, 25), (30, 30), (17, 31),
]
formation = {i + 1: np.array([float(x), float(y), 0.0])
             for i, (x, y) in enumerate(LAYOUT)}

net = refnet.build_reference_configuration(formation, n=2, rho=0.1)

print(f"agents: {len(formation)}")
print(f"boundary: {sorted(net.boundary)}")
print(f"leaders: {net.leaders}")
print(f"followers: {len(net.followers)}")
print("\nin-neighbors (first six followers):")
for fid in net.followers[:6]:
    print(f"  {fid:>2} <- {net.in_neighbors[fid]}")

print(f"\nXi_max: {net.Xi_max:.6f}")
xi_max, delta = refnet.deviation_bound(net.D, net.B, 0.1, 0.1, 0.1)
print(f"deviation bound for 0.1 m per-axis tolerances: {delta:.6f} m")
print(f"smallest reference separation d_min: {net.d_min:.6f} m")

threshold, ok = hdm.collision_safety_margin(np.ones(3), delta, 0.5,
                                            net.d_min)
print(f"collision threshold (vehicle radius 0.5): {threshold:.6f}, "
      f"identity map satisfied: {ok}")

# W_L condenses every chain of local weights down to the leaders: each
# follower row reproduces it from the leader triangle alone
eig = np.linalg.eigvals(net.D)
print(f"\nD spectrum real part range: "
      f"[{eig.real.min():.4f}, {eig.real.max():.4f}] (Hurwitz)")
row_sums = net.W_L.sum(axis=1)
print(f"W_L row sums: min {row_sums.min():.12f} max {row_sums.max():.12f}")
