"""Transient-weight anomaly detection.

The detector recomputes each follower's weights from actual neighbor
positions. Under any homogeneous deformation the weights are invariant,
so a healthy follower always rates inside its distance-derived bounds;
a frozen agent drifts out as soon as the team moves far enough.
"""
import numpy as np

from contiform import anomaly

side = 4.0
tri = np.array([[0.0, 0.0, 0.0],
                [side, 0.0, 0.0],
                [side / 2, side * np.sqrt(3) / 2, 0.0]])
centroid = tri.mean(axis=0)
static = np.array([1 / 3, 1 / 3, 1 / 3])
delta = 0.3

print("static weights:", np.round(static, 6))
lo, hi = anomaly.transient_weight_bounds(4, tri, centroid, delta, n=2)
print(f"bounds at delta {delta}: lo {np.round(lo, 6)} hi {np.round(hi, 6)}")

# healthy motion: the whole pattern translates and shears together
lin = np.array([[1.3, 0.4], [-0.2, 0.9]])
for step in range(4):
    shift = np.array([2.5 * step, 1.0 * step])
    moved = tri.copy()
    moved[:, :2] = tri[:, :2] @ lin.T + shift
    own = moved.mean(axis=0)
    report = anomaly.evaluate_follower(4, (1, 2, 3), static, moved, own,
                                       delta, n=2, timestamp=float(step))
    print(f"t={step}: healthy follower weights "
          f"{np.round(report.weights, 6)} passed={report.passed}")

# failure: the follower freezes at the centroid while neighbors move on
print("\nfrozen follower, neighbors translating +x:")
frozen = centroid.copy()
for dx in (0.2, 0.6, 1.2, 2.0):
    moved = tri + np.array([dx, 0.0, 0.0])
    report = anomaly.evaluate_follower(4, (1, 2, 3), static, moved, frozen,
                                       delta, n=2, timestamp=dx)
    flags = "".join("." if ok else "x" for ok in report.neighbor_pass)
    print(f"  offset {dx:3.1f} m: weights {np.round(report.weights, 4)} "
          f"[{flags}] passed={report.passed}")

reports = [
    anomaly.evaluate_follower(4, (1, 2, 3), static, tri + 2.0, centroid + 2.0,
                              delta, n=2),
    anomaly.evaluate_follower(5, (1, 2, 3), static, tri + 2.0, centroid,
                              delta, n=2),
]
healthy, anomalous = anomaly.partition_health(reports, leaders=(1, 2, 3))
print(f"\npartition: healthy {sorted(healthy)} anomalous {sorted(anomalous)}")
