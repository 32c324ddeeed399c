"""Plot an `ergodic explore` output directory: trajectory over the first
occupancy pair, the density mass, and the metric history."""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

out = Path(sys.argv[1] if len(sys.argv) > 1 else "out")
traj = np.loadtxt(out / "trajectory.csv", delimiter=",", comments="#", ndmin=2)
metric = np.loadtxt(out / "metric.csv", delimiter=",", comments="#", ndmin=2)
occ = np.loadtxt(out / "occupancy_1_2.csv", delimiter=",", comments="#", ndmin=2)
bins = int(round(np.sqrt(len(occ))))

fig, ax = plt.subplots(1, 3, figsize=(13, 4))
ax[0].imshow(occ[:, 3].reshape(bins, bins).T, origin="lower", extent=(0, 1, 0, 1), cmap="Blues")
ax[0].plot(traj[:, 1], traj[:, 2], "k-", lw=0.4)
ax[0].set_title("trajectory over density (x1, x2)")
ax[1].imshow(occ[:, 2].reshape(bins, bins).T, origin="lower", extent=(0, 1, 0, 1), cmap="Greens")
ax[1].set_title("time fraction per cell")
ax[2].loglog(metric[1:, 0], metric[1:, 1])
ax[2].set_xlabel("t [s]")
ax[2].set_ylabel("ergodic metric")
fig.tight_layout()
fig.savefig(out / "explore.png", dpi=120)
