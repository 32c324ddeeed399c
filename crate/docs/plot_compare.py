"""Plot the re-initialization series written by `ergodic compare`."""
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib.pyplot as plt

out = Path(sys.argv[1] if len(sys.argv) > 1 else "out")
series = defaultdict(lambda: ([], []))
for line in (out / "cumulative.csv").read_text().splitlines():
    if line.startswith("#"):
        continue
    name, attempt, value = line.split(",")
    series[name][0].append(int(attempt))
    series[name][1].append(float(value))

for name, (a, v) in series.items():
    plt.plot(a, v, marker=".", label=name)
plt.xlabel("attempt")
plt.ylabel("cumulative mean time to target [s]")
plt.yscale("log")
plt.legend()
plt.savefig(out / "cumulative.png", dpi=120)
