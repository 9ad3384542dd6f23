"""Project labeled vectors to 2D and recover the groups by density.

Synthesizes three well-separated families of 20D vectors, fits the 2D
layout, clusters the map points, and renders the classic scatter: dots for
positive functions, crosses for negative, color per base cluster, noise in
gray. Writes demos/out/function_map.png.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fraglens import fit_projection, hdbscan_cluster

rng = np.random.default_rng(5)
centers = rng.standard_normal((3, 20)) * 4.0
family_size = 60
vectors = np.concatenate([
    c + 0.35 * rng.standard_normal((family_size, 20)) for c in centers
])
ratings = ["positive" if rng.random() < 0.7 else "negative" for _ in range(len(vectors))]

model, points = fit_projection(vectors, seed=11, ratings=ratings)
coords = np.array([[p.x, p.y] for p in points])

result = hdbscan_cluster(coords, min_cluster_size=10)
print(f"{len(result.clusters)} base clusters, {len(result.noise)} noise points "
      f"out of {len(points)}")
for i, members in enumerate(result.clusters):
    pos = sum(1 for m in members if points[m].rating == "positive")
    print(f"  cluster {i}: {len(members)} functions, {pos} positive / {len(members) - pos} negative")

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

fig, ax = plt.subplots(figsize=(7, 6))
palette = plt.cm.tab10.colors
labels = result.labels
for idx, p in enumerate(points):
    label = labels[idx]
    color = palette[label % len(palette)] if label >= 0 else (0.7, 0.7, 0.7)
    marker = "o" if p.rating == "positive" else "x"
    ax.scatter(p.x, p.y, c=[color], marker=marker, s=22, linewidths=1.2)
ax.set_title("function map: dots positive, crosses negative, gray noise")
ax.set_xticks([])
ax.set_yticks([])
fig.tight_layout()
target = out_dir / "function_map.png"
fig.savefig(target, dpi=120)
print(f"wrote {target}")
