"""Offline multiplicative updates vs the streaming learner on one video.

Both factorizations see the same candle-like frame stack: offline NMF
works on the full (pixels x frames) matrix at once, while the online
learner receives one vectorized frame per step and only ever keeps its
aggregate matrices.  The learned atoms differ in character: offline atoms
mix whole-stack structure, online atoms settle one by one as the moving
parts of the scene light up.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from onmf.offline import fit_nmf
from onmf.synthetic import candle_frames
from onmf.video import frames_to_matrix, learn_spatial_dictionary

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

stack = candle_frames(80, 30, 75)
X = frames_to_matrix(stack, "space_major")
print(f"frame stack {stack.shape} -> data matrix {X.shape}")

# Offline: 300 multiplicative updates on the whole matrix.
fit = fit_nmf(X, r=4, iters=300, seed=0)
print(f"offline final squared error {fit.objective_trace[-1]:.4f}")

# Online: one frame per step, snapshots along the way.
online = learn_spatial_dictionary(
    stack, r=4, mode="online", lam=0.05, seed=0, snapshots=(1, 5, 7, 15, 35, 75)
)

fig, axes = plt.subplots(2, 4, figsize=(8, 9))
offline_atoms = [fit.W[:, j].reshape(80, 30, order="F") for j in range(4)]
for j, ax in enumerate(axes[0]):
    ax.imshow(offline_atoms[j], cmap="inferno")
    ax.set_title(f"offline atom {j}")
    ax.axis("off")
for j, ax in enumerate(axes[1]):
    ax.imshow(online.atoms[j], cmap="inferno")
    ax.set_title(f"online atom {j}")
    ax.axis("off")
fig.suptitle("Spatial dictionary atoms: offline (top) vs online (bottom)")
fig.savefig(os.path.join(OUT, "01_atoms_offline_vs_online.png"), dpi=120)

# How the online atoms emerge over time.
fig, axes = plt.subplots(len(online.snapshots), 4, figsize=(7, 12))
for row, (seen, _, atoms) in zip(axes, online.snapshots):
    for j, ax in enumerate(row):
        ax.imshow(atoms[j], cmap="inferno")
        ax.axis("off")
        if j == 0:
            ax.set_ylabel(f"t={seen}")
    row[0].axis("on")
    row[0].set_xticks([])
    row[0].set_yticks([])
fig.suptitle("Online atoms after 1, 5, 7, 15, 35, 75 frames")
fig.savefig(os.path.join(OUT, "01_online_snapshots.png"), dpi=120)

plt.figure(figsize=(5, 3))
plt.semilogy(fit.objective_trace)
plt.xlabel("iteration")
plt.ylabel("squared error")
plt.title("Offline multiplicative updates")
plt.tight_layout()
plt.savefig(os.path.join(OUT, "01_offline_objective.png"), dpi=120)
print(f"figures written to {OUT}")
