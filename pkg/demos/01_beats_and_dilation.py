"""
Beat distances and beat-aware keyframe dilation
===============================================

A 90 frame clip with beats every 20 frames and three keyframes.
"""
import numpy as np

from beatsync import BeatGrid, nearest_beat_distance
from beatsync.beat import adjacent_intervals
from beatsync.masks import attention_mask, dilate_mask, dilation_steps, keyframe_mask

grid = BeatGrid(90, [10, 30, 50, 70])
b = nearest_beat_distance(grid)   # 0 on a beat, growing between beats
d = adjacent_intervals(grid)      # frames between the enclosing beats
print("distance to nearest beat:", b[:25])
print("adjacent interval:       ", d[:25])

# base step s = 8: a keyframe on a beat spreads 8 frames each way,
# one half an interval away spreads ceil(8 / e) = 3
print("per-frame step:", dilation_steps(grid, 8)[:25])

M = keyframe_mask(90, [10, 20, 62])
Md = dilate_mask(M, grid, 8)
for k in (10, 20, 62):
    lit = np.flatnonzero(Md[max(k - 10, 0):k + 11]) + max(k - 10, 0)
    print(f"keyframe {k:2d} (b={b[k]}): frames {lit.min()}..{lit.max()}")

# keyframe rows of the attention mask see the dilated window, every other row is empty
A = attention_mask(M, Md)
print("attention rows with entries:", np.flatnonzero(A.any(axis=1)))
print("row 10 width:", A[10].sum(), " row 11 width:", A[11].sum())

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(2, 1, figsize=(8, 4), sharex=True)
    ax[0].plot(b, label="b")
    ax[0].vlines(grid.beat_frames, 0, b.max(), colors="k", linestyles=":")
    ax[0].legend()
    ax[1].step(np.arange(90), Md, where="mid", label="dilated")
    ax[1].step(np.arange(90), M, where="mid", label="keyframes")
    ax[1].legend()
    fig.savefig("beats_and_dilation.png", dpi=100)
    print("wrote beats_and_dilation.png")
