"""
Training losses on synthetic motion
===================================
"""
import numpy as np

from beatsync import BeatGrid, default_skeleton, nearest_beat_distance
from beatsync.harness import periodic_beat_frames, synth_motion
from beatsync.losses import LossWeights, beat_loss_terms, beat_weights, total_loss

skel = default_skeleton()

# ground truth steps every 15 frames, the prediction uses another random pose
gt = synth_motion("periodic", 90, period=15, seed=0)
pred = synth_motion("periodic", 90, period=15, seed=3)
grid = BeatGrid(90, periodic_beat_frames(90, 15))
b = nearest_beat_distance(grid)

print("at the truth:", total_loss(gt, gt, skel, b, b.astype(float), grid).total)

rep = total_loss(gt, pred, skel, b, b + 1.0, grid)
for name, value in rep.to_dict().items():
    if name != "weights":
        print(f"  {name:7s} {value:.6g}")

# the beat term: small relative errors are shrunk, frames near a beat weigh more
b_true = np.array([0.0, 2.0, 4.0, 4.0])
b_hat = np.array([1.0, 2.5, 6.0, 4.2])
d = np.full(4, 8.0)
w_s, w_b = beat_weights(b_true, b_hat, d)
print("w_s:", np.round(w_s, 4))
print("w_b:", np.round(w_b, 4))
print("terms:", np.round(beat_loss_terms(b_true, b_hat, d), 4))   # third one is about 1.402

# a steeper sigmoid cuts more sharply around the relative error c
print("a=30:", np.round(beat_loss_terms(b_true, b_hat, d, LossWeights(a=30)), 4))
