"""
Evaluation metrics and speed curves
===================================
"""
import numpy as np

from beatsync import BeatGrid, default_skeleton
from beatsync.harness import emit_plot_data, periodic_beat_frames, synth_motion
from beatsync.metrics import MetricConfig, evaluate

skel = default_skeleton()
gen = synth_motion("periodic", 120, period=20, seed=1)
music = BeatGrid(120, periodic_beat_frames(120, 20))

# motion beats are minima of the mean joint speed
plot = emit_plot_data(gen, skel, music)
print("music beats: ", plot.beat_frames)
print("motion beats:", plot.motion_beat_frames)
print(plot.to_csv().splitlines()[:4])

# a designated grid one frame off: exact matching misses, tolerance 1 does not
off = BeatGrid(120, periodic_beat_frames(120, 20) + 1)
for tol in (0, 1):
    rep = evaluate(gen, skel, MetricConfig(bap_tolerance=tol), music_beats=music, designated=off)
    print(f"tolerance {tol}: BAS {rep.bas:.3f} BAP {rep.bap:.3f}")

# KPD against a reference that shares the keyframes, Div_k against other seeds
ref = synth_motion("periodic", 120, period=20, seed=1)
mask = np.zeros(120)
mask[::30] = 1
others = [synth_motion("linear", 120, speed=v, seed=s) for s, v in ((2, 0.5), (3, 2.0))]
rep = evaluate(gen, skel, music_beats=music, designated=music, reference=ref, mask=mask, others=others)
print(rep.to_dict())

# the whole body glides, so root acceleration always comes with sliding feet
print("PFC of the gliding walker:", rep.pfc)
print("PFC standing still:", evaluate(synth_motion("static", 30), skel).pfc)

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.plot(plot.frames, plot.mean_speed, label="mean joint speed")
    ax.plot(plot.motion_beat_frames, plot.mean_speed[plot.motion_beat_frames], "o", label="motion beats")
    ax.vlines(plot.beat_frames, 0, plot.mean_speed.max(), colors="k", linestyles=":", label="music beats")
    ax.legend()
    fig.savefig("speed_curve.png", dpi=100)
    print("wrote speed_curve.png")
