"""
From pixels to a grasp
======================

Render a Tic-Tac-Toe start scene, segment it, label the pieces by color,
then build the 18-bin grasp map for a claw-machine style blob and pick
its best grasp. Images are written as PPM next to this script.
"""
import math
from pathlib import Path

import numpy as np

from deepclaw.geometry import RigidTransform
from deepclaw.monitor import write_ppm
from deepclaw.pipeline import plan_grasp, recognize_color, segment_contour, select_grasp
from deepclaw.simcell import Scene, SceneObject, load_cell, render
from deepclaw.tasks.protocol import DEFAULT_PARAMS
from deepclaw.tasks.tictactoe import PIECE_COLORS, build_scene

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
cell = load_cell("franka")

scene, layout = build_scene(DEFAULT_PARAMS["tictactoe"])
frame = render(scene, cell)
write_ppm(out / "tictactoe_start.ppm", frame.color)

seg = segment_contour(frame)
rec = recognize_color(seg, frame, PIECE_COLORS)
print("segments:", len(seg))
for c, lab, conf in zip(seg.centroids, rec.labels, rec.confidences):
    print("  centroid (%6.1f, %6.1f)  label %d  confidence %.3f" % (c.u, c.v, lab, conf))

# one elongated toy, rotated 40 degrees
toy = SceneObject(0, "blob", RigidTransform.from_xyz_yaw(0.05, -0.03, 0.0, math.radians(40)),
                  (200, 60, 60), 0.05, (0.07, 0.03))
frame = render(Scene([toy]), cell)
seg = segment_contour(frame)
gmap = plan_grasp(seg, frame)
decision = select_grasp(gmap, frame, cell.camera.pose, cell)
print("\nbest grasp pixel (u, v) = (%d, %d), bin %d, p = %.3f"
      % (decision.pixel.u, decision.pixel.v, decision.bin, decision.probability))
print("base point (m):", np.round(decision.base_point, 4), " true center:", toy.center)

# best probability over bins as a grey image
heat = (gmap.probabilities.max(axis=2) * 255).astype(np.uint8)
write_ppm(out / "grasp_map.ppm", np.repeat(heat[..., None], 3, axis=2))
print("wrote", sorted(p.name for p in out.iterdir()))
