"""
Hand-eye calibration on a simulated cell
=========================================

The robot moves a small checkerboard through random poses in front of the
camera. Each pose gives four corner points seen in both frames, and a
rigid registration recovers the camera pose in the robot base frame.
"""
import numpy as np

from deepclaw.calibration import calibrate, collect_checkerboard_correspondences, verify_calibration
from deepclaw.simcell import load_cell

cell = load_cell("ur5-rg6")
print("true camera pose (translation, m):", cell.camera.pose.translation)

pairs = collect_checkerboard_correspondences(cell, n_poses=3, seed=0)
print("corner pairs collected:", len(pairs))
print("first robot-frame corner:", np.round(pairs.robot_points[0], 4))
print("same corner, camera frame:", np.round(pairs.camera_points[0], 4))

# noise-free: the registration is exact up to rounding
exact = calibrate(cell, n_poses=3, seed=0)
print("\nnoise-free rms residual: %.2e m" % exact.rms_residual)

# with camera-side noise the residual tracks the noise level
print("\nnoise (mm)  poses  rms (mm)  probe max (mm)")
for noise_mm in (0.25, 0.5, 1.0, 2.0):
    for poses in (5, 20):
        res = calibrate(cell, n_poses=poses, seed=1, noise_sigma=noise_mm / 1000)
        probe = verify_calibration(cell, res, seed=1)
        print("%9.2f  %5d  %8.3f  %14.3f" % (noise_mm, poses, res.rms_residual * 1e3, probe.max_error * 1e3))
