"""Wave propagation on a non-convex L-shaped domain.

The collocation method needs nothing beyond point-to-point distances and
ray-to-boundary distances, so an irregular boundary costs only a different
point cloud. This demo marches a pulse inside an L-shaped region; the wave
diffracts around the inward corner and the field stays pinned to zero on the
whole boundary.

Run:  python demos/irregular_domain.py
"""

import os

import numpy as np

from fracwave.fraclap import FracOpConfig
from fracwave.geometry import Domain2D, generate_cloud
from fracwave.media import MediumSpec, constant_velocity
from fracwave.stepper import (Scenario, SourceTerm, run, snapshot_filename,
                              write_snapshot_csv)

domain = Domain2D.polygon([
    (0.0, 0.0), (1000.0, 0.0), (1000.0, 500.0),
    (500.0, 500.0), (500.0, 1000.0), (0.0, 1000.0),
])

cloud = generate_cloud(domain, 1000.0 / 30.0)
print(f"L-shaped cloud: {cloud.m} interior + {cloud.n} boundary points")

scenario = Scenario(
    domain=domain,
    dx=1000.0 / 30.0,
    medium=MediumSpec(velocity=constant_velocity(2000.0), q_factor=100.0, omega0=60.0),
    source=SourceTerm(kind="initial_ricker", f0=0.004, x=300.0, y=300.0),
    dt=1e-4,
    t_end=0.3,
    op_cfg=FracOpConfig(h=2.0, n_theta=20),
    snapshot_times=(0.1, 0.2, 0.3),
    snapshot_nx=41,
    snapshot_ny=41,
)

result = run(scenario)

os.makedirs("demo_out", exist_ok=True)
for snap in result.snapshots:
    path = os.path.join("demo_out", "lshape_" + snapshot_filename(snap.time))
    write_snapshot_csv(path, snap)
    print(f"wrote {path}: peak |sigma| = {np.abs(snap.values).max():.4f}")
print(f"boundary residual across the run: {result.boundary_abs_max.max():.2e} "
      f"(zero exterior holds on the polygon too)")
