"""Orthonormal frames from plane rotations.

A p x d frame is the first d columns of a product of Givens rotations, one
angle per plane (i, j) with i <= d. Angles live in [0, pi); wrapping keeps
the spanned subspace fixed.
"""

import numpy as np

from cssdr.rotations import AngleVector, eta, frame_to_angles, n_angles, planes, wrap

p, d = 5, 2
print(f"p = {p}, d = {d}: {n_angles(p, d)} angles on planes {[(i + 1, j + 1) for i, j in planes(p, d)]}")

rng = np.random.default_rng(0)
phi = AngleVector(rng.uniform(-4, 4, n_angles(p, d)), p, d)
E = eta(phi)
print("frame:\n", np.round(E, 4))
print("E'E - I, max abs:", np.abs(E.T @ E - np.eye(d)).max())

# wrapping moves the angles into the box but not the subspace
w = wrap(phi)
print("wrapped angles:", np.round(w.phi, 4))
print("projection change after wrap:", np.abs(eta(w) @ eta(w).T - E @ E.T).max())

# any orthonormal basis can be written in angles
Q = np.linalg.qr(rng.standard_normal((p, d)))[0]
back = eta(frame_to_angles(Q))
print("recovered span error:", np.abs(back @ back.T - Q @ Q.T).max())
