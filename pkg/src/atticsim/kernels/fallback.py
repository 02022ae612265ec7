"""Pure-numpy ray/triangle-soup intersection (Moller-Trumbore).

Same contract as the compiled kernel; vectorized over rays, looping over
triangles (triangle counts are small compared to pixel counts).
"""

from __future__ import annotations

import numpy as np

_EPS = 1e-12


def raycast(origin, dirs, tris, t_min=1e-6):
    """Nearest-hit parameters for rays origin + t*dirs[i] against triangles.

    Returns (t, tri_index); t = inf and tri_index = -1 where nothing is hit.
    """
    origin = np.asarray(origin, dtype=np.float64)
    dirs = np.asarray(dirs, dtype=np.float64)
    tris = np.asarray(tris, dtype=np.float64)
    n_rays = dirs.shape[0]
    t_best = np.full(n_rays, np.inf)
    idx_best = np.full(n_rays, -1, dtype=np.int32)

    for k in range(tris.shape[0]):
        v0, v1, v2 = tris[k]
        e1 = v1 - v0
        e2 = v2 - v0
        pvec = np.cross(dirs, e2)
        det = pvec @ e1
        valid = np.abs(det) > _EPS
        if not valid.any():
            continue
        inv_det = np.where(valid, 1.0 / np.where(valid, det, 1.0), 0.0)
        tvec = origin - v0
        u = (pvec @ tvec) * inv_det
        valid &= (u >= -1e-9) & (u <= 1.0 + 1e-9)
        qvec = np.cross(tvec, e1)
        v = (dirs @ qvec) * inv_det
        valid &= (v >= -1e-9) & (u + v <= 1.0 + 1e-9)
        t = (qvec @ e2) * inv_det
        valid &= (t > t_min) & (t < t_best)
        t_best[valid] = t[valid]
        idx_best[valid] = k
    return t_best, idx_best
