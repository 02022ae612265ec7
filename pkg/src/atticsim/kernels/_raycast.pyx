# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled ray/triangle-soup intersection (Moller-Trumbore)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF EPS = 1e-12


def raycast(double[::1] origin, double[:, ::1] dirs, double[:, :, ::1] tris,
            double t_min=1e-6):
    """Nearest-hit parameters for rays origin + t*dirs[i] against triangles.

    Returns (t, tri_index); t = inf and tri_index = -1 where nothing is hit.
    """
    cdef Py_ssize_t n_rays = dirs.shape[0]
    cdef Py_ssize_t n_tris = tris.shape[0]
    t_out_arr = np.full(n_rays, np.inf, dtype=np.float64)
    idx_out_arr = np.full(n_rays, -1, dtype=np.int32)
    cdef double[::1] t_out = t_out_arr
    cdef int[::1] idx_out = idx_out_arr

    cdef Py_ssize_t i, k
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef double dx, dy, dz
    cdef double e1x, e1y, e1z, e2x, e2y, e2z
    cdef double px, py, pz, qx, qy, qz, tx, ty, tz
    cdef double det, inv_det, u, v, t

    for i in range(n_rays):
        dx = dirs[i, 0]; dy = dirs[i, 1]; dz = dirs[i, 2]
        for k in range(n_tris):
            e1x = tris[k, 1, 0] - tris[k, 0, 0]
            e1y = tris[k, 1, 1] - tris[k, 0, 1]
            e1z = tris[k, 1, 2] - tris[k, 0, 2]
            e2x = tris[k, 2, 0] - tris[k, 0, 0]
            e2y = tris[k, 2, 1] - tris[k, 0, 1]
            e2z = tris[k, 2, 2] - tris[k, 0, 2]
            px = dy * e2z - dz * e2y
            py = dz * e2x - dx * e2z
            pz = dx * e2y - dy * e2x
            det = e1x * px + e1y * py + e1z * pz
            if -EPS < det < EPS:
                continue
            inv_det = 1.0 / det
            tx = ox - tris[k, 0, 0]
            ty = oy - tris[k, 0, 1]
            tz = oz - tris[k, 0, 2]
            u = (tx * px + ty * py + tz * pz) * inv_det
            if u < -1e-9 or u > 1.0 + 1e-9:
                continue
            qx = ty * e1z - tz * e1y
            qy = tz * e1x - tx * e1z
            qz = tx * e1y - ty * e1x
            v = (dx * qx + dy * qy + dz * qz) * inv_det
            if v < -1e-9 or u + v > 1.0 + 1e-9:
                continue
            t = (e2x * qx + e2y * qy + e2z * qz) * inv_det
            if t > t_min and t < t_out[i]:
                t_out[i] = t
                idx_out[i] = <int>k
    return t_out_arr, idx_out_arr
