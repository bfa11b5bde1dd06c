"""Reference implementations of the hot numeric kernels (numpy only).

The compiled module ``_kernels`` exposes the same functions with the same
signatures; :mod:`anosov_triangle.kernels` picks one at import.
"""

from __future__ import annotations

import numpy as np


def max_angle(pts: np.ndarray) -> float:
    """Largest angle between two of the row vectors of ``pts``.

    Uses atan2(|u x v|, u . v), which stays accurate for nearly parallel
    vectors where arccos of the dot product loses half the digits.
    """
    pts = np.asarray(pts, dtype=float)
    if len(pts) < 2:
        return 0.0
    cr = np.linalg.norm(np.cross(pts[:, None, :], pts[None, :, :]), axis=-1)
    return float(np.max(np.arctan2(cr, pts @ pts.T)))


def chain_product(gens: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """gens[idx[0]] @ gens[idx[1]] @ ... rescaled to max-entry 1 after each factor."""
    m = np.eye(3)
    for k in idx:
        m = m @ gens[k]
        m /= np.max(np.abs(m))
    return m


def box_chain(steps: np.ndarray, verts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diameters of the nested boxes g_n verts[n] and the barycenter of the last one.

    ``steps`` has shape (n, 3, 3) and g_n = steps[0] ... steps[n-1] (with
    renormalization); ``verts`` has shape (n+1, k, 3).  The images are unit
    vectors; the barycenter is their normalized sum.
    """
    n = len(steps)
    diams = np.empty(n + 1)
    g = np.eye(3)
    pts = None
    for i in range(n + 1):
        if i:
            g = g @ steps[i - 1]
            g /= np.max(np.abs(g))
        pts = verts[i] @ g.T
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        diams[i] = max_angle(pts)
    bar = np.sum(pts, axis=0)
    return diams, bar / np.linalg.norm(bar)
