"""Independent brute-force oracles used to pin expected values.

Everything here is deliberately written as plain loops / direct formula
evaluation, separate from the library's own code paths.
"""

import math

import numpy as np


def _sqdist(p, q):
    total = 0.0
    for a, b in zip(p, q):
        d = float(a) - float(b)
        total += d * d  # multiply, not **2: libm pow(x, 2) can round differently
    return total


def linear_nn(points, query):
    """Exhaustive nearest neighbor; ties broken by lowest index."""
    best_i, best_d = -1, math.inf
    for i, p in enumerate(points):
        d = math.sqrt(_sqdist(p, query))
        if d < best_d:
            best_i, best_d = i, d
    return best_i, best_d


def linear_knn(points, query, k):
    """Exhaustive k nearest neighbors with the lowest-index tie rule."""
    d2 = [(_sqdist(p, query), i) for i, p in enumerate(points)]
    d2.sort()  # (distance, index) lexicographic == tie rule
    return [(i, math.sqrt(d)) for d, i in d2[:k]]


def brute_chamfer(a, b):
    """O(n^2) Chamfer sum: squared NN distances, both directions."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    total = 0.0
    for p in a:
        total += min(float(np.sum((p - q) ** 2)) for q in b)
    for q in b:
        total += min(float(np.sum((q - p) ** 2)) for p in a)
    return total


def brute_hausdorff(a, b):
    """O(n^2) symmetric Hausdorff distance (unsquared)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)

    def directed(src, dst):
        return max(
            min(math.sqrt(float(np.sum((p - q) ** 2))) for q in dst) for p in src
        )

    return max(directed(a, b), directed(b, a))


def monotone_chain(points):
    """Convex hull (Andrew's monotone chain), CCW, as indices into `points`.

    Collinear boundary points are kept (strict turns only pop), so for a set
    in convex position every point appears on the hull.
    """
    pts = np.asarray(points, dtype=np.float64)
    order = sorted(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1]))

    def cross(o, a, b):
        return (pts[a][0] - pts[o][0]) * (pts[b][1] - pts[o][1]) - (
            pts[a][1] - pts[o][1]
        ) * (pts[b][0] - pts[o][0])

    lower = []
    for i in order:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], i) < 0:
            lower.pop()
        lower.append(i)
    upper = []
    for i in reversed(order):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], i) < 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def project_homogeneous(p, k_mat, e_rgb, e_tof):
    """Projection via direct homogeneous-matrix evaluation.

    Builds the full 4x4 chain with a generic matrix inverse, multiplies the
    homogeneous point through, applies the 3x3 intrinsic matrix, and divides
    by depth.  Returns (u, v, z_rgb).
    """
    homo = np.array([p[0], p[1], p[2], 1.0], dtype=np.float64)
    chain = np.linalg.inv(np.asarray(e_rgb, dtype=np.float64)) @ np.asarray(
        e_tof, dtype=np.float64
    )
    rgb = chain @ homo
    img = np.asarray(k_mat, dtype=np.float64) @ rgb[:3]
    return img[0] / img[2], img[1] / img[2], rgb[2]


def central_difference(f, x, h=1e-6):
    """Central finite-difference gradient of scalar f at flat vector x."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def random_rotation(rng):
    """Uniform-ish random rotation matrix with determinant +1."""
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def matrix_chamfer(a, b):
    """O(n^2) Chamfer via a full pairwise distance matrix."""
    d2 = ((np.asarray(a)[:, None, :] - np.asarray(b)[None, :, :]) ** 2).sum(-1)
    return float(d2.min(axis=1).sum() + d2.min(axis=0).sum())


def matrix_hausdorff(a, b):
    """O(n^2) symmetric Hausdorff via a full pairwise distance matrix."""
    d = np.sqrt(((np.asarray(a)[:, None, :] - np.asarray(b)[None, :, :]) ** 2).sum(-1))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def sample_far_from_ties(rng, n_edge, n_hull, margin=1e-3, span=20.0):
    """Random (edge set, hull vertices) with every discrete choice of the
    combined loss -- NN matches, directed argmaxes, max direction, and
    smoothness kinks -- at least `margin` away from a tie, so central
    finite differences of the true loss equal the fixed-match gradient."""
    while True:
        r = rng.uniform(0, span, size=(n_edge, 2))
        p = rng.uniform(0, span, size=(n_hull, 2))
        ok = True
        for a, b in ((r, p), (p, r)):
            d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
            d_sorted = np.sort(d, axis=1)
            if b.shape[0] > 1 and np.min(d_sorted[:, 1] - d_sorted[:, 0]) < margin:
                ok = False  # NN match nearly tied
            nn = d_sorted[:, 0]
            top = np.sort(nn)[::-1]
            if len(top) > 1 and top[0] - top[1] < margin:
                ok = False  # directed argmax nearly tied
        d_rp = np.min(np.sqrt(((r[:, None] - p[None]) ** 2).sum(-1)), axis=1)
        d_pr = np.min(np.sqrt(((p[:, None] - r[None]) ** 2).sum(-1)), axis=1)
        if abs(d_rp.max() - d_pr.max()) < margin:
            ok = False  # direction tie
        dg = np.diff(np.diff(p, axis=0), axis=0)
        if np.min(np.hypot(dg[:, 0], dg[:, 1])) < margin:
            ok = False  # smoothness kink: FD ill-posed
        if ok:
            return r, p
