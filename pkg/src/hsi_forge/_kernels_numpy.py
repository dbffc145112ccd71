"""Pure-numpy kernel implementations.

Fallback path for environments without numba (or with
``HSI_FORGE_BACKEND=numpy``). Tree traversal runs in Python with
vectorized leaf scans; results are identical to the numba kernels
because both resolve ties by lowest original point index.
"""

import numpy as np

_STACK = 128


def nn_query(pts, idx, node_axis, node_split, node_left, node_right,
             node_lo, node_hi, q, best_d2=np.inf, best_idx=-1):
    """Exact nearest neighbor of `q`. Returns (squared distance, original index).

    `best_d2`/`best_idx` seed the running bound; a far branch is pruned
    only when its plane distance strictly exceeds the bound, so equal
    distances are still visited and the lowest-index tie wins.
    """
    stack_node = np.empty(_STACK, dtype=np.int32)
    stack_diff2 = np.empty(_STACK, dtype=np.float64)
    stack_node[0] = 0
    stack_diff2[0] = 0.0
    top = 1
    while top > 0:
        top -= 1
        node = stack_node[top]
        if stack_diff2[top] > best_d2:
            continue
        while node_axis[node] >= 0:
            ax = node_axis[node]
            diff = q[ax] - node_split[node]
            if diff < 0.0:
                near, far = node_left[node], node_right[node]
            else:
                near, far = node_right[node], node_left[node]
            d2 = diff * diff
            if d2 <= best_d2:
                stack_node[top] = far
                stack_diff2[top] = d2
                top += 1
            node = near
        lo, hi = node_lo[node], node_hi[node]
        delta = pts[lo:hi] - q
        d2 = (delta * delta).sum(axis=1)
        dmin = d2.min()
        if dmin < best_d2:
            best_d2 = dmin
            best_idx = idx[lo:hi][d2 == dmin].min()
        elif dmin == best_d2 and best_idx >= 0:
            cand = idx[lo:hi][d2 == dmin].min()
            if cand < best_idx:
                best_idx = cand
    return best_d2, best_idx


def batch_min(pts, idx, node_axis, node_split, node_left, node_right,
              node_lo, node_hi, queries, floor2=-1.0):
    """Minimum NN squared distance over a query batch.

    Returns (min_d2, query row, original point index) of the minimum.
    The running minimum seeds each query's pruning bound; when
    `floor2` >= 0 and the bound drops below it, remaining queries are
    skipped (the returned value is then only guaranteed <= floor2).
    """
    best_d2 = np.inf
    best_q = -1
    best_p = -1
    for j in range(queries.shape[0]):
        d2, p = nn_query(pts, idx, node_axis, node_split, node_left,
                         node_right, node_lo, node_hi, queries[j],
                         best_d2=best_d2, best_idx=-1)
        if p >= 0 and d2 < best_d2:
            best_d2 = d2
            best_q = j
            best_p = p
            if floor2 >= 0.0 and best_d2 < floor2:
                break
    return best_d2, best_q, best_p


def radius_collect(pts, idx, node_axis, node_split, node_left, node_right,
                   node_lo, node_hi, q, r2):
    """Original indices of all points with squared distance < r2 (strict)."""
    out = []
    stack = [0]
    while stack:
        node = stack.pop()
        while node_axis[node] >= 0:
            ax = node_axis[node]
            diff = q[ax] - node_split[node]
            if diff < 0.0:
                near, far = node_left[node], node_right[node]
            else:
                near, far = node_right[node], node_left[node]
            if diff * diff < r2:
                stack.append(far)
            node = near
        lo, hi = node_lo[node], node_hi[node]
        delta = pts[lo:hi] - q
        d2 = (delta * delta).sum(axis=1)
        hit = idx[lo:hi][d2 < r2]
        if hit.size:
            out.append(hit)
    if not out:
        return np.empty(0, dtype=np.int64)
    res = np.concatenate(out)
    res.sort()
    return res


def winding_numbers(verts, faces, queries):
    """Generalized winding number of each query w.r.t. a triangle soup.

    Solid-angle sum (van Oosterom & Strackee) over all faces, divided
    by 4*pi; ~1 inside a watertight mesh, ~0 outside.
    """
    va = verts[faces[:, 0]]
    vb = verts[faces[:, 1]]
    vc = verts[faces[:, 2]]
    out = np.empty(queries.shape[0], dtype=np.float64)
    for i in range(queries.shape[0]):
        q = queries[i]
        a = va - q
        b = vb - q
        c = vc - q
        la = np.sqrt((a * a).sum(axis=1))
        lb = np.sqrt((b * b).sum(axis=1))
        lc = np.sqrt((c * c).sum(axis=1))
        det = (a * np.cross(b, c)).sum(axis=1)
        denom = (la * lb * lc + (a * b).sum(axis=1) * lc
                 + (b * c).sum(axis=1) * la + (c * a).sum(axis=1) * lb)
        out[i] = np.arctan2(det, denom).sum() / (2.0 * np.pi)
    return out


def min_dist_to_triangles(verts, faces, queries):
    """Unsigned distance from each query to the closest triangle."""
    va = verts[faces[:, 0]]
    ab = verts[faces[:, 1]] - va
    ac = verts[faces[:, 2]] - va
    out = np.empty(queries.shape[0], dtype=np.float64)
    for i in range(queries.shape[0]):
        cp = _closest_points_on_triangles(va, ab, ac, queries[i])
        delta = cp - queries[i]
        out[i] = np.sqrt((delta * delta).sum(axis=1).min())
    return out


def _closest_points_on_triangles(va, ab, ac, q):
    # Ericson, Real-Time Collision Detection, 5.1.5. The scalar routine's
    # early returns become a first-match-wins masked cascade.
    ap = q - va
    d1 = (ab * ap).sum(axis=1)
    d2 = (ac * ap).sum(axis=1)
    bp = ap - ab
    d3 = (ab * bp).sum(axis=1)
    d4 = (ac * bp).sum(axis=1)
    cp = ap - ac
    d5 = (ab * cp).sum(axis=1)
    d6 = (ac * cp).sum(axis=1)

    n = va.shape[0]
    res = np.empty_like(va)
    done = np.zeros(n, dtype=bool)

    def take(mask, value):
        nonlocal done
        m = mask & ~done
        if m.any():
            res[m] = value[m]
        done = done | m

    safe = lambda x: np.where(x != 0.0, x, 1.0)

    take((d1 <= 0.0) & (d2 <= 0.0), va)                       # vertex A
    take((d3 >= 0.0) & (d4 <= d3), va + ab)                   # vertex B
    vc_ = d1 * d4 - d3 * d2
    t = (d1 / safe(d1 - d3))[:, None]
    take((vc_ <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0), va + t * ab)   # edge AB
    take((d6 >= 0.0) & (d5 <= d6), va + ac)                   # vertex C
    vb_ = d5 * d2 - d1 * d6
    t = (d2 / safe(d2 - d6))[:, None]
    take((vb_ <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0), va + t * ac)   # edge AC
    va_ = d3 * d6 - d5 * d4
    t = ((d4 - d3) / safe((d4 - d3) + (d5 - d6)))[:, None]
    take((va_ <= 0.0) & (d4 - d3 >= 0.0) & (d5 - d6 >= 0.0),
         va + ab + t * (ac - ab))                             # edge BC
    denom = safe(va_ + vb_ + vc_)
    v = (vb_ / denom)[:, None]
    w = (vc_ / denom)[:, None]
    take(np.ones(n, dtype=bool), va + v * ab + w * ac)        # face interior
    return res
