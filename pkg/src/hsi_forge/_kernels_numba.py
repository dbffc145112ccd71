"""Numba-jitted kernel implementations.

Same contracts as `_kernels_numpy`; these are the hot paths for
million-query collision checks. All kernels release the GIL so the
synthesis worker pool gets real parallelism.
"""

import numpy as np
from numba import njit

_STACK = 128


@njit(cache=True, nogil=True)
def nn_query(pts, idx, node_axis, node_split, node_left, node_right,
             node_lo, node_hi, q, best_d2=np.inf, best_idx=-1):
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
        for i in range(node_lo[node], node_hi[node]):
            dx = pts[i, 0] - q[0]
            dy = pts[i, 1] - q[1]
            dz = pts[i, 2] - q[2]
            d2 = dx * dx + dy * dy + dz * dz
            if d2 < best_d2 or (d2 == best_d2 and idx[i] < best_idx):
                best_d2 = d2
                best_idx = idx[i]
    return best_d2, best_idx


@njit(cache=True, nogil=True)
def batch_min(pts, idx, node_axis, node_split, node_left, node_right,
              node_lo, node_hi, queries, floor2=-1.0):
    best_d2 = np.inf
    best_q = -1
    best_p = -1
    for j in range(queries.shape[0]):
        d2, p = nn_query(pts, idx, node_axis, node_split, node_left,
                         node_right, node_lo, node_hi, queries[j],
                         best_d2, -1)
        if p >= 0 and d2 < best_d2:
            best_d2 = d2
            best_q = j
            best_p = p
            if floor2 >= 0.0 and best_d2 < floor2:
                break
    return best_d2, best_q, best_p


@njit(cache=True, nogil=True)
def radius_collect(pts, idx, node_axis, node_split, node_left, node_right,
                   node_lo, node_hi, q, r2):
    stack_node = np.empty(_STACK, dtype=np.int32)
    stack_node[0] = 0
    top = 1
    out = np.empty(16, dtype=np.int64)
    count = 0
    while top > 0:
        top -= 1
        node = stack_node[top]
        while node_axis[node] >= 0:
            ax = node_axis[node]
            diff = q[ax] - node_split[node]
            if diff < 0.0:
                near, far = node_left[node], node_right[node]
            else:
                near, far = node_right[node], node_left[node]
            if diff * diff < r2:
                stack_node[top] = far
                top += 1
            node = near
        for i in range(node_lo[node], node_hi[node]):
            dx = pts[i, 0] - q[0]
            dy = pts[i, 1] - q[1]
            dz = pts[i, 2] - q[2]
            if dx * dx + dy * dy + dz * dz < r2:
                if count == out.shape[0]:
                    grown = np.empty(out.shape[0] * 2, dtype=np.int64)
                    grown[:count] = out
                    out = grown
                out[count] = idx[i]
                count += 1
    res = out[:count].copy()
    res.sort()
    return res


@njit(cache=True, nogil=True)
def winding_numbers(verts, faces, queries):
    out = np.empty(queries.shape[0], dtype=np.float64)
    two_pi = 2.0 * np.pi
    for i in range(queries.shape[0]):
        qx, qy, qz = queries[i, 0], queries[i, 1], queries[i, 2]
        total = 0.0
        for f in range(faces.shape[0]):
            ax = verts[faces[f, 0], 0] - qx
            ay = verts[faces[f, 0], 1] - qy
            az = verts[faces[f, 0], 2] - qz
            bx = verts[faces[f, 1], 0] - qx
            by = verts[faces[f, 1], 1] - qy
            bz = verts[faces[f, 1], 2] - qz
            cx = verts[faces[f, 2], 0] - qx
            cy = verts[faces[f, 2], 1] - qy
            cz = verts[faces[f, 2], 2] - qz
            la = np.sqrt(ax * ax + ay * ay + az * az)
            lb = np.sqrt(bx * bx + by * by + bz * bz)
            lc = np.sqrt(cx * cx + cy * cy + cz * cz)
            det = (ax * (by * cz - bz * cy)
                   + ay * (bz * cx - bx * cz)
                   + az * (bx * cy - by * cx))
            denom = (la * lb * lc
                     + (ax * bx + ay * by + az * bz) * lc
                     + (bx * cx + by * cy + bz * cz) * la
                     + (cx * ax + cy * ay + cz * az) * lb)
            total += np.arctan2(det, denom)
        out[i] = total / two_pi
    return out


@njit(cache=True, nogil=True)
def _closest_on_triangle(ax, ay, az, abx, aby, abz, acx, acy, acz,
                         qx, qy, qz):
    # Ericson 5.1.5, scalar.
    apx, apy, apz = qx - ax, qy - ay, qz - az
    d1 = abx * apx + aby * apy + abz * apz
    d2 = acx * apx + acy * apy + acz * apz
    if d1 <= 0.0 and d2 <= 0.0:
        return ax, ay, az
    bpx, bpy, bpz = apx - abx, apy - aby, apz - abz
    d3 = abx * bpx + aby * bpy + abz * bpz
    d4 = acx * bpx + acy * bpy + acz * bpz
    if d3 >= 0.0 and d4 <= d3:
        return ax + abx, ay + aby, az + abz
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        t = d1 / (d1 - d3)
        return ax + t * abx, ay + t * aby, az + t * abz
    cpx, cpy, cpz = apx - acx, apy - acy, apz - acz
    d5 = abx * cpx + aby * cpy + abz * cpz
    d6 = acx * cpx + acy * cpy + acz * cpz
    if d6 >= 0.0 and d5 <= d6:
        return ax + acx, ay + acy, az + acz
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        t = d2 / (d2 - d6)
        return ax + t * acx, ay + t * acy, az + t * acz
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and d4 - d3 >= 0.0 and d5 - d6 >= 0.0:
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return (ax + abx + t * (acx - abx),
                ay + aby + t * (acy - aby),
                az + abz + t * (acz - abz))
    denom = va + vb + vc
    if denom == 0.0:
        denom = 1.0
    v = vb / denom
    w = vc / denom
    return (ax + v * abx + w * acx,
            ay + v * aby + w * acy,
            az + v * abz + w * acz)


@njit(cache=True, nogil=True)
def min_dist_to_triangles(verts, faces, queries):
    out = np.empty(queries.shape[0], dtype=np.float64)
    for i in range(queries.shape[0]):
        qx, qy, qz = queries[i, 0], queries[i, 1], queries[i, 2]
        best = np.inf
        for f in range(faces.shape[0]):
            ax = verts[faces[f, 0], 0]
            ay = verts[faces[f, 0], 1]
            az = verts[faces[f, 0], 2]
            abx = verts[faces[f, 1], 0] - ax
            aby = verts[faces[f, 1], 1] - ay
            abz = verts[faces[f, 1], 2] - az
            acx = verts[faces[f, 2], 0] - ax
            acy = verts[faces[f, 2], 1] - ay
            acz = verts[faces[f, 2], 2] - az
            px, py, pz = _closest_on_triangle(
                ax, ay, az, abx, aby, abz, acx, acy, acz, qx, qy, qz)
            dx, dy, dz = px - qx, py - qy, pz - qz
            d2 = dx * dx + dy * dy + dz * dz
            if d2 < best:
                best = d2
        out[i] = np.sqrt(best)
    return out
