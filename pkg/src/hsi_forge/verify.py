"""Independent brute-force re-verification of emitted records.

Deliberately avoids the k-d tree and any early exits: distances come
from dense all-pairs numpy math, constraints and the documented
exemption policy are re-derived from scratch, and the description is
re-resolved. This is the soundness gate behind `hsi-forge validate`.
"""

import numpy as np

from .alignment import ActionPolicy, AlignmentConfig, DEFAULT_POLICIES
from .body import apply_placement
from .errors import Ambiguous, NoMatch
from .geometry import distance_to_hull, points_in_hull
from .language import RelationConfig, resolve_description
from .records import DatasetRecord
from .scene import extract_objects, detect_floor, floor_mask


def _min_dists_to(points: np.ndarray, queries: np.ndarray,
                  chunk: int = 8192) -> np.ndarray:
    """Exact-enough dense NN distances from each query to the point set."""
    q_sq = (queries ** 2).sum(axis=1)[:, None]
    best = np.full(queries.shape[0], np.inf)
    for lo in range(0, points.shape[0], chunk):
        p = points[lo:lo + chunk]
        d2 = q_sq + (p ** 2).sum(axis=1)[None, :] - 2.0 * (queries @ p.T)
        np.minimum(best, d2.min(axis=1), out=best)
    return np.sqrt(np.clip(best, 0.0, None))


def verify_record(record: DatasetRecord, scene, clip,
                  cfg: AlignmentConfig = None, policies=None,
                  relation_config: RelationConfig = RelationConfig()) -> dict:
    """Re-check every applicable constraint of a record from first principles.

    Returns a report dict with one entry per check plus an overall
    "passed" flag; never raises on constraint failure.
    """
    cfg = cfg or AlignmentConfig()
    policies = policies or DEFAULT_POLICIES
    policy: ActionPolicy = policies[record.action]
    report = {"record_id": record.record_id, "checks": {}}
    checks = report["checks"]

    frames = apply_placement(clip, record.placement)
    f_count, v_count = frames.shape[0], frames.shape[1]
    anchor = policy.anchor_index(f_count)

    # stored blob must be exactly the float32 image of the placement
    checks["frames_match"] = bool(
        np.array_equal(record.frames, frames.astype(np.float32)))

    # isometry against the source clip (10 vertex pairs per frame)
    rng = np.random.default_rng(0)
    pairs = rng.integers(0, v_count, size=(10, 2))
    drift = 0.0
    src = np.asarray(clip.frames, dtype=np.float64)
    for f in range(f_count):
        for a, b in pairs:
            d_src = np.linalg.norm(src[f, a] - src[f, b])
            d_out = np.linalg.norm(frames[f, a] - frames[f, b])
            drift = max(drift, abs(d_src - d_out))
    checks["isometry"] = bool(drift <= 1e-6)
    report["max_pairwise_drift"] = float(drift)

    floor = detect_floor(scene)
    objects = extract_objects(scene)
    target = {o.instance_id: o for o in objects}[record.target_instance]
    fmask = floor_mask(scene, floor)
    obstacles = scene.positions[~fmask]
    obstacle_ids = np.flatnonzero(~fmask)

    contact_point = record.verification.action_contact.contact_point
    exempt = np.zeros(len(scene), dtype=bool)
    if policy.contact == "seat" and contact_point is not None:
        near = np.linalg.norm(
            target.points - np.asarray(contact_point), axis=1) \
            <= 2.0 * cfg.d_contact
        exempt[target.point_indices[near]] = True
    elif policy.contact == "lie":
        top = target.top_points
        near = _min_dists_to(top, target.points) <= 2.0 * cfg.d_contact
        exempt[target.point_indices[near]] = True

    # collision: dense all-pairs, exemptions only at the anchor frame
    min_clear = np.inf
    if obstacles.shape[0]:
        anchor_live = obstacles[~exempt[obstacle_ids]]
        for f in range(f_count):
            pool = anchor_live if f == anchor else obstacles
            if pool.shape[0] == 0:
                continue
            d = _min_dists_to(pool, frames[f])
            min_clear = min(min_clear, float(d.min()))
    checks["collision"] = bool(min_clear >= cfg.d_collide) \
        if np.isfinite(min_clear) else True
    report["collision_min_distance"] = None if not np.isfinite(min_clear) \
        else min_clear

    support_frames = policy.support_indices(f_count)
    if support_frames:
        feet = clip.region("feet")
        devs = [abs(float(frames[f, feet, 2].min() - floor.z0))
                for f in support_frames]
        checks["support"] = bool(max(devs) <= cfg.d_support)
        report["support_max_deviation"] = max(devs)
    else:
        checks["support"] = True
        report["support_max_deviation"] = None

    if policy.contact == "seat":
        hips = frames[anchor, clip.region("hips")]
        d = float(np.linalg.norm(
            hips - np.asarray(contact_point), axis=1).min())
        checks["contact"] = bool(d <= cfg.d_contact)
    elif policy.contact == "floor_goal":
        pelvis_xy = frames[anchor, clip.region("pelvis")].mean(axis=0)[:2]
        d = float(distance_to_hull(pelvis_xy[None, :], target.footprint)[0])
        checks["contact"] = bool(d <= cfg.walk_radius)
    else:  # lie
        d = float(_min_dists_to(target.top_points, frames[anchor]).min())
        checks["contact"] = bool(d <= cfg.d_contact)
        frac = float(points_in_hull(frames[anchor][:, :2],
                                    target.footprint).mean())
        checks["containment"] = bool(frac >= cfg.lie_containment_min)
        report["containment_fraction"] = frac
    report["contact_distance"] = d

    try:
        resolved = resolve_description(record.description, objects,
                                       config=relation_config)
        checks["description"] = bool(resolved == record.target_instance)
    except (Ambiguous, NoMatch):
        checks["description"] = False

    report["passed"] = all(checks.values())
    return report
