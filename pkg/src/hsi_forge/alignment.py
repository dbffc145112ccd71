"""Placement search: per-action constraints and the rejection sampler.

A placement proposal is built semi-analytically (contact point fixes the
translation, yaw is sampled, height snaps feet to the reference plane),
then every constraint is checked; failed proposals are rejected and
redrawn up to a budget. Accepted records are exactly reproducible from
(scene, clip, seed).
"""

import logging
from dataclasses import dataclass, asdict

import numpy as np

from .body import RigidPlacement, apply_placement, frame_view, region_centroid
from .errors import (EmptySurface, ExhaustedTries, NoInteractableObject,
                     NoUniqueReference, NoValidTarget, UnknownAction)
from .geometry import distance_to_hull, points_in_hull
from .io import MotionClip, ScenePointCloud
from .kdtree import SceneIndex
from .language import ACTION_PHRASES, RelationConfig, generate_description
from .records import (CollisionReport, ConstraintReport, ContactReport,
                      ContainmentReport, DatasetRecord, SupportReport)
from .scene import FloorModel, ObjectInstance, detect_floor, extract_objects, \
    floor_mask
from .seeding import derive_seed

log = logging.getLogger(__name__)

SITTABLE = ("chair", "armchair", "sofa", "couch", "bed", "stool", "toilet",
            "table")
LIEABLE = ("bed", "couch", "table")


@dataclass(frozen=True)
class ActionPolicy:
    """How one action binds its constraints.

    `contact` picks the proximity test: "seat" (hips to a sampled top
    point), "floor_goal" (pelvis xy near the target footprint), or
    "lie" (surface contact + footprint containment). `anchor` names the
    frame the contact binds; `support_frames` names which frames must
    keep feet on the reference plane ("none" marks support inapplicable,
    as for lying on top of furniture). `eligible_classes=None` admits
    every object class.
    """

    name: str
    verb_phrase: str
    contact: str
    anchor: str                    # "first" | "last"
    support_frames: str            # "first" | "last" | "all" | "none"
    eligible_classes: tuple | None

    def anchor_index(self, frame_count: int) -> int:
        return 0 if self.anchor == "first" else frame_count - 1

    def support_indices(self, frame_count: int):
        return {"first": [0], "last": [frame_count - 1],
                "all": list(range(frame_count)), "none": []}[self.support_frames]

    def admits(self, class_name: str) -> bool:
        return self.eligible_classes is None or \
            class_name in self.eligible_classes


DEFAULT_POLICIES = {
    "sit": ActionPolicy("sit", ACTION_PHRASES["sit"], "seat", "last",
                        "first", SITTABLE),
    "stand_up": ActionPolicy("stand_up", ACTION_PHRASES["stand_up"], "seat",
                             "first", "last", SITTABLE),
    "walk": ActionPolicy("walk", ACTION_PHRASES["walk"], "floor_goal",
                         "last", "all", None),
    "lie_down": ActionPolicy("lie_down", ACTION_PHRASES["lie_down"], "lie",
                             "last", "none", LIEABLE),
}


def load_policies(payload: dict) -> dict:
    """Merge user action policies (JSON dict) over the defaults."""
    policies = dict(DEFAULT_POLICIES)
    for name, spec in payload.items():
        base = policies.get(name)
        merged = {
            "name": name,
            "verb_phrase": spec.get("verb_phrase",
                                    base.verb_phrase if base else None),
            "contact": spec.get("contact", base.contact if base else None),
            "anchor": spec.get("anchor", base.anchor if base else "last"),
            "support_frames": spec.get("support_frames",
                                       base.support_frames if base else "all"),
            "eligible_classes": tuple(spec["eligible_classes"])
            if spec.get("eligible_classes") is not None
            else (base.eligible_classes if base else None),
        }
        if merged["verb_phrase"] is None or merged["contact"] is None:
            raise UnknownAction(
                f"extension action {name!r} needs verb_phrase and contact")
        if merged["contact"] not in ("seat", "floor_goal", "lie"):
            raise UnknownAction(f"unknown contact kind {merged['contact']!r}")
        policies[name] = ActionPolicy(**merged)
    return policies


@dataclass
class AlignmentConfig:
    d_collide: float = 0.02          # collision threshold, meters
    d_support: float = 0.05          # foot-to-plane tolerance
    d_contact: float = 0.05          # hip/body-to-contact threshold
    walk_radius: float = 0.5         # goal distance to footprint
    lie_containment_min: float = 0.8
    max_tries: int = 200
    seed: int = 0

    def __post_init__(self):
        for name in ("d_collide", "d_support", "d_contact", "walk_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.lie_containment_min <= 1.0:
            raise ValueError("lie_containment_min must be in (0, 1]")
        if self.max_tries < 1:
            raise ValueError("max_tries must be >= 1")
        self.seed = int(self.seed)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, payload: dict) -> "AlignmentConfig":
        known = {k: payload[k] for k in payload
                 if k in cls.__dataclass_fields__}
        return cls(**known)

    def with_seed(self, seed: int) -> "AlignmentConfig":
        data = asdict(self)
        data["seed"] = int(seed)
        return AlignmentConfig(**data)


@dataclass
class SceneContext:
    """Per-scene derived structure shared (read-only) across align calls."""

    scene: ScenePointCloud
    floor: FloorModel
    objects: list
    obstacle_index: SceneIndex | None    # non-floor points
    obstacle_ids: np.ndarray             # scene indices of those points

    def __post_init__(self):
        self._exempt_cache = {}

    @property
    def objects_by_id(self) -> dict:
        return {o.instance_id: o for o in self.objects}


def prepare_scene(scene: ScenePointCloud) -> SceneContext:
    floor = detect_floor(scene)
    fmask = floor_mask(scene, floor)
    obstacle_ids = np.flatnonzero(~fmask)
    index = SceneIndex.from_points(scene.positions[obstacle_ids]) \
        if obstacle_ids.size else None
    return SceneContext(scene=scene, floor=floor,
                        objects=extract_objects(scene),
                        obstacle_index=index, obstacle_ids=obstacle_ids)


@dataclass(frozen=True)
class PlacementProposal:
    placement: RigidPlacement
    contact_point: np.ndarray | None    # (3,) for seat/lie, goal for walk


# --------------------------------------------------------------------------
# constraint checks
# --------------------------------------------------------------------------

def check_collision(frames, ctx: SceneContext, cfg: AlignmentConfig,
                    anchor_frame: int | None = None,
                    exempt_scene_mask: np.ndarray | None = None
                    ) -> CollisionReport:
    """Nearest non-exempt scene point must stay >= d_collide for all frames.

    Floor points are never offenders (they are not in the obstacle
    index); `exempt_scene_mask` additionally exempts contact-region
    points at the anchor frame only.
    """
    if ctx.obstacle_index is None:
        return CollisionReport(passed=True, min_distance=None)
    worst = np.inf
    worst_frame = -1
    for f in range(frames.shape[0]):
        if f == anchor_frame and exempt_scene_mask is not None:
            for v in range(frames.shape[1]):
                hits = ctx.obstacle_index.radius_indices(frames[f, v],
                                                         cfg.d_collide)
                if hits.size == 0:
                    continue
                scene_ids = ctx.obstacle_ids[hits]
                live = scene_ids[~exempt_scene_mask[scene_ids]]
                if live.size == 0:
                    continue
                d = np.linalg.norm(
                    ctx.scene.positions[live] - frames[f, v], axis=1).min()
                if d < worst:
                    worst, worst_frame = float(d), f
        else:
            d = ctx.obstacle_index.min_distance_batch(frames[f])
            if d < worst:
                worst, worst_frame = float(d), f
    if not np.isfinite(worst):
        return CollisionReport(passed=True, min_distance=None)
    passed = worst >= cfg.d_collide
    return CollisionReport(
        passed=passed,
        worst_penetration=0.0 if passed else cfg.d_collide - worst,
        offending_frame=-1 if passed else worst_frame,
        min_distance=worst)


def check_support(frames, clip: MotionClip, plane_z: float,
                  cfg: AlignmentConfig, frame_indices) -> SupportReport:
    """Lowest foot vertex within +-d_support of the plane, per frame."""
    if not frame_indices:
        return SupportReport(passed=True, applicable=False)
    feet = clip.region("feet")
    max_dev = 0.0
    passed = True
    for f in frame_indices:
        dev = float(frames[f, feet, 2].min() - plane_z)
        max_dev = max(max_dev, abs(dev))
        if abs(dev) > cfg.d_support:
            passed = False
    return SupportReport(passed=passed, max_abs_deviation=max_dev)


def check_action_contact(frames, clip: MotionClip, policy: ActionPolicy,
                         target: ObjectInstance, contact_point,
                         cfg: AlignmentConfig):
    """Action-specific proximity test at the anchor frame.

    Returns (ContactReport, ContainmentReport-or-None).
    """
    anchor = policy.anchor_index(frames.shape[0])
    if policy.contact == "seat":
        hips = frames[anchor, clip.region("hips")]
        d = float(np.linalg.norm(hips - contact_point, axis=1).min())
        return (ContactReport(passed=d <= cfg.d_contact, measured_distance=d,
                              kind="seat",
                              contact_point=tuple(contact_point)), None)
    if policy.contact == "floor_goal":
        pelvis_xy = region_centroid(frame_view(clip, frames, anchor),
                                    "pelvis")[:2]
        d = float(distance_to_hull(pelvis_xy[None, :], target.footprint)[0])
        return (ContactReport(passed=d <= cfg.walk_radius, measured_distance=d,
                              kind="floor_goal",
                              contact_point=tuple(contact_point)), None)
    if policy.contact == "lie":
        body = frames[anchor]
        top_index = SceneIndex.from_points(target.top_points)
        d = top_index.min_distance_batch(body)
        contact = ContactReport(passed=d <= cfg.d_contact,
                                measured_distance=float(d), kind="lie",
                                contact_point=tuple(contact_point))
        frac = float(points_in_hull(body[:, :2], target.footprint).mean())
        containment = ContainmentReport(
            passed=frac >= cfg.lie_containment_min, fraction=frac)
        return contact, containment
    raise UnknownAction(f"no contact test for kind {policy.contact!r}")


# --------------------------------------------------------------------------
# proposals
# --------------------------------------------------------------------------

def propose_placement(clip: MotionClip, policy: ActionPolicy,
                      target: ObjectInstance, ctx: SceneContext,
                      cfg: AlignmentConfig, rng) -> PlacementProposal:
    """Draw one placement: contact point + yaw fix xy, feet fix z."""
    from .scene import sample_floor_targets, sample_surface_points

    frames = np.asarray(clip.frames, dtype=np.float64)
    anchor = policy.anchor_index(clip.frame_count)
    yaw = float(rng.uniform(0.0, 2.0 * np.pi))
    placement0 = RigidPlacement((0.0, 0.0, 0.0), yaw)
    feet = clip.region("feet")

    if policy.contact == "seat":
        cp = sample_surface_points(target, 1, rng, surface="top")[0]
        hipc = frames[anchor, clip.region("hips")].mean(axis=0)
        t = cp - placement0.apply(hipc)
        support = policy.support_indices(clip.frame_count)
        if support:
            min_foot = min(frames[f, feet, 2].min() for f in support)
            t[2] = ctx.floor.z0 - min_foot
        return PlacementProposal(RigidPlacement(tuple(t), yaw), cp)

    if policy.contact == "floor_goal":
        goal = sample_floor_targets(ctx.scene, ctx.floor, target,
                                    cfg.walk_radius, 1, rng)[0]
        pelvisc = frames[anchor, clip.region("pelvis")].mean(axis=0)
        rotated = placement0.apply(pelvisc)
        min_foot = min(frames[f, feet, 2].min()
                       for f in policy.support_indices(clip.frame_count)
                       or [anchor])
        t = np.array([goal[0] - rotated[0], goal[1] - rotated[1],
                      ctx.floor.z0 - min_foot])
        cp = np.array([goal[0], goal[1], ctx.floor.z0])
        return PlacementProposal(RigidPlacement(tuple(t), yaw), cp)

    if policy.contact == "lie":
        cp = sample_surface_points(target, 1, rng, surface="top")[0]
        bodyc = frames[anchor].mean(axis=0)
        rotated = placement0.apply(bodyc)
        # the motion rides on the local top surface: the settled body's
        # lowest point rests exactly on it
        t = np.array([cp[0] - rotated[0], cp[1] - rotated[1],
                      cp[2] - frames[anchor, :, 2].min()])
        return PlacementProposal(RigidPlacement(tuple(t), yaw), cp)

    raise UnknownAction(f"no proposal rule for kind {policy.contact!r}")


def contact_exemption_mask(ctx: SceneContext, target: ObjectInstance,
                           contact_point, cfg: AlignmentConfig,
                           kind: str = "seat") -> np.ndarray | None:
    """Scene mask of target points within 2*d_contact of the contact region.

    These are exempt from collision at the anchor frame only: required
    near-contact would otherwise read as collision. For seat contact the
    region is the sampled point; for lie contact it is the whole top
    surface the body settles onto.
    """
    if kind == "lie":
        key = (target.instance_id, round(cfg.d_contact, 9))
        cached = ctx._exempt_cache.get(key)
        if cached is not None:
            return cached
        near = np.zeros(len(target.points), dtype=bool)
        top = target.top_points
        r2 = (2.0 * cfg.d_contact) ** 2
        for lo in range(0, len(target.points), 2048):
            chunk = target.points[lo:lo + 2048]
            d2 = ((chunk[:, None, :] - top[None, :, :]) ** 2).sum(axis=2)
            near[lo:lo + 2048] = d2.min(axis=1) <= r2
        mask = np.zeros(len(ctx.scene), dtype=bool)
        mask[target.point_indices[near]] = True
        ctx._exempt_cache[key] = mask
        return mask
    if contact_point is None:
        return None
    near = np.linalg.norm(target.points - np.asarray(contact_point),
                          axis=1) <= 2.0 * cfg.d_contact
    if not near.any():
        return None
    mask = np.zeros(len(ctx.scene), dtype=bool)
    mask[target.point_indices[near]] = True
    return mask


def run_checks(frames, clip: MotionClip, policy: ActionPolicy,
               target: ObjectInstance, proposal: PlacementProposal,
               ctx: SceneContext, cfg: AlignmentConfig) -> ConstraintReport:
    contact, containment = check_action_contact(
        frames, clip, policy, target, proposal.contact_point, cfg)
    support = check_support(frames, clip, ctx.floor.z0, cfg,
                            policy.support_indices(clip.frame_count))
    exempt = None
    if policy.contact in ("seat", "lie"):
        exempt = contact_exemption_mask(ctx, target, proposal.contact_point,
                                        cfg, kind=policy.contact)
    collision = check_collision(
        frames, ctx, cfg,
        anchor_frame=policy.anchor_index(clip.frame_count),
        exempt_scene_mask=exempt)
    return ConstraintReport(collision=collision, support=support,
                            action_contact=contact, containment=containment)


# --------------------------------------------------------------------------
# the sampler
# --------------------------------------------------------------------------

def align(clip: MotionClip, scene, action: str,
          description_target: int | None = None,
          cfg: AlignmentConfig = None, policies=None,
          relation_config: RelationConfig = RelationConfig(),
          ctx: SceneContext | None = None) -> DatasetRecord:
    """Rejection-sample a fully valid placement and emit a DatasetRecord.

    Deterministic given (scene, clip, action, cfg.seed). Raises
    NoInteractableObject when nothing in the scene suits the action and
    ExhaustedTries (carrying the best attempt's report) when the budget
    runs out.
    """
    cfg = cfg or AlignmentConfig()
    policies = policies or DEFAULT_POLICIES
    if action not in policies:
        raise UnknownAction(f"no policy registered for action {action!r}")
    policy = policies[action]
    if ctx is None:
        ctx = prepare_scene(scene)

    if description_target is not None:
        by_id = ctx.objects_by_id
        if description_target not in by_id or \
                not policy.admits(by_id[description_target].class_name):
            raise NoInteractableObject(
                f"instance {description_target} is not {action}-eligible")
        eligible = [by_id[description_target]]
    else:
        eligible = [o for o in ctx.objects if policy.admits(o.class_name)]
        if not eligible:
            raise NoInteractableObject(
                f"scene {ctx.scene.scene_id!r} has no {action}-eligible object")

    rng = np.random.default_rng(cfg.seed)
    best: ConstraintReport | None = None
    for attempt in range(cfg.max_tries):
        target = eligible[int(rng.integers(0, len(eligible)))]
        try:
            proposal = propose_placement(clip, policy, target, ctx, cfg, rng)
        except (EmptySurface, NoValidTarget) as exc:
            log.debug("attempt %d: proposal failed (%s)", attempt, exc)
            continue
        frames = apply_placement(clip, proposal.placement)
        report = run_checks(frames, clip, policy, target, proposal, ctx, cfg)
        if best is None or report.passed_count > best.passed_count:
            best = report
        if not report.all_passed:
            continue
        try:
            description = generate_description(
                action, target, ctx.objects,
                np.random.default_rng(derive_seed(cfg.seed, "description")),
                config=relation_config,
                action_phrases={a: p.verb_phrase for a, p in policies.items()})
        except NoUniqueReference:
            log.debug("attempt %d: instance %d not uniquely describable",
                      attempt, target.instance_id)
            continue
        record_id = f"{ctx.scene.scene_id}__{clip.clip_id}__{cfg.seed:016x}"
        return DatasetRecord(
            record_id=record_id,
            scene_id=ctx.scene.scene_id,
            clip_id=clip.clip_id,
            action=action,
            placement=proposal.placement,
            target_instance=target.instance_id,
            description=description,
            seed=cfg.seed,
            verification=report,
            frames=frames.astype(np.float32),
        )
    raise ExhaustedTries(
        f"no valid placement for {action!r} in {ctx.scene.scene_id!r} "
        f"after {cfg.max_tries} tries",
        best_report=best, attempts=cfg.max_tries)
