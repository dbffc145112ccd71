"""Referential description generation and resolution.

Compositional template: action phrase, target class, optional spatial
relation against one or two anchor objects. A relation clause is added
only when the target's class has distractors, and only relations that
single out the target survive; anchors are restricted to classes with
exactly one instance so the anchor itself is unambiguous.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import Ambiguous, NoMatch, NoUniqueReference, UnknownAction
from .geometry import point_segment_distance_2d


class RelationKind(str, Enum):
    HORIZONTAL_NEAR = "horizontal_near"
    HORIZONTAL_FAR = "horizontal_far"
    ABOVE = "above"
    BELOW = "below"
    BETWEEN = "between"
    SUPPORTING = "supporting"
    SUPPORTED_BY = "supported_by"
    ALLO_LEFT = "allocentric_left"
    ALLO_RIGHT = "allocentric_right"
    ALLO_FRONT = "allocentric_front"
    ALLO_BACK = "allocentric_back"


# the spatial-relation vocabulary; Description stores a kind plus anchors
Relation = RelationKind

ACTION_PHRASES = {
    "sit": "sit on",
    "stand_up": "stand up from",
    "walk": "walk to",
    "lie_down": "lie down on",
}

RELATION_PHRASES = {
    RelationKind.HORIZONTAL_NEAR: "near",
    RelationKind.HORIZONTAL_FAR: "far from",
    RelationKind.ABOVE: "above",
    RelationKind.BELOW: "below",
    RelationKind.SUPPORTED_BY: "on top of",
    RelationKind.SUPPORTING: "supporting",
    RelationKind.ALLO_LEFT: "to the left of",
    RelationKind.ALLO_RIGHT: "to the right of",
    RelationKind.ALLO_FRONT: "in front of",
    RelationKind.ALLO_BACK: "behind",
}


@dataclass(frozen=True)
class RelationConfig:
    """Geometric thresholds for relation tests (Sr3D-style, configurable)."""

    overlap_min: float = 0.25       # xy aabb overlap / smaller footprint area
    support_gap: float = 0.05       # max z gap for supported-by / supporting
    between_corridor: float = 0.20  # max xy distance to the anchor segment
    allocentric_enabled: bool = False

    @classmethod
    def from_json(cls, payload: dict) -> "RelationConfig":
        return cls(**{k: payload[k] for k in payload
                      if k in cls.__dataclass_fields__})


@dataclass
class Description:
    """Structured referring expression plus its rendered text."""

    action: str
    action_phrase: str
    target_class: str
    target_instance: int
    relation: RelationKind | None = None
    anchor_classes: tuple = ()
    text: str = ""

    def __post_init__(self):
        if self.relation is not None:
            self.relation = RelationKind(self.relation)
            if not self.anchor_classes:
                raise ValueError("relation requires at least one anchor")
            if (self.relation is RelationKind.BETWEEN) != \
                    (len(self.anchor_classes) == 2):
                raise ValueError("exactly two anchors iff relation is between")
        self.anchor_classes = tuple(self.anchor_classes)
        if not self.text:
            self.text = render_text(self.action_phrase, self.target_class,
                                    self.relation, self.anchor_classes)

    @property
    def word_count(self) -> int:
        return len(self.text.split())

    def to_json(self) -> dict:
        return {
            "action": self.action,
            "action_phrase": self.action_phrase,
            "target_class": self.target_class,
            "target_instance": self.target_instance,
            "relation": None if self.relation is None else self.relation.value,
            "anchor_classes": list(self.anchor_classes),
            "text": self.text,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "Description":
        return cls(
            action=payload["action"],
            action_phrase=payload["action_phrase"],
            target_class=payload["target_class"],
            target_instance=int(payload["target_instance"]),
            relation=payload.get("relation"),
            anchor_classes=tuple(payload.get("anchor_classes", ())),
            text=payload.get("text", ""),
        )


def render_text(action_phrase: str, target_class: str,
                relation: RelationKind | None, anchor_classes) -> str:
    base = f"{action_phrase} the {target_class}"
    if relation is None:
        return base
    if relation is RelationKind.BETWEEN:
        a, b = anchor_classes
        return f"{base} between the {a} and the {b}"
    return f"{base} {RELATION_PHRASES[relation]} the {anchor_classes[0]}"


def _xy_overlap_ratio(a, b) -> float:
    lo = np.maximum(a.aabb_lo[:2], b.aabb_lo[:2])
    hi = np.minimum(a.aabb_hi[:2], b.aabb_hi[:2])
    if (hi <= lo).any():
        return 0.0
    inter = float(np.prod(hi - lo))
    area_a = float(np.prod(a.aabb_hi[:2] - a.aabb_lo[:2]))
    area_b = float(np.prod(b.aabb_hi[:2] - b.aabb_lo[:2]))
    smaller = min(area_a, area_b)
    return inter / smaller if smaller > 0 else 0.0


def compute_relations(target, anchor, objects, second_anchor=None,
                      config: RelationConfig = RelationConfig()):
    """Relations holding between target and anchor (or the anchor pair).

    With `second_anchor`, only the BETWEEN test applies. Single-anchor
    near/far need at least one same-class distractor to compare against;
    allocentric kinds need orientation metadata and stay disabled here.
    """
    if target.instance_id == anchor.instance_id:
        raise ValueError("target and anchor must differ")
    if second_anchor is not None:
        d = point_segment_distance_2d(target.centroid[:2],
                                      anchor.centroid[:2],
                                      second_anchor.centroid[:2])
        return [RelationKind.BETWEEN] if d <= config.between_corridor else []

    out = []
    peers = [o for o in objects
             if o.class_name == target.class_name
             and o.instance_id != target.instance_id]
    if peers:
        dists = {o.instance_id: float(np.hypot(
            *(o.centroid[:2] - anchor.centroid[:2])))
            for o in peers + [target]}
        mine = dists[target.instance_id]
        others = [dists[o.instance_id] for o in peers]
        if mine < min(others):
            out.append(RelationKind.HORIZONTAL_NEAR)
        if mine > max(others):
            out.append(RelationKind.HORIZONTAL_FAR)

    if _xy_overlap_ratio(target, anchor) >= config.overlap_min:
        if target.aabb_lo[2] >= anchor.aabb_hi[2]:
            out.append(RelationKind.ABOVE)
            if target.aabb_lo[2] - anchor.aabb_hi[2] <= config.support_gap:
                out.append(RelationKind.SUPPORTED_BY)
        elif target.aabb_hi[2] <= anchor.aabb_lo[2]:
            out.append(RelationKind.BELOW)
            if anchor.aabb_lo[2] - target.aabb_hi[2] <= config.support_gap:
                out.append(RelationKind.SUPPORTING)
    return out


def _holds(obj, anchors, kind, objects, config) -> bool:
    if kind is RelationKind.BETWEEN:
        return bool(compute_relations(obj, anchors[0], objects,
                                      second_anchor=anchors[1], config=config))
    return kind in compute_relations(obj, anchors[0], objects, config=config)


def generate_description(action: str, target, objects, rng,
                         config: RelationConfig = RelationConfig(),
                         action_phrases=None) -> Description:
    """Uniquely-referring description of `target` for the given action.

    A sole-instance class needs no relation clause. Otherwise every
    (relation, unique-class anchor) pair is tested and kept only if no
    same-class distractor also satisfies it; one survivor is drawn with
    the provided rng. Raises NoUniqueReference when nothing separates
    the target from its distractors.
    """
    phrases = action_phrases if action_phrases is not None else ACTION_PHRASES
    if action not in phrases:
        raise UnknownAction(f"no verb phrase registered for action {action!r}")
    phrase = phrases[action]

    same_class = [o for o in objects if o.class_name == target.class_name]
    if len(same_class) == 1:
        return Description(action=action, action_phrase=phrase,
                           target_class=target.class_name,
                           target_instance=target.instance_id)

    class_counts = {}
    for o in objects:
        class_counts[o.class_name] = class_counts.get(o.class_name, 0) + 1
    anchors = sorted((o for o in objects
                      if class_counts[o.class_name] == 1
                      and o.class_name != target.class_name),
                     key=lambda o: o.instance_id)
    distractors = [o for o in same_class
                   if o.instance_id != target.instance_id]

    candidates = []
    for anchor in anchors:
        for kind in compute_relations(target, anchor, objects, config=config):
            if not any(_holds(d, (anchor,), kind, objects, config)
                       for d in distractors):
                candidates.append((kind, (anchor,)))
    for i, a1 in enumerate(anchors):
        for a2 in anchors[i + 1:]:
            if _holds(target, (a1, a2), RelationKind.BETWEEN, objects, config) \
                    and not any(_holds(d, (a1, a2), RelationKind.BETWEEN,
                                       objects, config) for d in distractors):
                candidates.append((RelationKind.BETWEEN, (a1, a2)))

    if not candidates:
        raise NoUniqueReference(
            f"no discriminating relation for instance {target.instance_id} "
            f"({target.class_name})")
    candidates.sort(key=lambda c: (c[0].value,
                                   tuple(a.instance_id for a in c[1])))
    kind, chosen = candidates[int(rng.integers(0, len(candidates)))]
    return Description(
        action=action, action_phrase=phrase,
        target_class=target.class_name, target_instance=target.instance_id,
        relation=kind,
        anchor_classes=tuple(a.class_name for a in chosen))


def resolve_description(desc: Description, objects,
                        config: RelationConfig = RelationConfig()) -> int:
    """Instance id the structured description denotes (text is ignored)."""
    if not objects:
        raise NoMatch("no objects to resolve against")
    pool = [o for o in objects if o.class_name == desc.target_class]
    if not pool:
        raise NoMatch(f"class {desc.target_class!r} absent from scene")
    if desc.relation is None:
        if len(pool) > 1:
            raise Ambiguous(
                f"{len(pool)} instances of {desc.target_class!r}, no relation")
        return pool[0].instance_id

    anchors = []
    for cname in desc.anchor_classes:
        hits = [o for o in objects if o.class_name == cname]
        if not hits:
            raise NoMatch(f"anchor class {cname!r} absent from scene")
        if len(hits) > 1:
            raise Ambiguous(f"anchor class {cname!r} is not unique")
        anchors.append(hits[0])

    matches = [o for o in pool
               if o.instance_id not in {a.instance_id for a in anchors}
               and _holds(o, tuple(anchors), desc.relation, objects, config)]
    if not matches:
        raise NoMatch(f"nothing satisfies {desc.relation.value} "
                      f"w.r.t. {desc.anchor_classes}")
    if len(matches) > 1:
        raise Ambiguous(
            f"{len(matches)} instances satisfy {desc.relation.value}")
    return matches[0].instance_id
