"""Dataset records: constraint reports, JSON sidecars, frame blobs."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .body import RigidPlacement
from .errors import ParseError, SchemaError
from .language import Description


@dataclass
class CollisionReport:
    passed: bool
    worst_penetration: float = 0.0
    offending_frame: int = -1
    min_distance: float | None = None   # None when nothing was in range

    def to_json(self):
        return {"passed": self.passed,
                "worst_penetration": self.worst_penetration,
                "offending_frame": self.offending_frame,
                "min_distance": self.min_distance}


@dataclass
class SupportReport:
    passed: bool
    max_abs_deviation: float = 0.0
    applicable: bool = True

    def to_json(self):
        return {"passed": self.passed,
                "max_abs_deviation": self.max_abs_deviation,
                "applicable": self.applicable}


@dataclass
class ContactReport:
    passed: bool
    measured_distance: float
    kind: str                           # seat | floor_goal | lie
    contact_point: tuple | None = None  # informs verification exemptions

    def to_json(self):
        return {"passed": self.passed,
                "measured_distance": self.measured_distance,
                "kind": self.kind,
                "contact_point": None if self.contact_point is None
                else list(self.contact_point)}


@dataclass
class ContainmentReport:
    passed: bool
    fraction: float

    def to_json(self):
        return {"passed": self.passed, "fraction": self.fraction}


@dataclass
class ConstraintReport:
    collision: CollisionReport
    support: SupportReport
    action_contact: ContactReport
    containment: ContainmentReport | None = None

    @property
    def all_passed(self) -> bool:
        checks = [self.collision.passed, self.action_contact.passed]
        if self.support.applicable:
            checks.append(self.support.passed)
        if self.containment is not None:
            checks.append(self.containment.passed)
        return all(checks)

    @property
    def passed_count(self) -> int:
        count = int(self.collision.passed) + int(self.action_contact.passed)
        if self.support.applicable:
            count += int(self.support.passed)
        if self.containment is not None:
            count += int(self.containment.passed)
        return count

    def to_json(self):
        return {
            "collision": self.collision.to_json(),
            "support": self.support.to_json(),
            "action_contact": self.action_contact.to_json(),
            "containment": None if self.containment is None
            else self.containment.to_json(),
        }

    @classmethod
    def from_json(cls, payload):
        cont = payload.get("containment")
        cp = payload["action_contact"].get("contact_point")
        return cls(
            collision=CollisionReport(**payload["collision"]),
            support=SupportReport(**payload["support"]),
            action_contact=ContactReport(
                passed=payload["action_contact"]["passed"],
                measured_distance=payload["action_contact"]["measured_distance"],
                kind=payload["action_contact"]["kind"],
                contact_point=None if cp is None else tuple(cp)),
            containment=None if cont is None else ContainmentReport(**cont),
        )


@dataclass
class DatasetRecord:
    """One aligned motion: placement, description, verification, frames."""

    record_id: str
    scene_id: str
    clip_id: str
    action: str
    placement: RigidPlacement
    target_instance: int
    description: Description
    seed: int
    verification: ConstraintReport
    frames: np.ndarray = field(repr=False, default=None)  # (F, V, 3) float32

    def __post_init__(self):
        if self.frames is not None:
            self.frames = np.ascontiguousarray(self.frames, dtype=np.float32)

    def sidecar(self) -> dict:
        return {
            "record_id": self.record_id,
            "scene_id": self.scene_id,
            "clip_id": self.clip_id,
            "action": self.action,
            "placement": self.placement.to_json(),
            "target_instance": self.target_instance,
            "description": self.description.to_json(),
            "seed": self.seed,
            "verification": self.verification.to_json(),
            "frame_count": int(self.frames.shape[0]),
            "vertex_count": int(self.frames.shape[1]),
        }


def save_record(record: DatasetRecord, out_dir) -> Path:
    """Write <id>.json + <id>.bin; byte-deterministic for equal records."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{record.record_id}.json"
    json_path.write_text(
        json.dumps(record.sidecar(), sort_keys=True, indent=2,
                   ensure_ascii=False) + "\n",
        encoding="utf-8")
    (out_dir / f"{record.record_id}.bin").write_bytes(
        np.ascontiguousarray(record.frames, dtype="<f4").tobytes())
    return json_path


def load_record(json_path) -> DatasetRecord:
    json_path = Path(json_path)
    try:
        payload = json.loads(json_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{json_path}: {exc}") from exc
    try:
        blob = json_path.with_suffix(".bin").read_bytes()
        f, v = int(payload["frame_count"]), int(payload["vertex_count"])
        expected = f * v * 3 * 4
        if len(blob) != expected:
            raise ParseError(
                f"{json_path.stem}.bin has {len(blob)} bytes, expected {expected}")
        frames = np.frombuffer(blob, dtype="<f4").reshape(f, v, 3).copy()
        return DatasetRecord(
            record_id=payload["record_id"],
            scene_id=payload["scene_id"],
            clip_id=payload["clip_id"],
            action=payload["action"],
            placement=RigidPlacement.from_json(payload["placement"]),
            target_instance=int(payload["target_instance"]),
            description=Description.from_json(payload["description"]),
            seed=int(payload["seed"]),
            verification=ConstraintReport.from_json(payload["verification"]),
            frames=frames,
        )
    except KeyError as exc:
        raise SchemaError(f"{json_path}: missing {exc}") from exc
