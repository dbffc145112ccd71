"""Corpus assembly, statistics, and the reproducibility ledger.

Synthesis walks (scene, clip) pairs round-robin per action, deriving
each attempt's seed from (master seed, scene, clip, use count) so
results never depend on worker scheduling; acceptance happens in
canonical task order, which keeps manifests byte-identical across
--jobs settings.
"""

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .alignment import (AlignmentConfig, DEFAULT_POLICIES, align,
                        prepare_scene)
from .errors import HsiForgeError
from .language import RelationConfig
from .records import DatasetRecord, load_record, save_record
from .seeding import derive_seed
from .verify import verify_record

log = logging.getLogger(__name__)

TRAIN_FRACTION = 0.8


def scene_split(scene_id: str) -> str:
    """Stable train/test assignment as a pure function of the scene id."""
    bucket = derive_seed("split", scene_id) % 100
    return "train" if bucket < TRAIN_FRACTION * 100 else "test"


def config_hash(cfg: AlignmentConfig) -> str:
    canonical = json.dumps(cfg.to_json(), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class SynthesisPlan:
    quotas: dict                     # action -> record count
    budget_factor: int = 6           # attempts allowed per quota unit
    oversample: int = 2              # tasks per round vs remaining quota

    @classmethod
    def parse_quota(cls, text: str) -> "SynthesisPlan":
        quotas = {}
        for part in text.split(","):
            action, _, count = part.partition("=")
            action = action.strip().replace("-", "_")
            if not count:
                raise ValueError(f"bad quota entry {part!r}")
            quotas[action] = int(count)
        return cls(quotas=quotas)


def synthesize_corpus(scenes, clips, plan: SynthesisPlan,
                      cfg: AlignmentConfig, out_dir, jobs: int = 1,
                      policies=None, relation_config=RelationConfig()):
    """Fill per-action quotas by aligning clips into scenes; write records.

    Returns the manifest dict (also written to out_dir/manifest.json).
    Partial fulfillment is reported per action, never padded.
    """
    policies = policies or DEFAULT_POLICIES
    out_dir = Path(out_dir)
    records_dir = out_dir / "records"
    records_dir.mkdir(parents=True, exist_ok=True)

    scenes = sorted(scenes, key=lambda s: s.scene_id)
    clips = sorted(clips, key=lambda c: c.clip_id)
    contexts = {}

    def ctx_for(scene):
        if scene.scene_id not in contexts:
            contexts[scene.scene_id] = prepare_scene(scene)
        return contexts[scene.scene_id]

    state = {}
    for action, quota in sorted(plan.quotas.items()):
        pairs = [(s, c) for s in scenes for c in clips if c.action == action]
        state[action] = {
            "quota": quota, "pairs": pairs, "cursor": 0, "uses": {},
            "done": 0, "attempts": 0,
            "budget": quota * plan.budget_factor,
        }

    accepted = []

    def run_task(task):
        scene, clip, action, seed = task
        try:
            return align(clip, scene, action,
                         cfg=cfg.with_seed(seed), policies=policies,
                         relation_config=relation_config,
                         ctx=ctx_for(scene))
        except HsiForgeError as exc:
            log.debug("task %s/%s/%s failed: %s",
                      scene.scene_id, clip.clip_id, action, exc)
            return None

    while True:
        tasks = []
        for action in sorted(state):
            st = state[action]
            remaining = st["quota"] - st["done"]
            if remaining <= 0 or not st["pairs"]:
                continue
            room = st["budget"] - st["attempts"] - sum(
                1 for t in tasks if t[2] == action)
            want = min(remaining * plan.oversample, len(st["pairs"]), room)
            for _ in range(max(0, want)):
                scene, clip = st["pairs"][st["cursor"] % len(st["pairs"])]
                st["cursor"] += 1
                key = (scene.scene_id, clip.clip_id)
                use = st["uses"].get(key, 0)
                st["uses"][key] = use + 1
                seed = derive_seed(cfg.seed, action, scene.scene_id,
                                   clip.clip_id, use)
                tasks.append((scene, clip, action, seed))
        if not tasks:
            break
        # contexts are built up front: thread workers only read them
        for scene, _, _, _ in tasks:
            ctx_for(scene)
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(run_task, tasks))
        else:
            results = [run_task(t) for t in tasks]
        for task, record in zip(tasks, results):
            action = task[2]
            st = state[action]
            st["attempts"] += 1
            if record is not None and st["done"] < st["quota"]:
                st["done"] += 1
                accepted.append(record)

    accepted.sort(key=lambda r: r.record_id)
    for record in accepted:
        save_record(record, records_dir)

    actions_report = {}
    for action, st in sorted(state.items()):
        status = "ok" if st["done"] >= st["quota"] else (
            "unreachable" if not st["pairs"] else "partial")
        actions_report[action] = {
            "quota": st["quota"], "fulfilled": st["done"],
            "attempts": st["attempts"], "status": status,
        }

    manifest = {
        "master_seed": cfg.seed,
        "config": cfg.to_json(),
        "config_hash": config_hash(cfg),
        "quotas": dict(sorted(plan.quotas.items())),
        "actions": actions_report,
        "counts": {a: st["done"] for a, st in sorted(state.items())},
        "records": [{
            "record_id": r.record_id,
            "scene_id": r.scene_id,
            "clip_id": r.clip_id,
            "action": r.action,
            "seed": r.seed,
            "split": scene_split(r.scene_id),
            "file": f"records/{r.record_id}.json",
        } for r in accepted],
    }
    write_manifest(manifest, out_dir / "manifest.json")
    return manifest


def write_manifest(manifest: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2,
                               ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def load_manifest(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def load_manifest_records(manifest: dict, manifest_dir) -> list:
    manifest_dir = Path(manifest_dir)
    return [load_record(manifest_dir / entry["file"])
            for entry in manifest["records"]]


def stats(records, manifest: dict | None = None) -> dict:
    """Histogram-style corpus statistics, recomputed from the records."""
    per_action = {}
    frame_hist = {}
    word_hist = {}
    class_freq = {}
    reuse = {}
    word_total = 0
    for record in records:
        per_action[record.action] = per_action.get(record.action, 0) + 1
        f = int(record.frames.shape[0])
        frame_hist[f] = frame_hist.get(f, 0) + 1
        w = record.description.word_count
        word_hist[w] = word_hist.get(w, 0) + 1
        word_total += w
        cls = record.description.target_class
        class_freq[cls] = class_freq.get(cls, 0) + 1
        reuse.setdefault(record.action, set()).add(record.clip_id)
    out = {
        "record_count": len(records),
        "per_action_counts": dict(sorted(per_action.items())),
        "frame_length_histogram": {str(k): v for k, v
                                   in sorted(frame_hist.items())},
        "description_word_histogram": {str(k): v for k, v
                                       in sorted(word_hist.items())},
        "mean_description_words": (word_total / len(records))
        if records else 0.0,
        "interactive_class_frequencies": dict(sorted(class_freq.items())),
        "motion_reuse": {a: {"records": per_action[a],
                             "distinct_clips": len(c)}
                         for a, c in sorted(reuse.items())},
    }
    if manifest is not None:
        out["splits"] = {
            split: sum(1 for e in manifest["records"] if e["split"] == split)
            for split in ("train", "test")}
    return out


def stats_tsv(report: dict) -> str:
    """Plot-friendly TSV dump of the histogram tables."""
    lines = ["# table\tkey\tvalue"]
    for table in ("frame_length_histogram", "description_word_histogram",
                  "interactive_class_frequencies", "per_action_counts"):
        for key, value in report[table].items():
            lines.append(f"{table}\t{key}\t{value}")
    return "\n".join(lines) + "\n"


def validate(records, scenes_by_id: dict, clips_by_id: dict,
             cfg: AlignmentConfig, policies=None,
             relation_config=RelationConfig()) -> dict:
    """Run the brute-force verifier + description resolver on every record."""
    flagged = []
    reports = []
    for record in records:
        report = verify_record(record, scenes_by_id[record.scene_id],
                               clips_by_id[record.clip_id], cfg=cfg,
                               policies=policies,
                               relation_config=relation_config)
        reports.append(report)
        if not report["passed"]:
            flagged.append(record.record_id)
    total = len(records)
    return {
        "record_count": total,
        "passed": total - len(flagged),
        "pass_rate": 1.0 if total == 0 else (total - len(flagged)) / total,
        "flagged": flagged,
        "reports": reports,
    }
