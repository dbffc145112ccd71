"""Command-line entry points.

Subcommands: synth, describe, metrics, stats, validate. Exit codes:
0 success, 1 hard error, 2 partial fulfillment or flagged content.
All randomness flows from --seed; HSI_FORGE_LOG sets verbosity.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .alignment import (AlignmentConfig, DEFAULT_POLICIES, load_policies,
                        prepare_scene)
from .body import extract_markers
from .errors import HsiForgeError, UnknownAction
from .io import load_motion, load_scene
from .kdtree import SceneIndex
from .language import RelationConfig, generate_description, \
    resolve_description
from .manifest import (SynthesisPlan, load_manifest, load_manifest_records,
                       stats, stats_tsv, synthesize_corpus, validate)
from .metrics import BodySurface, apd, collision_distance, goal_distance
from .seeding import derive_seed

log = logging.getLogger("hsi_forge")

OK, ERROR, PARTIAL = 0, 1, 2


def _setup_logging():
    level = os.environ.get("HSI_FORGE_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s")


def _load_config(path):
    """Split one config file into (alignment, policies, relation) configs."""
    if path is None:
        return AlignmentConfig(), DEFAULT_POLICIES, RelationConfig()
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    cfg = AlignmentConfig.from_json(payload.get("alignment", {}))
    policies = load_policies(payload.get("actions", {}))
    relations = RelationConfig.from_json(payload.get("language", {}))
    return cfg, policies, relations


def _discover_scenes(scenes_dir):
    scenes = {}
    for path in sorted(Path(scenes_dir).iterdir()):
        if path.suffix.lower() in (".ply", ".json"):
            scene = load_scene(path)
            scenes[scene.scene_id] = scene
    if not scenes:
        raise HsiForgeError(f"no scenes found in {scenes_dir}")
    return scenes


def _discover_clips(clips_dir):
    clips = {}
    for path in sorted(Path(clips_dir).iterdir()):
        if path.suffix.lower() == ".json":
            clip = load_motion(path)
            clips[clip.clip_id] = clip
    if not clips:
        raise HsiForgeError(f"no clips found in {clips_dir}")
    return clips


def _write_report(payload, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2,
                               ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def cmd_synth(args) -> int:
    cfg, policies, relations = _load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    scenes = _discover_scenes(args.scenes)
    clips = _discover_clips(args.clips)
    plan = SynthesisPlan.parse_quota(args.quota)
    manifest = synthesize_corpus(
        list(scenes.values()), list(clips.values()), plan, cfg,
        args.out, jobs=args.jobs, policies=policies,
        relation_config=relations)
    for action, entry in manifest["actions"].items():
        print(f"{action}: {entry['fulfilled']}/{entry['quota']} records "
              f"({entry['attempts']} attempts, {entry['status']})")
    print(f"manifest: {Path(args.out) / 'manifest.json'}")
    full = all(e["status"] == "ok" for e in manifest["actions"].values())
    return OK if full else PARTIAL


def cmd_describe(args) -> int:
    _, policies, relations = _load_config(args.config)
    manifest_path = Path(args.manifest)
    manifest = load_manifest(manifest_path)
    records = load_manifest_records(manifest, manifest_path.parent)
    scenes = _discover_scenes(args.scenes)
    contexts = {}
    mismatches, failures = [], []
    for record in records:
        if record.scene_id not in contexts:
            contexts[record.scene_id] = prepare_scene(scenes[record.scene_id])
        ctx = contexts[record.scene_id]
        target = ctx.objects_by_id[record.target_instance]
        phrases = {a: p.verb_phrase for a, p in policies.items()}
        if record.action not in phrases:
            raise UnknownAction(
                f"record {record.record_id}: no template for action "
                f"{record.action!r}")
        desc = generate_description(
            record.action, target, ctx.objects,
            np.random.default_rng(derive_seed(record.seed, "description")),
            config=relations, action_phrases=phrases)
        if desc.to_json() != record.description.to_json():
            mismatches.append(record.record_id)
        try:
            resolved = resolve_description(desc, ctx.objects, config=relations)
            if resolved != record.target_instance:
                failures.append(record.record_id)
        except HsiForgeError:
            failures.append(record.record_id)
    report = {
        "record_count": len(records),
        "regenerated_mismatches": mismatches,
        "round_trip_failures": failures,
        "descriptions": {r.record_id: r.description.text for r in records},
    }
    out = args.out or manifest_path.parent / "descriptions.json"
    print(f"descriptions: {len(records)} records, "
          f"{len(mismatches)} mismatches, {len(failures)} round-trip failures")
    print(f"report: {_write_report(report, out)}")
    return OK if not mismatches and not failures else PARTIAL


def cmd_metrics(args) -> int:
    cfg, policies, _ = _load_config(args.config)
    manifest_path = Path(args.manifest)
    manifest = load_manifest(manifest_path)
    records = load_manifest_records(manifest, manifest_path.parent)
    scenes = _discover_scenes(args.scenes)
    contexts = {}
    indexes = {}

    def scene_assets(scene_id):
        if scene_id not in contexts:
            scene = scenes[scene_id]
            contexts[scene_id] = prepare_scene(scene)
            indexes[scene_id] = SceneIndex.from_points(scene.positions)
        return contexts[scene_id], indexes[scene_id]

    for record in records:
        scene_assets(record.scene_id)

    def measure(record):
        ctx, index = scene_assets(record.scene_id)
        policy = policies[record.action]
        anchor = policy.anchor_index(record.frames.shape[0])
        body = BodySurface.from_points(
            np.asarray(record.frames[anchor], dtype=np.float64))
        target = ctx.objects_by_id[record.target_instance]
        return {
            "record_id": record.record_id,
            "action": record.action,
            "goal_distance": goal_distance(body, target),
            "collision_distance": collision_distance(
                np.asarray(record.frames, dtype=np.float64),
                ctx.scene, index),
        }

    if args.jobs > 1 and records:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(measure, records))
    else:
        rows = [measure(r) for r in records]
    rows.sort(key=lambda r: r["record_id"])

    groups = {}
    for record in records:
        groups.setdefault((record.scene_id, record.clip_id), []).append(record)
    apd_rows = []
    for (scene_id, clip_id), group in sorted(groups.items()):
        if len(group) < 2:
            continue
        group = sorted(group, key=lambda r: r.record_id)
        markers = group[0].frames.shape[1]
        marker_idx = np.arange(markers)
        seqs = [extract_markers(np.asarray(r.frames, dtype=np.float64),
                                marker_idx) for r in group]
        apd_rows.append({"scene_id": scene_id, "clip_id": clip_id,
                         "k": len(group), "apd": apd(seqs)})

    def agg(metric):
        out = {}
        for action in sorted({r["action"] for r in rows}):
            vals = [r[metric] for r in rows if r["action"] == action]
            out[action] = {"mean": float(np.mean(vals)),
                           "std": float(np.std(vals)),
                           "count": len(vals)}
        return out

    report = {
        "record_count": len(rows),
        "per_record": rows,
        "aggregates": {"goal_distance": agg("goal_distance"),
                       "collision_distance": agg("collision_distance")}
        if rows else {"goal_distance": {}, "collision_distance": {}},
        "apd_groups": apd_rows,
        "apd_mean": float(np.mean([r["apd"] for r in apd_rows]))
        if apd_rows else 0.0,
    }
    out = args.out or manifest_path.parent / "metrics.json"
    print(f"metrics over {len(rows)} records -> {_write_report(report, out)}")
    return OK


def cmd_stats(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = load_manifest(manifest_path)
    records = load_manifest_records(manifest, manifest_path.parent)
    report = stats(records, manifest)
    out = args.out or manifest_path.parent / "stats.json"
    print(f"stats over {len(records)} records -> {_write_report(report, out)}")
    if args.tsv:
        Path(args.tsv).write_text(stats_tsv(report), encoding="utf-8")
        print(f"tsv: {args.tsv}")
    return OK


def cmd_validate(args) -> int:
    cfg, policies, relations = _load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    manifest_path = Path(args.manifest)
    manifest = load_manifest(manifest_path)
    records = load_manifest_records(manifest, manifest_path.parent)
    scenes = _discover_scenes(args.scenes)
    clips = _discover_clips(args.clips)
    report = validate(records, scenes, clips, cfg, policies=policies,
                      relation_config=relations)
    out = args.out or manifest_path.parent / "validation.json"
    print(f"validated {report['record_count']} records: "
          f"{report['passed']} passed, {len(report['flagged'])} flagged")
    print(f"report: {_write_report(report, out)}")
    return OK if not report["flagged"] else PARTIAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsi-forge",
        description="Align motion clips into labeled 3D scenes under "
                    "collision/contact constraints")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthesize a record corpus")
    synth.add_argument("--scenes", required=True)
    synth.add_argument("--clips", required=True)
    synth.add_argument("--out", required=True)
    synth.add_argument("--config", default=None)
    synth.add_argument("--seed", type=int, default=None)
    synth.add_argument("--jobs", type=int, default=1)
    synth.add_argument("--quota", required=True,
                       help="action=count[,action=count...]")
    synth.set_defaults(func=cmd_synth)

    describe = sub.add_parser("describe",
                              help="regenerate + resolve descriptions")
    describe.add_argument("--manifest", required=True)
    describe.add_argument("--scenes", required=True)
    describe.add_argument("--config", default=None)
    describe.add_argument("--out", default=None)
    describe.set_defaults(func=cmd_describe)

    metrics = sub.add_parser("metrics", help="per-record quality metrics")
    metrics.add_argument("--manifest", required=True)
    metrics.add_argument("--scenes", required=True)
    metrics.add_argument("--config", default=None)
    metrics.add_argument("--out", default=None)
    metrics.add_argument("--jobs", type=int, default=1)
    metrics.set_defaults(func=cmd_metrics)

    stats_p = sub.add_parser("stats", help="corpus statistics")
    stats_p.add_argument("--manifest", required=True)
    stats_p.add_argument("--out", default=None)
    stats_p.add_argument("--tsv", default=None)
    stats_p.set_defaults(func=cmd_stats)

    val = sub.add_parser("validate",
                         help="brute-force re-verification of a corpus")
    val.add_argument("--manifest", required=True)
    val.add_argument("--scenes", required=True)
    val.add_argument("--clips", required=True)
    val.add_argument("--config", default=None)
    val.add_argument("--seed", type=int, default=None)
    val.add_argument("--out", default=None)
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HsiForgeError, OSError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    raise SystemExit(main())
