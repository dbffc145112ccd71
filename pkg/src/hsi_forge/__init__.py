"""hsi_forge: align motion clips into labeled 3D indoor scenes.

Captured motion clips are placed into semantically-segmented point
cloud scenes by sampling rigid (translation + yaw) placements under
collision and contact constraints, annotated with uniquely-referring
descriptions, and scored with physical-plausibility and diversity
metrics.
"""

from .alignment import (ActionPolicy, AlignmentConfig, DEFAULT_POLICIES,
                        align, check_action_contact, check_collision,
                        check_support, prepare_scene, propose_placement)
from .backends import backend_name
from .body import (BodyFrame, MarkerSequence, RigidPlacement,
                   apply_placement, extract_markers, region_centroid)
from .io import (MotionClip, ScenePointCloud, load_motion, load_scene,
                 save_motion, save_scene)
from .kdtree import SceneIndex, build_index, min_distance_batch, nearest
from .language import (Description, Relation, RelationConfig, RelationKind,
                       compute_relations, generate_description,
                       resolve_description)
from .manifest import SynthesisPlan, stats, synthesize_corpus, validate
from .metrics import (BodySurface, apd, collision_distance, goal_distance,
                      mpjpe, mpvpe, signed_distances)
from .records import ConstraintReport, DatasetRecord, load_record, save_record
from .scene import (FloorModel, ObjectInstance, detect_floor, extract_objects,
                    sample_floor_targets, sample_surface_points)
from .verify import verify_record

__version__ = "0.1.0"
