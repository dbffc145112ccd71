import numpy as np
import pytest

from hsi_forge.alignment import AlignmentConfig, prepare_scene
from hsi_forge.synthetic import (make_lie_clip, make_room, make_sit_clip,
                                 make_standup_clip, make_walk_clip)


@pytest.fixture(scope="session")
def room():
    scene, truth = make_room("room_fixture", seed=11)
    return scene, truth


@pytest.fixture(scope="session")
def room_ctx(room):
    return prepare_scene(room[0])


@pytest.fixture(scope="session")
def clips():
    return {
        "sit": make_sit_clip(),
        "stand_up": make_standup_clip(),
        "walk": make_walk_clip(),
        "lie_down": make_lie_clip(),
    }


@pytest.fixture()
def cfg():
    return AlignmentConfig(seed=1234)


@pytest.fixture()
def rng():
    return np.random.default_rng(99)
