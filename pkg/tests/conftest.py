import numpy as np
import pytest

from gramtrack.boxes import BoundingBox
from gramtrack.memory import Template


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_template(feature, template_id=0, frame_index=0, box=None):
    feature = np.asarray(feature, dtype=np.float64)
    if feature.ndim == 1:
        feature = feature.reshape(1, 1, -1)
    return Template(
        id=template_id,
        frame_index=frame_index,
        feature=feature,
        capture_box=box or BoundingBox(0, 0, 10, 10),
    )


def basis_template(dim, axis, template_id=0, frame_index=0):
    v = np.zeros(dim)
    v[axis] = 1.0
    return make_template(v, template_id=template_id, frame_index=frame_index)
