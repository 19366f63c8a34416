import numpy as np
import pytest

from specden.fields import random_field
from specden.frame import build_frame, q_coefficients
from specden.geometry import covariant_jet, endos_at


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_jet(n, seed, kind=random_field, **kw):
    rng = np.random.default_rng(seed)
    field = kind(n, rng, **kw)
    frame = build_frame(endos_at(field, field.x0))
    return covariant_jet(field, frame)


@pytest.fixture
def jet2():
    return make_jet(2, 7)


@pytest.fixture
def q2(jet2):
    return q_coefficients(jet2)
