import itertools
import warnings

import numpy as np
import pytest
from hypothesis import strategies as st

from heatindex.exterior_clifford import MultiVector, all_blades
from heatindex.models import TruncationWarning

SIN_COS_TRIPLE = (
    {(1, 1): -0.25, (-1, -1): -0.25, (1, -1): 0.25, (-1, 1): 0.25},  # sin 2pi x sin 2pi y
    {(1, 0): 0.5, (-1, 0): 0.5},  # cos 2pi x
    {(0, 1): 0.5, (0, -1): 0.5},  # cos 2pi y
)


@pytest.fixture(autouse=True)
def _quiet_truncation():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        yield


small_complex = st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False)


@st.composite
def multivectors(draw, n=None, grades=None):
    n = draw(st.sampled_from([2, 4, 6])) if n is None else n
    blades = [b for b in all_blades(n) if grades is None or len(b) in grades]
    chosen = draw(st.lists(st.sampled_from(blades), max_size=8, unique=True))
    return MultiVector(n, {b: draw(small_complex) for b in chosen})


def homogeneous(n, k):
    return st.builds(
        lambda cs: MultiVector(n, dict(zip(itertools.combinations(range(1, n + 1), k), cs))),
        st.lists(small_complex, min_size=len(list(itertools.combinations(range(n), k))),
                 max_size=len(list(itertools.combinations(range(n), k)))),
    )


def rng(seed=0):
    return np.random.default_rng(seed)
