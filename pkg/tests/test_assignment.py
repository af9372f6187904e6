import io
import math

import numpy as np
import pytest
from scipy import stats

from interference_ri.assignment import (
    Design,
    assignment_draw,
    count_assignments,
    enumerate_assignments,
    load_assignment,
    sample_assignments,
    save_assignment,
)
from interference_ri.exceptions import InvalidArgument, ParseError, SpaceTooLarge


def test_count_small():
    assert count_assignments(Design(7, 3)) == 35
    assert count_assignments(Design(9, 0)) == 1


def test_count_256_choose_128():
    c = count_assignments(Design(256, 128))
    assert isinstance(c, int)
    assert f"{c:.2e}" == "5.77e+75"


def test_design_invariants():
    with pytest.raises(InvalidArgument):
        Design(3, 4)
    with pytest.raises(InvalidArgument):
        Design(3, -1)


def test_enumerate_two():
    assert enumerate_assignments(Design(2, 1)).tolist() == [[1, 0], [0, 1]]


def test_enumerate_lexicographic():
    Z = enumerate_assignments(Design(4, 2))
    sets = [tuple(np.flatnonzero(z)) for z in Z]
    assert sets == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_enumerate_seven_three():
    Z = enumerate_assignments(Design(7, 3))
    assert Z.shape == (35, 7)
    assert len({z.tobytes() for z in Z}) == 35
    assert (Z.sum(axis=1) == 3).all()


def test_enumerate_cap():
    with pytest.raises(SpaceTooLarge, match="Monte Carlo"):
        enumerate_assignments(Design(30, 15), cap=1000)


def test_samples_respect_design():
    Z = sample_assignments(Design(40, 13), 200, 5)
    assert (Z.sum(axis=1) == 13).all()
    assert set(np.unique(Z)) <= {0, 1}


def test_samples_deterministic_and_prefix_stable():
    d = Design(20, 7)
    a = sample_assignments(d, 50, 123)
    assert np.array_equal(a, sample_assignments(d, 50, 123))
    assert np.array_equal(a[:10], sample_assignments(d, 10, 123))
    assert not np.array_equal(a, sample_assignments(d, 50, 124))


def test_single_draw_independent_of_order():
    d = Design(33, 11)
    batch = sample_assignments(d, 40, 77)
    for j in (0, 1, 3, 4, 17, 39):
        assert np.array_equal(assignment_draw(d, 77, j), batch[j])


def test_uniform_frequencies():
    d = Design(4, 2)
    k = 6000
    Z = sample_assignments(d, k, 2024)
    space = [z.tobytes() for z in enumerate_assignments(d)]
    counts = np.array([sum(z.tobytes() == s for z in Z) for s in space])
    freq = counts / k
    sigma = math.sqrt((1 / 6) * (5 / 6) / k)
    assert np.all(np.abs(freq - 1 / 6) <= 4 * sigma)


def test_uniform_chi_square_seven_three():
    d = Design(7, 3)
    Z = sample_assignments(d, 35 * 200, 9)
    index = {z.tobytes(): i for i, z in enumerate(enumerate_assignments(d))}
    counts = np.bincount([index[z.tobytes()] for z in Z], minlength=35)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_sample_k_positive():
    with pytest.raises(InvalidArgument):
        sample_assignments(Design(4, 2), 0, 1)


def test_assignment_file_roundtrip(tmp_path):
    z = np.array([1, 0, 0, 1, 1])
    save_assignment(z, tmp_path / "z.txt")
    assert load_assignment(tmp_path / "z.txt").tolist() == z.tolist()
    assert load_assignment(io.StringIO("1\n0\n")).tolist() == [1, 0]


def test_assignment_file_bad_line():
    with pytest.raises(ParseError) as info:
        load_assignment(io.StringIO("z\n1\n2\n"))
    assert info.value.line == 3
