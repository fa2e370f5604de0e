import numpy as np
import pytest

from lulu.connectivity import Connectivity, GridImage, is_connected
from lulu.oracle import (
    GuardrailError,
    Ln_bruteforce,
    Un_bruteforce,
    check_family,
    count_connected_sets,
    enumerate_Nn,
    sequence_Ln,
    sequence_Un,
)

from conftest import C4, C8, spike

BOX = (0, 0, 7, 7)


def test_nn_pairs_are_edges():
    fam = enumerate_Nn((3, 3), 1, C4, BOX)
    assert len(fam) == 4
    assert {v - {(3, 3)} for v in fam} == {frozenset([q]) for q in [(2, 3), (4, 3), (3, 2), (3, 4)]}
    assert len(enumerate_Nn((3, 3), 1, C8, BOX)) == 8


def test_nn_triominoes_through_a_cell():
    # 2 straight orientations x 3 positions + 4 bent orientations x 3 positions
    assert len(enumerate_Nn((3, 3), 2, C4, BOX)) == 2 * 3 + 4 * 3


@pytest.mark.parametrize("conn", [C4, C8])
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_family_members_valid_and_counted_independently(conn, n):
    for x in [(0, 0), (2, 3), (4, 4)]:
        fam = enumerate_Nn(x, n, conn, (0, 0, 5, 5))
        assert check_family(fam, conn)
        assert len(fam) == count_connected_sets(x, n + 1, conn, (-n, -n, 5 + n, 5 + n))


def test_guardrail():
    with pytest.raises(GuardrailError, match="n <= 6"):
        enumerate_Nn((0, 0), 7, C4, (0, 0, 3, 3))
    with pytest.raises(GuardrailError, match="64"):
        Ln_bruteforce(GridImage(np.zeros((9, 9), dtype=np.int64)), 1, C4)


def test_ln_bruteforce_examples():
    assert Ln_bruteforce(spike(), 1, C4) == GridImage(np.zeros((3, 3), dtype=np.int64))
    row = GridImage.from_rows([[0, 3, 9, 2, 0]])
    assert Ln_bruteforce(row, 2, C4).values.tolist() == [[0, 2, 2, 2, 0]]
    const = GridImage.constant(3, 4, 6)
    assert Ln_bruteforce(const, 3, C8) == const


def test_un_bruteforce_examples():
    assert Un_bruteforce(-spike(), 1, C4) == GridImage(np.zeros((3, 3), dtype=np.int64))
    const = GridImage.constant(2, 5, -3)
    assert Un_bruteforce(const, 2, C4) == const
    rng = np.random.default_rng(2)
    for _ in range(10):
        f = GridImage(rng.integers(-5, 6, (4, 4)))
        assert Un_bruteforce(f, 2, C8) == -Ln_bruteforce(-f, 2, C8)


def test_sequence_examples():
    assert sequence_Ln([0, 5, 0], 1) == [0, 0, 0]
    assert sequence_Ln([0, 9, 8, 9, 0], 1) == [0, 8, 8, 8, 0]
    assert sequence_Ln([4] * 6, 3) == [4] * 6
    assert sequence_Un([0, -5, 0], 1) == [0, 0, 0]


def test_sequence_un_sees_the_zero_extension():
    # [4]*6 is a plateau above the zero extension, so U_n leaves it while
    # [-4]*6 is a pit of 6 terms that U_6 fills
    assert sequence_Un([4] * 6, 3) == [4] * 6
    assert sequence_Un([-4] * 6, 6) == [0] * 6
    assert sequence_Un([-4] * 6, 5) == [-4] * 6


def test_line_connection_reduces_to_sequence_formula():
    line = Connectivity.line()
    rng = np.random.default_rng(8)
    for _ in range(30):
        xs = rng.integers(-9, 10, 12).tolist()
        n = int(rng.integers(1, 5))
        f = GridImage.from_rows([xs])
        assert Ln_bruteforce(f, n, line).values[0].tolist() == sequence_Ln(xs, n)
        assert Un_bruteforce(f, n, line).values[0].tolist() == sequence_Un(xs, n)


def test_enumerated_sets_are_connected_under_line():
    fam = enumerate_Nn((0, 3), 3, Connectivity.line(), (0, 0, 1, 8))
    assert len(fam) == 4
    assert all(is_connected(v, Connectivity.line()) for v in fam)
