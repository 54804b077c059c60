import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oasis_dfe.pauli import (
    PauliString,
    all_pauli_strings,
    char_value,
    char_vector,
    eigen_sign,
    qubitwise_commutes,
    sign_vector,
    support_mask,
)
from oasis_dfe.states import make_ghz, make_w, random_density_matrix

labels = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


def dense_char(A, label):
    d = A.shape[0]
    return np.trace(A @ PauliString.from_label(label).matrix()).real / math.sqrt(d)


@pytest.mark.parametrize("label", ["I", "X", "Y", "Z", "XYZ", "IIZZ"])
def test_label_round_trip(label):
    p = PauliString.from_label(label)
    assert p.label == label
    assert PauliString(p.index, p.n) == p


def test_index_is_lexicographic():
    labels = [p.label for p in all_pauli_strings(2)]
    assert labels == ["".join(t) for t in itertools.product("IXYZ", repeat=2)]


@pytest.mark.parametrize("bad", ["", "XA", "1"])
def test_bad_labels(bad):
    with pytest.raises(ValueError):
        PauliString.from_label(bad)


def test_char_value_examples():
    rho = random_density_matrix(2, seed=3)
    assert char_value(rho, "II") == pytest.approx(0.5)
    ghz = make_ghz(3)
    assert char_value(ghz, "ZZI") == pytest.approx(1 / math.sqrt(8))
    assert char_value(ghz, "XYY") == pytest.approx(-1 / math.sqrt(8))


def test_char_vector_small_cases():
    d = 8
    chi = char_vector(np.eye(d) / d)
    assert chi[0] == pytest.approx(1 / math.sqrt(d))
    assert np.allclose(chi[1:], 0)
    zero = np.diag([1.0, 0.0]).astype(complex)
    assert np.allclose(char_vector(zero), [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)])


def test_w3_support_size():
    # identity, Z strings with n != 2|S|, and d/4 strings per (pair, letter)
    chi = char_vector(make_w(3))
    assert np.count_nonzero(np.abs(chi) > 1e-12) == 1 + 7 + 2 * 3 * 2


@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_char_vector_matches_dense_trace(n, seed):
    A = random_density_matrix(n, seed=seed)
    chi = char_vector(A)
    for p in all_pauli_strings(n):
        assert chi[p.index] == pytest.approx(dense_char(A, p.label), abs=1e-12)


@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_parseval(n, seed):
    # sum chi^2 = tr(A^2)
    A = random_density_matrix(n, seed=seed)
    assert np.sum(char_vector(A) ** 2) == pytest.approx(np.trace(A @ A).real)


@pytest.mark.parametrize(
    "p, q, expected",
    [("XI", "IX", True), ("XY", "XX", False), ("ZZI", "ZIZ", True), ("ZZI", "ZZZ", True)],
)
def test_qubitwise_commutes(p, q, expected):
    assert qubitwise_commutes(p, q) is expected


@given(labels, st.data())
def test_qwc_implies_commuting_matrices(p, data):
    q = data.draw(st.text("IXYZ", min_size=len(p), max_size=len(p)))
    assert qubitwise_commutes(p, q) == qubitwise_commutes(q, p)
    if qubitwise_commutes(p, q):
        P, Q = PauliString.from_label(p).matrix(), PauliString.from_label(q).matrix()
        assert np.allclose(P @ Q, Q @ P)


@pytest.mark.parametrize("p, letter, mask", [("XYZ", "Y", "010"), ("YYII", "Y", "1100"), ("IIII", "Z", "0000")])
def test_support_mask(p, letter, mask):
    assert support_mask(p, letter) == mask


@pytest.mark.parametrize("b, sign", [("110", 1), ("100", -1)])
def test_eigen_sign(b, sign):
    assert eigen_sign("ZZI", b) == sign


@pytest.mark.parametrize("n", [2, 3, 4])
def test_even_z_sign_sum(n):
    d = 2**n
    evens = [s for s in itertools.product("IZ", repeat=n) if s.count("Z") % 2 == 0]
    total = sum(sign_vector("".join(s)) for s in evens)
    expected = np.zeros(d)
    expected[[0, d - 1]] = d / 2
    assert np.array_equal(total, expected)


@given(st.text("XYZ", min_size=1, max_size=3))
def test_sign_vector_is_diagonal_of_rotated_string(label):
    # in its own eigenbasis a full-support string is Z...Z
    from oasis_dfe.measurement import basis_change

    V = basis_change(label)
    P = PauliString.from_label(label).matrix()
    diag = np.diag(V @ P @ V.conj().T).real
    assert np.allclose(diag, sign_vector(label))
