import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oasis_dfe.measurement import (
    basis_change,
    cdf_table,
    make_rng,
    outcome_distribution,
    sample_from_table,
    sample_outcome,
    sample_outcomes,
)
from oasis_dfe.pauli import PauliString
from oasis_dfe.states import depolarize, make_ghz, random_density_matrix


def test_z_basis_is_identity():
    assert np.allclose(basis_change("ZZZ"), np.eye(8))


def test_single_qubit_rotations():
    plus = np.full((2, 2), 0.5)
    zero = np.diag([1.0, 0.0])
    assert np.allclose(outcome_distribution(plus, "X"), [1, 0])
    assert np.allclose(outcome_distribution(zero, "Y"), [0.5, 0.5])


def test_ghz_z_distribution():
    dist = outcome_distribution(make_ghz(3), "ZZZ")
    expected = np.zeros(8)
    expected[[0, 7]] = 0.5
    assert np.allclose(dist, expected)
    noisy = outcome_distribution(depolarize(make_ghz(3), 0.1), "ZZZ")
    assert np.allclose(noisy[[0, 7]], 0.4625)
    assert np.allclose(noisy[1:7], 0.0125)


def test_maximally_mixed_is_uniform():
    assert np.allclose(outcome_distribution(np.eye(8) / 8, "XYZ"), 1 / 8)


def test_identity_letter_rejected():
    with pytest.raises(ValueError):
        basis_change("XI")


@given(st.text("XYZ", min_size=1, max_size=3), st.integers(0, 2**31 - 1))
def test_distribution_matches_projectors(setting, seed):
    # P(b) = tr(rho Pi_b), Pi_b = prod_k (I + (-1)^b_k P_k)/2
    n = len(setting)
    rho = random_density_matrix(n, seed=seed)
    dist = outcome_distribution(rho, setting)
    for b in range(2**n):
        proj = np.ones((1, 1))
        for k, ch in enumerate(setting):
            sign = -1 if b >> (n - 1 - k) & 1 else 1
            proj = np.kron(proj, (np.eye(2) + sign * PauliString.from_label(ch).matrix()) / 2)
        assert dist[b] == pytest.approx(np.trace(rho @ proj).real, abs=1e-12)


def test_point_mass_sampling():
    dist = np.zeros(4)
    dist[2] = 1
    rng = make_rng(1)
    assert all(sample_outcome(dist, rng) == 2 for _ in range(50))


def test_fair_coin_frequency():
    draws = sample_outcomes(np.array([0.5, 0.5]), make_rng(2), 100_000)
    freq = np.mean(draws == 0)
    assert abs(freq - 0.5) < 3 * math.sqrt(0.25 / 100_000)


def test_ghz_support_only():
    dist = outcome_distribution(make_ghz(3), "ZZZ")
    draws = sample_outcomes(dist, make_rng(3), 100_000)
    assert set(np.unique(draws)) == {0, 7}


def test_streams_are_reproducible_and_distinct():
    a = make_rng(5, 1).random(4)
    assert np.array_equal(a, make_rng(5, 1).random(4))
    assert not np.array_equal(a, make_rng(5, 2).random(4))
    with pytest.raises(ValueError):
        make_rng(-1)


def test_table_sampling_matches_rows():
    dists = np.array([[1.0, 0, 0], [0, 0, 1.0], [0.5, 0.5, 0]])
    rows = np.array([0, 1, 2] * 1000)
    out = sample_from_table(cdf_table(dists), rows, make_rng(4))
    assert np.all(out[rows == 0] == 0)
    assert np.all(out[rows == 1] == 2)
    assert set(out[rows == 2]) <= {0, 1}
