import json

import numpy as np
import oracles
import pytest
from conftest import DATA, GENERIC_NETS, SYMMETRIC_NETS, random_nets
from hypothesis import given

from szegedy_gibbs import nets
from szegedy_gibbs.bayesnet import BayesianNetwork, NodeSpec
from szegedy_gibbs.chains import (
    GibbsSampler,
    build_M1,
    build_M2,
    build_M_hyb,
    check_pair_detailed_balance,
    classical_gibbs_step,
    cluster_centroids,
    export_csv,
    is_column_stochastic,
    multiset_distance,
    spectrum,
    stationarity_residuals,
    verify_spectra_equal,
)
from szegedy_gibbs.errors import DegenerateTopEigenvalue, SingularPi, ZeroConditioningEvent


@pytest.mark.parametrize("name", sorted(GENERIC_NETS))
def test_kernels_match_bruteforce_oracle(name):
    net = GENERIC_NETS[name]()
    M1 = oracles.to_numpy(oracles.kernel_mp(net))
    M2 = oracles.to_numpy(oracles.kernel_mp(net, reverse=True))
    np.testing.assert_allclose(build_M1(net), M1, atol=1e-14)
    np.testing.assert_allclose(build_M2(net), M2, atol=1e-14)


def test_two_node_frozen_values(two_node):
    # frozen from the brute-force oracle: P(y1=0|x2=0) = 0.56/0.65, then P(y2=0|y1=0) = 0.8
    M1 = build_M1(two_node)
    assert M1[0, 0] == pytest.approx(0.56 / 0.65 * 0.8, abs=1e-15)
    assert M1[3, 1] == pytest.approx(0.42, abs=1e-15)
    spec = spectrum(build_M_hyb(M1, build_M2(two_node)))
    assert spec.eigenvalues[1].real == pytest.approx(3 / 13, abs=1e-12)
    assert spec.delta == pytest.approx(10 / 13, abs=1e-12)


def test_seeded_spectrum_matches_golden(seeded3):
    golden = json.loads((DATA / "golden_spectrum_seeded_three_node.json").read_text())
    spec = spectrum(build_M_hyb(build_M1(seeded3), build_M2(seeded3)))
    ref = np.array([complex(re, im) for re, im in golden["eigenvalues"]])
    assert multiset_distance(spec.eigenvalues, ref) < 1e-9
    assert spec.delta == pytest.approx(golden["delta"], abs=1e-9)


@given(random_nets(max_bits=5))
def test_kernels_are_stochastic(net):
    assert is_column_stochastic(build_M1(net))
    assert is_column_stochastic(build_M2(net))


@given(random_nets(max_bits=5))
def test_pair_detailed_balance(net):
    M1, M2 = build_M1(net), build_M2(net)
    assert check_pair_detailed_balance(M1, M2, net.pi) < 1e-12


@given(random_nets(max_bits=5))
def test_spectra_and_similarities(net):
    M1, M2 = build_M1(net), build_M2(net)
    cmp = verify_spectra_equal(M1, M2, build_M_hyb(M1, M2), net.pi)
    assert cmp.mismatch < 1e-9
    assert cmp.m2_similarity_residual < 1e-12
    assert cmp.hyb_similarity_residual < 1e-12


@given(random_nets(max_bits=5))
def test_stationarity(net):
    M1, M2 = build_M1(net), build_M2(net)
    res = stationarity_residuals(M1, M2, build_M_hyb(M1, M2), net.pi)
    assert res["M1"] < 1e-12 and res["M2"] < 1e-12 and res["M_hyb"] < 1e-10


@given(random_nets(max_bits=4))
def test_spectral_data_conventions(net):
    spec = spectrum(build_M_hyb(build_M1(net), build_M2(net)))
    assert abs(spec.eigenvalues[0] - 1) < 1e-9
    assert spec.reconstruction_residual() < 1e-12
    assert np.all(np.diff(np.round(np.abs(spec.eigenvalues[1:]), 12)) <= 0)
    assert np.all((spec.phis >= 0) & (spec.phis <= np.pi / 2))
    assert np.all((spec.etas >= 0) & (spec.etas < 2 * np.pi))


@pytest.mark.parametrize("name", sorted(SYMMETRIC_NETS))
def test_symmetric_fixtures(name):
    net = SYMMETRIC_NETS[name]()
    M1, M2 = build_M1(net), build_M2(net)
    H = build_M_hyb(M1, M2)
    np.testing.assert_allclose(M1, M2, atol=1e-15)
    np.testing.assert_allclose(H, H.T, atol=1e-15)
    spec = spectrum(H)
    assert spec.orthonormality_residual < 1e-12
    assert spec.delta == pytest.approx(1.0)


def test_hybrid_is_diagonal_similarity(seeded3):
    M1 = build_M1(seeded3)
    root = np.sqrt(seeded3.pi)
    np.testing.assert_allclose(build_M_hyb(M1, build_M2(seeded3)), M1 * root[None, :] / root[:, None], atol=1e-14)


def test_reducible_chain_has_degenerate_top():
    net = nets.copy_chain()
    with pytest.raises(DegenerateTopEigenvalue):
        spectrum(build_M1(net))
    with pytest.raises(SingularPi):
        verify_spectra_equal(build_M1(net), build_M2(net), build_M1(net), net.pi)


def test_zero_conditioning_on_live_path():
    net = BayesianNetwork(
        [
            NodeSpec("a", 2, (), [[0.5, 0.5]]),
            NodeSpec("b", 2, (0,), [[1.0, 0.0], [0.0, 1.0]]),
            NodeSpec("c", 2, (1,), [[1.0, 0.0], [0.0, 1.0]]),
        ]
    )
    with pytest.raises(ZeroConditioningEvent):
        build_M1(net)


def test_cluster_centroids_tame_jordan_blocks():
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    e = np.linalg.eigvals(J + np.array([[0.0, 0.0], [1e-16, 0.0]]))
    assert np.abs(e).max() > 1e-9
    assert np.abs(cluster_centroids(e)).max() < 1e-15


def test_classical_step_follows_M1(seeded3):
    M1 = build_M1(seeded3)
    rng = np.random.default_rng(5)
    x0 = (1, 0, 1)
    draws = [seeded3.pack(classical_gibbs_step(seeded3, x0, rng)) for _ in range(4000)]
    freq = np.bincount(draws, minlength=seeded3.n_states) / 4000
    p = M1[:, seeded3.pack(x0)]
    assert np.all(np.abs(freq - p) <= 5 * np.sqrt(p * (1 - p) / 4000) + 1e-3)


def test_batched_sweeps_follow_M1(seeded3):
    M1 = build_M1(seeded3)
    rng = np.random.default_rng(9)
    n = 200_000
    states = GibbsSampler(seeded3).sweep(np.zeros((n, 3), dtype=int), rng)
    freq = np.bincount(np.ravel_multi_index(states.T, (2, 2, 2)), minlength=8) / n
    p = M1[:, 0]
    assert np.all(np.abs(freq - p) <= 5 * np.sqrt(p * (1 - p) / n) + 1e-4)


def test_export_csv(tmp_path, two_node):
    path = tmp_path / "m1.csv"
    M1 = build_M1(two_node)
    export_csv(M1, path)
    rows = path.read_text().splitlines()
    assert rows[0] == "y,x,value" and len(rows) == 17
    y, x, v = rows[5].split(",")
    assert float(v) == M1[int(y), int(x)]
