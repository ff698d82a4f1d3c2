import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from z2renyi import oracle
from z2renyi.entropy import LatticeGeometry

GHZ = (1, 0, 0, 0.95)
Q = 0.9025**4


def test_link_partition_sizes():
    assert len(oracle.link_partition(LatticeGeometry(3, 3, 1, 1))) == 2
    assert len(oracle.link_partition(LatticeGeometry(3, 3, 2, 1))) == 4
    assert oracle.link_partition((2, 3, 2, 3)) == list(range(12))
    assert oracle.link_partition(LatticeGeometry(3, 3, 1, 1)) == [0, 1]


def test_star_links_periodic():
    # site (0,0) on 3x2: own links 0,1; left neighbour (2,0) right link 4; lower neighbour (0,1) up link 7
    assert oracle.star_links(0, 0, 3, 2) == [0, 1, 4, 7]


def test_product_state_amplitudes():
    psi = oracle.enumerate_state((1, 0, 0, 0), 2, 2)
    assert np.count_nonzero(psi.amplitudes) == 1 and psi.amplitudes[0] == 1


def test_ghz_amplitudes():
    psi = oracle.enumerate_state(GHZ, 2, 2)
    nz = np.flatnonzero(psi.amplitudes)
    assert list(nz) == [0, 255]
    assert psi.amplitudes[255] == pytest.approx(0.81450625, abs=1e-15)


def test_nonzero_configurations_obey_vertex_parity():
    psi = oracle.enumerate_state((1, 0.1, 0, 0.95), 2, 2)
    cfg = np.flatnonzero(psi.amplitudes)
    for x1 in range(2):
        for x2 in range(2):
            par = np.zeros_like(cfg)
            for k in oracle.star_links(x1, x2, 2, 2):
                par ^= (cfg >> k) & 1
            assert not par.any()
    assert 0 < cfg.size < 32  # gamma = 0 removes some even configurations
    # 2x2 torus: 8 links, 3 independent vertex constraints -> 2**5 even configurations
    assert np.count_nonzero(oracle.enumerate_state((1, 1, 1, 1), 2, 2).amplitudes) == 32


def test_size_cap():
    with pytest.raises(oracle.OracleSizeError):
        oracle.enumerate_state((1, 1, 1, 1), 5, 3)


def test_ghz_reduced_density():
    g = LatticeGeometry(2, 2, 1, 1)
    rho = oracle.reduced_density(oracle.enumerate_state(GHZ, 2, 2), oracle.link_partition(g))
    np.testing.assert_allclose(rho, np.diag([1, 0, 0, Q]), atol=1e-15)
    ent = oracle.exact_entropies(rho, [2, 3])
    p = np.array([1, Q]) / (1 + Q)
    assert ent[2] == pytest.approx(-math.log(np.sum(p**2)), abs=1e-13)
    assert ent[1] == pytest.approx(-np.sum(p * np.log(p)), abs=1e-13)


def test_two_level_entropies():
    ent = oracle.exact_entropies(np.diag([0.60117, 0.39883]), [2])
    assert ent[2] == pytest.approx(0.653021, abs=2e-5)
    assert ent[1] == pytest.approx(0.672534, abs=2e-5)


def test_trivial_spectra():
    ent = oracle.exact_entropies(np.diag([3.0, 0, 0, 0]), [2, 3])
    assert ent[1] == 0 and ent[2] == pytest.approx(0) and ent[3] == pytest.approx(0)
    ent = oracle.exact_entropies(np.eye(4), [2])
    assert ent[2] == pytest.approx(math.log(4)) and ent[1] == pytest.approx(math.log(4))


def test_negative_spectrum_rejected():
    with pytest.raises(oracle.NumericalIntegrityError):
        oracle.exact_entropies(np.diag([1.0, -0.1]))


def test_product_reduced_density_is_pure():
    g = LatticeGeometry(3, 2, 2, 1)
    rho = oracle.reduced_density(oracle.enumerate_state((1, 0, 0, 0), 3, 2), oracle.link_partition(g))
    assert oracle.purity_exact(rho, 2) == pytest.approx(1)


@settings(max_examples=20, deadline=None)
@given(st.tuples(*[st.floats(0.05, 2)] * 4))
def test_reduced_density_trace_is_norm(p):
    psi = oracle.enumerate_state(p, 3, 2)
    rho = oracle.reduced_density(psi, oracle.link_partition(LatticeGeometry(3, 2, 2, 1)))
    assert np.trace(rho) == pytest.approx(np.sum(psi.amplitudes**2), rel=1e-12)
    np.testing.assert_allclose(rho, rho.T, atol=1e-13 * np.abs(rho).max())
    assert np.linalg.eigvalsh(rho).min() >= -1e-12 * np.trace(rho)


def test_spectrum_independent_of_link_order():
    psi = oracle.enumerate_state((0.6, 1.1, 0.9, 0.4), 3, 3)
    links = oracle.link_partition(LatticeGeometry(3, 3, 2, 2))
    perm = list(np.random.default_rng(0).permutation(links))
    a = np.linalg.eigvalsh(oracle.reduced_density(psi, links))
    b = np.linalg.eigvalsh(oracle.reduced_density(psi, perm))
    np.testing.assert_allclose(a, b, atol=1e-12 * a.max())


def test_reduced_density_rejects_bad_sets():
    psi = oracle.enumerate_state((1, 1, 1, 1), 2, 2)
    with pytest.raises(ValueError):
        oracle.reduced_density(psi, [])
    with pytest.raises(ValueError):
        oracle.reduced_density(psi, list(range(8)))
    with pytest.raises(ValueError):
        oracle.reduced_density(psi, [0, 0])


def test_gauss_full_zero_for_tensor_states():
    for p in [(1, 0.1, 0, 0.95), GHZ, (0.3, 1.7, 1.2, 0.8)]:
        assert oracle.gauss_check_full(oracle.enumerate_state(p, 3, 2)) == 0


def test_gauss_full_detects_odd_configuration():
    psi = oracle.enumerate_state((1, 0, 0, 0), 2, 2)
    psi.amplitudes[1] = 0.5  # only link 0 flipped: odd star at two sites
    assert oracle.gauss_check_full(psi) == 1.0


def test_site_classes_on_2x2_block():
    g = LatticeGeometry(4, 3, 2, 2)
    assert oracle.classify_site(0, 0, g) == "corner"
    assert oracle.classify_site(0, 1, g) == "left"
    assert oracle.classify_site(1, 0, g) == "bottom"
    assert oracle.classify_site(1, 1, g) == "interior"
    assert oracle.classify_site(2, 1, g) == "right-neighbor"
    assert oracle.classify_site(1, 2, g) == "top-neighbor"
    assert len(oracle.effective_star(0, 1, g)) == 3
    assert len(oracle.effective_star(0, 0, g)) == 2
    assert len(oracle.effective_star(2, 0, g)) == 1


def test_reduced_gauss_interior_site():
    g = LatticeGeometry(3, 3, 2, 2)
    rho = oracle.reduced_density(oracle.enumerate_state((0.9, 1.2, 0.7, 0.5), 3, 3), oracle.link_partition(g))
    cases = oracle.gauss_check_reduced(rho, g, by_case=True)
    assert cases["interior"] <= 1e-13
    assert cases["left"] <= 1e-13
    # wrong operator: a single link of the corner star
    wrong = oracle.reduced_violation(rho, oracle.link_partition(g), [oracle.link_index(0, 0, 1, 3, 3)])
    assert wrong > 1e-3
