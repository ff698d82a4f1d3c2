import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from z2renyi import core, rows
from z2renyi.linalg import ConvergenceError, leading_eigenvalues, scaled_power

REFERENCE = (1, 0.1, 0, 0.95)
PERMUTATION_X = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], float)

amp = st.floats(0.05, 2.0, allow_nan=False)
params_st = st.tuples(amp, amp, amp, amp)


def spec_of(p):
    return core.spectral_decompose(core.tau0_explicit(p))


def test_layer_permutation_n2_is_the_explicit_matrix():
    X = rows.boundary_site_operator(2)
    np.testing.assert_array_equal(X.permutation, PERMUTATION_X)
    np.testing.assert_array_equal(X.permutation @ X.permutation, np.eye(4))
    np.testing.assert_array_equal(X.permutation @ X.permutation.T, np.eye(4))


def test_layer_permutation_n3_is_a_three_cycle():
    P = rows.boundary_site_operator(3).permutation
    assert (P.sum(0) == 1).all() and (P.sum(1) == 1).all()
    np.testing.assert_array_equal(np.linalg.matrix_power(P, 3), np.eye(6))
    assert not np.array_equal(P @ P, np.eye(6))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_flag_boundary_keeps_copy_constant_flags(n):
    X = rows.boundary_site_operator(n).matrix
    expected = np.zeros((2**n, 2**n))
    expected[0, 0] = expected[-1, -1] = 1
    np.testing.assert_array_equal(X, expected)
    np.testing.assert_array_equal(X @ X, X)


def test_boundary_rejects_n1():
    with pytest.raises(ValueError):
        rows.boundary_site_operator(1)


def brute_force_row(spec, n, N1):
    """Sum over one spectral channel per site and copy: prod lambda * Tr[prod M] * (x) M."""
    active = spec.active()
    D = 2**n
    E = np.zeros((D**N1, D**N1))
    for choice in itertools.product(range(3), repeat=n * N1):
        mus = np.reshape(choice, (N1, n))
        weight = 1.0
        trace_factor = 1.0
        vert = np.ones((1, 1))
        for c in range(n):
            prod = np.eye(2)
            for x in range(N1):
                lam, M = active[mus[x, c]]
                weight *= lam
                prod = prod @ M
            trace_factor *= np.trace(prod)
        for x in range(N1):
            site = np.ones((1, 1))
            for c in range(n):
                site = np.kron(site, active[mus[x, c]][1])
            vert = np.kron(vert, site)
        E += weight * trace_factor * vert
    return E


@pytest.mark.parametrize("n,N1", [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 2)])
def test_row_matches_channel_sum(n, N1):
    spec = spec_of((0.8, 0.6, 1.1, 0.4))
    np.testing.assert_allclose(rows.assemble_row(spec, n, N1).matrix, brute_force_row(spec, n, N1),
                               rtol=0, atol=1e-12)


def test_row_is_sitewise_tensor_power():
    spec = spec_of((0.8, 0.6, 1.1, 0.4))
    E1 = rows.assemble_row(spec, 1, 2).matrix
    E2 = rows.assemble_row(spec, 2, 2).matrix
    # E2 index (f11 f12 f21 f22) vs E1 x E1 index (f11 f21 f12 f22)
    T = np.kron(E1, E1).reshape((2,) * 8).transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16)
    np.testing.assert_allclose(E2, T, atol=1e-13)


def test_single_channel_row():
    E = rows.assemble_row(spec_of((1, 0, 0, 0)), 1, 2).matrix
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    np.testing.assert_allclose(E, expected, atol=1e-15)
    rep = rows.spectrum(E)
    assert rep.rho1 == pytest.approx(1) and rep.degeneracy == 1


def test_spectrum_examples():
    rep = rows.spectrum(rows.assemble_row(spec_of((1, 0, 0, 0)), 1, 4))
    assert rep.rho1 == pytest.approx(1) and rep.degeneracy == 1
    rep = rows.spectrum(rows.assemble_row(spec_of((1, 0, 0, 1)), 1, 4))
    assert rep.rho1 == pytest.approx(1) and rep.degeneracy == 2
    assert 0 <= rep.gap_ratio <= 1
    mags = np.abs(rep.eigenvalues)
    assert np.all(np.diff(mags) <= 1e-12)


def test_rho2_is_rho1_squared_at_reference_point():
    spec = spec_of(REFERENCE)
    r1 = rows.spectrum(rows.assemble_row(spec, 1, 4)).rho1
    r2 = rows.spectrum(rows.assemble_row(spec, 2, 4)).rho1
    assert abs(r2 - r1**2) / r1**2 <= 1e-12


def test_r_independence_at_reference_point():
    spec = spec_of(REFERENCE)
    vals = [rows.spectrum(rows.assemble_row(spec, 2, 4, insertions=R)).rho1 for R in (1, 2, 3)]
    assert (max(vals) - min(vals)) / max(vals) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(params_st, st.sampled_from([2, 3]), st.sampled_from([2, 3, 4]))
def test_rho_n_is_power_of_rho_1(p, n, N1):
    if n == 3 and N1 == 4:
        N1 = 3
    spec = spec_of(p)
    r1 = rows.spectrum(rows.assemble_row(spec, 1, N1)).rho1.real
    rn = rows.spectrum(rows.assemble_row(spec, n, N1)).rho1.real
    assert r1 > 0
    assert abs(rn - r1**n) / r1**n <= 1e-12


@settings(max_examples=25, deadline=None)
@given(params_st)
def test_boundary_row_eigenvalue_is_r_independent(p):
    spec = spec_of(p)
    vals = np.array([rows.spectrum(rows.assemble_row(spec, 2, 4, insertions=R)).rho1.real for R in (1, 2, 3)])
    assert (vals.max() - vals.min()) / vals.max() <= 1e-10


@settings(max_examples=25, deadline=None)
@given(params_st, st.sampled_from([1, 2, 3]))
def test_boundary_row_eigenvalue_is_bounded(p, R):
    spec = spec_of(p)
    rho = rows.spectrum(rows.assemble_row(spec, 2, 4)).rho1.real
    rho_p = rows.spectrum(rows.assemble_row(spec, 2, 4, insertions=R)).rho1.real
    assert 0 < rho_p <= rho * (1 + 1e-12)


def test_rows_are_real_with_real_power_traces():
    spec = spec_of((0.3, 1.4, 1.7, 0.2))
    for M in (rows.assemble_row(spec, 2, 3).matrix, rows.assemble_row(spec, 2, 3, insertions=2).matrix):
        assert np.isrealobj(M)
        assert np.isrealobj(np.trace(np.linalg.matrix_power(M, 5)))


def test_boundary_row_examples():
    X = rows.boundary_site_operator(2).matrix
    np.testing.assert_array_equal(rows.boundary_row(2, 1, 1), X)
    np.testing.assert_array_equal(rows.boundary_row(2, 2, 1), np.kron(X, np.eye(4)))
    B = rows.boundary_row(2, 3, 2)
    np.testing.assert_array_equal(B @ B, B)
    np.testing.assert_array_equal(rows.boundary_row(2, 3, 2, transpose=True), B.T)


def test_dimension_cap():
    with pytest.raises(rows.RowDimensionError):
        rows.assemble_row(spec_of(REFERENCE), 2, 8, max_dim=2**13)
    with pytest.raises(ValueError):
        rows.assemble_row(spec_of(REFERENCE), 2, 4, insertions=5)


def test_null_operator():
    with pytest.raises(rows.NullOperatorError):
        rows.spectrum(np.zeros((4, 4)))


def test_iterative_path_matches_dense():
    rng = np.random.default_rng(2)
    M = rng.uniform(0, 1, (300, 300))
    dense = rows.spectrum(M)
    it = rows.spectrum(M, dense_threshold=10)
    assert it.method == "subspace"
    assert abs(it.rho1 - dense.rho1) / abs(dense.rho1) < 1e-12


def test_subspace_iteration_reports_residual():
    rng = np.random.default_rng(0)
    Q, _ = np.linalg.qr(rng.standard_normal((50, 50)))
    M = Q @ np.diag(np.linspace(1, 0.999, 50)) @ Q.T
    with pytest.raises(ConvergenceError) as info:
        leading_eigenvalues(M, k=4, max_iter=3)
    assert info.value.residual > 0


def test_scaled_power_survives_overflow():
    M = np.array([[1e3, 0], [0, 1.0]])
    sign, logtr = scaled_power(M, 400).log_trace()
    assert sign == 1 and logtr == pytest.approx(400 * np.log(1e3))


def test_corner_tensor_reduces_to_copy_tensor_on_constant_flags():
    p = (0.7, 1.2, 0.4, 0.9)
    A = core.build_site_tensor(p)
    spec = spec_of(p)
    Q = rows.corner_site_tensor(A, 2)
    T = rows.copy_site_tensor(spec, 2)
    const = [0, 3]
    for l, r, d, u in itertools.product(const, repeat=4):
        assert Q[l, r, d, u] == pytest.approx(T[l, r, d, u], abs=1e-12)
