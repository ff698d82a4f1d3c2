"""Row transfer matrices on a periodic row of ``N1`` sites.

A row operator maps the configuration of the ``N1`` incoming vertical legs
(``d``) to the outgoing ones (``u``).  Each vertical leg carries one singlet
flag per replica copy, so the per-site vertical space has dimension ``2**n``
and flag tuples ``(f_1, ..., f_n)`` are enumerated with copy 1 most
significant (the ``np.kron`` order).  Row index = incoming configuration with
site 1 most significant.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import SpectralForm, vertex_weights
from .linalg import leading_eigenvalues

#: largest row dimension ``(2**n)**N1`` accepted by the dense builders
MAX_ROW_DIM = 2**13
DENSE_EIG_MAX = 4096
DEGENERACY_RTOL = 1e-9


class RowDimensionError(ValueError):
    pass


class NullOperatorError(ArithmeticError):
    pass


@dataclass(frozen=True)
class BoundaryOperator:
    """Replica re-pairing at the subsystem boundary.

    ``permutation`` acts on the ``2n`` layer labels of a leg (odd layers
    fixed, even layers shifted by one copy).  ``matrix`` is the same
    operation seen from the per-copy singlet-flag space used by the rows.
    """

    order: int
    permutation: np.ndarray  # (2n, 2n)
    matrix: np.ndarray  # (2**n, 2**n)


@dataclass
class RowOperator:
    order: int
    width: int
    matrix: np.ndarray
    insertion: Optional[int] = None  # R1 when boundary operators are inserted
    corner: bool = False

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class SpectrumReport:
    rho1: complex
    degeneracy: int
    gap_ratio: float
    eigenvalues: np.ndarray
    method: str = "dense"
    right_vectors: Optional[np.ndarray] = field(default=None, repr=False)
    left_vectors: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dominant(self) -> complex:
        return self.eigenvalues[0]


def flag_tuples(n: int) -> list[tuple[int, ...]]:
    return list(itertools.product((0, 1), repeat=n))


def _layer_permutation(n: int) -> np.ndarray:
    """sigma[j] = image of layer j (0-based); odd labels (1, 3, ...) are the even 1-based ones."""
    sigma = np.arange(2 * n)
    for i in range(n):
        sigma[2 * i + 1] = (2 * i + 3) % (2 * n)
    return sigma


def boundary_site_operator(n: int) -> BoundaryOperator:
    if n < 2:
        raise ValueError(f"boundary operators need replica order n >= 2, got {n}")
    sigma = _layer_permutation(n)
    P = np.zeros((2 * n, 2 * n))
    P[sigma, np.arange(2 * n)] = 1.0

    # act on the 2n layer values of each singlet product state and read the
    # result back in the flag basis; non-singlet images have no flag component
    D = 2**n
    X = np.zeros((D, D))
    for col, f in enumerate(flag_tuples(n)):
        layers = np.repeat(f, 2)
        moved = np.empty_like(layers)
        moved[sigma] = layers
        pairs = moved.reshape(n, 2)
        if np.all(pairs[:, 0] == pairs[:, 1]):
            row = int("".join(map(str, pairs[:, 0])), 2)
            X[row, col] += 1.0
    return BoundaryOperator(order=n, permutation=P, matrix=X)


def copy_site_tensor(spec: SpectralForm, n: int) -> np.ndarray:
    """``T[l, r, d, u]`` of ``tau0`` tensored over ``n`` copies, flag legs of size ``2**n``."""
    t1 = np.zeros((2, 2, 2, 2))
    for lam, M in spec.active():
        t1 += lam * np.einsum("ab,cd->abcd", M, M)
    T = t1
    for k in range(1, n):
        D = 2**k
        T = np.einsum("abcd,efgh->aebfcgdh", T, t1).reshape(2 * D, 2 * D, 2 * D, 2 * D)
    return T


def corner_site_tensor(A, n: int) -> np.ndarray:
    """Lower-left corner site of the subsystem, ``Q[l, r, d, u]`` in flag legs.

    Its own (right, up) links belong to the subsystem and are paired as
    ``(bra_k, ket_{k+1})``, while its left and down links belong to the
    complement and are paired as ``(ket_k, bra_k)``.  The weight is therefore
    ``prod_k w(g_{k-1}; f_k) w(g_k; f_k)`` which differs from ``tau0^{(x)n}``
    whenever the incoming flags vary between copies.
    """
    w = vertex_weights(A)
    D = 2**n
    bits = np.indices((2,) * (4 * n)).reshape(4 * n, -1)
    fl, gr, fd, gu = (bits[i * n:(i + 1) * n] for i in range(4))
    val = np.ones(bits.shape[1])
    for k in range(n):
        km = (k - 1) % n
        val *= w[gr[km], gu[km], fl[k], fd[k]] * w[gr[k], gu[k], fl[k], fd[k]]
    return val.reshape(D, D, D, D)


def _check_dim(D: int, N1: int, max_dim: int):
    if N1 < 1:
        raise ValueError("row width must be >= 1")
    if D**N1 > max_dim:
        raise RowDimensionError(f"row dimension {D}**{N1} = {D**N1} exceeds the cap {max_dim}")


def ring_contract(sites, after=None, before_first=None, vertical=None) -> np.ndarray:
    """Contract site tensors ``S[l, r, d, u]`` around a periodic horizontal ring.

    ``after[x]`` is a matrix applied on the horizontal bond to the right of
    site ``x`` (0-based); ``before_first`` sits left of site 0.  ``vertical[x]``
    is applied to the incoming vertical leg of site ``x``.
    """
    after = after or {}
    D = sites[0].shape[0]
    N = len(sites)
    sites = list(sites)
    for x in range(N):
        if vertical is not None and vertical[x] is not None:
            sites[x] = np.einsum("md,lrmu->lrdu", vertical[x], sites[x])
    if N - 1 in after:
        sites[-1] = np.einsum("lrdu,rk->lkdu", sites[-1], after[N - 1])
    start = np.eye(D) if before_first is None else np.asarray(before_first)
    total = None
    # one pass per value h0 of the closing bond keeps intermediates at (D, I, J)
    for h0 in range(D):
        cur = start[h0].reshape(D, 1, 1)  # h, incoming config, outgoing config
        for x in range(N - 1):
            S = sites[x]
            Dr, Dv = S.shape[1], S.shape[2]
            nxt = np.tensordot(cur, S, axes=([0], [0]))  # i, j, r, d, u
            cur = nxt.transpose(2, 0, 3, 1, 4).reshape(Dr, cur.shape[1] * Dv, cur.shape[2] * Dv)
            if x in after:
                cur = np.tensordot(after[x], cur, axes=([0], [0]))
        last = sites[-1][:, h0]  # h, d, u
        Dv = last.shape[1]
        nxt = np.tensordot(cur, last, axes=([0], [0]))  # i, j, d, u
        contrib = nxt.transpose(0, 2, 1, 3).reshape(cur.shape[1] * Dv, cur.shape[2] * Dv)
        total = contrib if total is None else total + contrib
    return total


def assemble_row(spec: SpectralForm, n: int, N1: int, insertions: Optional[int] = None,
                 boundary: Optional[np.ndarray] = None, max_dim: int = MAX_ROW_DIM) -> RowOperator:
    """Row transfer matrix ``E^(n)`` or, with ``insertions=R1``, ``E^(n)_||(R1)``.

    The boundary operator (transposed) sits left of site 1 and after site
    ``R1``.  ``boundary`` overrides the flag-space boundary matrix.
    """
    if n < 1:
        raise ValueError("replica order must be >= 1")
    D = 2**n
    _check_dim(D, N1, max_dim)
    T = copy_site_tensor(spec, n)
    if insertions is None:
        return RowOperator(n, N1, ring_contract([T] * N1))
    R1 = int(insertions)
    if not 1 <= R1 <= N1:
        raise ValueError(f"insertion position R1={R1} outside 1..{N1}")
    X = boundary_site_operator(n).matrix if boundary is None else np.asarray(boundary)
    M = ring_contract([T] * N1, after={R1 - 1: X}, before_first=X.T)
    return RowOperator(n, N1, M, insertion=R1)


def assemble_corner_row(A, spec: SpectralForm, n: int, N1: int, R1: int,
                        boundary: Optional[np.ndarray] = None, max_dim: int = MAX_ROW_DIM) -> RowOperator:
    """Bottom row of the subsystem including the boundary row beneath it.

    Equals ``X(R1)^T E_||(R1)`` except that site 1 carries the exact corner
    weight and its left/down bonds are not projected.
    """
    D = 2**n
    _check_dim(D, N1, max_dim)
    if not 1 <= R1 <= N1:
        raise ValueError(f"insertion position R1={R1} outside 1..{N1}")
    X = boundary_site_operator(n).matrix if boundary is None else np.asarray(boundary)
    T = copy_site_tensor(spec, n)
    sites = [corner_site_tensor(A, n)] + [T] * (N1 - 1)
    vertical = [None] + [X.T] * (R1 - 1) + [None] * (N1 - R1)
    M = ring_contract(sites, after={R1 - 1: X}, vertical=vertical)
    return RowOperator(n, N1, M, insertion=R1, corner=True)


def boundary_row(n: int, N1: int, R1: int, transpose: bool = False,
                 boundary: Optional[np.ndarray] = None, max_dim: int = MAX_ROW_DIM) -> np.ndarray:
    """``X (x) ... (x) X (x) 1 (x) ... (x) 1`` with ``R1`` boundary factors."""
    D = 2**n
    _check_dim(D, N1, max_dim)
    if not 1 <= R1 <= N1:
        raise ValueError(f"R1={R1} outside 1..{N1}")
    X = boundary_site_operator(n).matrix if boundary is None else np.asarray(boundary)
    if transpose:
        X = X.T
    out = np.ones((1, 1))
    for x in range(N1):
        out = np.kron(out, X if x < R1 else np.eye(D))
    return out


def count_degenerate(eigs: np.ndarray, rel_tol: float) -> int:
    mags = np.abs(eigs)
    return int(np.sum(mags >= mags[0] * (1.0 - rel_tol)))


def spectrum(row, degeneracy_rel_tol: float = DEGENERACY_RTOL, dense_threshold: int = DENSE_EIG_MAX,
             n_leading: int = 8, vectors: bool = False) -> SpectrumReport:
    """Dominant spectrum of a row operator (or a plain square matrix)."""
    M = row.matrix if isinstance(row, RowOperator) else np.asarray(row)
    if not np.all(np.isfinite(M)):
        raise ValueError("row matrix contains non-finite entries")
    if not np.any(M):
        raise NullOperatorError("null operator")
    right = left = None
    if M.shape[0] <= dense_threshold:
        if vectors:
            import scipy.linalg

            eigs, wl, vr = scipy.linalg.eig(M, left=True, right=True)
        else:
            eigs = np.linalg.eigvals(M)
        order = np.lexsort((-eigs.imag, -np.abs(eigs)))
        eigs = eigs[order]
        if vectors:
            right, left = vr[:, order], wl[:, order]
        method = "dense"
    else:
        eigs = leading_eigenvalues(M, k=n_leading)
        method = "subspace"
    eigs = np.real_if_close(eigs, tol=1000)
    K = count_degenerate(eigs, degeneracy_rel_tol)
    gap = float(abs(eigs[K]) / abs(eigs[0])) if K < len(eigs) else 0.0
    return SpectrumReport(rho1=eigs[0], degeneracy=K, gap_ratio=gap, eigenvalues=eigs,
                          method=method, right_vectors=right, left_vectors=left)
