"""Z2 gauged PEPS site tensors and the single-site transfer operator.

Basis conventions used throughout the package:

* every leg index has dimension 2 with order ``(+, -)`` (``+`` is flux free);
* site tensors are indexed ``A[s, t, r, u, l, d]`` with the physical ``s``/``t``
  sitting on the right/up links;
* the singlet-flag pair basis of the 4x4 transfer operator is
  ``{(+,+), (-,-), (+,-), (-,+)}``, rows horizontal ``(l, r)``, columns
  vertical ``(d, u)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PLUS, MINUS = 0, 1

#: pair (j1, j2) of leg values -> row/column of the 4x4 transfer operator
PAIR_INDEX = {(PLUS, PLUS): 0, (MINUS, MINUS): 1, (PLUS, MINUS): 2, (MINUS, PLUS): 3}

STRUCTURE_TOL = 1e-12


class GaugeSymmetryError(ValueError):
    """Raised when a site tensor violates the Z2 vertex constraints."""


@dataclass(frozen=True)
class PepsParams:
    """Amplitudes of the zero, corner, straight and crossing flux patterns."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        vals = self.as_tuple()
        for name, v in zip(("alpha", "beta", "gamma", "delta"), vals):
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            if v < 0:
                raise ValueError(f"{name} must be nonnegative, got {v!r}")
        if not any(v > 0 for v in vals):
            raise ValueError("all amplitudes vanish: the PEPS is the null state")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (float(self.alpha), float(self.beta), float(self.gamma), float(self.delta))

    @classmethod
    def coerce(cls, p) -> "PepsParams":
        if isinstance(p, cls):
            return p
        return cls(*p)


@dataclass(frozen=True)
class SpectralForm:
    """``tau0 = sum_mu lam[mu] * M[mu] (x) M[mu]`` with ``tau0 = V diag(lam) V^T``.

    ``operators[3]`` has zero weight and is skipped by row assembly.
    """

    eigenvalues: np.ndarray  # (4,)
    operators: np.ndarray  # (4, 2, 2)
    mixing: np.ndarray  # (4, 4), columns are mu

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((4, 4))
        for lam, M in zip(self.eigenvalues, self.operators):
            # pair-basis components of M in the tau0 ordering
            vec = np.array([M[0, 0], M[1, 1], M[0, 1], M[1, 0]])
            out += lam * np.outer(vec, vec)
        return out

    def active(self) -> list[tuple[float, np.ndarray]]:
        """(lambda, M) pairs that contribute to row transfer matrices."""
        return [(lam, M) for lam, M in zip(self.eigenvalues[:3], self.operators[:3])]


# (s, t, r, u, l, d) flux patterns allowed by the vertex constraints, per amplitude
FLUX_PATTERNS = {
    "alpha": [(0, 0, 0, 0, 0, 0)],
    "beta": [
        (1, 1, 1, 1, 0, 0),
        (1, 0, 1, 0, 0, 1),
        (0, 0, 0, 0, 1, 1),
        (0, 1, 0, 1, 1, 0),
    ],
    "gamma": [(1, 0, 1, 0, 1, 0), (0, 1, 0, 1, 0, 1)],
    "delta": [(1, 1, 1, 1, 1, 1)],
}


def build_site_tensor(params) -> np.ndarray:
    """Rank-6 real site tensor ``A[s, t, r, u, l, d]`` with the 8 flux entries."""
    p = PepsParams.coerce(params)
    A = np.zeros((2,) * 6)
    for name, patterns in FLUX_PATTERNS.items():
        for idx in patterns:
            A[idx] = getattr(p, name)
    return A


def _symmetry_mask() -> np.ndarray:
    s, t, r, u, l, d = np.indices((2,) * 6)
    parity = (l + d + r + u) % 2
    return (s == r) & (t == u) & (parity == 0)


_ALLOWED = _symmetry_mask()


def check_gauge_symmetry(A) -> float:
    """Largest magnitude of any entry that breaks ``s=r``, ``t=u`` or even vertex parity."""
    A = np.asarray(A)
    if A.shape != (2,) * 6:
        raise ValueError(f"expected a (2,)*6 tensor, got shape {A.shape}")
    bad = np.abs(A[~_ALLOWED])
    return float(bad.max()) if bad.size else 0.0


def vertex_weights(A) -> np.ndarray:
    """Single-layer vertex amplitude ``w[r, u, l, d] = A[r, u, r, u, l, d]``."""
    A = np.asarray(A)
    r, u, l, d = np.indices((2, 2, 2, 2))
    return A[r, u, r, u, l, d]


def transfer_from_tensor(A, tol: float = STRUCTURE_TOL) -> np.ndarray:
    """Contract ``A`` with its conjugate over the physical legs and project on singlets."""
    A = np.asarray(A)
    violation = check_gauge_symmetry(A)
    if violation > tol:
        raise GaugeSymmetryError(f"site tensor breaks the Z2 constraints by {violation:.3e}")
    # T1[r, r', u, u', l, l', d, d']
    T1 = np.einsum("struld,stRULD->rRuUlLdD", A, A.conj())
    tau = np.zeros((4, 4), dtype=T1.dtype)
    for (l, r), row in PAIR_INDEX.items():
        for (d, u), col in PAIR_INDEX.items():
            # on-leg singlets |0(j)> = |j j> on every leg
            tau[row, col] = T1[r, r, u, u, l, l, d, d]
    return np.real_if_close(tau)


def tau0_explicit(params) -> np.ndarray:
    p = PepsParams.coerce(params)
    a2, b2, g2, d2 = (v * v for v in p.as_tuple())
    return np.array(
        [
            [a2, g2, 0.0, 0.0],
            [g2, d2, 0.0, 0.0],
            [0.0, 0.0, b2, b2],
            [0.0, 0.0, b2, b2],
        ]
    )


def upper_block_eigenvalues(params) -> tuple[float, float]:
    """Closed-form ``lambda_{1,2}`` of the flux-preserving block."""
    a2, _, g2, d2 = (v * v for v in PepsParams.coerce(params).as_tuple())
    root = math.sqrt((a2 - d2) ** 2 + 4.0 * g2 * g2)
    return 0.5 * (a2 + d2 + root), 0.5 * (a2 + d2 - root)


def spectral_decompose(tau0) -> SpectralForm:
    """Eigen-decompose the block-structured transfer operator.

    The upper 2x2 block is diagonalized numerically (``lambda_1 >= lambda_2``);
    the lower block always gives ``lambda_3 = 2 beta^2`` with ``sigma_x / sqrt 2``
    and ``lambda_4 = 0``.
    """
    tau0 = np.asarray(tau0, dtype=float)
    if tau0.shape != (4, 4):
        raise ValueError(f"expected a 4x4 transfer operator, got {tau0.shape}")
    off = max(np.abs(tau0[:2, 2:]).max(), np.abs(tau0[2:, :2]).max())
    scale = max(1.0, np.abs(tau0).max())
    if off > STRUCTURE_TOL * scale or not np.allclose(tau0, tau0.T, rtol=0, atol=STRUCTURE_TOL * scale):
        raise ValueError("tau0 must be symmetric and block diagonal")

    w, v = np.linalg.eigh(tau0[:2, :2])
    order = [1, 0]  # eigh is ascending
    w, v = w[order], v[:, order]
    # deterministic sign: largest component of every eigenvector positive
    for k in range(2):
        if v[np.argmax(np.abs(v[:, k])), k] < 0:
            v[:, k] *= -1

    b2 = tau0[2, 2]
    s = 1.0 / math.sqrt(2.0)
    V = np.zeros((4, 4))
    V[:2, :2] = v
    V[2:, 2] = (s, s)
    V[2:, 3] = (-s, s)
    lam = np.array([w[0], w[1], 2.0 * b2, 0.0])

    ops = np.zeros((4, 2, 2))
    for mu in range(4):
        # pair index -> matrix element: (+,+)=0 (-,-)=1 (+,-)=2 (-,+)=3
        ops[mu] = [[V[0, mu], V[2, mu]], [V[3, mu], V[1, mu]]]
    return SpectralForm(eigenvalues=lam, operators=ops, mixing=V)
