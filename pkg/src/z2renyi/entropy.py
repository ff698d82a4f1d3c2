"""Normalized purities and Renyi entropies from row transfer matrices.

The finite-lattice purity of the lower-left ``R1 x R2`` block is

    p_n = Tr[F E_||^(R2-1) X(R1) E^(N2-R2)] / Tr[E1^N2]^n

where ``E`` and ``E_||`` are the n-copy rows (the latter with boundary
operators after site 0 and site ``R1``), ``X(R1)`` the vertical boundary row
above the block and ``F`` the bottom row of the block, which carries the
exact corner weight at its first site.  ``corner=False`` replaces ``F`` by
``X(R1)^T E_||``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import PepsParams, build_site_tensor, spectral_decompose, transfer_from_tensor
from .linalg import ScaledMatrix, chain, scaled_power
from .rows import (
    MAX_ROW_DIM,
    assemble_corner_row,
    assemble_row,
    boundary_row,
    count_degenerate,
    spectrum,
)

GAP_LIMIT = 0.999
NONNEG_TOL = 1e-10


class NullStateError(ArithmeticError):
    pass


class ThermodynamicDiagnostic(ArithmeticError):
    """The closed-form large-lattice expression does not apply."""


@dataclass(frozen=True)
class LatticeGeometry:
    N1: int
    N2: int
    R1: int
    R2: int

    def __post_init__(self):
        for name in ("N1", "N2", "R1", "R2"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if not 1 <= self.R1 <= self.N1 - 1:
            raise ValueError(f"need 1 <= R1 <= N1-1, got R1={self.R1}, N1={self.N1}")
        if not 1 <= self.R2 <= self.N2 - 1:
            raise ValueError(f"need 1 <= R2 <= N2-1, got R2={self.R2}, N2={self.N2}")

    def transposed(self) -> "LatticeGeometry":
        return LatticeGeometry(self.N2, self.N1, self.R2, self.R1)

    @property
    def n_links(self) -> int:
        return 2 * self.N1 * self.N2


@dataclass
class EntropyResult:
    order: int
    value: float
    method: str
    components: dict = field(default_factory=dict)


def transpose_site_tensor(A) -> np.ndarray:
    """Reflect a site tensor across the lattice diagonal (swap directions 1 and 2)."""
    return np.transpose(np.asarray(A), (1, 0, 3, 2, 5, 4))


def _row_pipeline(A, n, geom, boundary, corner, max_dim):
    spec = spectral_decompose(transfer_from_tensor(A))
    N1, R1 = geom.N1, geom.R1
    E1 = assemble_row(spec, 1, N1, max_dim=max_dim).matrix
    E = assemble_row(spec, n, N1, max_dim=max_dim).matrix
    Ep = assemble_row(spec, n, N1, insertions=R1, boundary=boundary, max_dim=max_dim).matrix
    Xr = boundary_row(n, N1, R1, boundary=boundary, max_dim=max_dim)
    if corner:
        F = assemble_corner_row(A, spec, n, N1, R1, boundary=boundary, max_dim=max_dim).matrix
    else:
        F = boundary_row(n, N1, R1, transpose=True, boundary=boundary, max_dim=max_dim) @ Ep
    return E1, E, Ep, Xr, F


def log_purity_from_tensor(A, geom: LatticeGeometry, n: int = 2, boundary=None, corner: bool = True,
                           max_dim: int = MAX_ROW_DIM) -> float:
    """``ln p_n`` for an arbitrary gauge-symmetric site tensor."""
    if n < 2:
        raise ValueError(f"purity order must be >= 2, got {n}")
    E1, E, Ep, Xr, F = _row_pipeline(A, n, geom, boundary, corner, max_dim)
    den_sign, log_den = scaled_power(E1, geom.N2).log_trace()
    if den_sign <= 0:
        raise NullStateError("normalization trace vanishes: null state")
    num = chain(
        ScaledMatrix.wrap(F),
        scaled_power(Ep, geom.R2 - 1),
        ScaledMatrix.wrap(Xr),
        scaled_power(E, geom.N2 - geom.R2),
    )
    num_sign, log_num = num.log_trace()
    if num_sign <= 0:
        raise NullStateError(f"purity numerator is not positive (sign {num_sign})")
    return log_num - n * log_den


def purity_finite(params, geom: LatticeGeometry, n: int = 2, boundary=None, corner: bool = True,
                  max_dim: int = MAX_ROW_DIM) -> float:
    """Normalized purity ``Tr[rho_A^n] / Tr[rho_A]^n`` on a periodic ``N1 x N2`` lattice.

    Parameters
    ----------
    params : PepsParams or 4-tuple
    geom : LatticeGeometry
    n : int
        Replica order, at least 2.
    boundary : array, optional
        Replacement for the per-site flag-space boundary matrix. Only used to
        run negative controls.
    corner : bool
        Use the exact corner row (default).  ``False`` gives the uniform
        tiling with ``X^T`` below the block.
    """
    A = build_site_tensor(PepsParams.coerce(params))
    return math.exp(log_purity_from_tensor(A, geom, n, boundary, corner, max_dim))


def renyi_finite(params, geom: LatticeGeometry, n: int = 2, **kw) -> EntropyResult:
    A = build_site_tensor(PepsParams.coerce(params))
    logp = log_purity_from_tensor(A, geom, n, **kw)
    return EntropyResult(order=n, value=logp / (1 - n), method="finite-lattice",
                         components={"purity": math.exp(logp), "log_purity": logp})


def _real_positive(x, what):
    x = complex(x)
    if abs(x.imag) > 1e-12 * max(abs(x), 1e-300):
        raise ThermodynamicDiagnostic(f"{what} is complex: {x}")
    if x.real <= 0:
        raise ThermodynamicDiagnostic(f"{what} is not positive: {x.real}")
    return x.real


def dominant_row_data(params, n: int, N1: int, R1: int, max_dim: int = MAX_ROW_DIM) -> dict:
    """Dominant eigen-data of ``E1``, ``E^(n)`` and ``E_||^(n)(R1)`` at width ``N1``."""
    spec = spectral_decompose(transfer_from_tensor(build_site_tensor(PepsParams.coerce(params))))
    s1 = spectrum(assemble_row(spec, 1, N1, max_dim=max_dim))
    sn = spectrum(assemble_row(spec, n, N1, max_dim=max_dim))
    sp = spectrum(assemble_row(spec, n, N1, insertions=R1, max_dim=max_dim))
    return {"E1": s1, "En": sn, "Epar": sp}


def renyi_thermodynamic(params, R1: int, R2: int, N1: int, n: int = 2, check: bool = True,
                        max_dim: int = MAX_ROW_DIM) -> EntropyResult:
    """Large-lattice closed form ``1/(1-n) [-n ln K + (R1+R2) ln(rho'/rho)]``.

    ``K`` is the degeneracy of the leading eigenvalue of ``E1`` (the one that
    sets the normalization); ``rho`` and ``rho'`` are the dominant eigenvalues
    of ``E^(n)`` and ``E_||^(n)``.  With ``check`` the formula refuses to run
    on complex or non-positive dominant eigenvalues, on sign-split degenerate
    leading eigenvalues of ``E1`` and on gap ratios above 0.999.
    """
    if n < 2:
        raise ValueError(f"order must be >= 2, got {n}")
    if R1 < 1 or R2 < 1 or R1 > N1 - 1:
        raise ValueError("need R1 in 1..N1-1 and R2 >= 1")
    d = dominant_row_data(params, n, N1, R1, max_dim)
    s1, sn, sp = d["E1"], d["En"], d["Epar"]
    K = s1.degeneracy
    if check:
        lead = np.asarray(s1.eigenvalues[:K])
        if np.any(np.abs(lead.imag) > 1e-12 * abs(lead[0])) or np.any(lead.real < 0):
            raise ThermodynamicDiagnostic(f"degenerate leading eigenvalues of E1 differ in phase: {lead}")
        for s, name in ((sn, "E^(n)"), (sp, "E_||^(n)")):
            if s.gap_ratio > GAP_LIMIT:
                raise ThermodynamicDiagnostic(f"gap ratio of {name} is {s.gap_ratio:.6f} > {GAP_LIMIT}")
        rho = _real_positive(sn.rho1, "dominant eigenvalue of E^(n)")
        rho_p = _real_positive(sp.rho1, "dominant eigenvalue of E_||^(n)")
    else:
        rho, rho_p = abs(sn.rho1), abs(sp.rho1)
    log_ratio = math.log(rho_p / rho)
    value = (-n * math.log(K) + (R1 + R2) * log_ratio) / (1 - n)
    return EntropyResult(
        order=n,
        value=value,
        method="thermodynamic",
        components={
            "lnK_term": -n * math.log(K) / (1 - n),
            "perimeter_coefficient": log_ratio / (1 - n),
            "rho1": rho,
            "rho1_prime": rho_p,
            "K": K,
            "K_n": sn.degeneracy,
            "K_prime": sp.degeneracy,
            "gap_ratio": sn.gap_ratio,
            "gap_ratio_prime": sp.gap_ratio,
        },
    )


def kappa_fit_values(R: Sequence[float], rho_prime: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares fit ``ln rho'(R) = ln Gamma - kappa R``; returns ``(Gamma, kappa, max residual)``."""
    R = np.asarray(R, dtype=float)
    y = np.log(np.asarray(rho_prime, dtype=float))
    if R.size == 1:
        return float(np.exp(y[0])), 0.0, 0.0
    coef, *_ = np.linalg.lstsq(np.column_stack([np.ones_like(R), -R]), y, rcond=None)
    resid = y - (coef[0] - coef[1] * R)
    return float(np.exp(coef[0])), float(coef[1]), float(np.abs(resid).max())


def kappa_fit(params, n: int, N1: int, R_range: Sequence[int]) -> tuple[float, float, float]:
    spec = spectral_decompose(transfer_from_tensor(build_site_tensor(PepsParams.coerce(params))))
    R_range = list(R_range)
    for R in R_range:
        if not 1 <= R <= N1 - 1:
            raise ValueError(f"R={R} outside 1..{N1 - 1}")
    vals = []
    for R in R_range:
        rho = spectrum(assemble_row(spec, n, N1, insertions=R)).rho1
        vals.append(_real_positive(rho, f"rho'(R={R})"))
    return kappa_fit_values(R_range, vals)


def contraction_consistency(params, geom: LatticeGeometry, n: int = 2, max_dim: int = MAX_ROW_DIM):
    """Relative difference of ``p_n`` contracted row-wise and column-wise.

    The column-wise value uses rows of width ``N2`` built from the reflected
    site tensor on the reflected lattice.
    """
    A = build_site_tensor(PepsParams.coerce(params))
    lr = log_purity_from_tensor(A, geom, n, max_dim=max_dim)
    lc = log_purity_from_tensor(transpose_site_tensor(A), geom.transposed(), n, max_dim=max_dim)
    pr, pc = math.exp(lr), math.exp(lc)
    return abs(pr - pc) / abs(pr), pr, pc


# ---- 1D warm-up -----------------------------------------------------------

def random_mps_tensor(chi: int, seed: int, d: int = 2) -> np.ndarray:
    """``A[a, b, i]`` with i.i.d. entries uniform on [-1, 1]."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(chi, chi, d))


def ghz_mps_tensor() -> np.ndarray:
    A = np.zeros((2, 2, 2))
    A[0, 0, 0] = 1.0
    A[1, 1, 1] = 1.0
    return A


def mps_state(A, N: int) -> np.ndarray:
    """Dense periodic translation-invariant MPS amplitudes, site 0 most significant."""
    chi, _, d = A.shape
    cur = np.transpose(A, (0, 2, 1)).reshape(chi, d, chi)  # (left, phys, right)
    for _ in range(N - 1):
        cur = np.einsum("apb,bqc->apqc", cur, A.transpose(0, 2, 1)).reshape(chi, -1, chi)
    return np.einsum("apa->p", cur)


def mps_purity_transfer(A, N: int, start: int, L: int) -> float:
    """``Tr[rho_A^2]/Tr[rho]^2`` from the doubled transfer matrix and two swaps."""
    A = np.asarray(A)
    chi = A.shape[0]
    E = np.einsum("abi,cdi->acbd", A, A.conj()).reshape(chi * chi, chi * chi)
    EB = np.kron(E, E)  # layers (ket1, bra1, ket2, bra2)
    # swap layers bra1 and bra2
    X = np.eye(chi**4).reshape((chi,) * 8).transpose(0, 3, 2, 1, 4, 5, 6, 7).reshape(chi**4, chi**4)
    M = chain(
        scaled_power(EB, start),
        ScaledMatrix.wrap(X),
        scaled_power(EB, L),
        ScaledMatrix.wrap(X),
        scaled_power(EB, N - start - L),
    )
    s_num, l_num = M.log_trace()
    s_den, l_den = scaled_power(E, N).log_trace()
    if s_den == 0:
        raise NullStateError("MPS norm vanishes")
    return s_num * math.exp(l_num - 2 * l_den)


def mps_purity_direct(A, N: int, start: int, L: int) -> float:
    psi = mps_state(A, N)
    d = A.shape[2]
    t = psi.reshape((d,) * N)
    sub = list(range(start, start + L))
    rest = [k for k in range(N) if k not in sub]
    M = np.transpose(t, sub + rest).reshape(d**L, -1)
    rho = M @ M.conj().T
    tr = np.trace(rho).real
    return float(np.real(np.trace(rho @ rho)) / tr**2)


MPS_DENSE_MAX_N = 12


def mps_purity_demo(chi: int, N: int, subsystem_interval=(0, 1), seed: int = 0, tensor=None):
    """Purity of a contiguous block of a random periodic MPS, two ways.

    Returns ``(p2_transfer, p2_direct)``.
    """
    if N > MPS_DENSE_MAX_N:
        raise ValueError(f"N={N} too large for the dense comparison (max {MPS_DENSE_MAX_N})")
    start, L = subsystem_interval
    if start < 0 or not 1 <= L <= N - 1 or start + L > N:
        raise ValueError(f"subsystem {subsystem_interval} does not fit a proper block of {N} sites")
    A = random_mps_tensor(chi, seed) if tensor is None else np.asarray(tensor)
    return mps_purity_transfer(A, N, start, L), mps_purity_direct(A, N, start, L)
