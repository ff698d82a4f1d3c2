"""Exact enumeration over link configurations on small periodic lattices.

Links are indexed ``2 * (x2 * N1 + x1) + (i - 1)`` for site ``(x1, x2)``
(0-based, ``x1`` fastest) and direction ``i`` in {1, 2}.  Bit ``k`` of a
configuration index is the state of link ``k``: 0 for ``+``, 1 for ``-``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PepsParams, build_site_tensor, vertex_weights
from .entropy import LatticeGeometry

#: largest number of links enumerated (2**24 amplitudes, 128 MiB)
MAX_LINKS = 24
CHUNK = 1 << 20
PSD_TOL = 1e-10


class OracleSizeError(ValueError):
    pass


class NumericalIntegrityError(ArithmeticError):
    pass


@dataclass
class WaveFunction:
    amplitudes: np.ndarray  # (2**n_links,)
    N1: int
    N2: int

    @property
    def n_links(self) -> int:
        return 2 * self.N1 * self.N2


def link_index(x1: int, x2: int, i: int, N1: int, N2: int) -> int:
    return 2 * ((x2 % N2) * N1 + (x1 % N1)) + (i - 1)


def star_links(x1: int, x2: int, N1: int, N2: int) -> list[int]:
    """Links (x,1), (x,2), (x-e1,1), (x-e2,2) meeting at site x."""
    return [
        link_index(x1, x2, 1, N1, N2),
        link_index(x1, x2, 2, N1, N2),
        link_index(x1 - 1, x2, 1, N1, N2),
        link_index(x1, x2 - 1, 2, N1, N2),
    ]


def link_partition(geom) -> list[int]:
    """Sorted A-links: right and up links of the sites ``0 <= x1 < R1, 0 <= x2 < R2``.

    Accepts a ``LatticeGeometry`` or a plain ``(N1, N2, R1, R2)`` tuple; the
    latter allows the full lattice for testing.
    """
    N1, N2, R1, R2 = (geom.N1, geom.N2, geom.R1, geom.R2) if hasattr(geom, "N1") else geom
    return sorted(link_index(x1, x2, i, N1, N2) for x2 in range(R2) for x1 in range(R1) for i in (1, 2))


def enumerate_state(params, N1: int, N2: int, max_links: int = MAX_LINKS, tensor=None) -> WaveFunction:
    """Amplitude of every link configuration as a product of vertex weights."""
    L = 2 * N1 * N2
    if L > max_links:
        raise OracleSizeError(f"{L} links exceed the enumeration cap of {max_links}")
    A = build_site_tensor(PepsParams.coerce(params)) if tensor is None else np.asarray(tensor)
    w = vertex_weights(A)
    total = 1 << L
    psi = np.empty(total)
    for lo in range(0, total, CHUNK):
        cfg = np.arange(lo, min(lo + CHUNK, total), dtype=np.int64)
        amp = np.ones(cfg.size)
        for x2 in range(N2):
            for x1 in range(N1):
                r, u, l, d = ((cfg >> k) & 1 for k in star_links(x1, x2, N1, N2))
                amp *= w[r, u, l, d]
        psi[lo:lo + cfg.size] = amp
    if not np.any(psi):
        raise ArithmeticError("null state: every amplitude vanishes")
    return WaveFunction(psi, N1, N2)


def reduced_density(psi: WaveFunction, A_links) -> np.ndarray:
    """Unnormalized ``rho_A = Tr_B |psi><psi|``.

    Row index bits follow ``A_links`` in the given order, first link most
    significant.
    """
    L = psi.n_links
    A_links = list(A_links)
    if not A_links or len(set(A_links)) != len(A_links) or len(A_links) >= L:
        raise ValueError("A_links must be a nonempty proper subset of links without repeats")
    if min(A_links) < 0 or max(A_links) >= L:
        raise ValueError("link index out of range")
    B_links = [k for k in range(L) if k not in set(A_links)]
    # C-order reshape: axis j holds link L-1-j
    t = psi.amplitudes.reshape((2,) * L)
    axes = [L - 1 - k for k in A_links] + [L - 1 - k for k in B_links]
    M = np.transpose(t, axes).reshape(1 << len(A_links), -1)
    return M @ M.T


def exact_entropies(rho_A, orders=(2, 3)) -> dict:
    """Normalized Renyi entropies for ``orders`` plus the von Neumann entropy under key 1."""
    rho_A = np.asarray(rho_A)
    ev = np.linalg.eigvalsh(0.5 * (rho_A + rho_A.T.conj()))
    tr = ev.sum()
    if tr <= 0:
        raise NumericalIntegrityError("reduced density matrix has nonpositive trace")
    p = ev / tr
    if p.min() < -PSD_TOL:
        raise NumericalIntegrityError(f"negative eigenvalue {p.min():.3e} in the reduced density matrix")
    p = np.clip(p, 0.0, None)
    out = {}
    for n in orders:
        if n == 1:
            continue
        out[n] = float(np.log(np.sum(p**n)) / (1 - n))
    nz = p[p > 0]
    out[1] = float(-np.sum(nz * np.log(nz)))
    return out


def purity_exact(rho_A, n: int) -> float:
    rho_A = np.asarray(rho_A)
    tr = np.trace(rho_A)
    return float(np.trace(np.linalg.matrix_power(rho_A / tr, n)))


def _parity(cfg, links):
    par = np.zeros_like(cfg)
    for k in links:
        par ^= (cfg >> k) & 1
    return 1 - 2 * par


def gauss_check_full(psi: WaveFunction) -> float:
    """Largest ``|Theta(x) psi - psi|`` over sites and configurations."""
    amps = psi.amplitudes
    cfg = np.arange(amps.size, dtype=np.int64)
    worst = 0.0
    for x2 in range(psi.N2):
        for x1 in range(psi.N1):
            s = _parity(cfg, star_links(x1, x2, psi.N1, psi.N2))
            worst = max(worst, float(np.abs(s * amps - amps).max()))
    return worst


def classify_site(x1: int, x2: int, geom: LatticeGeometry) -> str:
    """Boundary case of a site relative to the lower-left block."""
    inside = x1 < geom.R1 and x2 < geom.R2
    if inside:
        if x1 == 0 and x2 == 0:
            return "corner"
        if x1 == 0:
            return "left"
        if x2 == 0:
            return "bottom"
        return "interior"
    if x1 == geom.R1 % geom.N1 and x2 < geom.R2:
        return "right-neighbor"
    if x2 == geom.R2 % geom.N2 and x1 < geom.R1:
        return "top-neighbor"
    return "outside"


def effective_star(x1: int, x2: int, geom: LatticeGeometry) -> list[int]:
    """Star links of site x that lie in the block."""
    A = set(link_partition(geom))
    return [k for k in star_links(x1, x2, geom.N1, geom.N2) if k in A]


def reduced_violation(rho_A, A_links, links) -> float:
    """``max |Theta rho Theta - rho|`` for ``Theta`` the sigma^z product over ``links`` (trace-normalized rho)."""
    rho = np.asarray(rho_A) / np.trace(rho_A)
    pos = {k: j for j, k in enumerate(A_links)}
    nA = len(A_links)
    idx = np.arange(1 << nA, dtype=np.int64)
    par = np.zeros_like(idx)
    for k in links:
        par ^= (idx >> (nA - 1 - pos[k])) & 1
    s = 1 - 2 * par
    return float(np.abs(np.outer(s, s) * rho - rho).max())


def gauss_check_reduced(rho_A, geom: LatticeGeometry, by_case: bool = False):
    """Effective Gauss-law check on ``rho_A`` built with ``link_partition(geom)``.

    Every site whose star touches the block contributes the product of
    ``sigma^z`` over its in-block star links.  Returns the maximum violation,
    or with ``by_case`` a dict mapping each boundary case to its maximum.
    """
    A_links = link_partition(geom)
    cases: dict[str, float] = {}
    for x2 in range(geom.N2):
        for x1 in range(geom.N1):
            links = effective_star(x1, x2, geom)
            if not links:
                continue
            v = reduced_violation(rho_A, A_links, links)
            c = classify_site(x1, x2, geom)
            cases[c] = max(cases.get(c, 0.0), v)
    return cases if by_case else max(cases.values())
