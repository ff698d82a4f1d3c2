"""Acceptance checks shared by the test suite and the ``verify`` command.

Each ``check_*`` function runs one criterion with fixed seeds and returns a
:class:`CheckResult`.  Hooks (``boundary``, ``rho_prime``) exist only so
negative controls can feed deliberately wrong inputs through the same code.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import core, oracle, rows
from .entropy import (
    LatticeGeometry,
    contraction_consistency,
    ghz_mps_tensor,
    kappa_fit_values,
    log_purity_from_tensor,
    mps_purity_demo,
    purity_finite,
    renyi_finite,
    renyi_thermodynamic,
)

REFERENCE_POINT = (1.0, 0.1, 0.0, 0.95)
GHZ_POINT = (1.0, 0.0, 0.0, 0.95)
FIG_GEOMETRY = LatticeGeometry(4, 100, 2, 20)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: value={self.value:.3e} tol={self.tolerance:.1e} ({self.seconds:.1f}s) {self.detail}"


def random_params(seed: int, count: int, low: float = 0.0, high: float = 2.0):
    rng = np.random.default_rng(seed)
    return [tuple(rng.uniform(low, high, 4)) for _ in range(count)]


def grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("grid step must be positive")
    k = int(np.floor((hi - lo) / step + 1e-9))
    return np.round(lo + step * np.arange(k + 1), 10)


def second_difference(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return y[:-2] - 2 * y[1:-1] + y[2:]


def kink_ratios(deltas, S, at: float = 1.0) -> tuple[float, float]:
    """``|d2(at)| / median off-kink |d2|`` and ``max |d2| / median |d2|``."""
    d2 = np.abs(second_difference(S))
    inner = np.asarray(deltas)[1:-1]
    i = int(np.argmin(np.abs(inner - at)))
    off = np.delete(d2, i)
    return float(d2[i] / np.median(off)), float(d2.max() / np.median(d2))


def _timed(fn):
    def wrapper(*a, **kw):
        t = time.perf_counter()
        res = fn(*a, **kw)
        res.seconds = time.perf_counter() - t
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def check_r_independence(rho_prime=None) -> CheckResult:
    """Dominant eigenvalue of the boundary row is the same for R1 = 1, 2, 3."""
    Rs = [1, 2, 3]
    if rho_prime is None:
        spec = core.spectral_decompose(core.tau0_explicit(REFERENCE_POINT))
        rho_prime = [rows.spectrum(rows.assemble_row(spec, 2, 4, insertions=R)).rho1.real for R in Rs]
    rho_prime = np.asarray(rho_prime, dtype=float)
    spread = float((rho_prime.max() - rho_prime.min()) / rho_prime.max())
    _, kappa, _ = kappa_fit_values(Rs, rho_prime)
    ok = spread <= 1e-10 and abs(kappa) <= 1e-8
    return CheckResult("1 R-independence", ok, max(spread, abs(kappa)), 1e-8,
                       f"spread={spread:.2e} kappa={kappa:.2e}", extra={"kappa": kappa})


@_timed
def check_area_law() -> CheckResult:
    """Affine S2(R2) and agreement with the closed form on the 4 x 100 lattice."""
    R2s = np.arange(5, 51)
    worst_affine = worst_diff = 0.0
    for R1 in (1, 2, 3):
        S = np.array([renyi_finite(REFERENCE_POINT, LatticeGeometry(4, 100, R1, int(R2))).value for R2 in R2s])
        coef = np.polyfit(R2s, S, 1)
        worst_affine = max(worst_affine, float(np.abs(S - np.polyval(coef, R2s)).max()))
        T = np.array([renyi_thermodynamic(REFERENCE_POINT, R1, int(R2), 4).value for R2 in R2s])
        worst_diff = max(worst_diff, float(np.abs(S - T).max()))
    ok = worst_affine <= 1e-6 and worst_diff <= 1e-6
    return CheckResult("2 area law", ok, max(worst_affine, worst_diff), 1e-6,
                       f"affine_dev={worst_affine:.2e} finite_vs_thermo={worst_diff:.2e}")


ORACLE_LATTICES = [(2, 2), (3, 2), (3, 3)]
ORACLE_BLOCKS = [(1, 1), (1, 2), (2, 2)]


@_timed
def check_oracle_equivalence(boundary=None, corner: bool = True, draws: int = 10, seed: int = 7) -> CheckResult:
    """Transfer purities for n = 2, 3 against exact enumeration."""
    params = [REFERENCE_POINT] + random_params(seed, draws)
    worst = 0.0
    count = 0
    for N1, N2 in ORACLE_LATTICES:
        for p in params:
            psi = oracle.enumerate_state(p, N1, N2)
            A = core.build_site_tensor(p)
            for R1, R2 in ORACLE_BLOCKS:
                if R1 >= N1 or R2 >= N2:
                    continue
                g = LatticeGeometry(N1, N2, R1, R2)
                rho = oracle.reduced_density(psi, oracle.link_partition(g))
                for n in (2, 3):
                    exact = oracle.purity_exact(rho, n)
                    bnd = None if boundary is None else boundary(n)
                    try:
                        val = np.exp(log_purity_from_tensor(A, g, n, boundary=bnd, corner=corner))
                    except ArithmeticError:
                        val = np.nan
                    rel = abs(val - exact) / exact if np.isfinite(val) else np.inf
                    worst = max(worst, rel)
                    count += 1
    return CheckResult("3 oracle equivalence", worst <= 1e-10, worst, 1e-10, f"{count} comparisons")


@_timed
def check_ghz() -> CheckResult:
    q = 0.9025**4
    target = (1 + q * q) / (1 + q) ** 2
    g = LatticeGeometry(2, 2, 1, 1)
    p_transfer = purity_finite(GHZ_POINT, g, 2)
    psi = oracle.enumerate_state(GHZ_POINT, 2, 2)
    p_oracle = oracle.purity_exact(oracle.reduced_density(psi, oracle.link_partition(g)), 2)
    err = max(abs(p_transfer - target), abs(p_oracle - target))
    return CheckResult("4 GHZ purity", err <= 1e-12, err, 1e-12,
                       f"target={target:.12f} transfer={p_transfer:.12f} oracle={p_oracle:.12f}")


REQUIRED_CASES = ("left", "corner", "bottom", "right-neighbor", "top-neighbor")


def negative_control_links(geom: LatticeGeometry) -> list[int]:
    """A wrong effective operator: the corner star without its up link."""
    return [oracle.link_index(0, 0, 1, geom.N1, geom.N2)]


@_timed
def check_gauss(params=(0.7, 1.3, 0.5, 1.1)) -> CheckResult:
    full = 0.0
    for p in [REFERENCE_POINT, GHZ_POINT] + random_params(11, 3):
        full = max(full, oracle.gauss_check_full(oracle.enumerate_state(p, 3, 2)))
    g = LatticeGeometry(4, 3, 2, 2)
    psi = oracle.enumerate_state(params, 4, 3)
    full = max(full, oracle.gauss_check_full(psi))
    rho = oracle.reduced_density(psi, oracle.link_partition(g))
    cases = oracle.gauss_check_reduced(rho, g, by_case=True)
    missing = [c for c in REQUIRED_CASES if c not in cases]
    reduced = max(cases.values())
    neg = oracle.reduced_violation(rho, oracle.link_partition(g), negative_control_links(g))
    ok = full == 0.0 and reduced <= 1e-12 and not missing and neg >= 1e-3
    return CheckResult("5 Gauss laws", ok, reduced, 1e-12,
                       f"full={full} cases={ {k: f'{v:.1e}' for k, v in cases.items()} } negative={neg:.3e}",
                       extra={"cases": cases, "negative": neg, "full": full})


@_timed
def check_contraction_order(draws: int = 20, seed: int = 3) -> CheckResult:
    g = LatticeGeometry(3, 3, 1, 2)
    worst = max(contraction_consistency(p, g)[0] for p in random_params(seed, draws))
    return CheckResult("6 contraction order", worst <= 1e-10, worst, 1e-10, f"{draws} draws on 3x3, block 1x2")


FIG6_DELTAS = grid(0.8, 1.2, 0.005)


def fig6_curve(gamma: float, geom: LatticeGeometry = FIG_GEOMETRY, deltas=FIG6_DELTAS) -> np.ndarray:
    return np.array([renyi_finite((1.0, 0.1, gamma, float(d)), geom).value for d in deltas])


@_timed
def check_kink() -> CheckResult:
    r0, _ = kink_ratios(FIG6_DELTAS, fig6_curve(0.0))
    _, r1 = kink_ratios(FIG6_DELTAS, fig6_curve(1.0))
    ok = r0 >= 10 and r1 < 3
    return CheckResult("7 confinement kink", ok, r1, 3.0,
                       f"gamma=0 kink ratio={r0:.3e} (need >=10), gamma=1 max/median={r1:.3e} (need <3)",
                       extra={"ratio_gamma0": r0, "ratio_gamma1": r1})


FIG7_GAMMAS = grid(0.0, 2.0, 0.1)
FIG7_DELTAS = grid(0.0, 2.0, 0.1)


def fig7_surface(beta: float, geom: LatticeGeometry = FIG_GEOMETRY, gammas=FIG7_GAMMAS, deltas=FIG7_DELTAS):
    """``S[i_delta, i_gamma]`` at alpha = 1."""
    return np.array([[renyi_finite((1.0, beta, float(gm), float(d)), geom).value for gm in gammas]
                     for d in deltas])


@_timed
def check_monotonic_gamma() -> CheckResult:
    S = fig7_surface(1.0)
    rise = np.diff(S, axis=1)
    worst = float(rise.max())
    i, j = np.unravel_index(int(rise.argmax()), rise.shape)
    return CheckResult("8 monotonic in gamma", worst <= 1e-8, worst, 1e-8,
                       f"largest rise at delta={FIG7_DELTAS[i]:.2f}, gamma {FIG7_GAMMAS[j]:.2f}->{FIG7_GAMMAS[j + 1]:.2f}")


@_timed
def check_structural(draws: int = 100, seed: int = 5) -> CheckResult:
    worst = {"lambda4": 0.0, "lambda3": 0.0, "reconstruct": 0.0, "rho2": 0.0, "rho_prime": 0.0, "S_negative": 0.0}
    g = LatticeGeometry(2, 5, 1, 2)
    for p in random_params(seed, draws):
        tau = core.tau0_explicit(p)
        spec = core.spectral_decompose(tau)
        worst["lambda4"] = max(worst["lambda4"], abs(spec.eigenvalues[3]))
        worst["lambda3"] = max(worst["lambda3"], abs(spec.eigenvalues[2] - 2 * p[1] ** 2))
        worst["reconstruct"] = max(worst["reconstruct"], float(np.abs(spec.reconstruct() - tau).max()))
        r1 = rows.spectrum(rows.assemble_row(spec, 1, 3)).rho1.real
        r2 = rows.spectrum(rows.assemble_row(spec, 2, 3)).rho1.real
        worst["rho2"] = max(worst["rho2"], abs(r2 - r1 * r1) / (r1 * r1))
        rp = rows.spectrum(rows.assemble_row(spec, 2, 3, insertions=2)).rho1.real
        worst["rho_prime"] = max(worst["rho_prime"], (rp - r2) / r2)
        for n in (2, 3):
            worst["S_negative"] = max(worst["S_negative"], -renyi_finite(p, g, n).value)
    tol = {"lambda4": 0.0, "lambda3": 1e-12, "reconstruct": 1e-12, "rho2": 1e-12, "rho_prime": 1e-12,
           "S_negative": 1e-10}
    ok = all(worst[k] <= tol[k] for k in worst)
    return CheckResult("9 structural identities", ok, max(worst.values()), 1e-10,
                       " ".join(f"{k}={v:.1e}" for k, v in worst.items()), extra=worst)


@_timed
def check_mps(count: int = 20, seed: int = 17) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(count):
        chi = int(rng.integers(1, 5))
        N = int(rng.integers(4, 11))
        L = int(rng.integers(1, N))
        start = int(rng.integers(0, N - L + 1))
        a, b = mps_purity_demo(chi, N, (start, L), seed=seed * 1000 + k)
        worst = max(worst, abs(a - b))
    ga, gb = mps_purity_demo(2, 6, (0, 2), tensor=ghz_mps_tensor())
    worst = max(worst, abs(ga - 0.5), abs(gb - 0.5))
    return CheckResult("10 MPS demo", worst <= 1e-12, worst, 1e-12, f"{count} random MPS plus GHZ")


ALL_CHECKS = [
    check_r_independence,
    check_area_law,
    check_oracle_equivalence,
    check_ghz,
    check_gauss,
    check_contraction_order,
    check_kink,
    check_monotonic_gamma,
    check_structural,
    check_mps,
]


def run_all(checks=ALL_CHECKS) -> list[CheckResult]:
    return [c() for c in checks]
