"""Dense linear-algebra helpers: log-scaled matrix powers and leading eigenvalues."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ConvergenceError(RuntimeError):
    def __init__(self, msg, residual):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


@dataclass
class ScaledMatrix:
    """Matrix stored as ``exp(log_scale) * mantissa`` with ``max|mantissa| = 1``."""

    mantissa: np.ndarray
    log_scale: float

    @classmethod
    def wrap(cls, M) -> "ScaledMatrix":
        M = np.asarray(M)
        s = np.abs(M).max()
        if s == 0 or not np.isfinite(s):
            return cls(M.copy(), 0.0)
        return cls(M / s, math.log(s))

    def __matmul__(self, other: "ScaledMatrix") -> "ScaledMatrix":
        out = ScaledMatrix.wrap(self.mantissa @ other.mantissa)
        out.log_scale += self.log_scale + other.log_scale
        return out

    def log_trace(self) -> tuple[float, float]:
        """Return ``(sign, log|tr|)``; sign 0 means the trace vanishes."""
        t = np.trace(self.mantissa)
        if np.iscomplexobj(t):
            t = t.real
        if t == 0:
            return 0.0, -math.inf
        return math.copysign(1.0, t), math.log(abs(t)) + self.log_scale


def scaled_power(M, k: int) -> ScaledMatrix:
    """``M**k`` by repeated squaring, renormalizing after every product."""
    if k < 0:
        raise ValueError("negative powers are not supported")
    M = np.asarray(M)
    result = ScaledMatrix(np.eye(M.shape[0], dtype=M.dtype), 0.0)
    base = ScaledMatrix.wrap(M)
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return result


def chain(*factors: ScaledMatrix) -> ScaledMatrix:
    out = factors[0]
    for f in factors[1:]:
        out = out @ f
    return out


def leading_eigenvalues(M, k: int = 8, rel_tol: float = 1e-13, max_iter: int = 5000, seed: int = 0):
    """Top-``k`` eigenvalues of a (possibly non-symmetric) matrix by subspace iteration.

    Repeated multiplication with Gram-Schmidt (QR) re-orthogonalization; the
    Ritz values of the projected matrix are returned sorted by magnitude.
    Converged when successive Ritz values change by less than ``rel_tol``
    relative to the dominant one.
    """
    M = np.asarray(M)
    dim = M.shape[0]
    k = min(k, dim)
    block = min(dim, k + 4)  # guard vectors keep the k-th Ritz value from stalling
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((dim, block)))
    prev = None
    for _ in range(max_iter):
        Z = M @ Q
        H = Q.T @ Z
        ritz = np.linalg.eigvals(H)
        ritz = ritz[np.lexsort((-ritz.imag, -np.abs(ritz)))][:k]
        Q, _ = np.linalg.qr(Z)
        if prev is not None:
            scale = max(abs(ritz[0]), np.finfo(float).tiny)
            if np.max(np.abs(ritz - prev)) < rel_tol * scale:
                return ritz
        prev = ritz
    resid = np.linalg.norm(M @ Q - Q @ (Q.T @ M @ Q))
    raise ConvergenceError("subspace iteration did not converge", resid)
