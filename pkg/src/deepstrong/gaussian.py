"""Single-mode Gaussian states: Wigner grids and Fock statistics.

Convention: X = (a + a^+)/sqrt2, P = (a - a^+)/(i sqrt2); the vacuum has
V = I/2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

__all__ = [
    "UnphysicalCovarianceError",
    "GaussianModeState",
    "FockDistribution",
    "wigner_grid",
    "fock_probabilities",
]

CONVENTION = "X=(a+a^dag)/sqrt(2), P=(a-a^dag)/(i sqrt(2)), vacuum variance 1/2"


class UnphysicalCovarianceError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianModeState:
    var_x: float
    var_p: float
    cov_xp: float = 0.0

    def __post_init__(self):
        if not (self.var_x > 0 and self.var_p > 0):
            raise UnphysicalCovarianceError("variances must be positive")
        if self.det < 0.25 - 1e-9:
            raise UnphysicalCovarianceError(
                f"det V = {self.det:.6g} violates the uncertainty bound 1/4")

    @classmethod
    def from_covariance(cls, cov) -> "GaussianModeState":
        return cls(cov.var_x, cov.var_p, cov.cov_xp)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.var_x, self.cov_xp], [self.cov_xp, self.var_p]])

    @property
    def det(self) -> float:
        return self.var_x * self.var_p - self.cov_xp**2

    @property
    def purity(self) -> float:
        return min(1.0, 1.0 / (2.0 * math.sqrt(self.det)))

    @property
    def mean_photon_number(self) -> float:
        return (self.var_x + self.var_p - 1) / 2

    def squeezing(self) -> tuple[float, float, float]:
        """Thermal occupation, squeeze parameter r and squeezed-quadrature angle."""
        nu = math.sqrt(max(self.det, 0.25))
        nbar = max(nu - 0.5, 0.0)
        vals, vecs = np.linalg.eigh(self.matrix / nu)
        r = 0.25 * math.log(max(vals[1], 1.0) / min(max(vals[0], 1e-300), 1.0))
        theta = math.atan2(vecs[1, 0], vecs[0, 0])
        return nbar, r, theta


def wigner_grid(state: GaussianModeState, x_range=(-5.0, 5.0), p_range=(-5.0, 5.0),
                resolution: int | tuple[int, int] = 101):
    """Wigner function on an inclusive grid.

    Returns ``(x, p, W)`` with ``W[i, k] = W(x[i], p[k])``.
    """
    nx, npts = (resolution, resolution) if isinstance(resolution, int) else resolution
    x = np.linspace(x_range[0], x_range[1], nx)
    p = np.linspace(p_range[0], p_range[1], npts)
    X, P = np.meshgrid(x, p, indexing="ij")
    inv = np.linalg.inv(state.matrix)
    quad = inv[0, 0] * X**2 + 2 * inv[0, 1] * X * P + inv[1, 1] * P**2
    W = np.exp(-0.5 * quad) / (2 * math.pi * math.sqrt(state.det))
    return x, p, W


@dataclass(frozen=True)
class FockDistribution:
    probabilities: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.probabilities) - 1

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.probabilities)), self.probabilities))

    @property
    def total(self) -> float:
        return float(np.sum(self.probabilities))


def _squeezed_thermal_diagonal(nbar: float, r: float, theta: float, dim: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    zeta = r * np.exp(2j * theta)
    gen = 0.5 * (np.conj(zeta) * a @ a - zeta * a.T @ a.T)
    U = expm(gen)
    n = np.arange(dim)
    if nbar > 0:
        th = (nbar / (nbar + 1)) ** n / (nbar + 1)
    else:
        th = (n == 0).astype(float)
    rho_diag = np.einsum("ik,k,ik->i", U, th, U.conj()).real
    return rho_diag


def fock_probabilities(state: GaussianModeState, n_max: int | None = None,
                       tail_tol: float = 1e-6) -> FockDistribution:
    """Photon-number distribution of a squeezed thermal state.

    V is factored as S V_th S^T; the truncated squeeze operator is obtained
    by exponentiating its generator in a working basis that grows until the
    requested probabilities stop changing and the tail beyond the working
    basis carries less than ``tail_tol``.
    """
    nbar, r, theta = state.squeezing()
    if n_max is None:
        n_max = max(8 * int(math.ceil(state.mean_photon_number)) + 20, 2)
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    dim = 2 * n_max + 40
    prev = None
    while True:
        diag = _squeezed_thermal_diagonal(nbar, r, theta, dim)
        # the last rows of the working basis are distorted by truncation
        head = diag[: n_max + 1]
        body = diag[: dim // 2]
        tail = 1.0 - body.sum()
        if prev is not None and np.max(abs(head - prev)) < 1e-12 and tail < tail_tol:
            break
        if dim > 4096:
            break
        prev = head
        dim *= 2
    probs = np.clip(head, 0.0, None)
    if probs.sum() < 1 - 1e-4:
        warnings.warn(f"Fock cutoff {n_max} keeps only {probs.sum():.6f} of the probability",
                      RuntimeWarning, stacklevel=2)
    return FockDistribution(probs)
