"""Multi-mode Hopfield Hamiltonian and its Bogoliubov normal modes.

With hbar = 1 the Hamiltonian is

    H = sum_j w_j a_j^+ a_j + sum_a w_a b_a^+ b_a
        + sum_{j,a} Om_{ja} (a_j^+ + a_j)(b_a^+ + b_a)
        + sum_j D_j (a_j^+ + a_j)^2,         D_j = sum_a Om_{ja}^2 / w_a

The diagonal diamagnetic form only guarantees a stable spectrum for a
single cavity mode. With ``cross_diamagnetic=True`` the full A^2 term
sum_{jj'} D_{jj'} (a_j^+ + a_j)(a_j'^+ + a_j'), D_{jj'} = sum_a Om_{ja} Om_{j'a} / w_a,
is used instead, which is positive for any number of cavity modes.

Writing it as v^+ [[A, B], [B, A]] v / 2 for v = (a, b, a^+, b^+), the
Heisenberg equation reads i dv/dt = M v with M = [[A, B], [-B, -A]].
A polariton p = w.a + x.b + y.a^+ + z.b^+ with [p, H] = nu p has the
coefficient row c = sigma_z u, where u is the right eigenvector of M for
eigenvalue nu and sigma_z = diag(1, -1).

Frequencies are THz (linear) at the interface; the dynamical matrix is in
rad/ps.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .coupling import CouplingMatrix
from .plasmons import PlasmonLadder

__all__ = [
    "SingularDiamagneticError",
    "InstabilityError",
    "ModeSystem",
    "HopfieldSolution",
    "Classification",
    "Covariance",
    "GroundStateReport",
    "build_dynamical_matrix",
    "bogoliubov_diagonalize",
    "solve",
    "classify_polaritons",
    "ground_state_populations",
    "quadrature_covariance",
    "ground_state_report",
    "single_pair",
    "single_mode_photon_number",
    "equivalent_eta",
]

TWO_PI = 2 * math.pi
DARK_WEIGHT_TOL = 1e-8


class SingularDiamagneticError(ValueError):
    """A matter mode at zero frequency carries nonzero coupling."""


class InstabilityError(ArithmeticError):
    """The quadratic Hamiltonian has complex or negative-norm normal modes."""


@dataclass(frozen=True)
class ModeSystem:
    """Bare cavity and matter modes plus their Rabi couplings (all THz)."""

    cavity_freqs: np.ndarray
    matter_freqs: np.ndarray
    coupling: np.ndarray
    cavity_labels: tuple[int, ...] = ()
    matter_labels: tuple[int, ...] = ()
    cross_diamagnetic: bool = False

    def __post_init__(self):
        cf = np.atleast_1d(np.asarray(self.cavity_freqs, dtype=float))
        mf = np.atleast_1d(np.asarray(self.matter_freqs, dtype=float))
        g = np.asarray(self.coupling, dtype=float).reshape(len(cf), len(mf))
        cl = tuple(self.cavity_labels) or tuple(range(1, len(cf) + 1))
        ml = tuple(self.matter_labels) or tuple(range(len(mf)))
        if len(cl) != len(cf) or len(ml) != len(mf):
            raise ValueError("label count does not match mode count")
        if len(set(cl)) != len(cl) or len(set(ml)) != len(ml):
            raise ValueError("mode labels must be unique")
        if np.any(cf <= 0):
            raise ValueError("cavity frequencies must be > 0")
        if np.any(mf < 0):
            raise ValueError("matter frequencies must be >= 0")
        if not np.all(np.isfinite(g)):
            raise ValueError("couplings must be finite")
        coupled = np.any(g != 0, axis=0)
        bad = coupled & (mf <= 0)
        if np.any(bad):
            labels = [ml[i] for i in np.flatnonzero(bad)]
            raise SingularDiamagneticError(
                f"matter modes {labels} have zero frequency but nonzero coupling")
        for name, val in (("cavity_freqs", cf), ("matter_freqs", mf), ("coupling", g)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "cavity_labels", cl)
        object.__setattr__(self, "matter_labels", ml)

    @property
    def n_cavity(self) -> int:
        return len(self.cavity_freqs)

    @property
    def n_matter(self) -> int:
        return len(self.matter_freqs)

    @property
    def n_modes(self) -> int:
        return self.n_cavity + self.n_matter

    @property
    def diamagnetic(self) -> np.ndarray:
        """D_j = sum_a Om_{ja}^2 / nu_a in THz."""
        mf = self.matter_freqs
        safe = np.where(mf > 0, mf, 1.0)
        return np.sum(np.where(self.coupling != 0, self.coupling**2 / safe, 0.0), axis=1)

    @property
    def diamagnetic_matrix(self) -> np.ndarray:
        """J x J diamagnetic coefficients (THz); diagonal unless ``cross_diamagnetic``."""
        if not self.cross_diamagnetic:
            return np.diag(self.diamagnetic)
        mf = self.matter_freqs
        inv = np.where(mf > 0, 1.0 / np.where(mf > 0, mf, 1.0), 0.0)
        return (self.coupling * inv) @ self.coupling.T

    def with_coupling(self, coupling) -> "ModeSystem":
        return ModeSystem(self.cavity_freqs, self.matter_freqs, coupling,
                          self.cavity_labels, self.matter_labels, self.cross_diamagnetic)

    @classmethod
    def from_ladder(cls, cavity_freqs: Sequence[float], ladder: PlasmonLadder,
                    coupling: CouplingMatrix, cavity_labels: Sequence[int] | None = None,
                    cross_diamagnetic: bool = False) -> "ModeSystem":
        """Assemble the system for the given cavity modes over every ladder entry.

        Cavity labels missing from ``coupling`` get zero coupling rows.
        """
        labels = tuple(cavity_labels) if cavity_labels is not None else coupling.cavity_modes
        alphas = tuple(int(a) for a in ladder.alphas)
        g = np.zeros((len(labels), len(alphas)))
        apos = {a: c for c, a in enumerate(coupling.alphas)}
        for r, j in enumerate(labels):
            if j not in coupling.cavity_modes:
                continue
            row = coupling.row(j)
            for c, a in enumerate(alphas):
                if a in apos:
                    g[r, c] = row[apos[a]]
        return cls(np.asarray(cavity_freqs, dtype=float), ladder.nu_mp, g, labels, alphas,
                   cross_diamagnetic)


def build_dynamical_matrix(system: ModeSystem) -> np.ndarray:
    """Heisenberg coefficient matrix M (rad/ps) with i dv/dt = M v,
    v = (a_1..a_J, b_1..b_M, a_1^+..a_J^+, b_1^+..b_M^+)."""
    J, n = system.n_cavity, system.n_modes
    g = TWO_PI * system.coupling
    dia = TWO_PI * system.diamagnetic_matrix
    A = np.zeros((n, n))
    A[:J, :J] = np.diag(TWO_PI * system.cavity_freqs) + 2 * dia
    A[np.arange(J, n), np.arange(J, n)] = TWO_PI * system.matter_freqs
    A[:J, J:] = g
    A[J:, :J] = g.T
    B = np.zeros((n, n))
    B[:J, :J] = 2 * dia
    B[:J, J:] = g
    B[J:, :J] = g.T
    return np.block([[A, B], [-B, -A]])


@dataclass(frozen=True)
class HopfieldSolution:
    """Normal modes sorted by frequency. Row ``k`` of w, x, y, z holds the
    Hopfield coefficients of polariton k (annihilation operator)."""

    frequencies: np.ndarray
    w: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    system: ModeSystem | None = None

    @property
    def n_cavity(self) -> int:
        return self.w.shape[1]

    @property
    def symplectic_norms(self) -> np.ndarray:
        return (np.sum(abs(self.w) ** 2, 1) + np.sum(abs(self.x) ** 2, 1)
                - np.sum(abs(self.y) ** 2, 1) - np.sum(abs(self.z) ** 2, 1))

    @property
    def photonic_weight(self) -> np.ndarray:
        return np.sum(abs(self.w) ** 2 + abs(self.y) ** 2, axis=1)

    def transform(self) -> np.ndarray:
        """Full Bogoliubov matrix T with (p, p^+) = T (a, b, a^+, b^+)."""
        top = np.hstack([self.w, self.x, self.y, self.z])
        bottom = np.hstack([self.y.conj(), self.z.conj(), self.w.conj(), self.x.conj()])
        return np.vstack([top, bottom])

    def inverse_transform(self) -> np.ndarray:
        """T^-1 = sigma_z T^+ sigma_z, expressing bare operators in polariton ones."""
        n = len(self.frequencies)
        s = np.concatenate([np.ones(n), -np.ones(n)])
        return s[:, None] * self.transform().conj().T * s[None, :]


def _symplectic_gram_schmidt(vecs: np.ndarray, sig: np.ndarray) -> np.ndarray:
    out = []
    for v in vecs.T:
        v = v.copy()
        for u in out:
            v = v - u * (u.conj() @ (sig * v))
        out.append(v / math.sqrt(max((v.conj() @ (sig * v)).real, 1e-300)))
    return np.array(out).T


def bogoliubov_diagonalize(matrix: np.ndarray, n_cavity: int, system: ModeSystem | None = None,
                           imag_tol: float = 1e-8, degeneracy_tol: float = 1e-10
                           ) -> HopfieldSolution:
    """Diagonalise the dynamical matrix and keep the positive-norm modes.

    Each mode is scaled to symplectic norm +1 and its phase fixed so that
    the largest-magnitude coefficient is real and positive. Eigenvectors
    inside (near-)degenerate clusters are symplectically orthogonalised.

    Raises
    ------
    InstabilityError
        If an eigenvalue has an imaginary part above ``imag_tol`` (THz) or a
        positive-norm mode has non-positive frequency.
    """
    dim = matrix.shape[0]
    n = dim // 2
    ev, vecs = np.linalg.eig(matrix)
    nu = ev / TWO_PI
    bad = np.flatnonzero(abs(nu.imag) > imag_tol)
    if bad.size:
        worst = bad[np.argmax(abs(nu.imag[bad]))]
        raise InstabilityError(
            f"{bad.size} complex eigenfrequencies, worst {nu[worst]:.6g} THz")
    nu = nu.real
    sig = np.concatenate([np.ones(n), -np.ones(n)])
    norms = np.einsum("ik,i,ik->k", vecs.conj(), sig, vecs).real

    order = np.argsort(nu)
    nu, vecs, norms = nu[order], vecs[:, order], norms[order]
    keep = []
    i = 0
    while i < dim:
        k = i + 1
        while k < dim and nu[k] - nu[k - 1] < max(degeneracy_tol, 1e-12 * abs(nu[k])):
            k += 1
        block = vecs[:, i:k]
        if k - i > 1:
            # the symplectic form restricted to a degenerate eigenspace is
            # Hermitian; its eigenvectors split it into +/- norm sectors
            G = block.conj().T @ (sig[:, None] * block)
            gval, gvec = np.linalg.eigh(G)
            block = block @ gvec
            pos = gval > 0
            if np.any(pos):
                sub = _symplectic_gram_schmidt(block[:, pos], sig)
                keep.extend((nu[i], sub[:, c]) for c in range(sub.shape[1]))
        elif norms[i] > 0:
            keep.append((nu[i], block[:, 0] / math.sqrt(norms[i])))
        i = k

    if len(keep) != n:
        raise InstabilityError(f"found {len(keep)} positive-norm modes, expected {n}")
    freqs = np.array([f for f, _ in keep])
    # an uncoupled zero-frequency matter mode is allowed and appears here as +/-0
    if np.any(freqs < -imag_tol):
        raise InstabilityError(f"positive-norm mode with frequency {freqs.min():.6g} THz")
    freqs = np.maximum(freqs, 0.0)
    U = np.array([u for _, u in keep])
    C = U * sig[None, :]
    idx = np.argmax(abs(C), axis=1)
    phase = C[np.arange(n), idx]
    C = C * (abs(phase) / phase)[:, None]
    J = n_cavity
    return HopfieldSolution(
        frequencies=freqs,
        w=C[:, :J], x=C[:, J:n], y=C[:, n:n + J], z=C[:, n + J:],
        system=system,
    )


def solve(system: ModeSystem) -> HopfieldSolution:
    return bogoliubov_diagonalize(build_dynamical_matrix(system), system.n_cavity, system)


@dataclass(frozen=True)
class Classification:
    """Polariton labels. ``labels[k]`` is ("dark" | "LP" | "UP", j, beta)
    for mode k; dark modes carry j = None and beta < 0."""

    dark: tuple[int, ...]
    lp: dict[int, int]
    up: dict[int, tuple[int, ...]]
    labels: tuple[tuple[str, int | None, int], ...] = field(default=())

    def counts(self, j: int) -> tuple[int, int, int]:
        """(dark, LP, UP) counts as seen from cavity mode ``j``."""
        return len(self.dark), int(j in self.lp), len(self.up.get(j, ()))


def classify_polaritons(solution: HopfieldSolution,
                        cavity_labels: Sequence[int] | None = None) -> Classification:
    if cavity_labels is None:
        cavity_labels = (solution.system.cavity_labels if solution.system is not None
                         else tuple(range(1, solution.n_cavity + 1)))
    phot = abs(solution.w) ** 2 + abs(solution.y) ** 2
    total = phot.sum(axis=1)
    n = len(solution.frequencies)
    dark = [k for k in range(n) if total[k] < DARK_WEIGHT_TOL]
    owner: dict[int, list[int]] = {j: [] for j in cavity_labels}
    for k in range(n):
        if total[k] >= DARK_WEIGHT_TOL:
            owner[cavity_labels[int(np.argmax(phot[k]))]].append(k)
    labels: list = [None] * n
    for b, k in enumerate(dark):
        labels[k] = ("dark", None, -(b + 1))
    lp, up = {}, {}
    for j, ks in owner.items():
        ks.sort(key=lambda k: solution.frequencies[k])
        if not ks:
            continue
        lp[j] = ks[0]
        labels[ks[0]] = ("LP", j, 0)
        up[j] = tuple(ks[1:])
        for b, k in enumerate(ks[1:], start=1):
            labels[k] = ("UP", j, b)
    return Classification(tuple(dark), lp, up, tuple(labels))


def ground_state_populations(solution: HopfieldSolution) -> tuple[np.ndarray, np.ndarray]:
    """Virtual populations <a_j^+ a_j> and <b_a^+ b_a> of the polariton vacuum."""
    return np.sum(abs(solution.y) ** 2, axis=0), np.sum(abs(solution.z) ** 2, axis=0)


@dataclass(frozen=True)
class Covariance:
    """Single-mode quadrature moments; X = (a + a^+)/sqrt2, vacuum variance 1/2."""

    var_x: float
    var_p: float
    cov_xp: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.var_x, self.cov_xp], [self.cov_xp, self.var_p]])

    @property
    def photon_number(self) -> float:
        return (self.var_x + self.var_p - 1) / 2

    @property
    def min_variance(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def quadrature_covariance(solution: HopfieldSolution, j: int = 0) -> Covariance:
    """Covariance of cavity mode with column index ``j`` in the polariton vacuum.

    a_j = sum_k (w_kj^* p_k - y_kj p_k^+), hence <a a> = -sum_k w_kj^* y_kj
    and <a^+ a> = sum_k |y_kj|^2.
    """
    w, y = solution.w[:, j], solution.y[:, j]
    aa = -np.sum(w.conj() * y)
    n = np.sum(abs(y) ** 2)
    return Covariance(
        var_x=float(0.5 + n + aa.real),
        var_p=float(0.5 + n - aa.real),
        cov_xp=float(aa.imag),
    )


def single_pair(eta: float, nu_cavity: float = 1.0, nu_matter: float | None = None,
                coupling: float | None = None) -> ModeSystem:
    """One cavity mode and one matter mode; the coupling defaults to eta * nu_cavity."""
    nu_matter = nu_cavity if nu_matter is None else nu_matter
    g = eta * nu_cavity if coupling is None else coupling
    return ModeSystem(np.array([nu_cavity]), np.array([nu_matter]), np.array([[g]]))


def single_mode_photon_number(eta: float) -> float:
    """Vacuum photon number of a resonant single pair with coupling ratio ``eta``."""
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return _single_mode_n(float(eta))


@lru_cache(maxsize=4096)
def _single_mode_n(eta: float) -> float:
    return float(ground_state_populations(solve(single_pair(eta)))[0][0])


def equivalent_eta(n_photons: float, rtol: float = 1e-6) -> float:
    """Invert :func:`single_mode_photon_number` by a bracketed root search."""
    if n_photons < 0:
        raise ValueError("photon number must be >= 0")
    if n_photons == 0:
        return 0.0
    hi = 1.0
    while single_mode_photon_number(hi) < n_photons:
        hi *= 2.0
        if hi > 1e6:
            raise ArithmeticError("failed to bracket the equivalent coupling")
    lo = hi / 2 if hi > 1.0 else 0.0
    return brentq(lambda e: single_mode_photon_number(e) - n_photons, lo, hi,
                  xtol=1e-14, rtol=rtol * 1e-2)


@dataclass(frozen=True)
class GroundStateReport:
    cavity_labels: tuple[int, ...]
    matter_labels: tuple[int, ...]
    N: np.ndarray
    M: np.ndarray
    eta: np.ndarray
    covariances: tuple[Covariance, ...]

    @property
    def N_total(self) -> float:
        return float(np.sum(self.N))

    @property
    def M_total(self) -> float:
        return float(np.sum(self.M))

    @property
    def eta_total(self) -> float:
        return equivalent_eta(self.N_total)

    def to_dict(self) -> dict:
        return {
            "convention": "X=(a+a^dag)/sqrt(2), P=(a-a^dag)/(i sqrt(2)), vacuum variance 1/2",
            "N_total": self.N_total,
            "eta_total": self.eta_total,
            "M_total": self.M_total,
            "cavity_modes": [
                {"j": j, "N": float(n), "eta": float(e),
                 "var_X": c.var_x, "var_P": c.var_p, "cov_XP": c.cov_xp}
                for j, n, e, c in zip(self.cavity_labels, self.N, self.eta, self.covariances)
            ],
            "matter_modes": [{"alpha": a, "M": float(m)}
                             for a, m in zip(self.matter_labels, self.M)],
        }


def ground_state_report(solution: HopfieldSolution) -> GroundStateReport:
    N, M = ground_state_populations(solution)
    sys_ = solution.system
    cl = sys_.cavity_labels if sys_ else tuple(range(1, len(N) + 1))
    ml = sys_.matter_labels if sys_ else tuple(range(len(M)))
    return GroundStateReport(
        cavity_labels=cl, matter_labels=ml, N=N, M=M,
        eta=np.array([equivalent_eta(float(n)) for n in N]),
        covariances=tuple(quadrature_covariance(solution, j) for j in range(len(N))),
    )
