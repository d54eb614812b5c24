"""Brute-force exact diagonalisation of small Hopfield instances.

The Hamiltonian is assembled literally in a truncated Fock basis, with the
diamagnetic term normal ordered so that the decoupled vacuum has energy 0.
It shares no code with the Bogoliubov route and serves as its reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

__all__ = [
    "OracleConvergenceError",
    "TruncatedSystem",
    "OracleState",
    "ground_state",
    "observables",
    "ground_state_escalating",
    "from_mode_system",
]

MAX_DIM = 10**6
DENSE_LIMIT = 1500


class OracleConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TruncatedSystem:
    """At most three bosonic modes.

    ``kinds[k]`` is "cavity" or "matter". ``coupling[(i, k)]`` couples a
    cavity mode i to a matter mode k through (a_i + a_i^+)(b_k + b_k^+);
    ``diamagnetic[i]`` multiplies (a_i + a_i^+)^2. Frequencies may be in
    any unit; all outputs use the same one.
    """

    frequencies: tuple[float, ...]
    kinds: tuple[str, ...]
    coupling: dict[tuple[int, int], float]
    diamagnetic: dict[int, float]
    n_max: int | tuple[int, ...] = 30

    def __post_init__(self):
        nm = len(self.frequencies)
        if not 1 <= nm <= 3:
            raise ValueError("the oracle handles 1 to 3 modes")
        if len(self.kinds) != nm:
            raise ValueError("kinds must match frequencies")
        if isinstance(self.n_max, int):
            object.__setattr__(self, "n_max", (self.n_max,) * nm)
        if len(self.n_max) != nm or min(self.n_max) < 1:
            raise ValueError("bad Fock cutoff")
        if self.dimension > MAX_DIM:
            raise ValueError(f"Hilbert dimension {self.dimension} exceeds {MAX_DIM}")

    @property
    def dimension(self) -> int:
        return math.prod(n + 1 for n in self.n_max)

    def with_cutoff(self, n_max) -> "TruncatedSystem":
        return TruncatedSystem(self.frequencies, self.kinds, self.coupling,
                               self.diamagnetic, n_max)

    def hamiltonian(self) -> sp.csr_matrix:
        ops = _mode_operators(self.n_max)
        dim = self.dimension
        H = sp.csr_matrix((dim, dim))
        for k, f in enumerate(self.frequencies):
            a = ops[k]
            H = H + f * (a.T @ a)
        quad = [a + a.T for a in ops]
        for (i, k), g in self.coupling.items():
            if g:
                H = H + g * (quad[i] @ quad[k])
        eye = sp.identity(dim, format="csr")
        for i, d in self.diamagnetic.items():
            if d:
                H = H + d * (quad[i] @ quad[i] - eye)
        # symmetrise so that roundoff never breaks hermiticity
        return ((H + H.T) * 0.5).tocsr()


def _annihilation(n: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n + 1, dtype=float)), 1, shape=(n + 1, n + 1),
                    format="csr")


def _mode_operators(n_max) -> list[sp.csr_matrix]:
    eyes = [sp.identity(n + 1, format="csr") for n in n_max]
    ops = []
    for k, n in enumerate(n_max):
        factors = [eyes[i] if i != k else _annihilation(n) for i in range(len(n_max))]
        ops.append(reduce(lambda x, y: sp.kron(x, y, format="csr"), factors))
    return ops


@dataclass(frozen=True)
class OracleState:
    energy: float
    vector: np.ndarray
    system: TruncatedSystem


def ground_state(system: TruncatedSystem, tol: float = 1e-12, maxiter: int = 20000
                 ) -> OracleState:
    """Lowest eigenpair (dense below ``DENSE_LIMIT`` states, Lanczos above)."""
    H = system.hamiltonian()
    if H.shape[0] <= DENSE_LIMIT:
        vals, vecs = np.linalg.eigh(H.toarray())
        e, v = vals[0], vecs[:, 0]
    else:
        try:
            vals, vecs = sla.eigsh(H, k=1, which="SA", tol=tol, maxiter=maxiter)
        except sla.ArpackNoConvergence as exc:
            raise OracleConvergenceError(f"Lanczos did not converge: {exc}") from None
        e, v = vals[0], vecs[:, 0]
        resid = np.linalg.norm(H @ v - e * v)
        if resid > 1e-6 * max(1.0, abs(e)):
            raise OracleConvergenceError(f"ground state residual norm {resid:.3e}")
    v = v / np.linalg.norm(v)
    # fix the global sign for reproducibility
    i = np.argmax(abs(v))
    v = v * np.sign(v[i])
    return OracleState(float(e), v, system)


def observables(state: OracleState) -> dict:
    """Populations, Fock marginals and quadrature moments of every mode.

    Quadratures follow X = (a + a^+)/sqrt2, P = (a - a^+)/(i sqrt2).
    """
    sysm = state.system
    psi = state.vector.reshape([n + 1 for n in sysm.n_max])
    nm = len(sysm.n_max)
    ops = _mode_operators(sysm.n_max)
    v = state.vector
    out = {"populations": [], "fock": [], "var_x": [], "var_p": [], "cov_xp": []}
    for k in range(nm):
        prob = np.abs(psi) ** 2
        axes = tuple(i for i in range(nm) if i != k)
        marg = prob.sum(axis=axes) if axes else prob
        a = ops[k]
        av = a @ v
        n = float(np.vdot(av, av).real)
        aa = complex(np.vdot(v, a @ av))
        out["populations"].append(n)
        out["fock"].append(marg)
        out["var_x"].append(0.5 + n + aa.real)
        out["var_p"].append(0.5 + n - aa.real)
        out["cov_xp"].append(aa.imag)
    parity = sum(np.indices(psi.shape)) % 2
    out["odd_parity_weight"] = float(np.sum(np.abs(psi[parity == 1]) ** 2))
    return out


def ground_state_escalating(system: TruncatedSystem, tol: float = 1e-4, max_cutoff: int = 320
                            ) -> tuple[OracleState, dict]:
    """Double the cutoff until every <a^+ a> moves by less than ``tol``."""
    current = system
    prev = None
    while True:
        st = ground_state(current)
        obs = observables(st)
        pops = np.array(obs["populations"])
        if prev is not None and np.max(abs(pops - prev)) < tol:
            return st, obs
        nxt = tuple(2 * n for n in current.n_max)
        if max(nxt) > max_cutoff or math.prod(n + 1 for n in nxt) > MAX_DIM:
            raise OracleConvergenceError(
                f"populations not converged below cutoff {max_cutoff}: {pops}")
        prev = pops
        current = current.with_cutoff(nxt)


def from_mode_system(system, n_max=30) -> TruncatedSystem:
    """Translate a :class:`~deepstrong.hopfield.ModeSystem` with at most three modes."""
    J, M = system.n_cavity, system.n_matter
    if J + M > 3:
        raise ValueError("oracle is limited to three modes")
    freqs = tuple(float(f) for f in system.cavity_freqs) + tuple(float(f) for f in system.matter_freqs)
    kinds = ("cavity",) * J + ("matter",) * M
    coupling = {(j, J + a): float(system.coupling[j, a]) for j in range(J) for a in range(M)}
    dia = {j: float(system.diamagnetic[j]) for j in range(J)}
    if getattr(system, "cross_diamagnetic", False) and J > 1:
        raise ValueError("cross-diamagnetic systems are not supported by the oracle")
    return TruncatedSystem(freqs, kinds, coupling, dia, n_max)
