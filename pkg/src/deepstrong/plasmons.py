"""Discretised magnetoplasmon ladder of a periodically patterned 2DEG."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .materials import CODATA, MaterialStack, eps_effective

__all__ = [
    "BiasPoint",
    "LadderEntry",
    "PlasmonLadder",
    "q_of_alpha",
    "omega_plasma",
    "omega_mp",
    "fermi_velocity",
    "landau_damped",
    "build_ladder",
]


@dataclass(frozen=True)
class BiasPoint:
    """Magnetic bias expressed through the cyclotron frequency ``nu_c`` (THz)."""

    nu_c: float
    effective_mass_ratio: float = 0.067

    def __post_init__(self):
        if self.nu_c < 0:
            raise ValueError("nu_c must be >= 0")

    @classmethod
    def from_field(cls, B: float, effective_mass_ratio: float = 0.067) -> "BiasPoint":
        m = effective_mass_ratio * CODATA.electron_mass
        nu = CODATA.elementary_charge * abs(B) / (2 * math.pi * m) / 1e12
        return cls(nu, effective_mass_ratio)

    @property
    def field(self) -> float:
        """Magnetic field in tesla."""
        m = self.effective_mass_ratio * CODATA.electron_mass
        return self.nu_c * 1e12 * 2 * math.pi * m / CODATA.elementary_charge


def q_of_alpha(alpha, period: float):
    """Wave vector (1/um) of plasmon index ``alpha`` for unit-cell length ``period`` (um)."""
    if not period > 0:
        raise ValueError("period must be > 0")
    return 2 * math.pi * np.asarray(alpha) / period if np.ndim(alpha) else 2 * math.pi * alpha / period


def omega_plasma(q, rho_2d: float, stack: MaterialStack):
    """2D plasma frequency (THz, linear) at wave vector ``q`` (1/um).

    q = 0 maps to 0 by continuity even for a gated surface, where
    q / eps_gated(q) vanishes like q^2.
    """
    q = np.asarray(q, dtype=float)
    qa = np.abs(q)
    out = np.zeros_like(qa)
    nz = qa > 0
    if np.any(nz):
        eps = eps_effective(qa[nz], stack)
        num = rho_2d * CODATA.elementary_charge**2 * qa[nz] * 1e6
        den = 2 * stack.effective_mass * CODATA.vacuum_permittivity * eps
        out[nz] = np.sqrt(num / den) / (2 * math.pi) / 1e12
    return out if out.ndim else float(out)


def omega_mp(nu_c, nu_plasma):
    """Magnetoplasmon frequency sqrt(nu_c^2 + nu_plasma^2)."""
    return np.hypot(nu_c, nu_plasma)


def fermi_velocity(rho: float, effective_mass_ratio: float = 0.067) -> float:
    """Fermi velocity (m/s) of a spin-degenerate 2DEG with sheet density ``rho`` (m^-2)."""
    m = effective_mass_ratio * CODATA.electron_mass
    return CODATA.reduced_planck * math.sqrt(2 * math.pi * rho) / m


def landau_damped(nu_mp: float, q: float, rho: float, effective_mass_ratio: float = 0.067) -> bool:
    """True when the mode lies inside the single-particle continuum, omega < v_F |q|."""
    omega = 2 * math.pi * nu_mp * 1e12
    return bool(omega < fermi_velocity(rho, effective_mass_ratio) * abs(q) * 1e6)


@dataclass(frozen=True)
class LadderEntry:
    alpha: int
    q_x: float
    nu_plasma: float
    nu_mp: float
    bright: bool
    landau_damped: bool


@dataclass(frozen=True)
class PlasmonLadder:
    """MP modes alpha = -alpha_cut..alpha_cut at one bias point.

    Negative indices stand for the dark standing waves; they share the
    frequency of their bright partner but never couple to the cavity.
    """

    period: float
    alpha_cut: int
    nu_c: float
    entries: tuple[LadderEntry, ...]

    def __len__(self):
        return len(self.entries)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([e.alpha for e in self.entries])

    @property
    def nu_mp(self) -> np.ndarray:
        return np.array([e.nu_mp for e in self.entries])

    @property
    def nu_plasma(self) -> np.ndarray:
        return np.array([e.nu_plasma for e in self.entries])

    @property
    def bright(self) -> np.ndarray:
        return np.array([e.bright for e in self.entries])

    def entry(self, alpha: int) -> LadderEntry:
        return self.entries[alpha + self.alpha_cut]


def build_ladder(stack: MaterialStack, period: float, alpha_cut: int, bias: BiasPoint | float,
                 rho_2d: float | None = None) -> PlasmonLadder:
    """Build the 2*alpha_cut + 1 magnetoplasmon entries for a device at ``bias``.

    ``rho_2d`` defaults to the summed density of all wells. Landau damping
    uses the Fermi velocity of a single well (``stack.rho_per_qw``); the
    flag is informational only.
    """
    if alpha_cut < 0:
        raise ValueError("alpha_cut must be >= 0")
    nu_c = bias.nu_c if isinstance(bias, BiasPoint) else float(bias)
    if nu_c < 0:
        raise ValueError("nu_c must be >= 0")
    rho = stack.rho_2d if rho_2d is None else rho_2d
    alphas = np.arange(-alpha_cut, alpha_cut + 1)
    qs = q_of_alpha(alphas, period)
    nu_p = np.atleast_1d(omega_plasma(np.abs(qs), rho, stack))
    entries = []
    for a, q, nup in zip(alphas, qs, nu_p):
        nump = float(omega_mp(nu_c, nup))
        entries.append(LadderEntry(
            alpha=int(a), q_x=float(q), nu_plasma=float(nup), nu_mp=nump,
            bright=bool(a >= 0),
            landau_damped=landau_damped(nump, q, stack.rho_per_qw, stack.effective_mass_ratio),
        ))
    return PlasmonLadder(period=period, alpha_cut=alpha_cut, nu_c=nu_c, entries=tuple(entries))
