"""Physical constants, device stack description and dielectric screening.

Internal units: lengths in micrometres, wave vectors in 1/um, frequencies
in THz, sheet densities in m^-2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants as _sc

__all__ = [
    "PhysicalConstants",
    "CODATA",
    "MaterialStack",
    "PhononModel",
    "GAAS_PHONONS",
    "ScreeningDivergenceError",
    "eps_ungated",
    "eps_gated",
    "eps_effective",
    "eps_gaas",
]


@dataclass(frozen=True)
class PhysicalConstants:
    elementary_charge: float = _sc.e
    electron_mass: float = _sc.m_e
    vacuum_permittivity: float = _sc.epsilon_0
    reduced_planck: float = _sc.hbar

    def __post_init__(self):
        for name in ("elementary_charge", "electron_mass", "vacuum_permittivity", "reduced_planck"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


CODATA = PhysicalConstants()


class ScreeningDivergenceError(ValueError):
    """Gated screening evaluated at q = 0, where coth(qd) diverges."""


@dataclass(frozen=True)
class MaterialStack:
    """Dielectric environment and quantum-well layout of a 2DEG stack.

    ``cap_thickness`` is the d entering the gated/ungated screening
    functions unless ``screening_distance`` overrides it. ``qw_depths`` are
    measured from the surface in micrometres. ``rho_per_qw`` is in m^-2.
    """

    eps_sub: float = 12.9
    eps_barrier: float = 12.9
    cap_thickness: float = 0.03
    stack_thickness: float = 0.05
    metal_coverage: float = 0.5
    effective_mass_ratio: float = 0.067
    qw_depths: tuple[float, ...] = (0.055,)
    rho_per_qw: float = 1.8e16
    screening_distance: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qw_depths", tuple(float(z) for z in self.qw_depths))
        errors = self.validation_errors()
        if errors:
            raise ValueError("; ".join(errors))

    def validation_errors(self) -> list[str]:
        errs = []
        if not 0.0 <= self.metal_coverage <= 1.0:
            errs.append("metal_coverage out of [0,1]")
        if not self.cap_thickness > 0:
            errs.append("cap_thickness must be > 0")
        if not self.stack_thickness > 0:
            errs.append("stack_thickness must be > 0")
        if self.screening_distance is not None and not self.screening_distance > 0:
            errs.append("screening_distance must be > 0")
        if self.eps_sub < 1 or self.eps_barrier < 1:
            errs.append("eps_sub and eps_barrier must be >= 1")
        if not self.effective_mass_ratio > 0:
            errs.append("effective_mass_ratio must be > 0")
        if self.rho_per_qw < 0:
            errs.append("rho_per_qw must be >= 0")
        if any(z < 0 for z in self.qw_depths):
            errs.append("qw_depths must be >= 0")
        return errs

    @property
    def n_qw(self) -> int:
        return len(self.qw_depths)

    @property
    def d(self) -> float:
        return self.cap_thickness if self.screening_distance is None else self.screening_distance

    @property
    def rho_2d(self) -> float:
        """Carrier density summed over all wells (m^-2)."""
        return self.n_qw * self.rho_per_qw

    @property
    def effective_mass(self) -> float:
        return self.effective_mass_ratio * CODATA.electron_mass

    @classmethod
    def uniform_stack(cls, n_qw: int, qw_period: float = 0.05, cap_thickness: float = 0.03,
                      **kwargs) -> "MaterialStack":
        """Equally spaced wells, each centred in its own period below the cap."""
        depths = tuple(cap_thickness + (i + 0.5) * qw_period for i in range(n_qw))
        kwargs.setdefault("stack_thickness", n_qw * qw_period)
        return cls(cap_thickness=cap_thickness, qw_depths=depths, **kwargs)


@dataclass(frozen=True)
class PhononModel:
    """Lorentz model of the GaAs optical phonons; all entries in THz."""

    eps_inf: float = 10.87
    nu_LO: float = 8.839
    nu_TO: float = 8.124
    gamma_LO: float = 0.0225
    gamma_TO: float = 0.0255

    def __post_init__(self):
        if not self.nu_LO > self.nu_TO > 0:
            raise ValueError("require nu_LO > nu_TO > 0")
        if self.gamma_LO < 0 or self.gamma_TO < 0:
            raise ValueError("damping rates must be >= 0")


GAAS_PHONONS = PhononModel()


def eps_ungated(q, stack: MaterialStack):
    """Effective permittivity of a 2DEG below a free (vacuum) surface."""
    th = np.tanh(np.abs(q) * stack.d)
    eb = stack.eps_barrier
    return stack.eps_sub / 2 + eb / 2 * (1 + eb * th) / (eb + th)


def eps_gated(q, stack: MaterialStack):
    """Effective permittivity of a 2DEG below a metal gate.

    Raises
    ------
    ScreeningDivergenceError
        If any ``q`` is zero.
    """
    qa = np.abs(np.asarray(q, dtype=float))
    if np.any(qa == 0):
        raise ScreeningDivergenceError("eps_gated diverges at q = 0 (metallic screening)")
    out = (stack.eps_sub + stack.eps_barrier / np.tanh(qa * stack.d)) / 2
    return out if np.ndim(q) else float(out)


def eps_effective(q, stack: MaterialStack):
    """Coverage-weighted mix of gated and ungated screening plus the finite
    stack-thickness correction ``eps_sub * |q| * t / 2``."""
    delta = stack.metal_coverage
    mix = (1 - delta) * eps_ungated(q, stack)
    if delta > 0:
        mix = mix + delta * eps_gated(q, stack)
    return mix + stack.eps_sub * np.abs(q) * stack.stack_thickness / 2


def eps_gaas(nu, model: PhononModel = GAAS_PHONONS):
    """Complex phonon permittivity at linear frequency ``nu`` (THz).

    Damping rates enter against the linear frequency, matching the units
    the parameters are quoted in. The +i gamma nu form belongs to the
    exp(+i omega t) time convention, so absorption appears as Im(eps) < 0.
    """
    nu = np.asarray(nu, dtype=float)
    num = model.nu_LO**2 - nu**2 + 1j * model.gamma_LO * nu
    den = model.nu_TO**2 - nu**2 + 1j * model.gamma_TO * nu
    out = model.eps_inf * num / den
    return out if out.ndim else complex(out)


