"""Device scenarios: stack + metasurface + cavity oscillators -> ModeSystem."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .coupling import (CouplingMatrix, WeightProfile, aggregate_coupling, load_weights,
                       synthetic_profile)
from .hopfield import ModeSystem, ground_state_populations, solve
from .materials import MaterialStack
from .plasmons import PlasmonLadder, build_ladder

__all__ = ["CavityOscillatorTable", "DeviceConfig", "paper_device", "calibrate_scale"]


@dataclass(frozen=True)
class CavityOscillatorTable:
    """Resonator modes used for both the Hamiltonian and the far-field model.

    ``nu`` and ``gamma`` in THz (gamma is an amplitude decay rate in 1/ps),
    ``phase`` in radians.
    """

    j: tuple[int, ...] = (1, 2, 3, 4, 5)
    nu: tuple[float, ...] = (0.52, 1.95, 3.75, 4.60, 6.00)
    gamma: tuple[float, ...] = (0.08, 0.80, 0.12, 0.30, 0.30)
    amplitude: tuple[float, ...] = (2.8, 44.5, 0.8, 0.9, 7.0)
    phase: tuple[float, ...] = (0.0, -0.14 * math.pi, -0.25 * math.pi, -0.6 * math.pi,
                                -0.14 * math.pi)

    def __post_init__(self):
        n = len(self.j)
        for name in ("nu", "gamma", "amplitude", "phase"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != n:
                raise ValueError(f"oscillator column {name!r} has {len(vals)} rows, expected {n}")
            object.__setattr__(self, name, vals)
        object.__setattr__(self, "j", tuple(int(v) for v in self.j))
        if len(set(self.j)) != n:
            raise ValueError("duplicate cavity mode index")
        if any(g <= 0 for g in self.gamma):
            raise ValueError("oscillator damping rates must be > 0")
        if any(v <= 0 for v in self.nu):
            raise ValueError("oscillator frequencies must be > 0")

    def __len__(self):
        return len(self.j)

    @property
    def drive_coupling(self) -> np.ndarray:
        return np.array(self.amplitude) * np.exp(1j * np.array(self.phase))

    def subset(self, modes) -> "CavityOscillatorTable":
        rows = [i for i, j in enumerate(self.j) if j in set(modes)]
        if len(rows) != len(set(modes)):
            missing = set(modes) - set(self.j)
            raise KeyError(f"cavity modes {sorted(missing)} not in oscillator table")
        pick = lambda col: tuple(col[i] for i in rows)  # noqa: E731
        return CavityOscillatorTable(pick(self.j), pick(self.nu), pick(self.gamma),
                                     pick(self.amplitude), pick(self.phase))

    def frequency(self, j: int) -> float:
        return self.nu[self.j.index(j)]


@dataclass(frozen=True)
class DeviceConfig:
    """Full physical scenario.

    ``coupled_modes`` are the cavity modes that receive near-field weights;
    the remaining oscillator rows stay in the system uncoupled.
    """

    stack: MaterialStack = field(default_factory=MaterialStack)
    period: float = 30.0
    alpha_cut: int = 10
    oscillators: CavityOscillatorTable = field(default_factory=CavityOscillatorTable)
    coupled_modes: tuple[int, ...] = (1, 2)
    global_scale: float = 0.1
    base_profile: dict = field(default_factory=dict)
    penetration_depth: float | None = None
    weights_path: str | None = None
    cross_diamagnetic: bool = False

    def with_(self, **changes) -> "DeviceConfig":
        return replace(self, **changes)

    def ladder(self, nu_c: float) -> PlasmonLadder:
        return build_ladder(self.stack, self.period, self.alpha_cut, nu_c)

    def weight_profile(self) -> WeightProfile:
        if self.weights_path is not None:
            return load_weights(Path(self.weights_path), n_qw=self.stack.n_qw)
        return synthetic_profile(self.coupled_modes, self.alpha_cut, self.stack.qw_depths,
                                 self.period, self.base_profile or None,
                                 self.penetration_depth)

    def coupling(self) -> CouplingMatrix:
        alphas = range(-self.alpha_cut, self.alpha_cut + 1)
        return aggregate_coupling(self.weight_profile(), self.global_scale,
                                  cavity_modes=self.coupled_modes, alphas=alphas)

    def mode_system(self, nu_c: float, cavity_modes=None) -> ModeSystem:
        """Hamiltonian modes at cyclotron frequency ``nu_c``.

        ``cavity_modes`` defaults to ``coupled_modes``; pass the full
        oscillator index list for far-field simulations.
        """
        modes = tuple(self.coupled_modes if cavity_modes is None else cavity_modes)
        freqs = [self.oscillators.frequency(j) for j in modes]
        return ModeSystem.from_ladder(freqs, self.ladder(nu_c), self.coupling(), modes,
                                      self.cross_diamagnetic)


def paper_device(n_qw: int = 48, **changes) -> DeviceConfig:
    """Stack resembling the measured samples: 30 um period, alpha_cut = 10,
    rho_QW = 1.8e12 cm^-2, 30 nm cap, 50 nm well period, and a 3 um
    near-field penetration depth for the synthetic weights.

    The gated screening uses an effective gate distance of 0.2 um; with
    the bare 30 nm cap the alpha = 1 magnetoplasmon of the 48-well stack
    would sit near 0.7 THz instead of the reported 1.2 THz.
    """
    stack = MaterialStack.uniform_stack(n_qw, qw_period=0.05, cap_thickness=0.03,
                                        screening_distance=0.2, rho_per_qw=1.8e16)
    changes.setdefault("penetration_depth", 3.0)
    return DeviceConfig(stack=stack, **changes)


def calibrate_scale(device: DeviceConfig, nu_c: float, target_n: float, j: int = 1) -> float:
    """Global scale that makes <N_j> of ``device`` at ``nu_c`` equal ``target_n``."""
    row = device.coupled_modes.index(j)

    def f(scale):
        sys_ = device.with_(global_scale=scale).mode_system(nu_c)
        return ground_state_populations(solve(sys_))[0][row] - target_n

    hi = 0.05
    while f(hi) < 0:
        hi *= 2
        if hi > 1e4:
            raise ArithmeticError("could not bracket the calibration target")
    return brentq(f, 0.0, hi, xtol=1e-12)
