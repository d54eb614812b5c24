"""Vacuum Rabi frequency tables from near-field weight data.

Weights are either read from a CSV file (header ``j,alpha,qw,amplitude``)
or synthesised from an evanescent decay model. The per-well weights of
one (cavity mode, MP mode) pair add in quadrature, so N identical wells
give a sqrt(N) enhancement.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .plasmons import q_of_alpha

__all__ = [
    "WeightFileError",
    "WeightProfile",
    "CouplingMatrix",
    "synthetic_weight",
    "synthetic_profile",
    "aggregate_coupling",
    "load_weights",
]

HEADER = ("j", "alpha", "qw", "amplitude")


class WeightFileError(ValueError):
    pass


@dataclass(frozen=True)
class WeightProfile:
    """Relative near-field amplitudes keyed by (cavity mode j, alpha, well index)."""

    amplitudes: Mapping[tuple[int, int, int], float]
    source: str = "synthetic"

    def __post_init__(self):
        for (j, a, w), amp in self.amplitudes.items():
            if not np.isfinite(amp):
                raise ValueError(f"non-finite amplitude at j={j}, alpha={a}, qw={w}")
            if amp < 0:
                raise ValueError(f"negative amplitude {amp} at j={j}, alpha={a}, qw={w}")
            if a < 0 and amp != 0:
                raise ValueError(f"dark mode alpha={a} must carry zero amplitude (j={j}, qw={w})")

    @property
    def cavity_modes(self) -> list[int]:
        return sorted({k[0] for k in self.amplitudes})

    @property
    def alphas(self) -> list[int]:
        return sorted({k[1] for k in self.amplitudes})

    def __len__(self):
        return len(self.amplitudes)


@dataclass(frozen=True)
class CouplingMatrix:
    """Vacuum Rabi frequencies in THz (linear frequency), rows = cavity modes,
    columns = MP modes."""

    omega_R: np.ndarray
    cavity_modes: tuple[int, ...]
    alphas: tuple[int, ...]
    global_scale: float = 1.0

    def __post_init__(self):
        om = np.asarray(self.omega_R, dtype=float)
        if om.shape != (len(self.cavity_modes), len(self.alphas)):
            raise ValueError("omega_R shape does not match index sets")
        if not np.all(np.isfinite(om)) or np.any(om < 0):
            raise ValueError("omega_R must be finite and non-negative")
        for c, a in enumerate(self.alphas):
            if a < 0 and np.any(om[:, c] != 0):
                raise ValueError(f"dark mode alpha={a} has nonzero coupling")
        om.setflags(write=False)
        object.__setattr__(self, "omega_R", om)

    def scaled(self, factor: float) -> "CouplingMatrix":
        return CouplingMatrix(self.omega_R * factor, self.cavity_modes, self.alphas,
                              self.global_scale * factor)

    def row(self, j: int) -> np.ndarray:
        return self.omega_R[self.cavity_modes.index(j)]


def _base(base_profile, j: int, alpha: int) -> float:
    if base_profile is None:
        return 1.0
    if isinstance(base_profile, Mapping):
        if (j, alpha) in base_profile:
            return float(base_profile[(j, alpha)])
        return float(base_profile.get(j, 1.0))
    return float(base_profile)


def synthetic_weight(j: int, alpha: int, z: float, period: float,
                     base_profile: Mapping | float | None = None,
                     penetration_depth: float | None = None) -> float:
    """Evanescent surrogate for the Fourier near-field amplitude of mode ``j``
    at wave vector q(alpha), a depth ``z`` (um) below the surface.

    ``base_profile`` maps j or (j, |alpha|) to the surface amplitude
    (default 1). ``penetration_depth`` (um) adds a common exp(-z / l)
    decay of the resonator near field on top of exp(-|q| z); ``None``
    keeps the pure evanescent form, under which alpha = 0 does not decay.
    """
    if z < 0:
        raise ValueError("depth must be >= 0")
    if alpha < 0:
        return 0.0
    rate = abs(q_of_alpha(alpha, period))
    if penetration_depth is not None:
        if not penetration_depth > 0:
            raise ValueError("penetration_depth must be > 0")
        rate += 1.0 / penetration_depth
    return _base(base_profile, j, abs(alpha)) * math.exp(-rate * z)


def synthetic_profile(cavity_modes: Iterable[int], alpha_cut: int, qw_depths: Iterable[float],
                      period: float, base_profile: Mapping | float | None = None,
                      penetration_depth: float | None = None) -> WeightProfile:
    depths = list(qw_depths)
    amps = {}
    for j in cavity_modes:
        for a in range(-alpha_cut, alpha_cut + 1):
            for w, z in enumerate(depths):
                amps[(j, a, w)] = synthetic_weight(j, a, z, period, base_profile,
                                                   penetration_depth)
    return WeightProfile(amps, source="synthetic")


def aggregate_coupling(profile: WeightProfile, scale: float,
                       cavity_modes: Iterable[int] | None = None,
                       alphas: Iterable[int] | None = None) -> CouplingMatrix:
    """Root-sum-square the per-well weights and multiply by ``scale`` (THz per unit weight).

    Index sets default to those present in the profile; pairs absent from
    the profile couple with zero strength.
    """
    if len(profile) == 0:
        raise ValueError("weight profile is empty: no modes to couple")
    if not scale >= 0:
        raise ValueError("global scale must be >= 0")
    js = tuple(profile.cavity_modes if cavity_modes is None else cavity_modes)
    als = tuple(profile.alphas if alphas is None else alphas)
    jpos = {j: r for r, j in enumerate(js)}
    apos = {a: c for c, a in enumerate(als)}
    sq = np.zeros((len(js), len(als)))
    for (j, a, _w), amp in profile.amplitudes.items():
        if j in jpos and a in apos:
            sq[jpos[j], apos[a]] += amp * amp
    return CouplingMatrix(scale * np.sqrt(sq), js, als, scale)


def load_weights(path: str | Path, n_qw: int | None = None) -> WeightProfile:
    """Read a weight CSV (UTF-8, header ``j,alpha,qw,amplitude``).

    Raises
    ------
    WeightFileError
        On a bad header, a malformed row (the line number is reported),
        out-of-range indices or duplicate keys.
    ValueError
        On negative amplitudes or nonzero dark-mode rows.
    """
    amps: dict[tuple[int, int, int], float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise WeightFileError(f"{path}: empty file, expected header {','.join(HEADER)}")
        if tuple(h.strip() for h in header) != HEADER:
            raise WeightFileError(f"{path}:1: bad header {header!r}, expected {','.join(HEADER)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise WeightFileError(f"{path}:{line}: expected 4 fields, got {len(row)}")
            try:
                j, a, w = int(row[0]), int(row[1]), int(row[2])
                amp = float(row[3])
            except ValueError as exc:
                raise WeightFileError(f"{path}:{line}: {exc}") from None
            if j < 1:
                raise WeightFileError(f"{path}:{line}: cavity index j must be >= 1")
            if w < 0 or (n_qw is not None and w >= n_qw):
                raise WeightFileError(f"{path}:{line}: qw index {w} out of range")
            if amp < 0:
                raise ValueError(f"{path}:{line}: negative amplitude {amp}")
            if a < 0 and amp != 0:
                raise ValueError(f"{path}:{line}: dark mode alpha={a} must have zero amplitude")
            key = (j, a, w)
            if key in amps:
                raise WeightFileError(f"{path}:{line}: duplicate entry for j={j}, alpha={a}, qw={w}")
            amps[key] = amp
    return WeightProfile(amps, source="file")
