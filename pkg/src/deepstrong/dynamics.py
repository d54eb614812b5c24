"""Driven, damped mean-field dynamics and the far-field transmission model.

The coherent amplitudes alpha_j = <a_j> and beta_a = <b_a> obey

    d alpha_j/dt = -i w_j alpha_j - i sum_a Om_ja (beta_a + beta_a^*)
                   - 2i sum_j' D_jj' (alpha_j' + alpha_j'^*) - g_j alpha_j + k_j E(t)
    d beta_a/dt  = -i w_a beta_a - i sum_j Om_ja (alpha_j + alpha_j^*) - g_MP beta_a

with angular frequencies w = 2 pi nu (rad/ps), amplitude decay rates g in
1/ps, and drive couplings k_j = A_j exp(i phi_j). The system is linear, so
one fixed RK4 step is a constant matrix acting on the state plus three
forcing vectors multiplying E(t), E(t + h/2) and E(t + h).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .device import CavityOscillatorTable, DeviceConfig
from .hopfield import ModeSystem, classify_polaritons, solve

__all__ = [
    "StepSizeError",
    "DivergenceError",
    "PulseTruncationError",
    "SweepError",
    "DrivePulse",
    "TimeTrace",
    "Spectrum",
    "FarField",
    "TransmissionMap",
    "synthesize_pulse",
    "rk4_step",
    "integrate_eom",
    "amplitude_spectrum",
    "spectral_peaks",
    "far_field",
    "calibrate_kappa",
    "energy_channels",
    "switch_off",
    "sweep_cyclotron",
]

TWO_PI = 2 * math.pi
DEFAULT_GAMMA_MP = 0.05
DEFAULT_DIP_DEPTH = 0.3
DRIVE_RULE = "drive coupling A_j exp(i phi_j) on each cavity amplitude; emission Re sum_j alpha_j"


class StepSizeError(ValueError):
    pass


class DivergenceError(ArithmeticError):
    pass


class PulseTruncationError(ValueError):
    pass


class SweepError(RuntimeError):
    def __init__(self, nu_c, cause):
        super().__init__(f"sweep column nu_c = {nu_c:g} THz failed: {cause}")
        self.nu_c = nu_c
        self.cause = cause


@dataclass(frozen=True)
class DrivePulse:
    """First derivative of a Gaussian: E(t) = -A (t - t0)/s^2 exp(-(t - t0)^2 / 2 s^2).

    Times in ps. The amplitude spectrum peaks at 1/(2 pi s).
    """

    t0: float = 1.0
    sigma: float = 0.1
    amplitude: float = 1.0
    shape: str = "gaussian-derivative"

    def __post_init__(self):
        if self.shape != "gaussian-derivative":
            raise ValueError(f"unsupported pulse shape {self.shape!r}")
        if not self.sigma > 0:
            raise ValueError("pulse width sigma must be > 0")

    @property
    def peak_frequency(self) -> float:
        return 1.0 / (TWO_PI * self.sigma)

    def __call__(self, t):
        s = (np.asarray(t, dtype=float) - self.t0) / self.sigma
        return -self.amplitude * s / self.sigma * np.exp(-0.5 * s * s)

    def check_window(self, t_start: float, t_end: float):
        if self.t0 - 6 * self.sigma < t_start or self.t0 + 6 * self.sigma > t_end:
            raise PulseTruncationError(
                f"window [{t_start:g}, {t_end:g}] ps does not contain t0 +- 6 sigma = "
                f"[{self.t0 - 6 * self.sigma:g}, {self.t0 + 6 * self.sigma:g}] ps")


def synthesize_pulse(pulse: DrivePulse, dt: float, t_end: float) -> tuple[np.ndarray, np.ndarray]:
    """Sample ``pulse`` on ``[0, t_end]`` with spacing ``dt``."""
    pulse.check_window(0.0, t_end)
    n = int(round(t_end / dt)) + 1
    t = np.arange(n) * dt
    return t, pulse(t)


@dataclass
class TimeTrace:
    """Sampled mean-field amplitudes; ``alpha`` is (n_t, J), ``beta`` is (n_t, M)."""

    t: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    drive: np.ndarray
    system: ModeSystem
    drive_coupling: np.ndarray
    cavity_damping: np.ndarray
    matter_damping: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def emitted(self) -> np.ndarray:
        """Radiated field Re sum_j alpha_j."""
        return np.real(self.alpha.sum(axis=1))


def rk4_step(f, t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _real_generator(system: ModeSystem, g_cav, g_mp) -> np.ndarray:
    """Generator L of dy/dt = L y + ... for y = (Re alpha, Im alpha, Re beta, Im beta)."""
    J, M = system.n_cavity, system.n_matter
    wc = TWO_PI * system.cavity_freqs
    wm = TWO_PI * system.matter_freqs
    om = TWO_PI * system.coupling
    dia = TWO_PI * system.diamagnetic_matrix
    n = 2 * (J + M)
    L = np.zeros((n, n))
    u, v = slice(0, J), slice(J, 2 * J)
    r, s = slice(2 * J, 2 * J + M), slice(2 * J + M, n)
    L[u, u] = -np.diag(g_cav)
    L[u, v] = np.diag(wc)
    L[v, u] = -np.diag(wc) - 4 * dia
    L[v, v] = -np.diag(g_cav)
    L[v, r] = -2 * om
    L[r, r] = -np.diag(g_mp)
    L[r, s] = np.diag(wm)
    L[s, r] = -np.diag(wm)
    L[s, s] = -np.diag(g_mp)
    L[s, u] = -2 * om.T
    return L


def _resolve_oscillators(system, osc, cavity_damping, drive_coupling):
    J = system.n_cavity
    if osc is not None:
        rows = [osc.j.index(j) if j in osc.j else None for j in system.cavity_labels]
        if any(r is None for r in rows):
            missing = [j for j, r in zip(system.cavity_labels, rows) if r is None]
            raise KeyError(f"cavity modes {missing} missing from oscillator table")
        gam = np.array([osc.gamma[r] for r in rows])
        kap = osc.drive_coupling[rows]
    else:
        gam = np.zeros(J)
        kap = np.ones(J, dtype=complex)
    if cavity_damping is not None:
        gam = np.broadcast_to(np.asarray(cavity_damping, dtype=float), (J,)).copy()
    if drive_coupling is not None:
        kap = np.broadcast_to(np.asarray(drive_coupling, dtype=complex), (J,)).copy()
    return gam, kap


def integrate_eom(system: ModeSystem, osc: CavityOscillatorTable | None = None,
                  gamma_mp=DEFAULT_GAMMA_MP, pulse: DrivePulse | None = None,
                  dt: float = 0.002, t_end: float = 100.0, *, cavity_damping=None,
                  drive_coupling=None, sample_every: int = 1,
                  check_dt: bool = True) -> TimeTrace:
    """Fixed-step RK4 integration from the all-zero state.

    Parameters
    ----------
    system : ModeSystem
        Frequencies and couplings in THz.
    osc : CavityOscillatorTable, optional
        Supplies the damping and drive coupling of each cavity mode (matched
        by label). Without a table the cavity is undamped with unit drive.
    gamma_mp : float or array
        Matter damping in 1/ps, scalar or one value per MP mode.
    pulse : DrivePulse, optional
        ``None`` means no drive.
    dt, t_end : float
        Step and duration in ps.
    cavity_damping, drive_coupling : optional
        Override the values taken from ``osc``.
    sample_every : int
        Keep every n-th step in the returned trace.

    Raises
    ------
    StepSizeError
        If ``dt`` exceeds 1/(50 nu_max), nu_max being the largest normal-mode
        frequency.
    DivergenceError
        If the state becomes non-finite.
    """
    if not dt > 0 or not t_end > dt:
        raise ValueError("need 0 < dt < t_end")
    J, M = system.n_cavity, system.n_matter
    g_cav, kap = _resolve_oscillators(system, osc, cavity_damping, drive_coupling)
    g_mp = np.broadcast_to(np.asarray(gamma_mp, dtype=float), (M,)).copy()
    if np.any(g_cav < 0) or np.any(g_mp < 0):
        raise ValueError("damping rates must be >= 0")
    if check_dt:
        nu_max = float(np.max(solve(system).frequencies)) if system.n_modes else 0.0
        limit = 1.0 / (50.0 * nu_max)
        if dt > limit * (1 + 1e-12):
            raise StepSizeError(f"dt = {dt:g} ps exceeds 1/(50 nu_max) = {limit:.6g} ps "
                                f"(nu_max = {nu_max:.6g} THz); use dt <= {limit:.6g}")
    slowest = min(np.min(g_cav, initial=np.inf), np.min(g_mp, initial=np.inf))
    if pulse is not None:
        pulse.check_window(0.0, t_end)
        end_pulse = pulse.t0 + 6 * pulse.sigma
        if 0 < slowest < np.inf and t_end < end_pulse + 10.0 / slowest:
            warnings.warn(f"t_end = {t_end:g} ps is shorter than the pulse plus 10 damping "
                          f"times ({end_pulse + 10.0 / slowest:g} ps)", RuntimeWarning,
                          stacklevel=2)

    L = _real_generator(system, g_cav, g_mp)
    dim = L.shape[0]
    g = np.zeros(dim)
    g[:J], g[J:2 * J] = kap.real, kap.imag
    h = dt
    # one RK4 step is affine in (y, E0, Eh, E1); read the pieces off basis inputs
    P = rk4_step(lambda t, y: L @ y, 0.0, np.eye(dim), h)
    forcing = []
    for k in range(3):
        def f(t, y, k=k):
            e = (1.0 if abs(t - k * h / 2) < 1e-15 * max(h, 1) else 0.0)
            return L @ y + g * e
        forcing.append(rk4_step(f, 0.0, np.zeros(dim), h))
    c0, ch, c1 = forcing

    n_steps = int(round(t_end / dt))
    t_all = np.arange(n_steps + 1) * dt
    if pulse is None:
        e0 = np.zeros(n_steps + 1)
        eh = np.zeros(n_steps)
    else:
        e0 = pulse(t_all)
        eh = pulse(t_all[:-1] + h / 2)
    keep = np.arange(0, n_steps + 1, sample_every)
    out = np.empty((len(keep), dim))
    y = np.zeros(dim)
    out[0] = y
    nxt = 1
    Pt = P
    # overflow is reported below as DivergenceError, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            y = Pt @ y + c0 * e0[i] + ch * eh[i] + c1 * e0[i + 1]
            if (i + 1) % sample_every == 0:
                out[nxt] = y
                nxt += 1
                if nxt % 256 == 0 and not np.all(np.isfinite(y)):
                    break
    if not np.all(np.isfinite(out[:nxt])):
        bad = int(np.argmax(~np.all(np.isfinite(out[:nxt]), axis=1)))
        raise DivergenceError(f"state became non-finite at t = {t_all[keep[bad]]:g} ps")
    alpha = out[:, :J] + 1j * out[:, J:2 * J]
    beta = out[:, 2 * J:2 * J + M] + 1j * out[:, 2 * J + M:]
    return TimeTrace(
        t=t_all[keep], alpha=alpha, beta=beta, drive=e0[keep], system=system,
        drive_coupling=kap, cavity_damping=g_cav, matter_damping=g_mp,
        meta={"dt_ps": dt, "t_end_ps": t_end, "sample_every": sample_every,
              "drive_rule": DRIVE_RULE},
    )


@dataclass(frozen=True)
class Spectrum:
    """One-sided amplitude spectrum; ``nu`` in THz, ``bin_width`` in THz."""

    nu: np.ndarray
    amplitude: np.ndarray
    complex_values: np.ndarray
    bin_width: float


def fft_length(n: int) -> int:
    """Next power of two >= 4 n."""
    return 1 << max(int(4 * n - 1).bit_length(), 0)


def amplitude_spectrum(signal: np.ndarray, dt: float) -> Spectrum:
    """Zero-padded FFT (length = next power of two >= 4x the signal)."""
    nfft = fft_length(len(signal))
    F = np.fft.rfft(np.asarray(signal), n=nfft) * dt
    nu = np.fft.rfftfreq(nfft, dt)
    return Spectrum(nu, np.abs(F), F, float(nu[1] - nu[0]))


def spectral_peaks(spec: Spectrum, rel_height: float = 0.05, nu_min: float = 0.0,
                   nu_max: float | None = None) -> np.ndarray:
    """Frequencies of local maxima above ``rel_height`` times the spectral maximum."""
    amp = spec.amplitude
    sel = spec.nu >= nu_min
    if nu_max is not None:
        sel &= spec.nu <= nu_max
    if not np.any(sel) or amp[sel].max() == 0:
        return np.array([])
    top = amp[sel].max()
    idx, _ = find_peaks(np.where(sel, amp, 0.0), height=rel_height * top)
    return spec.nu[idx]


@dataclass(frozen=True)
class FarField:
    t: np.ndarray
    e_out: np.ndarray
    nu: np.ndarray
    transmission: np.ndarray
    kappa_rad: float
    bin_width: float

    @property
    def gaps(self) -> np.ndarray:
        """Frequencies excluded because the drive carries no spectral weight there."""
        return self.nu[np.isnan(self.transmission)]


def _ratio_spectra(trace: TimeTrace, drive_floor: float):
    fe = amplitude_spectrum(trace.drive, trace.dt)
    fr = amplitude_spectrum(trace.emitted, trace.dt)
    ok = fe.amplitude > drive_floor * fe.amplitude.max() if fe.amplitude.max() > 0 else \
        np.zeros_like(fe.amplitude, dtype=bool)
    return fe, fr, ok


def far_field(trace: TimeTrace, kappa_rad: float, drive_floor: float = 1e-3) -> FarField:
    """Transmitted field E - kappa_rad E_rad and T(nu) = |F[E] - kappa F[E_rad]| / |F[E]|.

    Bins where the drive amplitude falls below ``drive_floor`` times its
    maximum are returned as NaN.
    """
    fe, fr, ok = _ratio_spectra(trace, drive_floor)
    T = np.full(len(fe.nu), np.nan)
    T[ok] = np.abs(fe.complex_values[ok] - kappa_rad * fr.complex_values[ok]) / fe.amplitude[ok]
    e_out = trace.drive - kappa_rad * trace.emitted
    return FarField(trace.t, e_out, fe.nu, T, float(kappa_rad), fe.bin_width)


def calibrate_kappa(osc: CavityOscillatorTable, pulse: DrivePulse, dt: float, t_end: float,
                    target: float = DEFAULT_DIP_DEPTH, j: int | None = None) -> float:
    """Radiative constant giving the bare resonator a transmission of ``target``
    at its fundamental frequency.

    The smallest positive root of |1 - kappa r(nu_1)| = target is used, with
    r = F[E_rad] / F[E]. Without a real root the kappa of deepest dip is returned.
    """
    if not 0 <= target < 1:
        raise ValueError("target transmission must lie in [0, 1)")
    j = osc.j[int(np.argmin(osc.nu))] if j is None else j
    bare = ModeSystem(np.array(osc.nu), np.zeros(0), np.zeros((len(osc), 0)), osc.j)
    tr = integrate_eom(bare, osc, pulse=pulse, dt=dt, t_end=t_end, check_dt=False)
    fe, fr, ok = _ratio_spectra(tr, 1e-3)
    k = int(np.argmin(abs(fe.nu - osc.frequency(j))))
    if not ok[k]:
        raise ValueError(f"drive has no spectral weight at nu_{j}")
    r = fr.complex_values[k] / fe.complex_values[k]
    a, b, c = abs(r) ** 2, -2 * r.real, 1 - target**2
    disc = b * b - 4 * a * c
    if disc < 0 or r.real <= 0:
        return float(max(r.real, 0.0) / a)
    roots = sorted(x for x in ((-b - math.sqrt(disc)) / (2 * a), (-b + math.sqrt(disc)) / (2 * a))
                   if x > 0)
    return float(roots[0])


def energy_channels(trace: TimeTrace) -> dict[str, np.ndarray]:
    """Mean-field energies (hbar = 1, rad/ps): cavity (n_t, J), matter (n_t, M),
    interaction incl. diamagnetic (n_t,), and their sum."""
    sys_ = trace.system
    wc = TWO_PI * sys_.cavity_freqs
    wm = TWO_PI * sys_.matter_freqs
    om = TWO_PI * sys_.coupling
    dia = TWO_PI * sys_.diamagnetic_matrix
    xa = 2 * trace.alpha.real
    xb = 2 * trace.beta.real
    cav = wc * abs(trace.alpha) ** 2
    mat = wm * abs(trace.beta) ** 2
    inter = np.einsum("tj,ja,ta->t", xa, om, xb) + np.einsum("tj,jk,tk->t", xa, dia, xa)
    return {"cavity": cav, "matter": mat, "interaction": inter,
            "total": cav.sum(axis=1) + mat.sum(axis=1) + inter}


def switch_off(system: ModeSystem, active, osc: CavityOscillatorTable | None = None,
               **kwargs) -> TimeTrace:
    """Re-run :func:`integrate_eom` with coupling and drive of inactive cavity modes removed."""
    active = set(active)
    unknown = active - set(system.cavity_labels)
    if unknown:
        raise KeyError(f"unknown cavity modes {sorted(unknown)}")
    mask = np.array([j in active for j in system.cavity_labels], dtype=float)
    reduced = ModeSystem(system.cavity_freqs, system.matter_freqs,
                         system.coupling * mask[:, None], system.cavity_labels,
                         system.matter_labels, system.cross_diamagnetic)
    g_cav, kap = _resolve_oscillators(system, osc, kwargs.pop("cavity_damping", None),
                                      kwargs.pop("drive_coupling", None))
    kwargs.setdefault("check_dt", True)
    return integrate_eom(reduced, osc, cavity_damping=g_cav, drive_coupling=kap * mask, **kwargs)


@dataclass(frozen=True)
class TransmissionMap:
    """T[i, k] at cyclotron frequency ``nu_c[i]`` and spectral frequency ``nu[k]``."""

    nu_c: np.ndarray
    nu: np.ndarray
    transmission: np.ndarray
    overlays: tuple[dict, ...]
    kappa_rad: float
    bin_width: float


def _sweep_column(device, nu_c, nu_grid, osc, pulse, dt, t_end, gamma_mp, kappa, stride):
    system = device.mode_system(nu_c, cavity_modes=osc.j)
    sol = solve(system)
    cls = classify_polaritons(sol)
    tr = integrate_eom(system, osc, gamma_mp, pulse, dt, t_end, sample_every=stride)
    ff = far_field(tr, kappa)
    col = np.interp(nu_grid, ff.nu, ff.transmission)
    overlay = {"nu_c": float(nu_c),
               "modes": [{"label": lab[0], "j": lab[1], "beta": lab[2],
                          "nu": float(sol.frequencies[k])}
                         for k, lab in enumerate(cls.labels)]}
    return col, overlay, ff.bin_width


def _strictly_increasing(a) -> bool:
    return len(a) > 0 and bool(np.all(np.diff(a) > 0))


def sweep_cyclotron(device: DeviceConfig, nu_c_grid, nu_grid, pulse: DrivePulse | None = None,
                    dt: float | None = None, t_end: float = 210.0,
                    gamma_mp=DEFAULT_GAMMA_MP, kappa_rad: float | None = None,
                    dip_depth: float = DEFAULT_DIP_DEPTH, threads: int = 1,
                    sample_every: int = 1) -> TransmissionMap:
    """Transmission map over cyclotron frequencies, columns computed concurrently.

    ``dt`` defaults to 1/(50 nu_max) of the largest-nu_c column. A failure in
    any column raises :class:`SweepError` naming that nu_c.
    """
    nu_c_grid = np.asarray(nu_c_grid, dtype=float)
    nu_grid = np.asarray(nu_grid, dtype=float)
    if not _strictly_increasing(nu_c_grid) or not _strictly_increasing(nu_grid):
        raise ValueError("sweep grids must be non-empty and strictly increasing")
    osc = device.oscillators
    pulse = pulse or DrivePulse()
    if dt is None:
        nu_max = 0.0
        for nc in (nu_c_grid[0], nu_c_grid[-1]):
            try:
                nu_max = max(nu_max, float(np.max(solve(device.mode_system(nc, osc.j)).frequencies)))
            except Exception as exc:  # noqa: BLE001
                raise SweepError(nc, exc) from exc
        dt = 1.0 / (50.0 * nu_max)
        dt = t_end / math.ceil(t_end / dt)
    if kappa_rad is None:
        kappa_rad = calibrate_kappa(osc, pulse, dt, t_end, dip_depth)

    def run(nc):
        try:
            return _sweep_column(device, nc, nu_grid, osc, pulse, dt, t_end, gamma_mp,
                                 kappa_rad, sample_every)
        except Exception as exc:  # noqa: BLE001 - re-raised with the column
            raise SweepError(nc, exc) from exc

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, nu_c_grid))
    T = np.vstack([r[0] for r in results])
    return TransmissionMap(nu_c_grid, nu_grid, T, tuple(r[1] for r in results),
                           float(kappa_rad), results[0][2])
