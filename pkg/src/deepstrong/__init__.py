"""Multi-mode Hopfield model of cavity photons coupled to 2D magnetoplasmons.

Frequencies are linear (THz) at every public interface, times in ps and
lengths in micrometres; hbar = 1 inside the Hamiltonian.
"""

__version__ = "0.1.0"

from .device import CavityOscillatorTable, DeviceConfig, calibrate_scale, paper_device
from .hopfield import (ModeSystem, classify_polaritons, equivalent_eta, ground_state_populations,
                       quadrature_covariance, single_mode_photon_number, single_pair, solve)
from .materials import MaterialStack
from .plasmons import build_ladder

__all__ = [
    "__version__",
    "CavityOscillatorTable",
    "DeviceConfig",
    "MaterialStack",
    "ModeSystem",
    "build_ladder",
    "calibrate_scale",
    "classify_polaritons",
    "equivalent_eta",
    "ground_state_populations",
    "paper_device",
    "quadrature_covariance",
    "single_mode_photon_number",
    "single_pair",
    "solve",
]
