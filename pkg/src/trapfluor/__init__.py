"""Resonance fluorescence spectra of a laser-cooled trapped ion."""

from .config import PRESETS, RunConfig, parse_config
from .model import PhysParams, StandingWave, TravelingWave
from .oracle import build_exact, exact_nbar, exact_spectrum
from .spectrum import SpectralLine, SpectrumResult, assemble

__all__ = [
    "PRESETS",
    "PhysParams",
    "RunConfig",
    "SpectralLine",
    "SpectrumResult",
    "StandingWave",
    "TravelingWave",
    "assemble",
    "build_exact",
    "exact_nbar",
    "exact_spectrum",
    "parse_config",
]
