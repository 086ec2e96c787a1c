"""Experiment configuration: defaults, JSON loading, validation, hashing."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .detection import DetectorModel, TacConfig
from .engines import SourceRates
from .errors import ConfigError
from .interferometer import InterferometerGeometry, delta_L
from .spectral import (
    SpectralProfile,
    SpectralShape,
    coherence_length,
    wavelength_to_wavenumber,
)

DEFAULTS: dict = {
    "source": {
        "pump_wavelength_m": 427e-9,
        "coherence_length_m": 100e-6,
        "shape": "gaussian",
    },
    "geometry": {
        "path_short_m": 0.5,
        "path_long_base_m": 1.05,
        "splitter_transmittance": 0.5,
        "mode_overlap": 1.0,
    },
    "rates": {
        "pair_rate": 1.0e5,
        "rc0": 1.0e5,
        "singles_background": 0.0,
    },
    "detector": {
        "jitter_sigma_s": 300e-12,
        "dead_time_s": 0.0,
        "efficiency": 1.0,
    },
    "tac": {
        "electrical_delay_s": 10e-9,
        "range_s": 20e-9,
        "n_channels": 4096,
    },
    "scan": {
        "n_points": 24,
        "span_periods": 2.0,
        "duration_s": 0.04,
    },
    "run": {
        "duration_s": 1.0,
        "seed": 1,
        "window_s": 5e-9,
    },
}


def _deep_merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {where}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config section {where} must be an object")
            out[key] = _deep_merge(base[key], value, where)
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated pipeline configuration built from nested key/value data."""

    data: dict

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        cfg = cls(data=_deep_merge(DEFAULTS, raw))
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def default(cls) -> "ExperimentConfig":
        return cls.from_dict({})

    @classmethod
    def packaged(cls, name: str) -> "ExperimentConfig":
        """Load a config shipped with the package (e.g. 'experimental')."""
        text = (
            resources.files("biphoton") / "configs" / f"{name}.json"
        ).read_text()
        return cls.from_dict(json.loads(text))

    # builders -----------------------------------------------------------

    def profile(self) -> SpectralProfile:
        src = self.data["source"]
        k_pump = wavelength_to_wavenumber(src["pump_wavelength_m"])
        delta_k = 1.0 / src["coherence_length_m"]
        shape = SpectralShape(src["shape"])
        return SpectralProfile(k_pump=k_pump, delta_k=delta_k, shape=shape)

    def geometry(self) -> InterferometerGeometry:
        geo = self.data["geometry"]
        return InterferometerGeometry(
            path_short=geo["path_short_m"],
            path_long_base=geo["path_long_base_m"],
            splitter_transmittance=geo["splitter_transmittance"],
            mode_overlap=geo["mode_overlap"],
        )

    def rates(self) -> SourceRates:
        r = self.data["rates"]
        return SourceRates(
            pair_rate=r["pair_rate"],
            rc0=r["rc0"],
            singles_background=r["singles_background"],
        )

    def detector(self) -> DetectorModel:
        d = self.data["detector"]
        return DetectorModel(
            timing_jitter_sigma=d["jitter_sigma_s"],
            dead_time=d["dead_time_s"],
            efficiency=d["efficiency"],
        )

    def tac(self) -> TacConfig:
        t = self.data["tac"]
        return TacConfig(
            electrical_delay=t["electrical_delay_s"],
            range=t["range_s"],
            n_channels=int(t["n_channels"]),
        )

    def scan_offsets(self) -> np.ndarray:
        scan = self.data["scan"]
        period = self.data["source"]["pump_wavelength_m"]
        span = scan["span_periods"] * period
        return np.linspace(0.0, span, int(scan["n_points"]), endpoint=False)

    # validation ---------------------------------------------------------

    def validate(self) -> list[str]:
        """Raise ConfigError on fatal problems; return non-fatal warnings."""
        warnings: list[str] = []
        try:
            profile = self.profile()
            geometry = self.geometry()
            rates = self.rates()
            detector = self.detector()
            tac = self.tac()
            rates.pair_scale
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(str(exc)) from exc

        dl = delta_L(geometry)
        lcoh = coherence_length(profile)
        if dl < 100.0 * lcoh:
            warnings.append(
                f"path difference {dl} m is below 100x the coherence length "
                f"{lcoh} m; single-photon interference is not negligible"
            )
        split = dl / SPEED_OF_LIGHT
        if tac.electrical_delay < split:
            raise ConfigError(
                f"electrical delay {tac.electrical_delay} s is smaller than "
                f"delta_L/c = {split} s; the early side peak falls outside the TAC"
            )
        if tac.electrical_delay + split > tac.range:
            raise ConfigError(
                f"electrical delay {tac.electrical_delay} s plus delta_L/c = "
                f"{split} s exceeds the TAC range {tac.range} s"
            )
        if self.data["scan"]["n_points"] < 8:
            raise ConfigError("scan needs at least 8 points")
        if self.data["scan"]["span_periods"] < 1.0:
            raise ConfigError("scan must span at least one fringe period")
        _ = detector
        return warnings

    # serialization ------------------------------------------------------

    def canonical_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2)

    def config_hash(self) -> str:
        digest = hashlib.sha256(
            json.dumps(self.data, sort_keys=True, separators=(",", ":")).encode()
        )
        return digest.hexdigest()[:12]
