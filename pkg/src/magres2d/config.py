"""Run configuration shared by all numerical backends.

Every CLI run echoes its configuration (and a short hash of it) into the
output artifact so that results can be reproduced bit for bit.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict, field


@dataclass(frozen=True)
class Config:
    abs_tol: float = 1e-10          # absolute quadrature tolerance
    rel_tol: float = 1e-8           # relative quadrature tolerance
    m_max: int = 40                 # channel truncation for full-kernel sums
    r_min: float = 1e-3             # inner edge of radial grids
    r_cut: float = 50.0             # outer edge of radial grids
    n_grid: int = 200               # Gauss-Legendre nodes on the radial grid
    energy_cutoff: float = 20.0     # Lambda in the spectral representation
    seed: int = 1234                # RNG seed for sampled checks
    bessel_series_zmax: float = 36.0   # power-series / large-z crossover, frozen
    bessel_asymp_numax: float = 5.0    # Hankel asymptotics order limit, frozen
    confluence_halfwidth: float = 0.02  # relative half width of the kappa=0 guard window

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.m_max < 1 or self.n_grid < 8:
            raise ValueError("m_max/n_grid too small")
        if not (0 < self.r_min < 1 < self.r_cut):
            raise ValueError("need 0 < r_min < 1 < r_cut")

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    @classmethod
    def from_file(cls, path: str) -> "Config":
        with open(path) as fh:
            data = json.load(fh)
        return cls(**data)


DEFAULT = Config()
