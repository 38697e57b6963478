"""System parameters, derived rates, stability and the CTMC transition structure."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ParameterDomainError

PARAM_NAMES = ("lambda1", "lambda2", "nu1", "nu2", "r", "phi1", "phi2")

# either stability inequality within this distance of equality counts as unstable
STABILITY_MARGIN = 1e-12


@dataclass(frozen=True)
class ModelParams:
    lambda1: float
    lambda2: float
    nu1: float = 1.0
    nu2: float = 1.0
    r: float = 1.0
    phi1: float = 0.5
    phi2: float = 0.5

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterDomainError(f"{f.name} must be a finite number, got {v!r}", f.name)
            object.__setattr__(self, f.name, float(v))
        for name in PARAM_NAMES:
            if getattr(self, name) <= 0:
                raise ParameterDomainError(f"{name} must be > 0, got {getattr(self, name)!r}", name)
        for name in ("phi1", "phi2"):
            if getattr(self, name) >= 1:
                raise ParameterDomainError(f"{name} must lie in (0, 1), got {getattr(self, name)!r}", name)
        if self.phi1 + self.phi2 <= 1:
            raise ParameterDomainError(
                f"phi1 + phi2 must exceed 1, got {self.phi1 + self.phi2!r}", "phi1")

    def swapped(self) -> "ModelParams":
        """Same system with the queue labels exchanged."""
        return ModelParams(self.lambda2, self.lambda1, self.nu2, self.nu1, self.r, self.phi2, self.phi1)

    def scaled(self, factor: float) -> "ModelParams":
        """All rates multiplied by ``factor``; the weights are unchanged."""
        return replace(self, lambda1=self.lambda1 * factor, lambda2=self.lambda2 * factor,
                       nu1=self.nu1 * factor, nu2=self.nu2 * factor)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}


@dataclass(frozen=True)
class DerivedRates:
    mu1: float
    mu2: float
    rho1: float
    rho2: float


def derive_rates(params: ModelParams) -> DerivedRates:
    s = params.phi1 + params.phi2
    mu1 = params.nu1 * params.r / s
    mu2 = params.nu2 * params.r / s
    return DerivedRates(mu1, mu2, params.lambda1 / mu1, params.lambda2 / mu2)


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    lhs1: float
    lhs2: float
    near_boundary: bool

    @property
    def label(self) -> str:
        return "stable" if self.stable else "unstable"


def stability_check(params: ModelParams) -> StabilityVerdict:
    d = derive_rates(params)
    lhs1 = d.rho1 + (1 - params.phi1) / params.phi2 * d.rho2
    lhs2 = (1 - params.phi2) / params.phi1 * d.rho1 + d.rho2
    near = abs(1 - lhs1) <= STABILITY_MARGIN or abs(1 - lhs2) <= STABILITY_MARGIN
    stable = lhs1 < 1 - STABILITY_MARGIN and lhs2 < 1 - STABILITY_MARGIN
    return StabilityVerdict(stable, lhs1, lhs2, near)


@dataclass(frozen=True)
class TransitionRates:
    """Rates keyed by displacement (dx, dy) for the four regions of the quarter plane."""
    interior: dict
    h_boundary: dict
    v_boundary: dict
    origin: dict

    def at(self, n1: int, n2: int) -> dict:
        if n1 > 0 and n2 > 0:
            return self.interior
        if n1 > 0:
            return self.h_boundary
        if n2 > 0:
            return self.v_boundary
        return self.origin


def transition_rates(params: ModelParams) -> TransitionRates:
    d = derive_rates(params)
    l1, l2 = params.lambda1, params.lambda2
    interior = {(1, 0): l1, (0, 1): l2, (-1, 0): params.phi1 * d.mu1, (0, -1): params.phi2 * d.mu2}
    h_boundary = {(1, 0): l1, (0, 1): l2, (-1, 0): d.mu1}
    v_boundary = {(1, 0): l1, (0, 1): l2, (0, -1): d.mu2}
    origin = {(1, 0): l1, (0, 1): l2}
    return TransitionRates(interior, h_boundary, v_boundary, origin)


def read_config(path) -> dict:
    """Parse a flat ``key=value`` file. Blank lines and ``#`` comments are ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterDomainError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def params_from_mapping(values: dict) -> ModelParams:
    kwargs = {}
    for name in PARAM_NAMES:
        if name not in values or values[name] is None:
            raise ParameterDomainError(f"missing parameter {name}", name)
        try:
            kwargs[name] = float(values[name])
        except (TypeError, ValueError):
            raise ParameterDomainError(f"{name} must be a number, got {values[name]!r}", name) from None
    return ModelParams(**kwargs)
