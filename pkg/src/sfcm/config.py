"""Scenario configuration: the file-based replacement for interactive sliders.

A scenario is one JSON object; every key is optional and falls back to the
documented default. `ScenarioConfig.digest()` feeds the genesis event so a
run's provenance is pinned in its own log.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, fields

from .core import as_fraction, canonical_json
from .errors import ConfigError

DURATION_PROFILES = {
    # Average site durations: combined efficiency and seismic works run
    # eight months, efficiency-only works run six.
    "combined": 8,
    "eco_only": 6,
}


@dataclass
class ScenarioConfig:
    seed: int = 42
    max_ticks: int = 365
    workflow_count: int = 5
    gc_count: int = 1
    technician_count: int = 2
    investor_count: int = 2
    client_count: int | None = None
    gc_approval_threshold: float = 0.5
    technician_approval_threshold: float = 0.5
    engineer_payment_pct: float = 0.20
    accountant_payment_pct: float = 0.10
    discount_rate: float = 0.90
    accrual_factor: float = 1.10
    credit_sale_ratio: float = 0.95
    wps_fractions: tuple[float, ...] = (0.30, 0.60, 1.00)
    anticipation_fraction: float = 0.10
    value_range: tuple[int, int] = (1_000_000, 10_000_000)
    duration_profile: str | int = "combined"
    ticks_per_month: int = 30
    soa_cap: int = 100_000_000
    schedule_grace_ratio: float = 0.10
    c2_period_ticks: int = 30
    suspicion_rate: float = 0.5
    score_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    score_limit: float = 2.0
    incentive_penalty: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged = {}
        for f in fields(cls):
            if f.name in data:
                value = data[f.name]
                if isinstance(value, list):
                    value = tuple(value)
                merged[f.name] = value
        config = cls(**merged)
        config.validate()
        return config

    @classmethod
    def from_file(cls, path: str) -> "ScenarioConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(data)

    def validate(self) -> None:
        ratio_fields = [
            ("gc_approval_threshold", self.gc_approval_threshold),
            ("technician_approval_threshold", self.technician_approval_threshold),
            ("engineer_payment_pct", self.engineer_payment_pct),
            ("accountant_payment_pct", self.accountant_payment_pct),
            ("discount_rate", self.discount_rate),
            ("credit_sale_ratio", self.credit_sale_ratio),
            ("anticipation_fraction", self.anticipation_fraction),
            ("schedule_grace_ratio", self.schedule_grace_ratio),
            ("suspicion_rate", self.suspicion_rate),
        ]
        for name, value in ratio_fields:
            if not 0.0 <= float(value) <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        if self.discount_rate <= 0.0:
            raise ConfigError("discount_rate must be positive")
        if self.accrual_factor < 1.0:
            raise ConfigError("accrual_factor must be >= 1")
        counts = [
            ("workflow_count", self.workflow_count),
            ("gc_count", self.gc_count),
            ("technician_count", self.technician_count),
            ("investor_count", self.investor_count),
            ("max_ticks", self.max_ticks),
        ]
        for name, value in counts:
            if value < 0:
                raise ConfigError(f"{name} must be >= 0, got {value}")
        if self.workflow_count > 0:
            if self.gc_count < 1:
                raise ConfigError("need at least one general contractor")
            if self.technician_count < 2:
                raise ConfigError("need at least two technicians (engineer and accountant)")
            if self.investor_count < 1:
                raise ConfigError("need at least one investor to back the fund")
        lo, hi = self.value_range
        if lo <= 0 or hi < lo:
            raise ConfigError(f"value_range must satisfy 0 < min <= max, got {self.value_range}")
        if len(self.wps_fractions) < 1:
            raise ConfigError("wps_fractions must not be empty")
        prev = 0.0
        for frac in self.wps_fractions:
            if not prev < float(frac) <= 1.0:
                raise ConfigError("wps_fractions must be strictly increasing within (0, 1]")
            prev = float(frac)
        if float(self.wps_fractions[-1]) != 1.0:
            raise ConfigError("last WPS fraction must be 1.0")
        if float(self.anticipation_fraction) >= float(self.wps_fractions[0]):
            raise ConfigError("anticipation_fraction must be below the first WPS fraction")
        if isinstance(self.duration_profile, str):
            if self.duration_profile not in DURATION_PROFILES:
                raise ConfigError(
                    f"duration_profile must be one of {sorted(DURATION_PROFILES)} or a tick count"
                )
        elif self.duration_profile <= 0:
            raise ConfigError("custom duration_profile must be a positive tick count")
        if self.ticks_per_month <= 0 or self.c2_period_ticks <= 0:
            raise ConfigError("ticks_per_month and c2_period_ticks must be positive")
        if any(w < 0 for w in self.score_weights) or len(self.score_weights) != 3:
            raise ConfigError("score_weights must be three non-negative numbers")
        if self.incentive_penalty < 0:
            raise ConfigError("incentive_penalty must be >= 0")
        if self.client_count is not None and self.client_count * 2 < self.workflow_count:
            raise ConfigError(
                "client_count too small: each client may hold at most two workflows"
            )

    @property
    def duration_ticks(self) -> int:
        if isinstance(self.duration_profile, str):
            return DURATION_PROFILES[self.duration_profile] * self.ticks_per_month
        return int(self.duration_profile)

    @property
    def grace_ticks(self) -> int:
        return math.floor(as_fraction(self.schedule_grace_ratio) * self.duration_ticks)

    def resolved_client_count(self) -> int:
        if self.client_count is not None:
            return self.client_count
        return max(1, math.ceil(self.workflow_count / 2)) if self.workflow_count else 0

    def to_dict(self) -> dict:
        return {
            f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v)
            for f in fields(self)
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()

    def genesis_params(self, fi_id: str = "fi") -> dict:
        """Parameters embedded in the genesis event and needed during replay."""
        return {
            "fi": fi_id,
            "seed": self.seed,
            "config_digest": self.digest(),
            "c2_period_ticks": self.c2_period_ticks,
            "ticks_per_month": self.ticks_per_month,
            "duration_ticks": self.duration_ticks,
            "grace_ticks": self.grace_ticks,
            "wps_fractions": [str(f) for f in self.wps_fractions],
            "anticipation_fraction": str(self.anticipation_fraction),
            "engineer_payment_pct": str(self.engineer_payment_pct),
            "accountant_payment_pct": str(self.accountant_payment_pct),
            "discount_rate": str(self.discount_rate),
            "accrual_factor": str(self.accrual_factor),
            "credit_sale_ratio": str(self.credit_sale_ratio),
            "soa_cap": self.soa_cap,
            "suspicion_rate": str(self.suspicion_rate),
            "score_weights": [str(w) for w in self.score_weights],
            "score_limit": str(self.score_limit),
        }
