import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional

from src.constants import FIXED_POINT_BITS
from src.event_logger import EventLogger
from src.utils import fraction_to_json, to_fraction

# Multipliers for the thresholds of the small mean-square step:
#   large fibres f >= large_fibre * K * alpha, small fibres f <= small_fibre * alpha,
#   second moments <= second_moment * L * alpha^3, first moments and the density
#   spectrum <= first_moment * L * alpha^2 / K.
DEFAULT_BRANCH_THRESHOLDS: Dict[str, Fraction] = {
    "large_fibre": Fraction(4),
    "small_fibre": Fraction(1, 4),
    "second_moment": Fraction(1),
    "first_moment": Fraction(1, 4),
}


@dataclass
class EngineConfig:
    C_S: Fraction = Fraction(1)
    bsg_min_subgroup_density: Fraction = Fraction(0)
    fixed_point_bits: int = FIXED_POINT_BITS
    max_steps: int = 64
    branch_thresholds: Dict[str, Fraction] = field(
        default_factory=lambda: dict(DEFAULT_BRANCH_THRESHOLDS)
    )
    seed: int = 0
    workers: Optional[int] = None
    verbose: bool = False
    event_logger: EventLogger = field(default_factory=EventLogger)

    def print_config(self):
        print(self)

    def __str__(self) -> str:
        thresholds = ", ".join(f"{k}={v}" for k, v in sorted(self.branch_thresholds.items()))
        base_config = (
            f"Engine Setup:\n"
            f"  - C_S: {self.C_S}\n"
            f"  - BSG Min Subgroup Density: {self.bsg_min_subgroup_density}\n"
            f"  - Fixed-Point Bits: {self.fixed_point_bits}\n"
            f"  - Max Steps: {self.max_steps}\n"
            f"  - Branch Thresholds: {thresholds}\n"
            f"  - Seed: {self.seed}\n"
            f"  - Workers: {self.workers or 'default'}\n"
        )
        if self.event_logger and self.event_logger.get_events():
            event_lines = "\n".join(
                f"    {event.step:4d} - {event.branch}" for event in self.event_logger.get_events()
            )
            return base_config + f"\n  Logged Events:\n{event_lines}"
        return base_config + "\n  No events logged."

    def uses_default_thresholds(self) -> bool:
        return self.branch_thresholds == DEFAULT_BRANCH_THRESHOLDS

    def threshold(self, name: str) -> Fraction:
        return self.branch_thresholds[name]

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        """Populate the config from a dictionary, validating every field."""
        try:
            _C_S = to_fraction(data.get("C_S", 1))
            _min_density = to_fraction(data.get("bsg_min_subgroup_density", 0))
            _bits = int(data.get("fixed_point_bits", FIXED_POINT_BITS))
            _max_steps = int(data.get("max_steps", 64))
            _seed = int(data.get("seed", 0))
            _workers = data.get("workers")
            _workers = None if _workers is None else int(_workers)
            _verbose = bool(data.get("verbose", False))

            _thresholds = dict(DEFAULT_BRANCH_THRESHOLDS)
            for name, value in dict(data.get("branch_thresholds") or {}).items():
                if name not in DEFAULT_BRANCH_THRESHOLDS:
                    raise ValueError(f"unknown branch threshold '{name}'")
                _thresholds[name] = to_fraction(value)

            if _C_S <= 0:
                raise ValueError("C_S must be positive")
            if not 0 <= _min_density <= 1:
                raise ValueError("bsg_min_subgroup_density must lie in [0, 1]")
            if _bits < 1:
                raise ValueError("fixed_point_bits must be at least 1")
            if _max_steps < 1:
                raise ValueError("max_steps must be at least 1")
            if _seed < 0 or _seed >= 2**64:
                raise ValueError("seed must be an unsigned 64-bit integer")
            if _workers is not None and _workers < 1:
                raise ValueError("workers must be at least 1")
            if any(v <= 0 for v in _thresholds.values()):
                raise ValueError("branch thresholds must be positive")

            cfg = cls(
                C_S=_C_S,
                bsg_min_subgroup_density=_min_density,
                fixed_point_bits=_bits,
                max_steps=_max_steps,
                branch_thresholds=_thresholds,
                seed=_seed,
                workers=_workers,
                verbose=_verbose,
            )

            if "event_logger" in data:
                evlog_data = data["event_logger"]
                if isinstance(evlog_data, EventLogger):
                    cfg.event_logger = evlog_data
                elif isinstance(evlog_data, list):
                    cfg.event_logger = EventLogger.from_dict(evlog_data)

            return cfg

        except (ValueError, TypeError, ZeroDivisionError) as e:
            raise ValueError(f"Invalid input in engine config: {e}")

    @classmethod
    def from_json_file(cls, path: str) -> "EngineConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid input in engine config: {e}")
        if not isinstance(data, dict):
            raise ValueError("Invalid input in engine config: top level must be an object")
        return cls.from_dict(data)

    def to_dict(self, include_events: bool = True) -> dict:
        data = {
            "C_S": fraction_to_json(self.C_S),
            "bsg_min_subgroup_density": fraction_to_json(self.bsg_min_subgroup_density),
            "fixed_point_bits": self.fixed_point_bits,
            "max_steps": self.max_steps,
            "branch_thresholds": {
                k: fraction_to_json(v) for k, v in sorted(self.branch_thresholds.items())
            },
            "seed": self.seed,
            "workers": self.workers,
            "verbose": self.verbose,
        }
        if include_events:
            data["event_logger"] = self.event_logger.to_dict() if self.event_logger else None
        return data

    def to_json(self, indent: int = 4) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def clone_with(self, **overrides) -> "EngineConfig":
        """
        Create a copy of the current config with updated fields.

        A fresh EventLogger is created unless one is passed explicitly.
        """
        cfg_dict = self.to_dict(include_events=False)
        cfg_dict.update({k: v for k, v in overrides.items() if k != "event_logger"})
        new_cfg = EngineConfig.from_dict(cfg_dict)
        new_cfg.event_logger = overrides.get("event_logger", EventLogger())
        return new_cfg
