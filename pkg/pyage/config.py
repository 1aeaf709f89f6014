from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import TYPE_CHECKING, Any

from pyage.errors import ConfigurationError

if TYPE_CHECKING:
    from pyage.smoothing import KMode

log = logging.getLogger(__file__)

__all__ = ("RunConfig", "DATASET_PRESETS", "MODES", "VARIANTS", "NMI_AVERAGES")

MODES = ("cluster", "linkpred")
VARIANTS = ("age", "ls", "ls_ra", "ls_rx")
NMI_AVERAGES = ("arithmetic", "geometric")

# t and the four threshold ratios (fractions of n^2) per benchmark dataset
DATASET_PRESETS: dict[str, dict[str, Any]] = {
    "cora": {
        "t": 8,
        "r_pos_st_ratio": 0.0110,
        "r_pos_ed_ratio": 0.0010,
        "r_neg_st_ratio": 0.1,
        "r_neg_ed_ratio": 0.5,
    },
    "citeseer": {
        "t": 3,
        "r_pos_st_ratio": 0.0015,
        "r_pos_ed_ratio": 0.0010,
        "r_neg_st_ratio": 0.1,
        "r_neg_ed_ratio": 0.5,
    },
    "wiki": {
        "t": 1,
        "r_pos_st_ratio": 0.0011,
        "r_pos_ed_ratio": 0.0010,
        "r_neg_st_ratio": 0.1,
        "r_neg_ed_ratio": 0.5,
    },
    "pubmed": {
        "t": 35,
        "r_pos_st_ratio": 0.0013,
        "r_pos_ed_ratio": 0.0010,
        "r_neg_st_ratio": 0.7,
        "r_neg_ed_ratio": 0.8,
    },
}


@dataclass(frozen=True)
class RunConfig:
    """
    Every knob of a run, serialisable as one flat JSON document.

    The threshold ratios are fractions of the n^2 ordered node pairs.
    Thresholds are updated every ``update_every`` epochs, so the number of
    updates is ``max_iter // update_every``.
    """

    dataset: str | None = None
    t: int = 8
    k: KMode = "auto"
    h: int = 500
    lr: float = 0.001
    max_iter: int = 400
    update_every: int = 10
    r_pos_st_ratio: float = 0.0110
    r_pos_ed_ratio: float = 0.0010
    r_neg_st_ratio: float = 0.1
    r_neg_ed_ratio: float = 0.5
    seed: int = 0
    mode: str = "cluster"
    variant: str = "age"

    # feature handling
    normalize_features: bool = False
    reconstruct_smoothed: bool = False

    # ablation switches of the adaptive encoder
    update_thresholds: bool = True
    reselect: bool = True

    # numerics
    nmi_average: str = "arithmetic"
    pair_budget: int = 10**8
    quantile_samples: int = 10**6
    dense_cap: int = 3000
    power_tol: float = 1e-8
    power_max_iter: int = 1000
    spectral_restarts: int = 10
    spectrum_bins: int = 50

    # link prediction split
    val_frac: float = 0.05
    test_frac: float = 0.10

    out: str = "runs"

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ConfigurationError(f"t must be non-negative, got {self.t}")
        if self.k != "auto" and (
            isinstance(self.k, bool)
            or not isinstance(self.k, (int, float))
            or not self.k > 0
        ):
            raise ConfigurationError(
                f"k must be 'auto' or a positive number, got {self.k!r}"
            )
        counts = ("h", "max_iter", "update_every", "spectral_restarts", "spectrum_bins")
        for name in counts:
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be at least 1")
        if self.update_every > self.max_iter:
            raise ConfigurationError("update_every must not exceed max_iter")
        if not self.lr > 0:
            raise ConfigurationError(f"lr must be positive, got {self.lr}")
        for name in (
            "r_pos_st_ratio",
            "r_pos_ed_ratio",
            "r_neg_st_ratio",
            "r_neg_ed_ratio",
        ):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ConfigurationError(f"{name} must lie in (0, 1], got {value}")
        if self.r_pos_ed_ratio > self.r_pos_st_ratio:
            raise ConfigurationError("r_pos ratios must not increase from st to ed")
        if self.r_neg_ed_ratio < self.r_neg_st_ratio:
            raise ConfigurationError("r_neg ratios must not decrease from st to ed")
        if self.r_pos_st_ratio > self.r_neg_st_ratio:
            raise ConfigurationError("r_pos_st_ratio must not exceed r_neg_st_ratio")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.variant not in VARIANTS:
            raise ConfigurationError(
                f"variant must be one of {VARIANTS}, got {self.variant!r}"
            )
        if self.nmi_average not in NMI_AVERAGES:
            raise ConfigurationError(
                f"nmi_average must be one of {NMI_AVERAGES}, got {self.nmi_average!r}"
            )
        if not (0 <= self.val_frac and 0 <= self.test_frac):
            raise ConfigurationError("split fractions must be non-negative")
        if not self.val_frac + self.test_frac < 1:
            raise ConfigurationError("val_frac + test_frac must be below 1")

    @property
    def total_updates(self) -> int:
        return self.max_iter // self.update_every

    @classmethod
    def for_dataset(cls, name: str | None, **overrides: Any) -> RunConfig:
        """Defaults with the dataset's preset applied, then the overrides."""
        preset = DATASET_PRESETS.get((name or "").lower(), {})
        return cls(dataset=name, **{**preset, **overrides})

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**doc)
        except TypeError as e:
            raise ConfigurationError(str(e)) from e

    @classmethod
    def from_json(cls, path: str | Path) -> RunConfig:
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except OSError as e:
            raise ConfigurationError(f"{path}: cannot read ({e.strerror})") from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}: invalid JSON ({e})") from e
        if not isinstance(doc, dict):
            raise ConfigurationError(f"{path}: expected a JSON object")
        return cls.from_dict(doc)

    def with_overrides(self, **overrides: Any) -> RunConfig:
        """Copy with the given fields replaced; None values are ignored."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **changes) if changes else self

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()
