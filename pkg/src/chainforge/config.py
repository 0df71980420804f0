"""Pipeline configuration: a flat ``key = value`` text file.

Lines are ``key = value`` pairs; ``#`` starts a comment and blank lines are
ignored. Lists are comma-separated, year ranges may be written ``2007-2022``.
Unknown keys are rejected so typos surface at validation time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


class UpstreamMissingError(ConfigError):
    """A required artifact from an earlier pipeline stage is absent."""

    def __init__(self, artifact: Path, command: str):
        super().__init__(f"missing artifact {artifact}; run `forge {command}` first")
        self.artifact = artifact
        self.command = command


_PATH_KEYS = {"trade_files", "region_file", "catalog_file", "concordance_file"}
_LIST_INT_KEYS = {"years", "io_years", "category_years", "ev_years"}
_INT_KEYS = {"vintage", "growth_year0", "growth_year1", "train_year0", "train_year1",
             "base_year", "horizon", "vulnerability_year", "vulnerability_vintage",
             "ev_vintage", "max_iter", "seed", "n_trees", "max_depth"}
_FLOAT_KEYS = {"threshold", "rca_threshold", "tol"}
_BOOL_KEYS = {"figures", "trace"}
_STR_KEYS = {"io_file_pattern", "io_sector", "reconciliation", "anchor", "out_dir", "ev_compare"}


@dataclass
class PipelineConfig:
    # inputs
    trade_files: list[Path] = field(default_factory=list)
    io_file_pattern: str | None = None
    region_file: Path | None = None
    catalog_file: Path | None = None
    concordance_file: Path | None = None
    out_dir: Path = Path("out")
    # year selections
    vintage: int = 2007
    years: list[int] = field(default_factory=list)
    io_years: list[int] = field(default_factory=list)
    category_years: list[int] = field(default_factory=list)
    ev_years: list[int] = field(default_factory=list)
    growth_year0: int | None = None
    growth_year1: int | None = None
    train_year0: int | None = None
    train_year1: int | None = None
    base_year: int | None = None
    horizon: int = 5
    vulnerability_year: int | None = None
    vulnerability_vintage: int = 2012
    ev_vintage: int = 2017
    ev_compare: str = ""
    # parameters
    io_sector: str = "C29"
    threshold: float = 0.05
    rca_threshold: float = 1.0
    reconciliation: str = "weighted_average:0.5"
    anchor: str = "dummy_country"
    tol: float = 1e-10
    max_iter: int = 1000
    seed: int = 0
    n_trees: int = 100
    max_depth: int = 6
    figures: bool = True
    trace: bool = False
    # provenance
    source_path: Path | None = None

    def require(self, *keys: str):
        """Values for the given keys, erroring with the key names if unset."""
        out = []
        for key in keys:
            value = getattr(self, key)
            if value is None or (isinstance(value, (list, str)) and not value):
                raise ConfigError(f"config key {key!r} is required for this command")
            out.append(value)
        return out[0] if len(out) == 1 else out

    def io_files(self) -> dict[int, Path]:
        pattern = self.require("io_file_pattern")
        years = self.require("io_years")
        return {y: Path(pattern.format(year=y)) for y in years}


def _parse_years(value: str) -> list[int]:
    out: list[int] = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ConfigError(f"empty year range {part!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    if not out:
        raise ConfigError(f"empty year list {value!r}")
    return out


def _parse_bool(value: str) -> bool:
    low = value.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"bad boolean {value!r}")


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    known = {f.name for f in fields(PipelineConfig)}
    cfg = PipelineConfig(source_path=path)
    base = path.parent
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path} line {lineno}: expected key = value")
            key, _, value = (s.strip() for s in line.partition("="))
            if key not in known or key == "source_path":
                raise ConfigError(f"{path} line {lineno}: unknown key {key!r}")
            try:
                if key == "trade_files":
                    cfg.trade_files = [base / p.strip() for p in value.split(",") if p.strip()]
                elif key in _PATH_KEYS:
                    setattr(cfg, key, base / value)
                elif key == "out_dir":
                    cfg.out_dir = base / value
                elif key == "io_file_pattern":
                    cfg.io_file_pattern = str(base / value)
                elif key in _LIST_INT_KEYS:
                    setattr(cfg, key, _parse_years(value))
                elif key in _INT_KEYS:
                    setattr(cfg, key, int(value))
                elif key in _FLOAT_KEYS:
                    setattr(cfg, key, float(value))
                elif key in _BOOL_KEYS:
                    setattr(cfg, key, _parse_bool(value))
                else:
                    setattr(cfg, key, value)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"{path} line {lineno}: {exc}") from None
    validate_config(cfg)
    return cfg


def validate_config(cfg: PipelineConfig) -> None:
    """Referenced paths must exist; declared year lists must be non-empty."""
    for p in cfg.trade_files:
        if not p.exists():
            raise ConfigError(f"trade file not found: {p}")
    for key in ("region_file", "catalog_file", "concordance_file"):
        p = getattr(cfg, key)
        if p is not None and not p.exists():
            raise ConfigError(f"{key} not found: {p}")
    if cfg.io_file_pattern and cfg.io_years:
        for year, p in cfg.io_files().items():
            if not p.exists():
                raise ConfigError(f"IO file for {year} not found: {p}")
    if not 0.0 < cfg.threshold < 1.0:
        raise ConfigError("threshold must be in (0, 1)")
    if cfg.anchor not in ("none", "dummy_country"):
        raise ConfigError(f"unknown anchor {cfg.anchor!r}")
    if cfg.horizon <= 0:
        raise ConfigError("horizon must be positive")
