"""
Application-wide configuration helpers.

``Settings`` is the environment view (``.env`` then ``env.example``);
``SuiteConfig`` is one validated verification run.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import orjson
from dotenv import load_dotenv

from core.errors import UsageError

SUITES = ("ad", "g2", "munzner", "isoparametric", "austere", "bs-ricci", "homeo", "slag", "gauss", "all")
FORMATS = ("json", "csv")

DEFAULT_TOLERANCES: dict[str, float] = {
    "ad.relative": 1e-6,
    "ad.d_squared": 1e-10,
    "g2.metric": 1e-12,
    "g2.closed": 1e-12,
    "g2.volume": 1e-12,
    "munzner.pde": 1e-9,
    "isoparametric.spread": 1e-8,
    "focal.cluster": 1e-6,
    "austere.symmetry": 1e-6,
    "bs.spin": 1e-6,
    "bs.asd": 1e-5,
    "bs.negative": 1e-2,
    "homeo.stratification": 1e-12,
    "homeo.roundtrip": 1e-15,
    "homeo.collision": 1e-9,
    "homeo.injective": 0.5,
    "slag.lagrangian": 1e-8,
    "slag.phase": 1e-6,
    "slag.negative": 1e-3,
    "gauss.lagrangian": 1e-8,
}

DEFAULT_SAMPLES: dict[str, int] = {
    "ad": 20,
    "munzner": 200,
    "isoparametric": 50,
    "focal": 10,
    "focal.directions": 10,
    "bs.panel": 20,
    "bs.offpanel": 100,
    "homeo": 1000,
    "homeo.pairs": 10000,
    "slag": 20,
    "gauss": 30,
}

DEFAULT_FAMILIES = (
    "g1",
    "g2:k=1",
    "g2:k=2",
    "g2:k=3",
    "g2:k=4",
    "g2:k=5",
    "g3",
    "g3-adjoint",
    "fkm:m=1,ell=3",
)


@dataclass(frozen=True)
class Settings:
    """Typed view of environment configuration."""

    seed: int
    output_dir: Path
    report_format: str
    constants_path: Path
    manifest_dir: Path
    log_level: str


def _load_env() -> None:
    env_path = Path(".env")
    if env_path.exists():
        load_dotenv(env_path)
    load_dotenv("env.example", override=False)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return cached settings instance."""

    _load_env()
    base_dir = Path(".")

    def _path(value: str | None, default: str) -> Path:
        return (base_dir / Path(value or default)).resolve()

    return Settings(
        seed=int(os.getenv("VERIFY_SEED", "7")),
        output_dir=_path(os.getenv("VERIFY_OUTPUT_DIR"), "reports"),
        report_format=os.getenv("VERIFY_FORMAT", "json").lower(),
        constants_path=_path(os.getenv("VERIFY_CONSTANTS_PATH"), "data/fitted_constants.json"),
        manifest_dir=_path(os.getenv("VERIFY_MANIFEST_DIR"), "manifests"),
        log_level=os.getenv("VERIFY_LOG_LEVEL", "INFO").upper(),
    )


def ensure_directories() -> None:
    """Create filesystem locations that the app relies on."""

    settings = get_settings()
    settings.output_dir.mkdir(parents=True, exist_ok=True)
    settings.constants_path.parent.mkdir(parents=True, exist_ok=True)


def parse_selector(text: str) -> tuple[str, dict[str, int]]:
    """``"g2:k=3,n=7"`` -> ``("g2", {"k": 3, "n": 7})``."""

    kind, _, rest = text.partition(":")
    params: dict[str, int] = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"malformed family selector {text!r}")
        try:
            params[key.strip()] = int(value)
        except ValueError as exc:
            raise UsageError(f"non-integer parameter in family selector {text!r}") from exc
    return kind.strip(), params


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    seed: int
    samples: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_SAMPLES))
    tolerances: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    families: tuple[str, ...] = DEFAULT_FAMILIES
    report_format: str = "json"
    output: Path | None = None
    negative_controls: bool = True
    refit: bool = False

    def __post_init__(self) -> None:
        if self.suite not in SUITES:
            raise UsageError(f"unknown suite {self.suite!r}; expected one of {', '.join(SUITES)}")
        if self.report_format not in FORMATS:
            raise UsageError(f"unknown format {self.report_format!r}; expected json or csv")
        for key, value in self.tolerances.items():
            if key not in DEFAULT_TOLERANCES:
                raise UsageError(f"unknown tolerance {key!r}")
            if not value > 0:
                raise UsageError(f"tolerance {key} must be positive, got {value}")
        for key, value in self.samples.items():
            if key not in DEFAULT_SAMPLES:
                raise UsageError(f"unknown sample count {key!r}")
            if value < 1:
                raise UsageError(f"sample count {key} must be at least 1, got {value}")
        for selector in self.families:
            parse_selector(selector)

    def tolerance(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def sample_count(self, key: str) -> int:
        return int(self.samples.get(key, DEFAULT_SAMPLES[key]))

    def rng(self, *labels: str) -> np.random.Generator:
        return substream(self.seed, *labels)

    def as_dict(self) -> dict[str, Any]:
        echo = asdict(self)
        echo["output"] = str(self.output) if self.output else None
        echo["families"] = list(self.families)
        echo["samples"] = {**DEFAULT_SAMPLES, **self.samples}
        echo["tolerances"] = {**DEFAULT_TOLERANCES, **self.tolerances}
        return echo


def substream(seed: int, *labels: str) -> np.random.Generator:
    """Independent generator per ``(seed, labels)``; adding a label never shifts another stream."""

    digest = hashlib.sha256()
    digest.update(str(seed).encode("utf-8"))
    for label in labels:
        digest.update(b"\x00" + label.encode("utf-8"))
    return np.random.default_rng(int.from_bytes(digest.digest()[:8], "little"))


_CONFIG_KEYS = {"suite", "seed", "samples", "tolerances", "families", "format", "output", "negative_controls", "refit"}


def load_suite_config(path: Path | None = None, overrides: Mapping[str, Any] | None = None) -> SuiteConfig:
    """Merge a JSON config file, then command-line overrides, over the defaults."""

    document: dict[str, Any] = {}
    if path is not None:
        try:
            document = orjson.loads(Path(path).read_bytes())
        except FileNotFoundError as exc:
            raise UsageError(f"config file {path} does not exist") from exc
        except orjson.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(document, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(document) - _CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("samples", "tolerances"):
            document[key] = {**document.get(key, {}), **value}
        else:
            document[key] = value

    settings = get_settings()
    suite = document.get("suite")
    if suite is None:
        raise UsageError("no suite given")
    try:
        config = SuiteConfig(
            suite=str(suite),
            seed=int(document.get("seed", settings.seed)),
            samples={k: int(v) for k, v in document.get("samples", {}).items()},
            tolerances={k: float(v) for k, v in document.get("tolerances", {}).items()},
            families=tuple(document.get("families", DEFAULT_FAMILIES)),
            report_format=str(document.get("format", settings.report_format)).lower(),
            output=Path(document["output"]) if document.get("output") else None,
            negative_controls=bool(document.get("negative_controls", True)),
            refit=bool(document.get("refit", False)),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"malformed configuration: {exc}") from exc
    return config


def with_uniform_samples(config: SuiteConfig, count: int) -> SuiteConfig:
    """Every per-check sample count set to ``count``."""

    return replace(config, samples={key: count for key in DEFAULT_SAMPLES})
