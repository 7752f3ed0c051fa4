"""Configuration loading: TOML or JSON file, environment overrides for keys."""
from __future__ import annotations

import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .insights import ExtractionConfig
from .retrieval import STUB_DIMENSION, MergeConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "ServiceConfig", "load_config", "config_doc", "config_from_doc"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)
    merge: MergeConfig = field(default_factory=MergeConfig)
    samples: int = 3
    history_window: int = 5
    step: int = 1
    offline: bool = True
    persist_dir: str | None = None
    embed_endpoint: str | None = None
    embed_dimension: int = STUB_DIMENSION
    embed_api_key: str | None = None
    lm_endpoint: str | None = None
    lm_model: str | None = None
    lm_api_key: str | None = None
    lm_diversity: float = 0.7

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ConfigError("samples must be at least 1")
        if self.history_window < 0:
            raise ConfigError("history_window must be nonnegative")
        if self.step < 0:
            raise ConfigError("step must be nonnegative")
        if not self.offline:
            if not self.embed_endpoint:
                raise ConfigError("online mode needs providers.embed_endpoint")
            if not (self.lm_endpoint and self.lm_model):
                raise ConfigError("online mode needs providers.lm_endpoint and lm_model")


def _build(sections: dict) -> ServiceConfig:
    known = {"extraction", "merge", "reasoner", "providers", "service"}
    unknown = set(sections) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    def sub(name: str, cls, rename: dict | None = None):
        data = dict(sections.get(name, {}))
        rename = rename or {}
        data = {rename.get(k, k): v for k, v in data.items()}
        names = {f.name for f in dataclasses.fields(cls)}
        bad = set(data) - names
        if bad:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(bad)}")
        for key in ("aggregates", "measures"):
            if key in data and data[key] is not None:
                data[key] = tuple(data[key])
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad [{name}] section: {exc}") from exc

    extraction = sub("extraction", ExtractionConfig)
    merge = sub("merge", MergeConfig)
    reasoner = dict(sections.get("reasoner", {}))
    providers = dict(sections.get("providers", {}))
    service = dict(sections.get("service", {}))
    kwargs = {
        "samples": int(reasoner.pop("samples", 3)),
        "history_window": int(reasoner.pop("history_window", 5)),
        "step": int(service.pop("step", 1)),
        "offline": bool(service.pop("offline", True)),
        "persist_dir": service.pop("persist_dir", None),
        "embed_endpoint": providers.pop("embed_endpoint", None),
        "embed_dimension": int(providers.pop("embed_dimension", STUB_DIMENSION)),
        "embed_api_key": providers.pop("embed_api_key", None),
        "lm_endpoint": providers.pop("lm_endpoint", None),
        "lm_model": providers.pop("lm_model", None),
        "lm_api_key": providers.pop("lm_api_key", None),
        "lm_diversity": float(providers.pop("lm_diversity", 0.7)),
    }
    for name, leftovers in (("reasoner", reasoner), ("providers", providers), ("service", service)):
        if leftovers:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(leftovers)}")
    return ServiceConfig(extraction=extraction, merge=merge, **kwargs)


def load_config(path: str | None = None, env: dict | None = None) -> ServiceConfig:
    """Reads TOML or JSON (by extension); IW_* environment variables win."""
    sections: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        if p.suffix.lower() == ".json":
            sections = json.loads(p.read_text("utf-8"))
        elif p.suffix.lower() == ".toml":
            with open(p, "rb") as fh:
                sections = tomllib.load(fh)
        else:
            raise ConfigError(f"config must be .toml or .json, got {p.suffix!r}")
        if not isinstance(sections, dict):
            raise ConfigError("config root must be a table/object")

    env = dict(os.environ if env is None else env)
    if "IW_OFFLINE" in env:
        sections.setdefault("service", {})["offline"] = env["IW_OFFLINE"].lower() in ("1", "true", "yes")
    if "IW_PERSIST_DIR" in env:
        sections.setdefault("service", {})["persist_dir"] = env["IW_PERSIST_DIR"]
    if "IW_EMBED_API_KEY" in env:
        sections.setdefault("providers", {})["embed_api_key"] = env["IW_EMBED_API_KEY"]
    if "IW_LM_API_KEY" in env:
        sections.setdefault("providers", {})["lm_api_key"] = env["IW_LM_API_KEY"]
    return _build(sections)


def config_doc(cfg: ServiceConfig) -> dict:
    """Snapshot-safe view: provider keys never land on disk."""
    doc = {
        "extraction": dataclasses.asdict(cfg.extraction),
        "merge": dataclasses.asdict(cfg.merge),
        "reasoner": {"samples": cfg.samples, "history_window": cfg.history_window},
        "providers": {
            "embed_endpoint": cfg.embed_endpoint,
            "embed_dimension": cfg.embed_dimension,
            "lm_endpoint": cfg.lm_endpoint,
            "lm_model": cfg.lm_model,
            "lm_diversity": cfg.lm_diversity,
        },
        "service": {"step": cfg.step, "offline": cfg.offline, "persist_dir": cfg.persist_dir},
    }
    for key in ("aggregates", "measures"):
        if doc["extraction"][key] is not None:
            doc["extraction"][key] = list(doc["extraction"][key])
    return doc


def config_from_doc(doc: dict, env: dict | None = None) -> ServiceConfig:
    sections = {k: dict(v) for k, v in doc.items()}
    env = {} if env is None else dict(env)
    if "IW_EMBED_API_KEY" in env:
        sections.setdefault("providers", {})["embed_api_key"] = env["IW_EMBED_API_KEY"]
    if "IW_LM_API_KEY" in env:
        sections.setdefault("providers", {})["lm_api_key"] = env["IW_LM_API_KEY"]
    return _build(sections)
