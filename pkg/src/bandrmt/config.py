"""Experiment configuration: plain-text key-value files with one section per
module.

Grammar (INI dialect, parsed by configparser):

    [profile]
    kind = exponential          ; box | exponential | gaussian | power_law
    param = 1.0                 ; scale, or tail exponent for power_law

    [ensemble]
    n = 500                     ; half-size, N = 2n + 1
    b = 51                      ; band width, real, 1 <= b <= N
    v = 1.0                     ; variance scale
    seed = 20260808             ; 64-bit base seed

    [experiment]
    kind = correlation          ; semicircle | correlation | scaling |
                                ; local-scale | theory-table | pointwise
    z_points = 0.4+3.2j, 0.4-3.2j
    replicas = 2000

Experiment keys by kind:
  semicircle   profiles (kind:param list, optional), goe_n (optional)
  correlation  z_points (two), replicas
  scaling      grid (N:b list), z_points (two), replicas (per grid point)
  local-scale  lambda, delta_min, delta_max, delta_count
  theory-table z_points, z_pairs (z1 & z2 list, optional), lambda, deltas
  pointwise    z, L, b_list (optional, defaults to ensemble b), replicas

A run manifest (JSON) may be passed wherever a config file is accepted; the
embedded resolved configuration is re-run as-is.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field
from pathlib import Path

from .ensemble import EnsembleConfig
from .profiles import PROFILE_KINDS, Profile, make_profile

SUBCOMMANDS = (
    "semicircle", "correlation", "scaling", "local-scale", "theory-table", "pointwise",
)


class ConfigError(ValueError):
    """Invalid configuration; message is a single machine-parsable line."""


@dataclass
class ExperimentSpec:
    subcommand: str
    profile: Profile
    ensemble: dict = field(default_factory=dict)   # n, b, v, seed (when present)
    experiment: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """Plain-dict form embedded in manifests; sufficient to re-run."""
        ens = dict(self.ensemble)
        if "n" in ens:
            ens.setdefault("truncation", 1e-12)  # band tail cutoff, reported
        return {
            "profile": {"kind": self.profile.kind, "param": self.profile.param},
            "ensemble": ens,
            "experiment": {"kind": self.subcommand, **self.experiment},
        }

    def ensemble_config(self, *, n=None, b=None, seed=None) -> EnsembleConfig:
        overrides = {"n": n, "b": b, "seed": seed}
        vals = {}
        for key in ("n", "b", "v", "seed"):
            val = overrides.get(key)
            if val is None:
                val = self.ensemble.get(key)
            if val is None:
                raise ConfigError(f"ensemble section is missing `{key}`")
            vals[key] = val
        try:
            return EnsembleConfig(
                n=int(vals["n"]), b=float(vals["b"]), v=float(vals["v"]),
                profile=self.profile, base_seed=int(vals["seed"]),
                truncation=float(self.ensemble.get("truncation", 1e-12)),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def v(self) -> float:
        return float(self.ensemble.get("v", 1.0))


def parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}") from exc


def parse_complex_list(text: str) -> list[complex]:
    return [parse_complex(tok) for tok in text.split(",") if tok.strip()]


def parse_grid(text: str) -> list[tuple[int, float]]:
    """`N:b` pairs separated by commas."""
    grid = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            n_str, b_str = tok.split(":")
            grid.append((int(n_str), float(b_str)))
        except ValueError as exc:
            raise ConfigError(f"cannot parse grid entry {tok!r} (expected N:b)") from exc
    if not grid:
        raise ConfigError("grid is empty")
    return grid


def _spec_from_sections(sections: dict) -> ExperimentSpec:
    exp = dict(sections.get("experiment", {}))
    sub = exp.pop("kind", None)
    if sub not in SUBCOMMANDS:
        raise ConfigError(f"unknown experiment kind {sub!r}; choose from {SUBCOMMANDS}")
    prof_sec = sections.get("profile", {})
    kind = prof_sec.get("kind", "exponential")
    if kind not in PROFILE_KINDS:
        raise ConfigError(f"unknown profile kind {kind!r}")
    try:
        profile = make_profile(kind, float(prof_sec.get("param", 1.0)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    ensemble = dict(sections.get("ensemble", {}))
    return ExperimentSpec(subcommand=sub, profile=profile, ensemble=ensemble, experiment=exp)


def load_spec(path: str | Path) -> ExperimentSpec:
    """Load an experiment spec from an INI config or a JSON run manifest."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    text = path.read_text()
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        sections = payload.get("config", payload)
        return _spec_from_sections(sections)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    sections = {name: dict(parser[name]) for name in parser.sections()}
    return _spec_from_sections(sections)
