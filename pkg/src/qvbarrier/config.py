"""Run configuration: TOML/JSON parsing and validation into library objects.

Barriers and spots are quoted in price space and converted to logs here;
complex numbers are [re, im] pairs.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:       # python < 3.11
    import tomli as tomllib

from .charfun import Branch
from .claims import ClaimKind, ClaimSpec
from .errors import ConfigError
from .simulator import DeterministicVol, RegimeSwitchingVol

__all__ = ["load_config", "parse_claim", "parse_model", "parse_complex", "numerics_defaults"]


def load_config(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {p} not found")
    if p.suffix.lower() == ".json":
        return json.loads(p.read_text())
    with open(p, "rb") as fh:
        return tomllib.load(fh)


def parse_complex(value, name: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{name} must be a number or [re, im] pair")


def _log_level(value, name: str) -> float:
    v = float(value)
    if v <= 0:
        raise ConfigError(f"{name} must be a positive price")
    return math.log(v)


def parse_claim(cfg: dict) -> ClaimSpec:
    c = cfg.get("claim")
    if not isinstance(c, dict):
        raise ConfigError("missing [claim] section")
    try:
        kind = ClaimKind(c.get("kind", ""))
    except ValueError:
        raise ConfigError(f"unknown claim kind {c.get('kind')!r}") from None
    if "spot" not in c:
        raise ConfigError("claim needs a spot price")
    branch = {"plus": Branch.PLUS, "minus": Branch.MINUS}.get(
        str(c.get("branch", "plus")).lower())
    if branch is None:
        raise ConfigError("branch must be 'plus' or 'minus'")
    try:
        return ClaimSpec(
            kind=kind,
            x0=_log_level(c["spot"], "spot"),
            lower=_log_level(c["barrier_lower"], "barrier_lower") if "barrier_lower" in c else None,
            upper=_log_level(c["barrier_upper"], "barrier_upper") if "barrier_upper" in c else None,
            j=int(c.get("j", 0)), k=int(c.get("k", 0)),
            p=parse_complex(c.get("p", 0.0), "p"),
            s=parse_complex(c.get("s", 0.0), "s"),
            r=float(c["r"]) if "r" in c else None,
            eps=float(c["eps"]) if "eps" in c else None,
            maturity=float(c.get("maturity", 1.0)),
            branch=branch,
        )
    except (ValueError, ConfigError) as exc:
        raise ConfigError(str(exc)) from None


def parse_model(cfg: dict):
    m = cfg.get("model", {"kind": "deterministic", "sigma": 0.2})
    kind = m.get("kind", "deterministic")
    if kind == "deterministic":
        return DeterministicVol(float(m.get("sigma", 0.2)))
    if kind == "regime":
        try:
            return RegimeSwitchingVol(
                states=tuple(float(s) for s in m["states"]),
                generator=tuple(tuple(float(x) for x in row) for row in m["rates"]),
                initial_state=int(m.get("initial_state", 0)),
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad regime model: {exc}") from None
    raise ConfigError(f"unknown model kind {kind!r}")


def numerics_defaults(cfg: dict) -> dict:
    n = dict(cfg.get("numerics", {}))
    out = {
        "smoothing_n": int(n.get("smoothing_n", 25)),
        "image_q": int(n.get("image_q", 5)),
        "mc_paths": int(n.get("mc_paths", 100_000)),
        "grid_steps": int(n.get("grid_steps", 512)),
        "seed": int(n.get("seed", 0)),
        "law_bins": int(n.get("law_bins", 512)),
        "law_draws": int(n.get("law_draws", 100_000)),
        "smoothing_sequence": [int(v) for v in n.get("smoothing_sequence", [])],
    }
    for key in ("contour_g_omega_i", "contour_h_omega_i", "half_width"):
        if key in n:
            out[key] = float(n[key])
    if out["smoothing_n"] < 1 or out["image_q"] < 0:
        raise ConfigError("smoothing_n must be >= 1 and image_q >= 0")
    return out
