"""Command-line front end: price, curve, verify, hedge, span.

Every command is driven by a TOML or JSON config plus a few overriding
flags, and writes CSV or JSON with fixed formatting so identical
(config, seed) pairs reproduce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .claims import ClaimKind, ClaimSpec
from .config import load_config, numerics_defaults, parse_claim, parse_complex, parse_model
from .errors import ConfigError, QvBarrierError
from .charfun import Branch
from .payoffs import (PayoffFn, frac_ki_payoff, frac_ki_payoff_fn,
                      powerexp_payoff, ratio_ki_payoff, ratio_ki_payoff_fn,
                      sbko_image, sbko_image_upper, ski_psi_derivs, ski_psi_payoff)
from .pricer import (ContourSpec, MixtureLaw, SmoothingSpec, TargetGrid,
                     law_from_qv_samples, price_dbko_powerexp, price_payoff_under_law,
                     price_powerexp_european, price_rebate_powerexp,
                     price_sbko_powerexp)
from .simulator import DeterministicVol, simulate_batch, simulate_vol, stream
from .spanning import price_space_payoff, span_payoff
from .hedger import hedge_report, simulate_hedge
from .verify import run_suite

ROLE_LAW = 3

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


def _write_text(text: str, out_path):
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _flatten(obj, prefix=""):
    rows = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            rows += _flatten(obj[key], f"{prefix}{key}.")
    elif isinstance(obj, (list, tuple)):
        for i, val in enumerate(obj):
            rows += _flatten(val, f"{prefix}{i}.")
    else:
        rows.append((prefix[:-1], obj))
    return rows


def _emit(payload, native: str, fmt) -> str:
    """Render a dict (json-native) or CSV text in the requested format."""
    fmt = fmt or native
    if native == "json":
        if fmt == "json":
            return _json_text(payload)
        lines = ["key,value"]
        for key, val in _flatten(payload):
            lines.append(f"{key},{val}")
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        return payload
    rows = payload.strip().splitlines()
    header = rows[0].split(",")
    body = [dict(zip(header, r.split(","))) for r in rows[1:]]
    return _json_text({"columns": header, "rows": body})


def _complex_obj(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def build_law(model, claim: ClaimSpec, numerics: dict):
    """Terminal law of X_T: exact single component for deterministic
    volatility, quantile-binned QV samples otherwise."""
    times = np.linspace(0.0, claim.maturity, 65)
    if isinstance(model, DeterministicVol):
        qv, _ = simulate_vol(model, times, 1, None)
        return MixtureLaw(claim.x0, [1.0], [float(qv.sum())])
    rng = stream(numerics["seed"], ROLE_LAW, 0)
    qv, _ = simulate_vol(model, times, numerics["law_draws"], rng)
    return law_from_qv_samples(claim.x0, qv.sum(axis=1), bins=numerics["law_bins"])


def _contours(numerics: dict):
    cg = ch = None
    hw = numerics.get("half_width")
    if "contour_g_omega_i" in numerics:
        cg = ContourSpec(numerics["contour_g_omega_i"],
                         hw or 40.0 * 2.0 * numerics["smoothing_n"] / math.pi)
    if "contour_h_omega_i" in numerics:
        ch = ContourSpec(numerics["contour_h_omega_i"],
                         hw or 40.0 * 2.0 * numerics["smoothing_n"] / math.pi)
    return cg, ch


def _price_once(claim: ClaimSpec, law, numerics: dict, smoothing_n: int):
    kind = claim.kind
    cg, ch = _contours(numerics)
    if kind is ClaimKind.EUROPEAN_POWEREXP:
        return price_powerexp_european(law, claim.x0, claim.j, claim.k,
                                       claim.p, claim.s, claim.branch), {}
    if kind is ClaimKind.SBKO:
        if claim.barrier_side == "lower":
            res = price_sbko_powerexp(law, claim.x0, claim.lower, claim.j, claim.k,
                                      claim.p, claim.s, SmoothingSpec(smoothing_n),
                                      cg, ch, claim.branch)
            return res.price, _diag(res)
        payoff = sbko_image_upper(powerexp_payoff(claim.j, claim.k, claim.p, claim.s),
                                  claim.upper)
        return price_payoff_under_law(payoff, law), {"route": "image payoff quadrature"}
    if kind is ClaimKind.DBKO:
        res = price_dbko_powerexp(law, claim.x0, claim.lower, claim.upper,
                                  claim.j, claim.k, claim.p, claim.s,
                                  SmoothingSpec(smoothing_n), numerics["image_q"],
                                  cg, ch, claim.branch, last_term_diag=True)
        return res.price, _diag(res)
    if kind is ClaimKind.SKI_POWEREXP:
        payoff = ski_psi_payoff(claim.j, claim.k, claim.barrier_level, claim.p,
                                claim.s, claim.barrier_side, claim.branch)
        return price_payoff_under_law(payoff, law), {"route": "knock-in psi payoff"}
    if kind is ClaimKind.SKI_FRAC_QV:
        payoff = frac_ki_payoff_fn(claim.lower, claim.r)
        return price_payoff_under_law(payoff, law), {"route": "fractional QV payoff"}
    if kind is ClaimKind.SKI_RATIO:
        payoff = ratio_ki_payoff_fn(claim.lower, claim.r, claim.eps, claim.p)
        return price_payoff_under_law(payoff, law), {"route": "ratio payoff"}
    if kind is ClaimKind.REBATE:
        res = price_rebate_powerexp(law, claim.x0, claim.barrier_level, claim.k,
                                    claim.s, SmoothingSpec(smoothing_n),
                                    claim.barrier_side, cg, ch, claim.branch)
        return res.price, _diag(res)
    raise ConfigError(f"unsupported claim kind {kind}")


def _diag(res) -> dict:
    d = {}
    for key, val in res.diagnostics.items():
        if isinstance(val, ContourSpec):
            d[key] = {"omega_i": val.omega_i, "half_width": val.half_width,
                      "nodes": val.nodes, "rule": val.rule}
        else:
            d[key] = val
    return d


def cmd_price(cfg: dict, args) -> dict:
    claim = parse_claim(cfg)
    model = parse_model(cfg)
    numerics = numerics_defaults(cfg)
    if args.seed is not None:
        numerics["seed"] = args.seed
    law = build_law(model, claim, numerics)
    price, diag = _price_once(claim, law, numerics, numerics["smoothing_n"])
    out = {"price": _complex_obj(price),
           "diagnostics": {**diag, "smoothing_n": numerics["smoothing_n"],
                           "seed": numerics["seed"],
                           "law_components": len(getattr(law, "qvs", []))}}
    seq = numerics["smoothing_sequence"]
    if seq:
        out["smoothing_sequence"] = [
            {"n": n, "price": _complex_obj(_price_once(claim, law, numerics, n)[0])}
            for n in seq]
    return out


def _curve_grid(cfg: dict, claim: ClaimSpec):
    c = cfg.get("curve", {})
    s_min = float(c.get("s_min", math.exp(claim.x0) * 0.55))
    s_max = float(c.get("s_max", math.exp(claim.x0) * 1.45))
    points = int(c.get("points", 400))
    if not 0 < s_min < s_max or points < 2:
        raise ConfigError("curve range must satisfy 0 < s_min < s_max, points >= 2")
    grid = np.geomspace(s_min, s_max, points)
    for level in (claim.lower, claim.upper):
        if level is None:
            continue
        b = math.exp(level)
        grid[grid == b] *= 1.0 + 1e-12
    return grid


def cmd_curve(cfg: dict, args) -> str:
    claim = parse_claim(cfg)
    numerics = numerics_defaults(cfg)
    grid = _curve_grid(cfg, claim)
    xs = np.log(grid)
    kind = claim.kind
    n = numerics["smoothing_n"]
    cg, ch = _contours(numerics)
    if kind is ClaimKind.SBKO and claim.barrier_side == "lower":
        vals = price_sbko_powerexp(TargetGrid(xs), claim.x0, claim.lower, claim.j,
                                   claim.k, claim.p, claim.s, SmoothingSpec(n),
                                   cg, ch, claim.branch).price
    elif kind is ClaimKind.DBKO:
        vals = price_dbko_powerexp(TargetGrid(xs), claim.x0, claim.lower, claim.upper,
                                   claim.j, claim.k, claim.p, claim.s,
                                   SmoothingSpec(n), numerics["image_q"],
                                   cg, ch, claim.branch).price
    elif kind is ClaimKind.REBATE:
        vals = price_rebate_powerexp(TargetGrid(xs), claim.x0, claim.barrier_level,
                                     claim.k, claim.s, SmoothingSpec(n),
                                     claim.barrier_side, cg, ch, claim.branch).price
    elif kind is ClaimKind.SKI_POWEREXP:
        vals = ski_psi_derivs(claim.j, claim.k, xs, claim.barrier_level,
                              claim.p, claim.s, claim.barrier_side, claim.branch)
    elif kind is ClaimKind.SKI_FRAC_QV:
        vals = np.array([frac_ki_payoff(float(x), claim.lower, claim.r) for x in xs],
                        dtype=complex)
    elif kind is ClaimKind.SKI_RATIO:
        vals = np.array([ratio_ki_payoff(float(x), claim.lower, claim.r,
                                         claim.eps, claim.p) for x in xs])
    else:
        raise ConfigError(f"claim kind {kind.value} does not support curve emission")
    lines = ["S,payoff_real,payoff_imag"]
    for sv, z in zip(grid, np.asarray(vals)):
        lines.append(f"{sv:.12e},{z.real:.12e},{z.imag:.12e}")
    return "\n".join(lines) + "\n"


def cmd_verify(cfg: dict, args) -> tuple[dict, bool]:
    claim_cfg = cfg.get("claim", {})
    model = parse_model(cfg)
    numerics = numerics_defaults(cfg)
    if args.seed is not None:
        numerics["seed"] = args.seed
    x0 = math.log(float(claim_cfg.get("spot", 100.0)))
    checks, ok = run_suite(model, x0, numerics["seed"],
                           min(numerics["mc_paths"], 200_000))
    return {"checks": checks, "passed": ok}, ok


def cmd_hedge(cfg: dict, args) -> dict:
    h = cfg.get("hedge")
    if not isinstance(h, dict):
        raise ConfigError("missing [hedge] section")
    model = parse_model(cfg)
    numerics = numerics_defaults(cfg)
    if args.seed is not None:
        numerics["seed"] = args.seed
    omega = parse_complex(h.get("omega", 0.0), "omega")
    s = parse_complex(h.get("s", 0.0), "s")
    n_order = int(h.get("n_order", 0))
    m_order = int(h.get("m_order", 0))
    branch = {"plus": Branch.PLUS, "minus": Branch.MINUS}[str(h.get("branch", "plus")).lower()]
    steps_list = [int(v) for v in h.get("steps", [32, 128, 512])]
    n_paths = int(h.get("paths", 1000))
    x0 = math.log(float(cfg.get("claim", {}).get("spot", 100.0)))
    T = float(h.get("maturity", 1.0))
    runs = []
    for steps in steps_list:
        paths = simulate_batch(model, np.linspace(0.0, T, steps + 1), x0,
                               n_paths, numerics["seed"])
        runs.append((steps, simulate_hedge(omega, s, n_order, m_order, model,
                                           paths, branch=branch)))
    rep = hedge_report(runs)
    rep.update({"params": {"omega": _complex_obj(omega), "s": _complex_obj(s),
                           "n_order": n_order, "m_order": m_order,
                           "branch": branch.name.lower()},
                "n_paths": n_paths, "seed": numerics["seed"]})
    return rep


def cmd_span(cfg: dict, args) -> str:
    sp = cfg.get("span")
    if not isinstance(sp, dict):
        raise ConfigError("missing [span] section")
    spot = float(cfg.get("claim", {}).get("spot", sp.get("spot", 100.0)))
    kappa = float(sp.get("kappa", spot))
    k_min = float(sp.get("k_min", 0.5 * spot))
    k_max = float(sp.get("k_max", 2.0 * spot))
    n_strikes = int(sp.get("n_strikes", 200))
    strikes = np.linspace(k_min, k_max, n_strikes)
    payoff_kind = sp.get("payoff", "log_contract")
    kinks = ()
    if payoff_kind == "log_contract":
        f = lambda s_: -2.0 * math.log(s_ / spot)
    elif payoff_kind == "call":
        K0 = float(sp.get("strike", spot))
        f = lambda s_: max(s_ - K0, 0.0)
    elif payoff_kind == "put":
        K0 = float(sp.get("strike", spot))
        f = lambda s_: max(K0 - s_, 0.0)
    elif payoff_kind == "sbko_varswap":
        barrier = float(sp.get("barrier", 90.0))
        v_fix = float(sp.get("v", 0.04))
        img = sbko_image(PayoffFn(lambda x, v: np.broadcast_to(
            np.asarray(v, dtype=complex), np.shape(x)).copy(), "qv"),
            math.log(barrier))
        f, kinks = price_space_payoff(img, v_fix)
    else:
        raise ConfigError(f"unknown span payoff {payoff_kind!r}")
    pf = span_payoff(f, kappa, strikes, kinks=kinks)
    lines = ["instrument_type,strike,weight",
             f"bond,{pf.kappa:.12e},{pf.bond_weight:.12e}",
             f"forward,{pf.kappa:.12e},{pf.forward_weight:.12e}"]
    for K, w in zip(pf.put_strikes, pf.put_weights):
        lines.append(f"put,{K:.12e},{w:.12e}")
    for K, w in zip(pf.call_strikes, pf.call_weights):
        lines.append(f"call,{K:.12e},{w:.12e}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qvbarrier",
        description="Price and replicate barrier-style claims on log price "
                    "and quadratic variation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("price", "curve", "verify", "hedge", "span"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--threads", type=int,
                       default=int(os.environ.get("BARRIER_REPL_THREADS", "1")))
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        out_path = args.out or cfg.get("output", {}).get("path")
        fmt = args.format or cfg.get("output", {}).get("format")
        if fmt not in (None, "csv", "json"):
            raise ConfigError(f"unknown output format {fmt!r}")
        if args.command == "price":
            _write_text(_emit(cmd_price(cfg, args), "json", fmt), out_path)
        elif args.command == "curve":
            _write_text(_emit(cmd_curve(cfg, args), "csv", fmt), out_path)
        elif args.command == "verify":
            payload, ok = cmd_verify(cfg, args)
            _write_text(_emit(payload, "json", fmt), out_path)
            if not ok:
                return EXIT_VERIFY
        elif args.command == "hedge":
            _write_text(_emit(cmd_hedge(cfg, args), "json", fmt), out_path)
        elif args.command == "span":
            _write_text(_emit(cmd_span(cfg, args), "csv", fmt), out_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QvBarrierError as exc:
        print(f"numerical failure ({exc.code}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
