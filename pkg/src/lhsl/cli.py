"""Command-line front end.

Every subcommand reads one configuration, runs a pipeline and emits a
delimited table (and, where useful, a JSON summary).  Output is a pure
function of the configuration, so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .config import RunConfig, load_config
from .dispersion import Branch, band_edges, sl_omega_of_phase
from .dom import dom_analytical, dom_from_modes, fit_piecewise_dom
from .errors import ConfigError, DomainError
from .export import csv_text, json_text, records
from .modes import Band, find_all_modes, find_modes, mode_profile
from .spinboson import QubitSpec, phase_diagram, renormalize_continuum, renormalize_discrete


class Output:
    """One command's result: the main table plus an optional summary."""

    def __init__(self, name, header, rows, comments=(), summary=None):
        self.name = name
        self.header = list(header)
        self.rows = [list(r) for r in rows]
        self.comments = list(comments)
        self.summary = summary


def _scan_points(cfg: RunConfig) -> int:
    return cfg.solver["points_per_mode"] * cfg.line.sl.n_cells


def _edges_summary(spec):
    e = band_edges(spec.sl)
    wsl = spec.sl.omega_sl
    out = e.as_dict()
    out.update({k.replace("_rad_s", "_over_wsl"): v / wsl for k, v in e.as_dict().items()})
    return out


def _metadata(cfg: RunConfig, command: str):
    return {"command": command, "version": __version__, "config": cfg.data}


def cmd_dispersion(cfg: RunConfig, args) -> Output:
    sl = cfg.line.sl
    n = args.k_points
    if n < 2:
        raise ConfigError("--k-points must be at least 2", key="k_points")
    theta = np.linspace(0.0, np.pi, n)
    k = theta / sl.dz
    rows = []
    branches = (Branch.LOWER, Branch.UPPER) if args.branch == "both" else (Branch(args.branch),)
    for branch in branches:
        omega = sl_omega_of_phase(sl, theta, branch)
        for kk, w in zip(k, omega):
            rows.append((kk, w, w / sl.omega_sl, branch.value))
    comments = [f"{key}={value!r}" for key, value in _edges_summary(cfg.line).items()]
    comments.insert(0, f"omega_sl_rad_s={sl.omega_sl!r}")
    return Output("dispersion", ["k_rad_per_m", "omega_rad_s", "omega_over_wsl", "branch"],
                  rows, comments)


def cmd_band_edges(cfg: RunConfig, args) -> Output:
    sl = cfg.line.sl
    e = band_edges(sl)
    rows = [(name, value, value / sl.omega_sl) for name, value in (
        ("omega_1minus", e.omega_1minus), ("omega_1plus", e.omega_1plus),
        ("omega_2", e.omega_2), ("gap_width", e.gap_width), ("band1_width", e.band1_width))]
    return Output("band_edges", ["edge", "omega_rad_s", "omega_over_wsl"], rows,
                  summary={"band_edges": _edges_summary(cfg.line),
                           "omega_sl_rad_s": sl.omega_sl, "metadata": _metadata(cfg, "band-edges")})


def _modes_for(cfg: RunConfig, band: str):
    spec = cfg.line
    if band == "all":
        return find_all_modes(spec, _scan_points(cfg))
    return find_modes(spec, Band(band), _scan_points(cfg), rtol=cfg.solver["root_rtol"])


def cmd_modes(cfg: RunConfig, args) -> Output:
    spec = cfg.line
    modes = _modes_for(cfg, args.band)
    wsl = spec.sl.omega_sl
    rows = [(m.index, m.band.value, m.omega, m.omega / wsl, m.k_sl, m.k_r, m.alpha,
             m.beta.real, m.beta.imag, m.z_sl.real, m.z_sl.imag) for m in modes]
    counts = {b.value: sum(1 for m in modes if m.band is b) for b in Band}
    return Output("modes", ["index", "band", "omega_rad_s", "omega_over_wsl", "k_sl_rad_per_m",
                            "k_r_rad_per_m", "alpha_ratio", "re_beta_ratio", "im_beta_ratio", "re_z_sl_ohm",
                            "im_z_sl_ohm"], rows,
                  summary={"counts": counts, "band_edges": _edges_summary(spec),
                           "metadata": _metadata(cfg, "modes")})


def cmd_profile(cfg: RunConfig, args) -> Output:
    spec = cfg.line
    modes = find_modes(spec, Band(args.band), _scan_points(cfg), rtol=cfg.solver["root_rtol"])
    if not 0 <= args.index < len(modes):
        raise DomainError(f"mode index {args.index} out of range, {args.band} has {len(modes)} modes")
    mode = modes[args.index]
    prof = mode_profile(spec, mode, rh_points=cfg.solver["profile_rh_points"])
    return Output("profile", ["z_m", "re_V", "im_V", "re_I", "im_I", "segment"], prof.rows(),
                  comments=[f"band={args.band}", f"index={args.index}", f"omega_rad_s={mode.omega!r}"],
                  summary={"mode": {"index": mode.index, "band": mode.band.value,
                                    "omega_rad_s": mode.omega, "k_sl_rad_per_m": mode.k_sl,
                                    "k_r_rad_per_m": mode.k_r, "alpha": mode.alpha},
                           "metadata": _metadata(cfg, "profile")})


def cmd_dom(cfg: RunConfig, args) -> Output:
    spec = cfg.line
    modes = find_all_modes(spec, _scan_points(cfg))
    num = dom_from_modes(modes)
    edges = band_edges(spec.sl)
    fit = fit_piecewise_dom(num, edges, cfg.solver["dom_edge_margin"])
    rows = list(num.rows())
    rows += [(w, d, "analytical") for w, d in zip(num.omega, dom_analytical(spec, num.omega))]
    rows += [(w, d, "piecewise_fit") for w, d in zip(num.omega, fit.evaluate(num.omega))]
    return Output("dom", ["omega_rad_s", "dom_s_per_rad", "method"], rows,
                  summary={"alpha1": fit.alpha1, "alpha2": fit.alpha2,
                           "fit_residual_norm": fit.residual_norm,
                           "band_edges": _edges_summary(spec),
                           "metadata": _metadata(cfg, "dom")})


def cmd_renormalize(cfg: RunConfig, args) -> Output:
    spec = cfg.line
    wsl = spec.sl.omega_sl
    s = cfg.solver
    modes = find_all_modes(spec, _scan_points(cfg))
    freqs = [m.omega for m in modes]
    edges = band_edges(spec.sl)
    fit = None
    if args.method in ("continuum", "both"):
        fit = fit_piecewise_dom(dom_from_modes(modes), edges, s["dom_edge_margin"])
    rows = []
    for d0 in cfg.delta0_grid:
        for g in cfg.g_grid:
            q = QubitSpec(d0 * wsl, g * wsl)
            results = []
            if args.method in ("discrete", "both"):
                results.append(("discrete", renormalize_discrete(
                    freqs, q, tol=s["renorm_tol"], max_iter=s["max_iter"], edges=edges,
                    floor_ratio=s["floor_ratio"])))
            if fit is not None:
                results.append(("continuum", renormalize_continuum(
                    fit, q, tol=s["renorm_tol"], max_iter=s["max_iter"],
                    floor_ratio=s["floor_ratio"])))
            for method, r in results:
                rows.append((d0, g, r.delta_eff / wsl, r.delta_eff, r.log_ratio, r.iterations,
                             r.converged, r.phase, method))
    summary = {"band_edges": _edges_summary(spec), "metadata": _metadata(cfg, "renormalize")}
    if fit is not None:
        summary.update({"alpha1": fit.alpha1, "alpha2": fit.alpha2})
    return Output("renormalize", ["delta0_over_wsl", "g_over_wsl", "delta_eff_over_wsl",
                                  "delta_eff_rad_s", "log_ratio", "iterations", "converged",
                                  "phase", "method"], rows, summary=summary)


def cmd_phase_diagram(cfg: RunConfig, args) -> Output:
    spec = cfg.line
    wsl = spec.sl.omega_sl
    s = cfg.solver
    modes = find_all_modes(spec, _scan_points(cfg))
    pd = phase_diagram(spec, cfg.delta0_grid * wsl, cfg.g_grid * wsl, modes=modes,
                       jump_threshold=s["jump_threshold"], tol=s["renorm_tol"],
                       max_iter=s["max_iter"], floor_ratio=s["floor_ratio"])
    rows = [(d0 / wsl, g / wsl, d / wsl, phase, conv) for d0, g, d, phase, conv in pd.rows()]
    jumps = [{"delta0_over_wsl": j.delta0 / wsl, "g_before_over_wsl": j.g_before / wsl,
              "g_after_over_wsl": j.g_after / wsl, "delta_before_over_wsl": j.delta_before / wsl,
              "delta_after_over_wsl": j.delta_after / wsl, "relative_size": j.size}
             for j in pd.jumps]
    return Output("phase_diagram", ["delta0_over_wsl", "g_over_wsl", "delta_eff_over_wsl",
                                    "phase", "converged"], rows,
                  summary={"band_edges": _edges_summary(spec), "jumps": jumps,
                           "mode_count": pd.mode_count,
                           "all_converged": bool(np.all(pd.converged)),
                           "metadata": _metadata(cfg, "phase-diagram")})


COMMANDS = {
    "dispersion": cmd_dispersion,
    "band-edges": cmd_band_edges,
    "modes": cmd_modes,
    "profile": cmd_profile,
    "dom": cmd_dom,
    "renormalize": cmd_renormalize,
    "phase-diagram": cmd_phase_diagram,
}


def _parse_set(items):
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}", key=item)
        out[key.strip()] = yaml.safe_load(raw)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML run configuration")
    common.add_argument("--paper-defaults", action="store_true",
                        help="start from the reference element values")
    common.add_argument("--out", metavar="DIR", help="write files here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), help="main output format")
    common.add_argument("--seedless", action="store_true",
                        help="accepted for scripts; every computation is deterministic")
    common.add_argument("--set", action="append", metavar="BLOCK.KEY=VALUE",
                        help="override one configuration value (repeatable)")

    parser = argparse.ArgumentParser(prog="lhsl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("dispersion", parents=[common], help="superlattice band structure")
    p.add_argument("--k-points", type=int, default=100)
    p.add_argument("--branch", choices=("lower", "upper", "both"), default="both")
    sub.add_parser("band-edges", parents=[common], help="band limits and gap")
    p = sub.add_parser("modes", parents=[common], help="hybrid-line eigenfrequencies")
    p.add_argument("--band", choices=("band1", "band2", "all"), default="all")
    p = sub.add_parser("profile", parents=[common], help="voltage/current profile of one mode")
    p.add_argument("--band", choices=("band1", "band2"), default="band1")
    p.add_argument("--index", type=int, default=0)
    sub.add_parser("dom", parents=[common], help="density of modes and piecewise fit")
    p = sub.add_parser("renormalize", parents=[common], help="effective tunnelling on the qubit grid")
    p.add_argument("--method", choices=("discrete", "continuum", "both"), default="both")
    sub.add_parser("phase-diagram", parents=[common], help="(delta0, g) sweep with jump detection")
    return parser


def _emit(out: Output, fmt: str, out_dir, warning_list):
    if out.summary is not None or warning_list:
        out.summary = dict(out.summary or {})
        out.summary["warnings"] = warning_list
    if fmt == "json":
        payload = {"columns": out.header, "records": records(out.header, out.rows)}
        if out.comments:
            payload["notes"] = out.comments
        if out.summary is not None:
            payload["summary"] = out.summary
        main_text, ext = json_text(payload), "json"
    else:
        main_text, ext = csv_text(out.header, out.rows, out.comments), "csv"
    if out_dir is None:
        sys.stdout.write(main_text)
        return
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{out.name}.{ext}").write_text(main_text, encoding="utf-8")
    if fmt == "csv" and out.summary is not None:
        (out_dir / f"{out.name}_summary.json").write_text(json_text(out.summary), encoding="utf-8")


def _fail(kind, exc, code):
    payload = {"error": kind, "message": str(exc)}
    if isinstance(exc, ConfigError):
        payload.update({"key": exc.key, "line": exc.line})
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.paper_defaults, _parse_set(args.set))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out = COMMANDS[args.command](cfg, args)
        fmt = args.format or cfg.data["output"]["format"]
        out_dir = args.out if args.out is not None else cfg.data["output"]["dir"]
        _emit(out, fmt, out_dir, [str(w.message) for w in caught])
    except ConfigError as exc:
        return _fail("config", exc, 2)
    except (DomainError, ValueError) as exc:
        return _fail("domain", exc, 3)
    return 0


if __name__ == "__main__":
    sys.exit(main())
