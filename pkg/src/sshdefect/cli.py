"""Command-line front end.

Every command writes exactly one output file (atomically) and prints a
one-line summary. ``reproduce`` maps a figure id onto one of the other
commands with the parameters from that figure's caption.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from ._io import write_atomic
from .analytic import DefectMismatchError, RecursionBlowupError, pt_right_edge_mode_at_gamma_c, zero_mode_oracle
from .dynamics import StepSizeError, delta_excitation, localization_score, propagate
from .lattice import DefectKind, DefectSpec, LatticeSpec, build_hamiltonian, validate_spec
from .spectral import (
    SpectralError,
    classify_modes,
    locate_exceptional_point,
    parse_range,
    spectrum_of,
    sweep_defect_strength,
)

COMMANDS = ("spectrum", "mode", "sweep", "ep", "propagate", "reproduce")

COMMAND_PARAMS = {
    "spectrum": set(),
    "mode": {"source"},
    "sweep": {"range"},
    "ep": {"range", "tol"},
    "propagate": {"z_max", "steps", "site", "method", "grid"},
    "reproduce": {"figure"},
}

DEFAULT_LATTICE = LatticeSpec(25, 0.5, 1.0, DefectSpec(DefectKind.NONE, 5, 0.0))

_FLAG_OF_FIELD = {"n_sites": "--n", "k": "--k", "m": "--m", "defect strength": "--strength"}


def _asym(g: float) -> LatticeSpec:
    return LatticeSpec(25, 0.5, 1.0, DefectSpec(DefectKind.ASYM, 5, g))


def _pt(gamma: float, m: int = 5) -> LatticeSpec:
    return LatticeSpec(25, 0.5, 1.0, DefectSpec(DefectKind.PT, m, gamma))


# figure id -> (command, lattice, command params); couplings normalized to c = 1, k = 0.5
FIGURES: dict[str, tuple[str, LatticeSpec, dict[str, Any]]] = {
    "2a": ("sweep", _asym(0.0), {"range": "0:1.5:151"}),
    "2b": ("sweep", _asym(0.0), {"range": "0:1.5:151"}),
    "2c": ("mode", _asym(0.0), {}),
    "2d": ("mode", _asym(0.5), {}),
    "2e": ("mode", _asym(1.0), {}),
    "2f": ("mode", _asym(1.5), {}),
    "3a": ("sweep", _pt(0.0), {"range": "0:1.5:151"}),
    "3b": ("sweep", _pt(0.0), {"range": "0:1.5:151"}),
    "3c": ("mode", _pt(0.0), {}),
    "3d": ("mode", _pt(0.2), {}),
    "3e": ("mode", _pt(1.0), {}),
    "3f": ("mode", _pt(1.1), {}),
    # last dimer (sites 24, 25) carries the gain/loss; excitation at either edge
    "4a": ("propagate", DEFAULT_LATTICE, {"site": 1, "grid": True}),
    "4b": ("propagate", DEFAULT_LATTICE, {"site": 25, "grid": True}),
    "4c": ("propagate", _pt(0.5, 12), {"site": 25, "grid": True}),
    "4d": ("propagate", _pt(1.0, 12), {"site": 25, "grid": True}),
}


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    lattice: LatticeSpec
    command: str
    command_params: dict[str, Any] = field(default_factory=dict)
    output_path: str = "out.csv"
    output_format: str = "csv"
    jobs: int | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        unknown = set(self.command_params) - COMMAND_PARAMS[self.command]
        if unknown:
            raise UsageError(f"unknown parameter(s) for {self.command}: {', '.join(sorted(unknown))}")
        if self.output_format not in ("csv", "json"):
            raise UsageError(f"unknown output format {self.output_format!r}")


def _describe(spec: LatticeSpec) -> str:
    d = spec.defect
    if d.variant is DefectKind.NONE:
        return f"n={spec.n_sites} k={spec.k:g} c={spec.c:g} defect=none"
    return f"n={spec.n_sites} k={spec.k:g} c={spec.c:g} defect={d.variant.value}(m={d.m}, strength={d.strength:g})"


def _fmt_e(e: complex) -> str:
    return f"{e.real:+.6g}{e.imag:+.6g}i"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("lattice")
    g.add_argument("--n", type=int, help="number of sites (odd, >= 3); default 25")
    g.add_argument("--k", type=float, help="weak coupling, 0 < k < c; default 0.5")
    g.add_argument("--c", type=float, help="strong coupling; default 1")
    g.add_argument("--defect", choices=[v.value for v in DefectKind], help="defect variant; default none")
    g.add_argument("--m", type=int, help="defect dimer index (sites 2m, 2m+1); default 5")
    g.add_argument("--strength", type=float, help="defect strength g (asym) or gamma (pt); default 0")
    g.add_argument("--config", metavar="PATH", help="JSON lattice description; explicit flags override it")
    o = common.add_argument_group("output")
    o.add_argument("--out", metavar="PATH", help="output file (required)")
    o.add_argument("--format", choices=["csv", "json"], default="csv", help="output format; default csv")
    o.add_argument("--jobs", type=int, help="worker threads for sweeps; default one per CPU")

    parser = argparse.ArgumentParser(prog="sshdefect", description="SSH lattices with one non-Hermitian defect.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("spectrum", parents=[common], help="eigenvalues and residuals of one lattice")
    p = sub.add_parser("mode", parents=[common], help="zero-mode profile of one lattice")
    p.add_argument("--source", choices=["numeric", "analytic"], default="numeric",
                   help="eigensolver profile or closed-form construction; default numeric")
    p = sub.add_parser("sweep", parents=[common], help="spectrum and zero mode versus defect strength")
    p.add_argument("--range", required=True, metavar="START:STOP:COUNT", help="defect strengths, both ends included")
    p = sub.add_parser("ep", parents=[common], help="locate the exceptional point in a strength bracket")
    p.add_argument("--range", required=True, metavar="START:STOP[:COUNT]",
                   help="strength bracket; COUNT sets the coarse scan (default 41)")
    p.add_argument("--tol", type=float, default=1e-10, help="bracket width at which refinement stops; default 1e-10")
    p = sub.add_parser("propagate", parents=[common], help="evolve a single-site excitation")
    p.add_argument("--z-max", dest="z_max", type=float, help="propagation length; default 30/c")
    p.add_argument("--steps", type=int, default=600, help="number of z intervals; default 600")
    p.add_argument("--site", type=int, default=1, help="excited site (1-based); default 1")
    p.add_argument("--method", choices=["rk4", "eigen"], default="rk4", help="integrator; default rk4")
    p.add_argument("--grid", action="store_true", help="write the dense z-by-site grid instead of long CSV")
    p = sub.add_parser("reproduce", parents=[common], help="regenerate the data behind one figure panel")
    p.add_argument("--figure", required=True, choices=sorted(FIGURES), help="figure panel id")
    return parser


def _lattice_from(ns: argparse.Namespace, parser: argparse.ArgumentParser) -> LatticeSpec:
    base = DEFAULT_LATTICE
    if ns.config:
        try:
            with open(ns.config) as fh:
                base = LatticeSpec.from_dict(json.load(fh))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            parser.error(f"argument --config: {exc}")
    d = base.defect
    spec = LatticeSpec(
        n_sites=base.n_sites if ns.n is None else ns.n,
        k=base.k if ns.k is None else ns.k,
        c=base.c if ns.c is None else ns.c,
        defect=DefectSpec(
            variant=d.variant if ns.defect is None else DefectKind(ns.defect),
            m=d.m if ns.m is None else ns.m,
            strength=d.strength if ns.strength is None else ns.strength,
        ),
    )
    problems = validate_spec(spec)
    if problems:
        msg = problems[0]
        flag = next((f for key, f in _FLAG_OF_FIELD.items() if msg.startswith(key)), "--k/--c")
        parser.error(f"argument {flag}: {'; '.join(problems)}")
    return spec


def parse_args(argv: list[str] | None = None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if not ns.out:
        parser.error("argument --out: an output path is required")
    if ns.jobs is not None and ns.jobs < 1:
        parser.error("argument --jobs: must be >= 1")
    params = {key: getattr(ns, key) for key in COMMAND_PARAMS[ns.command]}

    if ns.command == "reproduce":
        lattice = FIGURES[ns.figure][1]
    else:
        lattice = _lattice_from(ns, parser)

    if ns.command in ("sweep", "ep"):
        text = params["range"]
        if ns.command == "ep" and text.count(":") == 1:
            text += ":41"
        try:
            parse_range(text)
        except ValueError as exc:
            parser.error(f"argument --range: {exc}")
        params["range"] = text
        if lattice.defect.variant is DefectKind.NONE:
            parser.error("argument --defect: a sweep or EP search needs --defect asym or pt")
    if ns.command == "propagate":
        if not 1 <= ns.site <= lattice.n_sites:
            parser.error(f"argument --site: must lie in 1..{lattice.n_sites}")
        if ns.steps < 1:
            parser.error("argument --steps: must be >= 1")
        if ns.z_max is not None and not ns.z_max > 0:
            parser.error("argument --z-max: must be positive")

    return RunConfig(lattice=lattice, command=ns.command, command_params=params,
                     output_path=ns.out, output_format=ns.format, jobs=ns.jobs)


# --- execution --------------------------------------------------------------------


def _dump_json(obj: dict) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _run_spectrum(cfg: RunConfig) -> tuple[str, str]:
    spec = cfg.lattice
    spectrum = spectrum_of(spec)
    z = classify_modes(spec, spectrum).zero_mode_index
    if cfg.output_format == "json":
        text = _dump_json({"lattice": spec.to_dict(), **spectrum.to_dict(), "zero_mode_index": z + 1})
    else:
        text = spectrum.to_csv()
    return text, f"zero-mode E={_fmt_e(spectrum.eigenvalues[z])} max residual={spectrum.residuals.max():.2e}"


def _run_mode(cfg: RunConfig) -> tuple[str, str]:
    spec = cfg.lattice
    spectrum = spectrum_of(spec)
    z = classify_modes(spec, spectrum).zero_mode_index
    energy = complex(spectrum.eigenvalues[z])
    d = spec.defect
    if cfg.command_params.get("source") == "analytic":
        if d.variant is DefectKind.PT and d.m == spec.n_dimers and d.strength == spec.c:
            profile = pt_right_edge_mode_at_gamma_c(spec.n_sites, spec.k, spec.c, energy)
        else:
            profile = zero_mode_oracle(spec)
    else:
        from .profiles import ModeProfile
        profile = ModeProfile.from_amplitudes(spectrum.vector(z), source="numeric")
    if cfg.output_format == "json":
        text = _dump_json({"lattice": spec.to_dict(), "E": [energy.real, energy.imag], **profile.to_dict()})
    else:
        text = profile.to_csv()
    return text, f"zero-mode E={_fmt_e(energy)} argmax site={profile.argmax_site()} site1 intensity={profile.intensity(1):.4g}"


def _run_sweep(cfg: RunConfig) -> tuple[str, str]:
    strengths = parse_range(cfg.command_params["range"])
    table = sweep_defect_strength(cfg.lattice, strengths, jobs=cfg.jobs)
    text = _dump_json(table.to_dict()) if cfg.output_format == "json" else table.to_csv()
    worst_im = max(abs(p.zero_mode_energy.imag) for p in table.points)
    return text, f"{len(table.points)} points, zero-mode max|Im E|={worst_im:.2e}"


def _run_ep(cfg: RunConfig) -> tuple[str, str]:
    start, stop, count = cfg.command_params["range"].split(":")
    report = locate_exceptional_point(cfg.lattice, (float(start), float(stop)),
                                      tolerance=cfg.command_params.get("tol") or 1e-10, scan_points=int(count))
    text = _dump_json({"lattice": cfg.lattice.to_dict(), **report.to_dict()}) if cfg.output_format == "json" \
        else report.to_csv()
    return text, (f"EP at strength={report.parameter_value:.9g} overlap={report.max_eigenvector_overlap:.9f} "
                  f"gap={report.min_eigenvalue_gap:.3e}")


def _run_propagate(cfg: RunConfig) -> tuple[str, str]:
    spec, p = cfg.lattice, cfg.command_params
    z_max = p.get("z_max") or 30.0 / spec.c
    site = p["site"]
    record = propagate(build_hamiltonian(spec), delta_excitation(spec.n_sites, site), z_max,
                       p.get("steps") or 600, method=p.get("method") or "rk4")
    if cfg.output_format == "json":
        text = _dump_json({"lattice": spec.to_dict(), "site": site, **record.to_dict()})
    elif p.get("grid"):
        text = record.to_grid()
    else:
        text = record.to_csv()
    return text, f"excited site {site}, z_max={z_max:g}, localization score={localization_score(record, site):.4g}"


_RUNNERS = {
    "spectrum": _run_spectrum,
    "mode": _run_mode,
    "sweep": _run_sweep,
    "ep": _run_ep,
    "propagate": _run_propagate,
}


def resolve(cfg: RunConfig) -> RunConfig:
    """Turn a ``reproduce`` config into the concrete command it stands for."""
    if cfg.command != "reproduce":
        return cfg
    command, lattice, params = FIGURES[cfg.command_params["figure"]]
    return replace(cfg, command=command, lattice=lattice, command_params=dict(params))


def run(cfg: RunConfig) -> int:
    concrete = resolve(cfg)
    try:
        text, summary = _RUNNERS[concrete.command](concrete)
        write_atomic(cfg.output_path, text)
    except (SpectralError, ArithmeticError, StepSizeError, DefectMismatchError, RecursionBlowupError,
            ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"sshdefect {cfg.command}: error: {exc}", file=sys.stderr)
        return 1
    label = cfg.command if cfg.command == concrete.command else f"reproduce {cfg.command_params['figure']} ({concrete.command})"
    print(f"{label} {_describe(concrete.lattice)}: {summary} -> {cfg.output_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
