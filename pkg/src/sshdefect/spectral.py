"""Eigendecomposition, mode classification, defect-strength sweeps and EP search."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._io import csv_text
from .lattice import DefectKind, LatticeSpec, build_hamiltonian, check_spec
from .profiles import ModeProfile, fix_phase

RESIDUAL_TOLERANCE = 1e-9
# defective matrices cannot meet the generic bound
NEAR_EP_RESIDUAL_TOLERANCE = 1e-6
NEAR_EP_WINDOW = 1e-3

SPECTRUM_HEADER = ("index", "re_E", "im_E", "residual")
SWEEP_HEADER = ("param", "mode_index", "re_E", "im_E", "site1_intensity", "defect_site_intensity")
EP_HEADER = ("parameter_value", "min_eigenvalue_gap", "max_eigenvector_overlap")


class SpectralError(RuntimeError):
    pass


class ConvergenceError(SpectralError):
    """The dense eigensolver did not converge."""

    def __init__(self, message: str, iterations: int):
        self.iterations = iterations
        super().__init__(f"{message} (iteration budget {iterations} exhausted)")


class AmbiguousClassificationError(SpectralError):
    pass


class NoExceptionalPointError(SpectralError):
    pass


class SweepError(SpectralError):
    def __init__(self, strength: float, cause: Exception):
        self.strength = strength
        self.cause = cause
        super().__init__(f"sweep failed at strength={strength!r}: {cause}")


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs sorted by (Re E, Im E); eigenvectors are the columns of ``right_eigenvectors``."""

    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray
    residuals: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def vector(self, i: int) -> np.ndarray:
        return self.right_eigenvectors[:, i]

    def to_csv(self) -> str:
        rows = (
            (i + 1, float(e.real), float(e.imag), float(r))
            for i, (e, r) in enumerate(zip(self.eigenvalues, self.residuals))
        )
        return csv_text(SPECTRUM_HEADER, rows)

    def to_dict(self) -> dict:
        return {
            "re_E": [float(e.real) for e in self.eigenvalues],
            "im_E": [float(e.imag) for e in self.eigenvalues],
            "residual": [float(r) for r in self.residuals],
        }


def eigendecompose(h: np.ndarray, residual_tolerance: float = RESIDUAL_TOLERANCE) -> Spectrum:
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    n = h.shape[0]
    try:
        w, v = np.linalg.eig(h)
    except np.linalg.LinAlgError as exc:
        # LAPACK's Hessenberg QR allows 30 sweeps per eigenvalue (at least 10 eigenvalues' worth)
        raise ConvergenceError(str(exc), iterations=30 * max(10, n)) from exc

    order = np.lexsort((w.imag, w.real))
    w = w[order]
    v = v[:, order]
    v = v / np.linalg.norm(v, axis=0)
    v = np.column_stack([fix_phase(v[:, i]) for i in range(n)]) if n else v
    residuals = np.linalg.norm(h @ v - v * w, axis=0)
    worst = float(residuals.max()) if n else 0.0
    if worst > residual_tolerance:
        raise SpectralError(f"eigenpair residual {worst:.3e} exceeds tolerance {residual_tolerance:.1e}")
    return Spectrum(eigenvalues=w, right_eigenvectors=v, residuals=residuals)


def residual_tolerance_for(spec: LatticeSpec) -> float:
    d = spec.defect
    if d.variant is not DefectKind.NONE and abs(d.strength - spec.c) < NEAR_EP_WINDOW:
        return NEAR_EP_RESIDUAL_TOLERANCE
    return RESIDUAL_TOLERANCE


def spectrum_of(spec: LatticeSpec) -> Spectrum:
    return eigendecompose(build_hamiltonian(spec), residual_tolerance_for(spec))


# --- classification ---------------------------------------------------------


def zero_tolerance(c: float) -> float:
    return 1e-8 * max(1.0, c)


def isolation_score(energy: complex, k: float, c: float) -> float:
    """Distance in the complex plane from ``energy`` to the clean infinite-lattice bands.

    The bands are the real intervals [-(c+k), -(c-k)] and [c-k, c+k].
    """
    lo, hi = c - k, c + k
    x = abs(energy.real)
    dx = lo - x if x < lo else (x - hi if x > hi else 0.0)
    return math.hypot(dx, energy.imag)


@dataclass(frozen=True)
class ModeClassification:
    zero_mode_index: int
    bound_pair_indices: tuple[int, int] | None
    band_indices: tuple[int, ...]


def find_zero_mode(eigenvalues: np.ndarray, c: float) -> int:
    """Index of the topological zero mode.

    Candidates have |Re E| below the zero tolerance; among them the one closest
    to E = 0 wins. Defect modes in their broken phase also have Re E = 0, so
    the modulus breaks that tie.
    """
    tol = zero_tolerance(c)
    cand = [i for i, e in enumerate(eigenvalues) if abs(e.real) < tol]
    if not cand:
        best = float(np.min(np.abs(eigenvalues.real)))
        raise AmbiguousClassificationError(f"no eigenvalue with |Re E| < {tol:.1e} (smallest is {best:.3e})")
    cand.sort(key=lambda i: (abs(eigenvalues[i]), i))
    if len(cand) > 1 and abs(eigenvalues[cand[1]]) - abs(eigenvalues[cand[0]]) <= tol:
        e0, e1 = eigenvalues[cand[0]], eigenvalues[cand[1]]
        raise AmbiguousClassificationError(f"zero-mode candidates {e0:.3e} and {e1:.3e} are indistinguishable")
    return cand[0]


def classify_modes(spec: LatticeSpec, spectrum: Spectrum) -> ModeClassification:
    w = spectrum.eigenvalues
    z = find_zero_mode(w, spec.c)
    rest = [i for i in range(len(w)) if i != z]
    pair = None
    d = spec.defect
    if d.variant is not DefectKind.NONE and d.strength > 0 and len(rest) >= 2:
        # most isolated first; ties go to the mode nearer the gap centre
        ranked = sorted(rest, key=lambda i: (-isolation_score(w[i], spec.k, spec.c), abs(w[i]), i))
        pair = tuple(sorted(ranked[:2]))
    bands = tuple(i for i in rest if pair is None or i not in pair)
    return ModeClassification(zero_mode_index=z, bound_pair_indices=pair, band_indices=bands)


def zero_mode_profile(spec: LatticeSpec, spectrum: Spectrum) -> ModeProfile:
    cls = classify_modes(spec, spectrum)
    return ModeProfile.from_amplitudes(spectrum.vector(cls.zero_mode_index), source="numeric")


# --- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    strength: float
    spectrum: Spectrum
    classification: ModeClassification
    zero_mode: ModeProfile
    site1_intensity: float
    defect_site_intensity: float

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    @property
    def zero_mode_energy(self) -> complex:
        return complex(self.eigenvalues[self.classification.zero_mode_index])

    @property
    def bound_pair_energies(self) -> tuple[complex, complex] | None:
        p = self.classification.bound_pair_indices
        if p is None:
            return None
        return complex(self.eigenvalues[p[0]]), complex(self.eigenvalues[p[1]])


@dataclass(frozen=True)
class SweepTable:
    template: LatticeSpec
    points: tuple[SweepPoint, ...]

    @property
    def strengths(self) -> list[float]:
        return [p.strength for p in self.points]

    def to_csv(self) -> str:
        site = 2 * self.template.defect.m + 1
        rows = []
        for p in self.points:
            v = p.spectrum.right_eigenvectors
            for i, e in enumerate(p.eigenvalues):
                rows.append((p.strength, i + 1, float(e.real), float(e.imag),
                             float(abs(v[0, i]) ** 2), float(abs(v[site - 1, i]) ** 2)))
        return csv_text(SWEEP_HEADER, rows)

    def to_dict(self) -> dict:
        out = {"lattice": self.template.to_dict(), "points": []}
        for p in self.points:
            pair = p.bound_pair_energies
            out["points"].append({
                "param": p.strength,
                "re_E": [float(e.real) for e in p.eigenvalues],
                "im_E": [float(e.imag) for e in p.eigenvalues],
                "zero_mode_index": p.classification.zero_mode_index + 1,
                "zero_mode_E": [p.zero_mode_energy.real, p.zero_mode_energy.imag],
                "bound_pair_E": None if pair is None else [[e.real, e.imag] for e in pair],
                "site1_intensity": p.site1_intensity,
                "defect_site_intensity": p.defect_site_intensity,
            })
        return out


def _sweep_point(template: LatticeSpec, strength: float) -> SweepPoint:
    spec = template.with_strength(strength)
    try:
        spectrum = spectrum_of(spec)
        cls = classify_modes(spec, spectrum)
    except Exception as exc:
        raise SweepError(strength, exc) from exc
    profile = ModeProfile.from_amplitudes(spectrum.vector(cls.zero_mode_index), source="numeric")
    return SweepPoint(
        strength=float(strength),
        spectrum=spectrum,
        classification=cls,
        zero_mode=profile,
        site1_intensity=profile.intensity(1),
        defect_site_intensity=profile.intensity(2 * spec.defect.m + 1),
    )


def sweep_defect_strength(template: LatticeSpec, strengths: Sequence[float], jobs: int | None = 1) -> SweepTable:
    """Solve the lattice at every strength; rows keep the input order.

    ``jobs`` > 1 spreads points over a thread pool (LAPACK releases the GIL);
    ``None`` uses one worker per CPU.
    """
    check_spec(template)
    if template.defect.variant is DefectKind.NONE:
        raise ValueError("a strength sweep needs a defect variant (asym or pt)")
    strengths = [float(s) for s in strengths]
    if not strengths:
        raise ValueError("strengths must be non-empty")
    bad = [s for s in strengths if not (math.isfinite(s) and s >= 0)]
    if bad:
        raise ValueError(f"strengths must be finite and >= 0, got {bad[0]!r}")

    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs > 1 and len(strengths) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(lambda s: _sweep_point(template, s), strengths))
    else:
        points = [_sweep_point(template, s) for s in strengths]
    return SweepTable(template=template, points=tuple(points))


def parse_range(text: str) -> np.ndarray:
    """``"start:stop:count"`` -> evenly spaced values including both ends."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range must look like start:stop:count, got {text!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("range count must be >= 1")
    return np.linspace(start, stop, count)


# --- exceptional points -------------------------------------------------------


@dataclass(frozen=True)
class EPReport:
    parameter_value: float
    min_eigenvalue_gap: float
    max_eigenvector_overlap: float

    def to_csv(self) -> str:
        return csv_text(EP_HEADER, [(self.parameter_value, self.min_eigenvalue_gap, self.max_eigenvector_overlap)])

    def to_dict(self) -> dict:
        return {h: getattr(self, h) for h in EP_HEADER}


def asymmetric_dimer(c: float = 1.0) -> Callable[[float], np.ndarray]:
    """Two-site family [[0, c-g], [c, 0]] with coalescence at g = c."""
    return lambda g: np.array([[0.0, c - g], [c, 0.0]], dtype=complex)


def pt_dimer(c: float = 1.0) -> Callable[[float], np.ndarray]:
    """Two-site family [[i*gamma, c], [c, -i*gamma]] with coalescence at gamma = c."""
    return lambda gamma: np.array([[1j * gamma, c], [c, -1j * gamma]], dtype=complex)


def coalescing_pair(h: np.ndarray, candidates: Callable[[np.ndarray], list[int]] | None = None) -> tuple[float, float]:
    """(overlap, gap) of the candidate eigenvector pair with the largest overlap."""
    w, v = np.linalg.eig(np.asarray(h, dtype=complex))
    v = v / np.linalg.norm(v, axis=0)
    idx = list(range(len(w))) if candidates is None else candidates(w)
    best = (0.0, math.inf)
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            i, j = idx[a], idx[b]
            ov = min(abs(np.vdot(v[:, i], v[:, j])), 1.0)
            if ov > best[0]:
                best = (float(ov), float(abs(w[i] - w[j])))
    return best


def _lattice_family(template: LatticeSpec):
    check_spec(template)
    if template.defect.variant is DefectKind.NONE:
        raise ValueError("EP search on a lattice needs a defect variant (asym or pt)")

    def family(s: float) -> np.ndarray:
        return build_hamiltonian(template.with_strength(s))

    # band modes never coalesce; track only the in-gap modes
    def gap_modes(w: np.ndarray) -> list[int]:
        return [i for i, e in enumerate(w) if isolation_score(e, template.k, template.c) > 0]

    return family, gap_modes


def locate_exceptional_point(family, bracket: tuple[float, float], tolerance: float = 1e-10,
                             scan_points: int = 41) -> EPReport:
    """Find the parameter in ``bracket`` where a mode pair coalesces.

    ``family`` is either a :class:`LatticeSpec` whose defect strength is varied,
    or a callable mapping the parameter to a matrix. A coarse scan brackets the
    overlap maximum, then golden-section search refines it to ``tolerance``.
    """
    if isinstance(family, LatticeSpec):
        matrix_of, candidates = _lattice_family(family)
    else:
        matrix_of, candidates = family, None
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise ValueError(f"bracket must be increasing, got {bracket}")

    def overlap(s: float) -> float:
        return coalescing_pair(matrix_of(s), candidates)[0]

    grid = np.linspace(lo, hi, max(scan_points, 3))
    values = [overlap(s) for s in grid]
    j = int(np.argmax(values))
    a, b = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]

    invphi = (math.sqrt(5) - 1) / 2
    x1, x2 = b - invphi * (b - a), a + invphi * (b - a)
    f1, f2 = overlap(x1), overlap(x2)
    while b - a > tolerance:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = overlap(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = overlap(x2)
    s_best, f_best = max([(grid[j], values[j]), (x1, f1), (x2, f2)], key=lambda t: t[1])
    if f_best <= 0.9:
        raise NoExceptionalPointError(
            f"eigenvector overlap never exceeds 0.9 in [{lo}, {hi}] (max {f_best:.4f} at {s_best:.6g})")
    ov, gap = coalescing_pair(matrix_of(s_best), candidates)
    return EPReport(parameter_value=float(s_best), min_eigenvalue_gap=gap, max_eigenvector_overlap=ov)
