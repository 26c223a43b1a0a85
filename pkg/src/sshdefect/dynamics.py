"""Propagation of excitations under i dpsi/dz = H psi.

With this sign convention a mode with Im E > 0 grows as exp(Im E * z), so a
``+i*gamma`` diagonal entry is gain.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._io import csv_text, fmt

# RK4 stability region reaches 2*sqrt(2) along the imaginary axis
RK4_STABILITY_LIMIT = 2 * math.sqrt(2)
DEFAULT_STEP_FACTOR = 0.01
# eigenvector matrices worse than this are treated as (near) defective
EIGEN_CONDITION_LIMIT = 1e6

EVOLUTION_HEADER = ("z", "site", "norm_intensity")


class StepSizeError(ValueError):
    pass


class NearDefectiveWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EvolutionRecord:
    z_grid: np.ndarray
    fields: np.ndarray  # shape (len(z_grid), n_sites)

    @property
    def normalized_intensities(self) -> np.ndarray:
        p = np.abs(self.fields) ** 2
        return p / p.sum(axis=1, keepdims=True)

    @property
    def total_intensity(self) -> np.ndarray:
        return np.sum(np.abs(self.fields) ** 2, axis=1)

    @property
    def n_sites(self) -> int:
        return self.fields.shape[1]

    def to_csv(self) -> str:
        p = self.normalized_intensities
        rows = ((float(z), n + 1, float(p[t, n])) for t, z in enumerate(self.z_grid) for n in range(self.n_sites))
        return csv_text(EVOLUTION_HEADER, rows)

    def to_grid(self) -> str:
        """Dense text grid: one row per z, one column per site."""
        p = self.normalized_intensities
        lines = [f"# zsteps={len(self.z_grid) - 1} nsites={self.n_sites}"]
        lines += [" ".join(fmt(x) for x in row) for row in p]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "z": [float(z) for z in self.z_grid],
            "norm_intensity": self.normalized_intensities.tolist(),
        }


def delta_excitation(n_sites: int, site: int) -> np.ndarray:
    if not 1 <= site <= n_sites:
        raise IndexError(f"site {site} outside 1..{n_sites}")
    psi = np.zeros(n_sites, dtype=complex)
    psi[site - 1] = 1.0
    return psi


def _rk4_step_matrix(h: np.ndarray, dz: float) -> np.ndarray:
    # one classical RK4 step of psi' = A psi is the degree-4 Taylor polynomial of exp(A dz)
    a = -1j * dz * h
    eye = np.eye(len(h), dtype=complex)
    a2 = a @ a
    return eye + a + a2 / 2 + a2 @ a / 6 + a2 @ a2 / 24


def eigen_expansion(h: np.ndarray, psi0: np.ndarray, z_grid: np.ndarray) -> np.ndarray:
    """psi(z) = sum_j a_j exp(-i E_j z) v_j with a = V^{-1} psi0 (left-eigenvector projection)."""
    w, v = np.linalg.eig(h)
    a = np.linalg.solve(v, psi0)
    phases = np.exp(-1j * np.outer(z_grid, w))
    return (phases * a) @ v.T


def eigenvector_condition(h: np.ndarray) -> float:
    _, v = np.linalg.eig(h)
    return float(np.linalg.cond(v))


def propagate(h, psi0, z_max: float, steps: int, method: str = "rk4", max_step: float | None = None) -> EvolutionRecord:
    """Integrate i dpsi/dz = H psi on ``steps + 1`` evenly spaced points in [0, z_max].

    ``method="rk4"`` uses fixed-step RK4 with sub-steps no longer than
    ``max_step`` (default 0.01 / ||H||_inf). ``method="eigen"`` uses the
    biorthogonal eigen-expansion, falling back to RK4 with a warning when the
    eigenvectors are close to linearly dependent.
    """
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    psi0 = np.asarray(psi0, dtype=complex).ravel()
    if h.shape != (len(psi0), len(psi0)):
        raise ValueError(f"H shape {h.shape} does not match psi0 length {len(psi0)}")
    if not np.linalg.norm(psi0) > 0:
        raise ValueError("psi0 must be non-zero")
    if not z_max > 0:
        raise ValueError("z_max must be positive")
    if steps < 1:
        raise ValueError("steps must be a positive integer")
    z_grid = np.linspace(0.0, z_max, steps + 1)

    if method == "eigen":
        cond = eigenvector_condition(h)
        if cond < EIGEN_CONDITION_LIMIT:
            return EvolutionRecord(z_grid, eigen_expansion(h, psi0, z_grid))
        warnings.warn(f"eigenvector condition number {cond:.2e}: matrix is near an exceptional point, "
                      "using direct integration", NearDefectiveWarning, stacklevel=2)
    elif method != "rk4":
        raise ValueError(f"unknown method {method!r}")

    hnorm = float(np.max(np.sum(np.abs(h), axis=1)))
    dz = z_max / steps
    if max_step is None:
        max_step = DEFAULT_STEP_FACTOR / hnorm if hnorm > 0 else dz
    if max_step * hnorm > RK4_STABILITY_LIMIT:
        raise StepSizeError(
            f"step {max_step:g} times ||H||_inf = {hnorm:g} exceeds the RK4 stability limit {RK4_STABILITY_LIMIT:.3f}")
    substeps = max(1, math.ceil(dz / max_step - 1e-12))
    step = np.linalg.matrix_power(_rk4_step_matrix(h, dz / substeps), substeps)

    fields = np.empty((steps + 1, len(psi0)), dtype=complex)
    fields[0] = psi0
    for t in range(steps):
        fields[t + 1] = step @ fields[t]
    return EvolutionRecord(z_grid, fields)


def localization_score(record: EvolutionRecord, site: int) -> float:
    """Mean normalized intensity on ``site`` over the second half of the z-grid."""
    p = record.normalized_intensities
    return float(p[len(p) // 2:, site - 1].mean())
