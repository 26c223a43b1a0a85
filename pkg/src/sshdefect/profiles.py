"""Per-site mode profiles shared by the numeric and analytic routes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._io import csv_text

PROFILE_HEADER = ("site", "re_psi", "im_psi", "intensity")


def fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate ``vec`` so its largest-magnitude entry (first on ties) is real positive."""
    vec = np.asarray(vec, dtype=complex)
    j = int(np.argmax(np.abs(vec)))
    if vec[j] == 0:
        return vec.copy()
    return vec * (abs(vec[j]) / vec[j])


@dataclass(frozen=True)
class ModeProfile:
    """Unit-norm, phase-fixed amplitudes of one mode.

    ``amplitudes[n - 1]`` is the amplitude on site ``n``.
    """

    amplitudes: np.ndarray
    intensities: np.ndarray
    source: str  # "analytic" or "numeric"

    @classmethod
    def from_amplitudes(cls, amplitudes, source: str) -> "ModeProfile":
        a = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(a)
        if norm == 0 or not np.isfinite(norm):
            raise ValueError("mode amplitudes must be finite and not all zero")
        a = fix_phase(a / norm)
        p = np.abs(a) ** 2
        return cls(amplitudes=a, intensities=p / p.sum(), source=source)

    @property
    def n_sites(self) -> int:
        return len(self.amplitudes)

    def intensity(self, site: int) -> float:
        return float(self.intensities[site - 1])

    def argmax_site(self) -> int:
        return int(np.argmax(self.intensities)) + 1

    def distance(self, other: "ModeProfile") -> float:
        """Max-norm distance between the two phase-fixed amplitude vectors."""
        return float(np.max(np.abs(self.amplitudes - other.amplitudes)))

    def to_csv(self) -> str:
        rows = (
            (n + 1, float(a.real), float(a.imag), float(p))
            for n, (a, p) in enumerate(zip(self.amplitudes, self.intensities))
        )
        return csv_text(PROFILE_HEADER, rows)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "sites": list(range(1, self.n_sites + 1)),
            "re_psi": [float(a.real) for a in self.amplitudes],
            "im_psi": [float(a.imag) for a in self.amplitudes],
            "intensity": [float(p) for p in self.intensities],
        }
