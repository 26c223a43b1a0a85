"""Lattice and defect descriptions, and the dense coupled-mode Hamiltonian.

Sites are numbered 1..N on every public surface. The chain has a weak bond
``k`` between sites (1, 2), a strong bond ``c`` between (2, 3), and so on,
so an odd chain starts with a weak bond and ends with a strong one. A strong
bond joins the dimer (2m, 2m+1); the single defect always sits on one dimer.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np


class InvalidSpecError(ValueError):
    """Raised when a lattice description violates one of its invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DefectKind(str, Enum):
    NONE = "none"
    ASYM = "asym"
    PT = "pt"


@dataclass(frozen=True)
class DefectSpec:
    """Single defect on dimer ``m`` (sites 2m and 2m+1).

    ``strength`` is the coupling asymmetry ``g`` for ``asym`` (the bond from
    site 2m+1 into 2m becomes ``c - g``) or the gain/loss rate ``gamma`` for
    ``pt`` (+i*gamma on site 2m, -i*gamma on site 2m+1).
    """

    variant: DefectKind = DefectKind.NONE
    m: int = 1
    strength: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "variant", DefectKind(self.variant))


@dataclass(frozen=True)
class LatticeSpec:
    n_sites: int
    k: float
    c: float
    defect: DefectSpec = field(default_factory=DefectSpec)

    @property
    def n_dimers(self) -> int:
        return (self.n_sites - 1) // 2

    @property
    def defect_sites(self) -> tuple[int, int] | None:
        if self.defect.variant is DefectKind.NONE:
            return None
        return 2 * self.defect.m, 2 * self.defect.m + 1

    def with_strength(self, strength: float) -> "LatticeSpec":
        return replace(self, defect=replace(self.defect, strength=float(strength)))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["defect"]["variant"] = self.defect.variant.value
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LatticeSpec":
        unknown = set(data) - {"n_sites", "k", "c", "defect"}
        if unknown:
            raise ValueError(f"unknown lattice field(s): {', '.join(sorted(unknown))}")
        defect = data.get("defect") or {}
        unknown = set(defect) - {"variant", "m", "strength"}
        if unknown:
            raise ValueError(f"unknown defect field(s): {', '.join(sorted(unknown))}")
        return cls(
            n_sites=int(data["n_sites"]),
            k=float(data["k"]),
            c=float(data["c"]),
            defect=DefectSpec(
                variant=DefectKind(defect.get("variant", "none")),
                m=int(defect.get("m", 1)),
                strength=float(defect.get("strength", 0.0)),
            ),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "LatticeSpec":
        return cls.from_dict(json.loads(text))


def validate_spec(spec: LatticeSpec) -> list[str]:
    """Return one message per violated invariant; empty when ``spec`` is valid."""
    problems = []
    n = spec.n_sites
    if n % 2 == 0:
        problems.append("n_sites must be odd")
    if n < 3:
        problems.append("n_sites must be at least 3")
    if not (math.isfinite(spec.k) and math.isfinite(spec.c) and 0 < spec.k < spec.c):
        problems.append("k must satisfy 0 < k < c")
    d = spec.defect
    if d.variant is not DefectKind.NONE:
        if not 1 <= d.m <= (n - 1) // 2:
            problems.append(f"m must satisfy 1 <= m <= (n_sites - 1)/2 = {(n - 1) // 2}")
        if not (math.isfinite(d.strength) and d.strength >= 0):
            problems.append("defect strength must be finite and >= 0")
    return problems


def check_spec(spec: LatticeSpec) -> None:
    problems = validate_spec(spec)
    if problems:
        raise InvalidSpecError(problems)


def build_hamiltonian(spec: LatticeSpec) -> np.ndarray:
    """Dense complex Hamiltonian whose rows are the coupled-mode equations.

    Row ``n`` of ``H @ psi`` is the right-hand side of the equation for
    ``E psi_n``; the on-site frequency is fixed at zero.
    """
    check_spec(spec)
    n, k, c = spec.n_sites, spec.k, spec.c
    h = np.zeros((n, n), dtype=complex)
    # 0-based bond i joins sites i+1 and i+2; even i are weak bonds
    for i in range(n - 1):
        w = k if i % 2 == 0 else c
        h[i, i + 1] = w
        h[i + 1, i] = w

    d = spec.defect
    a, b = 2 * d.m - 1, 2 * d.m  # 0-based rows of sites 2m, 2m+1
    if d.variant is DefectKind.ASYM:
        h[a, b] = c - d.strength
    elif d.variant is DefectKind.PT and d.strength != 0:
        # skip zero strength so no signed zeros reach the diagonal
        h[a, a] = 1j * d.strength
        h[b, b] = -1j * d.strength
    return h


def chiral_operator(n_sites: int) -> np.ndarray:
    """Sublattice operator diag(+1, -1, +1, ...)."""
    return np.diag([(-1.0) ** i for i in range(n_sites)])
