"""Central record of numerical tolerances.

Every numerical routine takes an optional ``tol`` argument defaulting to
:data:`DEFAULT`; the CLI ``--tol NAME=VALUE`` flag builds a modified copy.
"""

from __future__ import annotations

import dataclasses


@dataclasses.dataclass(frozen=True)
class Tolerances:
    # Jacobi stops when off(A)_F <= eig * ||A||_F
    eig: float = 1e-12
    eig_max_sweeps: int = 100
    # power iteration: successive Rayleigh quotients, relative to max(1, rho)
    perron: float = 1e-13
    # power iteration: ||Mx - rho x||_inf <= perron_residual * rho
    perron_residual: float = 1e-11
    perron_max_iter: int = 1_000_000
    inverse_residual: float = 1e-9
    cholesky_pivot: float = 1e-13
    # relative band for declaring two branch Perron values tied
    perron_tie: float = 1e-9
    bisection_h: float = 1e-12
    bisection_width: float = 1e-14
    bisection_max_iter: int = 200
    # zero band for sign patterns, relative to ||v||_inf
    sign: float = 1e-9

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_overrides(cls, overrides: list[str]) -> "Tolerances":
        """Parse ``NAME=VALUE`` strings into a tolerance record."""
        fields = {f.name: f.type for f in dataclasses.fields(cls)}
        changes = {}
        for item in overrides:
            name, sep, value = item.partition("=")
            name = name.strip()
            if not sep or name not in fields:
                raise ValueError(f"unknown tolerance override {item!r}")
            cast = int if fields[name] in ("int", int) else float
            changes[name] = cast(value)
        return cls(**changes)


DEFAULT = Tolerances()
