"""Module-level tolerances, budgets and the numba switch.

Every numeric knob used by the package lives here so that a single place
controls reproducibility.  Two environment variables are honoured:

``SFTPRESS_DISABLE_NUMBA``
    When set to a truthy value (``1``, ``true``, ``yes``) the pure-numpy
    fallbacks are used instead of the compiled kernels.
``SFTPRESS_BUDGET``
    Comma separated ``key=value`` overrides for entries of :data:`BUDGET`,
    e.g. ``SFTPRESS_BUDGET="cycle_points=5000000,necklace_len=18"``.
"""
from __future__ import annotations

import os


def _truthy(value):
    return str(value).strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = not _truthy(os.environ.get("SFTPRESS_DISABLE_NUMBA", "0"))

# spectral radius / pressure
PRESSURE_RTOL = 1e-12
POWER_ITER_CAP = 10**6

# root finding for Manhattan curves and delta_r (absolute residual in P)
ROOT_TOL = 1e-12

# Legendre transform search
LEGENDRE_T_CAP = 1e3

# invariants checked on equilibrium measures
STATIONARITY_TOL = 1e-10
VARIATIONAL_TOL = 1e-8

BUDGET = {
    # enumerate_cycles: maximal n and maximal number of periodic points
    "cycle_len": 24,
    "cycle_points": 2_000_000,
    # count_window: maximal n for the polynomial transfer DP
    "count_len": 40,
    # necklaces: maximal word length (rank 2)
    "necklace_len": 16,
    # word_length: node budget for the bidirectional search
    "word_nodes": 2_000_000,
    # sphere_sizes: largest sphere kept in memory by the verification search
    "sphere_nodes": 30_000_000,
    # translation_length (increment method): maximal power
    "power": 64,
    # geodesic automaton: deepest Cayley level explored while discovering states
    "automaton_levels": 14,
    # generating-set check: radius within which the standard letters must appear
    "genset_radius": 6,
    # dual_potential: maximal number of refined states
    "dual_states": 200_000,
}


def apply_budget(text: str) -> None:
    """Apply ``"key=value,..."`` overrides to :data:`BUDGET`."""
    for item in (text or "").split(","):
        if not item.strip():
            continue
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in BUDGET:
            raise ValueError(f"unknown budget key {key!r}")
        BUDGET[key] = int(float(value))


def _apply_budget_env():
    apply_budget(os.environ.get("SFTPRESS_BUDGET", "").strip())


_apply_budget_env()


class BudgetExceeded(RuntimeError):
    """A configured size or iteration budget would be exceeded."""


class VerificationError(RuntimeError):
    """A mandatory self-check failed; no unverified result is returned."""
