"""Thermodynamic formalism, periodic-orbit counting and free-group codings on
subshifts of finite type.

Hot loops run under numba when available; set ``SFTPRESS_DISABLE_NUMBA=1`` to
use the pure numpy implementations instead.
"""
from ._config import BUDGET, BudgetExceeded, VerificationError
from .freegroup import (
    DualMetricAutomaton,
    FreeWord,
    GenSet,
    GeodesicAutomaton,
    Necklace,
    dual_potential,
    geodesic_automaton,
    necklaces,
    tau_empirical,
    translation_length,
    word_length,
)
from .io import ResultTable, load_automaton, save_automaton
from .orbits import (
    Cycle,
    birkhoff_distribution,
    count_window,
    d_psi_w,
    empirical_growth,
    enumerate_cycles,
    trace_power,
)
from .sft import Sft, power_subshift, primitivity, restrict, scc_decompose, spectral_radius
from .shrink import (
    QuadraticSurd,
    ShrinkCertificate,
    bridged_orbits,
    extremal_means,
    hurwitz_approx,
    rational_orbit,
    shrink_constant,
    shrink_orbits,
)
from .thermo import (
    EdgePotential,
    ManhattanCurve,
    Roof,
    delta_r,
    equilibrium_measure,
    is_lattice,
    manhattan_theta,
    pressure,
    pressure_two,
    rate_function,
    theta_derivative,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
