"""Free groups: reduced words, word metrics, geodesic automata and dual potentials."""
from .automaton import DualMetricAutomaton, GeodesicAutomaton, dual_potential, geodesic_automaton, verify_dual
from .metrics import (
    LocalMetric,
    TauEstimate,
    local_metric,
    sphere_sizes,
    tau_empirical,
    translation_length,
    translation_lengths,
    word_length,
)
from .words import FreeWord, GenSet, Necklace, necklace_array, necklace_count, necklaces

__all__ = [
    "DualMetricAutomaton",
    "FreeWord",
    "GenSet",
    "GeodesicAutomaton",
    "LocalMetric",
    "Necklace",
    "TauEstimate",
    "dual_potential",
    "geodesic_automaton",
    "local_metric",
    "necklace_array",
    "necklace_count",
    "necklaces",
    "sphere_sizes",
    "tau_empirical",
    "translation_length",
    "translation_lengths",
    "verify_dual",
    "word_length",
]
