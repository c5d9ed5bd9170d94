"""Pressure, equilibrium measures, Manhattan curves and rate functions.

All potentials are constant on 2-cylinders, i.e. one value per edge of an
irreducible :class:`~sftpress.sft.Sft`.  Pressures are logarithms of Perron
roots of exponentially weighted adjacency matrices; before power iteration
the weights are gauge-balanced (shifted by the maximum cycle mean and a
coboundary) so that very large or very small exponents stay finite.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, log
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import _config, _kernels, _meancycle
from .sft import Sft, spectral_radius

__all__ = [
    "EdgePotential",
    "Roof",
    "EquilibriumMeasure",
    "ManhattanCurve",
    "RateFunction",
    "RatePoint",
    "LatticeReport",
    "as_fraction",
    "pressure",
    "pressure_two",
    "pressure_derivative",
    "equilibrium_measure",
    "manhattan_theta",
    "theta_derivative",
    "rate_function",
    "delta_r",
    "is_lattice",
]


def as_fraction(x):
    """Exact rational from int, Fraction, ``"p/q"`` strings or floats (dyadic)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    raise TypeError(f"cannot read {x!r} as a rational")


class EdgePotential:
    """One real value per edge of an Sft.

    Parameters
    ----------
    values : sequence
        Edge values.  Ints, ``Fraction`` and ``"p/q"`` strings give an exact
        representation; any float makes the potential numerical unless
        ``exact`` is passed explicitly.
    exact : sequence of Fraction, optional
        Exact values; must agree with ``values`` after float conversion.
    """

    def __init__(self, values, exact=None):
        raw = list(values)
        if exact is None and all(isinstance(v, (int, np.integer, Fraction, str)) for v in raw):
            exact = [as_fraction(v) for v in raw]
        if exact is not None:
            exact = tuple(as_fraction(v) for v in exact)
            if len(exact) != len(raw):
                raise ValueError("exact representation has the wrong length")
        vals = np.array([float(as_fraction(v)) if isinstance(v, str) else float(v) for v in raw], dtype=np.float64)
        if exact is not None:
            conv = np.array([float(q) for q in exact])
            if not np.array_equal(conv, vals):
                raise ValueError("exact and float representations disagree")
        if not np.isfinite(vals).all():
            raise ValueError("potential values must be finite")
        vals.setflags(write=False)
        self.values = vals
        self.exact = exact

    @classmethod
    def constant(cls, sft: Sft, c):
        return cls([c] * sft.n_edges)

    @property
    def is_rational(self):
        return self.exact is not None

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, e):
        return self.exact[e] if self.exact is not None else float(self.values[e])

    def scaled(self, c):
        if self.exact is not None and isinstance(c, (int, Fraction)):
            return EdgePotential([q * c for q in self.exact])
        return EdgePotential(self.values * float(c))

    def __neg__(self):
        return self.scaled(-1)

    def __add__(self, other):
        if isinstance(other, EdgePotential):
            if self.exact is not None and other.exact is not None:
                return EdgePotential([a + b for a, b in zip(self.exact, other.exact)])
            return EdgePotential(self.values + other.values)
        return NotImplemented

    def restricted(self, edge_ids):
        """Potential on a sub-shift, given the parent edge index per new edge."""
        ids = [int(e) for e in edge_ids]
        if self.exact is not None:
            return type(self)([self.exact[e] for e in ids])
        return type(self)(self.values[ids])

    def __repr__(self):
        kind = "exact" if self.exact is not None else "float"
        return f"{type(self).__name__}({kind}, n={len(self)})"


class Roof(EdgePotential):
    """Strictly positive edge potential (the roof of a suspension flow)."""

    def __init__(self, values, exact=None):
        super().__init__(values, exact)
        bad = np.flatnonzero(self.values <= 0)
        if bad.size:
            raise ValueError(f"roof must be positive; edge {int(bad[0])} has value {self.values[bad[0]]}")


def _as_values(sft, weights):
    if isinstance(weights, EdgePotential):
        w = weights.values
    else:
        w = np.asarray(weights, dtype=np.float64)
    if w.shape != (sft.n_edges,):
        raise ValueError(f"expected {sft.n_edges} edge values, got shape {w.shape}")
    return w


def _require_irreducible(sft):
    if not sft.is_irreducible:
        raise ValueError("shift is not irreducible; restrict to a component")


@dataclass
class _Perron:
    lam: float
    B: np.ndarray
    rho: float
    left: np.ndarray
    right: np.ndarray

    @property
    def pressure(self):
        return self.lam + log(self.rho)


def _perron(sft, w, need_left=True):
    k = sft.k
    src, dst = sft.src, sft.dst
    # after balancing the Perron root lies in [1, k], so shift 1 is well scaled
    lam, pot = _kernels.balance(k, src, dst, w)
    wb = w - lam + pot[src] - pot[dst]
    B = np.zeros((k, k))
    B[src, dst] = np.exp(wb)
    rho_r, right, _, _ = _kernels.power_iter(B, shift=1.0)
    if need_left:
        _, left, _, _ = _kernels.power_iter(np.ascontiguousarray(B.T), shift=1.0)
        # second-order accurate Perron root from both vectors
        rho = float(left @ (B @ right) / (left @ right))
    else:
        left = None
        rho = float(rho_r)
    return _Perron(lam, B, rho, left, right)


def pressure(sft: Sft, weights) -> float:
    """Topological pressure of a 2-cylinder potential.

    Returns ``log`` of the spectral radius of the matrix with entry
    ``exp(weights(e))`` on edge ``e``.
    """
    _require_irreducible(sft)
    return _perron(sft, _as_values(sft, weights)).pressure


def pressure_two(sft: Sft, r, psi, a, s) -> float:
    """``P(-a*r - s*psi)``."""
    return pressure(sft, -float(a) * _as_values(sft, r) - float(s) * _as_values(sft, psi))


@dataclass
class EquilibriumMeasure:
    """Equilibrium state of a 2-cylinder potential, as an edge measure.

    Attributes
    ----------
    mu : ndarray
        Probability per edge.
    marginal : ndarray
        Stationary state distribution.
    entropy : float
        Measure-theoretic entropy ``h_mu``.
    pressure : float
        Pressure of the defining weights.
    integrals : dict
        ``name -> integral`` for each potential passed in.
    """

    mu: np.ndarray
    marginal: np.ndarray
    entropy: float
    pressure: float
    integrals: dict = field(default_factory=dict)

    def integral(self, potential):
        vals = potential.values if isinstance(potential, EdgePotential) else np.asarray(potential, dtype=float)
        return float(self.mu @ vals)


def equilibrium_measure(sft: Sft, weights, potentials=None) -> EquilibriumMeasure:
    """Parry-type edge measure ``mu(i->j) = l_i B_ij r_j / (rho l.r)``.

    Parameters
    ----------
    potentials : dict, optional
        ``name -> EdgePotential`` whose integrals are reported.
    """
    _require_irreducible(sft)
    w = _as_values(sft, weights)
    pf = _perron(sft, w)
    src, dst = sft.src, sft.dst
    l, r = pf.left, pf.right
    Bv = pf.B[src, dst]
    norm = pf.rho * float(l @ r)
    mu = l[src] * Bv * r[dst] / norm
    mu = mu / mu.sum()
    marginal = l * r / float(l @ r)
    with np.errstate(divide="ignore"):
        p = Bv * r[dst] / (pf.rho * r[src])
        logp = np.where(mu > 0, np.log(np.where(p > 0, p, 1.0)), 0.0)
    entropy = float(-(mu * logp).sum())
    ints = {}
    for name, pot in (potentials or {}).items():
        ints[name] = float(mu @ _as_values(sft, pot))
    return EquilibriumMeasure(mu, marginal, entropy, pf.pressure, ints)


def pressure_derivative(sft: Sft, base, direction) -> float:
    """``d/dt P(base + t*direction)`` at ``t = 0``, i.e. the integral under mu_base."""
    em = equilibrium_measure(sft, base)
    return float(em.mu @ _as_values(sft, direction))


# ---------------------------------------------------------------------------
# Manhattan curves


@dataclass
class ManhattanCurve:
    """Pressure curve ``s -> theta(s)`` with ``P(-theta(s) r - s psi) = 0``.

    With ``r`` identically 1 this is ``theta(s) = P(-s psi)``.  Whether the
    curve coincides with a group-theoretic Manhattan curve is a hypothesis
    about the input coding, not something checked here.
    """

    sft: Sft
    r: EdgePotential
    psi: EdgePotential
    samples: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        _require_irreducible(self.sft)
        if not isinstance(self.r, EdgePotential):
            self.r = Roof(self.r)
        if not isinstance(self.psi, EdgePotential):
            self.psi = EdgePotential(self.psi)
        if (self.r.values <= 0).any():
            raise ValueError("roof must be positive")

    @classmethod
    def flat(cls, sft, psi):
        return cls(sft, Roof([1] * sft.n_edges), psi)

    def theta(self, s):
        return manhattan_theta(self, s)

    def derivative(self, s):
        return theta_derivative(self, s)

    def sample(self, svals):
        """``[(s, theta(s), theta'(s)), ...]`` for each ``s``."""
        return [(float(s), self.theta(s), self.derivative(s)) for s in svals]


def _solve_theta(curve, s):
    """Root ``a`` of ``P(-a r - s psi) = 0`` and its final residual."""
    s = float(s)
    sft = curve.sft
    r = curve.r.values
    base = -s * curve.psi.values
    p0 = _perron(sft, base).pressure
    rmin, rmax = float(r.min()), float(r.max())
    if rmin == rmax:
        a = p0 / rmin
        return a, _perron(sft, base - a * r).pressure
    lo, hi = sorted((p0 / rmax, p0 / rmin))
    a = p0 / float(r.mean())
    a = min(max(a, lo), hi)
    res = None
    for _ in range(200):
        w = base - a * r
        em = equilibrium_measure(sft, w)
        res = em.pressure
        if abs(res) <= _config.ROOT_TOL:
            return a, res
        # P is decreasing in a
        if res > 0:
            lo = max(lo, a)
        else:
            hi = min(hi, a)
        slope = -float(em.mu @ r)
        step = a - res / slope
        a = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4e-16 * max(1.0, abs(a)):
            break
    return a, _perron(sft, base - a * r).pressure


def manhattan_theta(curve: ManhattanCurve, s) -> float:
    """``theta(s)``: the unique ``a`` with ``P(-a r - s psi) = 0``."""
    key = float(s)
    if key in curve.samples:
        return curve.samples[key][0]
    a, res = _solve_theta(curve, key)
    curve.samples[key] = (a, None, res)
    return a


def theta_residual(curve: ManhattanCurve, s) -> float:
    """``P(-theta(s) r - s psi)`` at the computed root."""
    manhattan_theta(curve, s)
    return curve.samples[float(s)][2]


def theta_derivative(curve: ManhattanCurve, s) -> float:
    """``theta'(s) = -(int psi dmu) / (int r dmu)`` for the measure at ``(theta(s), s)``."""
    key = float(s)
    a = manhattan_theta(curve, key)
    cached = curve.samples[key]
    if cached[1] is not None:
        return cached[1]
    em = equilibrium_measure(curve.sft, -a * curve.r.values - key * curve.psi.values)
    d = -float(em.mu @ curve.psi.values) / float(em.mu @ curve.r.values)
    curve.samples[key] = (a, d, cached[2])
    return d


def delta_r(sft: Sft, r) -> float:
    """The root ``delta`` of ``P(-delta r) = 0`` (suspension entropy)."""
    roof = r if isinstance(r, EdgePotential) else Roof(r)
    curve = ManhattanCurve(sft, roof, EdgePotential([0] * sft.n_edges))
    return manhattan_theta(curve, 0.0)


# ---------------------------------------------------------------------------
# rate functions


@dataclass
class RatePoint:
    eta: float
    t: Optional[float]
    value: float
    boundary: bool


@dataclass
class RateFunction:
    """Legendre rate function ``L(eta) = sup_t (t eta + h - P(t psi))``.

    ``alpha_min``/``alpha_max`` are exact when ``psi`` is rational.  Outside
    ``[alpha_min, alpha_max]`` the value is ``+inf``.  ``degenerate`` marks a
    potential cohomologous to a constant, whose domain is a single point.
    """

    sft: Sft
    psi: EdgePotential
    alpha_min: object
    alpha_max: object
    entropy: float
    mean: float
    degenerate: bool
    end_values: tuple

    def __call__(self, eta):
        return self.solve(eta).value

    def I(self, eta):  # noqa: E743 - matches the notation h - L
        return self.entropy - self(eta)

    def derivative_P(self, t):
        em = equilibrium_measure(self.sft, float(t) * self.psi.values)
        return float(em.mu @ self.psi.values)

    def _objective(self, t, eta):
        return t * eta + self.entropy - pressure(self.sft, t * self.psi.values)

    def solve(self, eta) -> RatePoint:
        eta_f = float(eta)
        lo_a, hi_a = self.alpha_min, self.alpha_max
        if _lt(eta, lo_a) or _gt(eta, hi_a):
            return RatePoint(eta_f, None, float("inf"), True)
        if self.degenerate:
            return RatePoint(eta_f, 0.0, 0.0, True)
        if _eq(eta, lo_a):
            return RatePoint(eta_f, -float("inf"), self.end_values[0], True)
        if _eq(eta, hi_a):
            return RatePoint(eta_f, float("inf"), self.end_values[1], True)
        g = lambda t: self.derivative_P(t) - eta_f  # noqa: E731
        g0 = g(0.0)
        if g0 == 0.0:
            return RatePoint(eta_f, 0.0, 0.0, False)
        sign = -1.0 if g0 > 0 else 1.0
        a, b = 0.0, sign
        cap = _config.LEGENDRE_T_CAP
        while g(b) * g0 > 0:
            if abs(b) >= cap:
                return RatePoint(eta_f, b, self._objective(b, eta_f), True)
            a, b = b, min(abs(b) * 2.0, cap) * sign
        lo, hi = sorted((a, b))
        t = brentq(g, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)
        return RatePoint(eta_f, t, max(self._objective(t, eta_f), 0.0), False)


def _lt(x, y):
    return (Fraction(x) if isinstance(x, float) else x) < y


def _gt(x, y):
    return (Fraction(x) if isinstance(x, float) else x) > y


def _eq(x, y):
    return (Fraction(x) if isinstance(x, float) else x) == y


def _extreme_subgraph_radius(sft, psi, sign):
    """Spectral radius of the graph of cycles attaining the extremal mean."""
    vals = list(psi.exact) if psi.exact is not None else psi.values.tolist()
    vals = [sign * v for v in vals]
    src, dst = sft.src.tolist(), sft.dst.tolist()
    lam = _meancycle.max_cycle_mean(sft.k, src, dst, vals)
    pot = _meancycle.potentials(sft.k, src, dst, vals, lam)
    tight = _meancycle.tight_edges(src, dst, vals, lam, pot)
    A = np.zeros((sft.k, sft.k))
    for e in tight:
        A[src[e], dst[e]] = 1.0
    return sign * lam, spectral_radius(A)


def rate_function(sft: Sft, psi) -> RateFunction:
    """Rate function of Birkhoff averages of ``psi`` on an irreducible shift."""
    _require_irreducible(sft)
    psi = psi if isinstance(psi, EdgePotential) else EdgePotential(psi)
    amax, rho_max = _extreme_subgraph_radius(sft, psi, 1)
    amin, rho_min = _extreme_subgraph_radius(sft, psi, -1)
    em = equilibrium_measure(sft, np.zeros(sft.n_edges))
    h = em.pressure
    mean = float(em.mu @ psi.values)
    degenerate = amin == amax
    ends = (h - log(rho_min), h - log(rho_max))
    return RateFunction(sft, psi, amin, amax, h, mean, degenerate, ends)


# ---------------------------------------------------------------------------
# lattice test


@dataclass(frozen=True)
class LatticeReport:
    """Outcome of :func:`is_lattice`.

    ``kind`` is ``"lattice"`` (Birkhoff data in ``-a n + b Z`` with ``b``
    maximal), ``"constant"`` (cohomologous to the constant ``-a``, ``b = 0``)
    or ``"non-lattice"``.  ``exact`` is false when float values had to be
    recognised as rationals, in which case the report is numerical and
    unverified.
    """

    kind: str
    a: Optional[Fraction]
    b: Optional[Fraction]
    exact: bool

    @property
    def is_lattice(self):
        return self.kind != "non-lattice"


def _egcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def is_lattice(sft: Sft, psi) -> LatticeReport:
    """Decide whether ``{psi^n(x) + a n}`` lies in ``b Z`` for some ``a, b``.

    Uses the (length, sum) vectors of a fundamental cycle basis and their
    2x2 Hermite normal form ``[[g, u], [0, w]]``.
    """
    _require_irreducible(sft)
    psi = psi if isinstance(psi, EdgePotential) else EdgePotential(psi)
    exact = psi.exact is not None
    if exact:
        vals = list(psi.exact)
    else:
        vals = []
        for v in psi.values.tolist():
            q = Fraction(v).limit_denominator(10**4)
            if abs(float(q) - v) > 1e-9:
                return LatticeReport("non-lattice", None, None, False)
            vals.append(q)
    D = 1
    for q in vals:
        D = D * q.denominator // gcd(D, q.denominator)
    ints = [int(q * D) for q in vals]
    # spanning arborescence from state 0
    depth = {0: 0}
    acc = {0: 0}
    ptr, out_edge = sft.csr()
    queue = [0]
    for u in queue:
        for e in out_edge[ptr[u]:ptr[u + 1]]:
            v = int(sft.dst[e])
            if v not in depth:
                depth[v] = depth[u] + 1
                acc[v] = acc[u] + ints[e]
                queue.append(v)
    g = u = w = 0
    for e, (a, b) in enumerate(sft.edges):
        n = 1 + depth[a] - depth[b]
        S = ints[e] + acc[a] - acc[b]
        if n == 0:
            w = gcd(w, S)
            continue
        gg, x, y = _egcd(g, n)
        if gg < 0:
            gg, x, y = -gg, -x, -y
        w = gcd(w, (n * u - g * S) // gg)
        g, u = gg, x * u + y * S
    if w == 0:
        return LatticeReport("constant", Fraction(-u, g * D), Fraction(0), exact)
    u %= w
    return LatticeReport("lattice", Fraction(-u, g * D), Fraction(w, D), exact)
