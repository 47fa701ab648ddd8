"""Hermite-interpolation machinery and the capacity upper bounds C_1..C_5.

A polynomial that interpolates eta(x) = -x ln x from below on [0, 1] turns
the index-of-coincidence vector (gamma_1..gamma_t) of a t design into the
capacity bound ln d - d sum_i a_i gamma_i. The two admissible node patterns
(single contact at the left endpoint, double contacts inside, optional single
contact at the right endpoint for odd degree) guarantee the below property;
the optimal nodes for t <= 5 have closed forms.

The t=4 discriminant is used in the d4-consistent form

    Delta4 = (g1 g4 - g2 g3)^2 - 4 (g1 g3 - g2^2)(g2 g4 - g3^2),

whose expansion carries a -6 g1 g2 g3 g4 cross term. An alternative variant
with gamma_5 in that cross term appears in some derivations; it is
dimensionally inhomogeneous and inconsistent with the node formulas, so it
is only evaluated as a diagnostic (see BoundReport.diagnostics), never used.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .core import eta
from .verify import DesignCertificate, gamma_predicted, moments

BELOW_TOL = 1e-10
NODE_MIN_SEPARATION = 1e-9
DEFINING_RESIDUAL_TOL = 1e-11
CROSS_CHECK_TOL = 1e-10
_DEGENERATE_REL = 1e-12


class PatternError(ValueError):
    """Node/multiplicity layout violates both admissible interpolation patterns."""


class IllConditionedError(ValueError):
    pass


class FormulaDomainError(ArithmeticError):
    """A bound formula left its validity domain (negative discriminant,
    nodes outside (0, 1), non-positive log arguments)."""


class GammaConsistencyError(ValueError):
    pass


@dataclass(frozen=True)
class InterpolationSpec:
    """Hermite interpolation data: contact nodes, multiplicities, interval."""

    nodes: tuple[float, ...]
    multiplicities: tuple[int, ...]
    interval: tuple[float, float] = (0.0, 1.0)

    @property
    def degree(self) -> int:
        return sum(self.multiplicities) - 1

    def validate_pattern(self) -> None:
        """Check the invariants that make interpolation-from-below provable.

        Requires x_0 = a with multiplicity 1, strictly increasing nodes, and
        one of: (a) x_last = b with multiplicity 1 and doubled interior nodes,
        or (b) x_last < b with every non-first node doubled.
        """
        a, b = self.interval
        nodes, mult = self.nodes, self.multiplicities
        if len(nodes) != len(mult) or len(nodes) < 2:
            raise PatternError("need at least two nodes with matching multiplicities")
        if not (0.0 <= a < b <= 1.0):
            raise PatternError(f"interval [{a}, {b}] must be a subinterval of [0, 1]")
        if any(m < 1 for m in mult):
            raise PatternError("multiplicities must be positive")
        if any(nodes[i] >= nodes[i + 1] for i in range(len(nodes) - 1)):
            raise PatternError("nodes must be strictly increasing")
        if nodes[0] != a or mult[0] != 1:
            raise PatternError("first node must be the left endpoint with multiplicity 1")
        if nodes[-1] < a or nodes[-1] > b:
            raise PatternError("nodes must lie inside the interval")
        pattern_a = (nodes[-1] == b and mult[-1] == 1
                     and all(m == 2 for m in mult[1:-1]))
        pattern_b = (nodes[-1] < b and all(m == 2 for m in mult[1:]))
        if not (pattern_a or pattern_b):
            raise PatternError(
                f"nodes {nodes} multiplicities {mult} fit neither admissible pattern")


def _eta_derivative(x: float, k: int) -> float:
    if k == 0:
        return eta(x)
    if x <= 0.0:
        raise ValueError("eta derivatives are singular at 0")
    if k == 1:
        return float(-np.log(x) - 1.0)
    return (-1.0) ** k * math.factorial(k - 2) * x ** (1 - k)


def hermite_interpolate(spec: InterpolationSpec, check_pattern: bool = True) -> np.ndarray:
    """Coefficients (ascending monomial order) of the Hermite interpolant of eta.

    The polynomial of degree sum(j_i) - 1 matches eta and its derivatives up
    to order j_i - 1 at each node. Solved as a confluent Vandermonde system;
    the defining equations are re-checked to 1e-11 after the solve.
    """
    if check_pattern:
        spec.validate_pattern()
    nodes, mult = spec.nodes, spec.multiplicities
    if min(abs(nodes[i + 1] - nodes[i]) for i in range(len(nodes) - 1)) < NODE_MIN_SEPARATION:
        raise IllConditionedError(f"nodes closer than {NODE_MIN_SEPARATION:g}: {nodes}")
    t = sum(mult) - 1
    rows, rhs = [], []
    for x, j in zip(nodes, mult):
        for k in range(j):
            row = np.zeros(t + 1)
            for i in range(k, t + 1):
                row[i] = math.perm(i, k) * x ** (i - k)
            rows.append(row)
            rhs.append(_eta_derivative(x, k))
    try:
        coeffs = np.linalg.solve(np.array(rows), np.array(rhs))
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(f"singular interpolation system: {exc}") from exc
    residual = float(np.abs(np.array(rows) @ coeffs - np.array(rhs)).max())
    if residual > DEFINING_RESIDUAL_TOL:
        raise IllConditionedError(f"interpolation residual {residual:.3e} > 1e-11")
    return coeffs


def _poly_eval(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(x, coeffs)


def verify_below(coeffs: np.ndarray, interval: tuple[float, float] = (0.0, 1.0),
                 n_grid: int = 512) -> bool:
    """True iff eta - r >= -1e-10 on the interval.

    Checks a uniform grid plus every critical point of eta - r located by
    root-finding on the derivative (sign changes bracketed on a finer grid).
    """
    a, b = interval
    xs = np.linspace(a, b, max(n_grid, 8))
    gap = eta_vals(xs) - _poly_eval(np.asarray(coeffs, dtype=float), xs)
    worst = float(gap.min())

    dcoeffs = np.polynomial.polynomial.polyder(np.asarray(coeffs, dtype=float))

    def dgap(x):
        return -np.log(x) - 1.0 - np.polynomial.polynomial.polyval(x, dcoeffs)

    lo = max(a, 1e-12)
    fine = np.linspace(lo, b, max(4 * n_grid, 1024))
    vals = dgap(fine)
    sign_change = np.where(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    for i in sign_change:
        root = brentq(dgap, fine[i], fine[i + 1], xtol=1e-14)
        worst = min(worst, float(eta(root) - _poly_eval(np.asarray(coeffs, float),
                                                        np.array([root]))[0]))
    return worst >= -BELOW_TOL


def eta_vals(xs: np.ndarray) -> np.ndarray:
    out = np.zeros_like(xs)
    m = xs > 0
    out[m] = -xs[m] * np.log(xs[m])
    return out


@dataclass(frozen=True)
class BoundReport:
    """Capacity upper bound C_t with the interpolation nodes that produced it."""

    t: int
    value: float
    nodes: tuple[float, ...]
    gammas: tuple[float, ...]
    delta: float | None = None
    degenerate: bool = False
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"t": self.t, "value_nats": self.value, "nodes": list(self.nodes),
                "gammas": list(self.gammas), "delta": self.delta,
                "degenerate": self.degenerate, "diagnostics": dict(self.diagnostics)}


def _check_gammas(d: int, gammas: np.ndarray, t: int) -> None:
    if len(gammas) < t:
        raise GammaConsistencyError(f"need gamma_1..gamma_{t}, got {len(gammas)}")
    if np.any(gammas[:t] <= 0):
        raise GammaConsistencyError("indices of coincidence must be positive")
    if np.any(np.diff(gammas[:t]) > 1e-12):
        raise GammaConsistencyError(f"gammas must be non-increasing: {gammas[:t]}")
    if abs(d * gammas[0] - 1.0) > 1e-9:
        raise GammaConsistencyError(
            f"gamma_1 = {gammas[0]!r} != 1/d; rescaled coincidence vectors are rejected")


def _assemble(d: int, gammas: np.ndarray, nodes: tuple[float, ...],
              mult: tuple[int, ...]) -> tuple[float, np.ndarray]:
    spec = InterpolationSpec(nodes=nodes, multiplicities=mult)
    coeffs = hermite_interpolate(spec)
    if not verify_below(coeffs):
        raise FormulaDomainError(f"interpolant at nodes {nodes} is not below eta")
    t_eff = len(coeffs) - 1
    value = math.log(d) - d * float(sum(coeffs[i] * gammas[i - 1] for i in range(1, t_eff + 1)))
    return value, coeffs


def _quadratic_nodes(qa: float, qb: float, qc: float, scale: float):
    """Roots of qa x^2 - qb x + qc (node quadratic); None when degenerate.

    Degeneracy (vanishing leading coefficient or coincident roots) happens
    exactly for one-point coincidence vectors, e.g. full depolarization.
    """
    if abs(qa) <= _DEGENERATE_REL * scale:
        return None, 0.0
    disc = qb * qb - 4.0 * qa * qc
    tiny = 1e-10 * max(qb * qb, abs(4.0 * qa * qc))
    if disc < 0:
        if disc > -tiny:
            return None, 0.0
        raise FormulaDomainError(f"negative discriminant {disc:.6e}")
    root = math.sqrt(disc)
    x1 = (qb - root) / (2.0 * qa)
    x2 = (qb + root) / (2.0 * qa)
    x1, x2 = min(x1, x2), max(x1, x2)
    if x2 - x1 < NODE_MIN_SEPARATION:
        return None, disc
    return (x1, x2), disc


def bound_Ct(d: int, gammas, t: int) -> BoundReport:
    """Capacity upper bound C_t from (gamma_1..gamma_t), for t in [1, 5].

    C_1 = ln d needs no data. For t in {2, 3, 4} the closed forms are
    evaluated and cross-validated against the node-based assembly to 1e-10;
    C_5 is assembled numerically from its optimal-node quadratic (the closed
    form is impractically long). For t = 4, when gamma_5 is supplied the
    dimensionally-inhomogeneous gamma_5 variant of Delta_4 is evaluated into
    diagnostics alongside the consistent one.

    Degenerate (one-point) coincidence vectors collapse the optimal nodes;
    the bound is then evaluated at the collapsed node set, which is the exact
    limit value (0 at full depolarization).
    """
    gam = np.asarray(gammas, dtype=float)
    if t < 1 or t > 5:
        raise ValueError("t must lie in [1, 5]")
    if t == 1:
        return BoundReport(t=1, value=math.log(d), nodes=(), gammas=tuple(gam[:1]))
    _check_gammas(d, gam, t)
    g = [float("nan")] + [float(v) for v in gam[:5]] + [float("nan")] * (5 - min(5, len(gam)))

    if t == 2:
        x1 = g[2] / g[1]
        if not 0.0 < x1 < 1.0:
            raise FormulaDomainError(f"optimal node {x1} outside (0, 1)")
        nodes, mult = (0.0, x1), (1, 2)
        closed = math.log(d) + math.log(g[2] / g[1])
        assembled, _ = _assemble(d, gam, nodes, mult)
        _cross_check(closed, assembled, t)
        return BoundReport(t=2, value=closed, nodes=nodes, gammas=tuple(gam[:2]),
                           diagnostics={"assembled": assembled})

    if t == 3:
        den = g[1] - 2 * g[2] + g[3]
        if den <= 0 or g[1] - g[2] <= 0 or g[2] - g[3] <= 0:
            raise FormulaDomainError("C_3 formula domain violated (non-positive differences)")
        x1 = (g[2] - g[3]) / (g[1] - g[2])
        if not 0.0 < x1 < 1.0:
            raise FormulaDomainError(f"optimal node {x1} outside (0, 1)")
        nodes, mult = (0.0, x1, 1.0), (1, 2, 1)
        closed = math.log(d) + d * (g[1] - g[2]) ** 2 / den * math.log(x1)
        assembled, _ = _assemble(d, gam, nodes, mult)
        _cross_check(closed, assembled, t)
        return BoundReport(t=3, value=closed, nodes=nodes, gammas=tuple(gam[:3]),
                           diagnostics={"assembled": assembled})

    if t == 4:
        qa = g[1] * g[3] - g[2] ** 2
        qb = g[1] * g[4] - g[2] * g[3]
        qc = g[2] * g[4] - g[3] ** 2
        pair, delta = _quadratic_nodes(qa, qb, qc, scale=g[1] * g[3])
        diagnostics: dict = {}
        if len(gam) >= 5:
            printed = (-3 * g[2] ** 2 * g[3] ** 2 + 4 * g[1] * g[3] ** 3
                       + 4 * g[2] ** 3 * g[4] - 6 * g[1] * g[2] * g[3] * g[5]
                       + g[1] ** 2 * g[4] ** 2)
            diagnostics["delta4_gamma5_variant"] = printed
            diagnostics["delta4_variant_discrepancy"] = printed - delta
        if pair is None:
            xbar = g[2] / g[1]
            value, _ = _assemble(d, gam, (0.0, xbar), (1, 2))
            return BoundReport(t=4, value=value, nodes=(0.0, xbar), gammas=tuple(gam[:4]),
                               delta=delta, degenerate=True, diagnostics=diagnostics)
        x1, x2 = pair
        if not (0.0 < x1 and x2 < 1.0):
            raise FormulaDomainError(f"optimal nodes {pair} outside (0, 1)")
        nodes, mult = (0.0, x1, x2), (1, 2, 2)
        assembled, _ = _assemble(d, gam, nodes, mult)
        ratio_num = g[2] * g[3] - g[1] * g[4] + math.sqrt(delta)
        ratio_den = g[2] * g[3] - g[1] * g[4] - math.sqrt(delta)
        prod = (g[3] ** 2 - g[2] * g[4]) / (g[2] ** 2 - g[1] * g[3])
        if prod <= 0 or ratio_num / ratio_den <= 0:
            raise FormulaDomainError("C_4 closed form domain violated")
        closed = (math.log(d) + 0.5 * math.log(prod)
                  + d * (g[1] ** 2 * g[4] - 3 * g[1] * g[2] * g[3] + 2 * g[2] ** 3)
                  / (2 * math.sqrt(delta)) * math.log(ratio_num / ratio_den))
        _cross_check(closed, assembled, t)
        diagnostics["assembled"] = assembled
        return BoundReport(t=4, value=closed, nodes=nodes, gammas=tuple(gam[:4]),
                           delta=delta, diagnostics=diagnostics)

    # t == 5: assembled from the optimal-node quadratic; no closed form.
    d1 = g[2] - g[1]
    d2 = g[3] - g[2]
    d3 = g[4] - g[3]
    d4 = g[5] - g[4]
    qa = d1 * d3 - d2 ** 2
    qb = d1 * d4 - d2 * d3
    qc = d2 * d4 - d3 ** 2
    pair, delta5 = _quadratic_nodes(qa, qb, qc, scale=abs(d1 * d3) + d2 ** 2)
    if pair is None:
        xbar = (g[2] - g[3]) / (g[1] - g[2])
        value, _ = _assemble(d, gam, (0.0, xbar, 1.0), (1, 2, 1))
        return BoundReport(t=5, value=value, nodes=(0.0, xbar, 1.0), gammas=tuple(gam[:5]),
                           delta=delta5, degenerate=True)
    x1, x2 = pair
    if not (0.0 < x1 and x2 < 1.0):
        raise FormulaDomainError(f"optimal nodes {pair} outside (0, 1)")
    nodes, mult = (0.0, x1, x2, 1.0), (1, 2, 2, 1)
    value, _ = _assemble(d, gam, nodes, mult)
    return BoundReport(t=5, value=value, nodes=nodes, gammas=tuple(gam[:5]), delta=delta5)


def _cross_check(closed: float, assembled: float, t: int) -> None:
    if abs(closed - assembled) > CROSS_CHECK_TOL:
        raise ArithmeticError(
            f"C_{t} closed form {closed!r} and node assembly {assembled!r} disagree")


def bound_from_set(eset, t: int, certificate: DesignCertificate | None = None) -> BoundReport:
    """C_t for a finite element set, with gammas derived from measured moments.

    The bound is only guaranteed for genuine t designs, so a missing or
    insufficient certificate raises a warning rather than an error.
    """
    if certificate is None:
        warnings.warn("bound_from_set: no design certificate supplied; the bound is only"
                      f" valid if the set is a genuine {t}-design", stacklevel=2)
    elif certificate.strength_tested < t or not certificate.passed:
        warnings.warn(f"bound_from_set: certificate ({certificate.verdict} at"
                      f" t={certificate.strength_tested}) does not cover t={t}", stacklevel=2)
    mv = moments(eset, 5)
    gammas = [gamma_predicted(mv, eset.dim, k) for k in range(1, 6)]
    return bound_Ct(eset.dim, gammas, t)
