"""Closed-form depolarized capacities for the catalog families, in nats.

Each expression is an explicit function of the depolarizing parameter
lambda in [0, 1]; the uniform rank-one POVM needs the Gauss hypergeometric
value 2F1(1, 1; d+2; z) at non-positive argument, evaluated here via the
Pfaff transformation and a convergent series. Also provides the known
capacity-achieving ensembles for every finite family.
"""

from __future__ import annotations

import math

import numpy as np

from . import catalog
from .catalog import DesignSpec
from .core import WeightedElementSet, eta, pure_ensemble

_SQRT5 = math.sqrt(5.0)


class ConvergenceError(RuntimeError):
    pass


def hyp2f1_11(c: float, z: float) -> float:
    """2F1(1, 1; c; z) for c > 2 and z <= 0, to ~1e-12 relative accuracy.

    The Pfaff transformation maps the argument to w = z/(z-1) in [0, 1),
    where the series sum_n (c-1)/(c-1+n) w^n converges; terms are added
    until they drop below 1e-16 of the partial sum. The point w = 1 is a
    logarithmic singularity, so for the extreme tail w > 1 - 1e-3 (huge |z|,
    where that series needs >1e4 terms) the standard log-case expansion in
    powers of 1 - w takes over.
    """
    if z > 0:
        raise ValueError("hyp2f1_11 supports z <= 0 only")
    if c <= 2:
        raise ValueError("hyp2f1_11 requires c > 2")
    if z == 0.0:
        return 1.0
    w = z / (z - 1.0)
    if w > 1.0 - 1e-3:
        # 1 - w = 1/(1-z), formed from z directly to dodge cancellation
        return _hyp_log_series(c, 1.0 / (1.0 - z)) / (1.0 - z)
    total = 0.0
    term = 1.0
    n = 0
    while term > 1e-16 * max(total, 1.0):
        total += term
        term *= w * (c - 1.0 + n) / (c + n)
        n += 1
        if n > 1_000_000:
            raise ConvergenceError(f"2F1 series did not converge at w={w!r}")
    return total / (1.0 - z)


def _hyp_log_series(c: float, eps: float) -> float:
    """2F1(1, c-1; c; 1 - eps) near the eps = 0 singularity.

    With a + b = c the hypergeometric function has a log singularity:
    F = (c-1) sum_n [(c-1)_n / n!] [psi(n+1) - psi(c-1+n) - ln(eps)] eps^n.
    """
    from scipy.special import digamma

    log_eps = math.log(eps)
    poch = 1.0  # (c-1)_n / n!
    power = 1.0
    total = 0.0
    for n in range(500):
        contrib = poch * (digamma(n + 1) - digamma(c - 1 + n) - log_eps) * power
        total += contrib
        if n > 2 and abs(contrib) < 1e-17 * abs(total):
            break
        poch *= (c - 1 + n) / (n + 1)
        power *= eps
    else:
        raise ConvergenceError(f"log-case 2F1 series did not converge at eps={eps!r}")
    return (c - 1.0) * total


def hyp2f1_11_series(c: float, z: float, max_terms: int = 100000) -> float:
    """Defining series of 2F1(1, 1; c; z); only convergent for |z| < 1.

    Kept as an independent cross-check of the Pfaff route.
    """
    if abs(z) >= 1:
        raise ValueError("defining series requires |z| < 1")
    total, term, n = 0.0, 1.0, 0
    while abs(term) > 1e-17 * max(abs(total), 1.0) and n < max_terms:
        total += term
        term *= z * (1.0 + n) / (c + n)
        n += 1
    return total


def uniform_capacity(d: int, lam: float) -> float:
    """Capacity of the depolarized uniform rank-one POVM in dimension d.

    At lam = 1 the printed expression is an indeterminate 0 * inf limit; the
    limiting value ln d + 1 - H_d (H_d the d-th harmonic number) is returned.
    """
    _check_lambda(lam)
    if d < 2:
        raise ValueError("uniform POVM requires d >= 2")
    if lam == 0.0:
        return 0.0
    if lam == 1.0:
        return math.log(d) + 1.0 - sum(1.0 / k for k in range(1, d + 1))
    z = -d * lam / (1.0 - lam)
    f = hyp2f1_11(d + 2, z)
    return math.log1p(-lam) + lam + d * lam ** 2 * f / ((d + 1) * (1.0 - lam))


def _check_lambda(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"closed forms cover the depolarizing regime lambda in [0, 1], got {lam}")


def _tetra(lam: float) -> float:
    return math.log(2) - (eta((1 - lam) / 2) + 3 * eta((3 + lam) / 6)) / 2


def _octa(lam: float) -> float:
    return math.log(2) - (eta((1 - lam) / 2) + 4 * eta(0.5) + eta((1 + lam) / 2)) / 3


def _icosa(lam: float) -> float:
    return math.log(2) - (eta((1 - lam) / 2)
                          + 5 * eta((5 - _SQRT5 * lam) / 10)
                          + 5 * eta((5 + _SQRT5 * lam) / 10)
                          + eta((1 + lam) / 2)) / 6


def _qutrit_sic(lam: float) -> float:
    # identical for the qutrit SIC family and the complete qutrit MUB
    return math.log(3) - eta((1 - lam) / 3) - 2 * eta((2 + lam) / 6)


def _hoggar(lam: float) -> float:
    return math.log(8) - (7 * eta((1 - lam) / 8) + 9 * eta((9 + 7 * lam) / 72)) / 2


def _anti_sic(d: int, lam: float) -> float:
    n = d * d - 1
    return (math.log(d) - eta((1 - lam) / d) / d
            - n / d * eta((n + lam) / (d * n)))


def capacity(family: str, lam: float, dim: int | None = None) -> float:
    """Closed-form capacity of the depolarized family, in nats."""
    _check_lambda(lam)
    if family == "qubit_sic":
        return _tetra(lam)
    if family == "qubit_mub":
        return _octa(lam)
    if family == "icosahedron":
        return _icosa(lam)
    if family in ("qutrit_sic", "qutrit_mub"):
        return _qutrit_sic(lam)
    if family == "hoggar_sic":
        return _hoggar(lam)
    if family == "anti_sic":
        if dim is None:
            raise ValueError("anti_sic capacity needs the dimension")
        return _anti_sic(dim, lam)
    if family == "uniform":
        if dim is None:
            raise ValueError("uniform capacity needs the dimension")
        return uniform_capacity(dim, lam)
    raise catalog.UnsupportedFamilyError(family)


def capacity_for(spec: DesignSpec) -> float:
    return capacity(spec.family, spec.lam, spec.dim)


# ---------------------------------------------------------------------------
# capacity-achieving ensembles

def _orthogonality_candidates(states: np.ndarray, tol: float = 1e-8) -> list[np.ndarray]:
    """Pure states orthogonal to some linearly dependent triple of the input."""
    from itertools import combinations
    n = states.shape[0]
    found: list[np.ndarray] = []
    for triple in combinations(range(n), 3):
        a = states[list(triple)].conj()
        u, s, vh = np.linalg.svd(a)
        if s[-1] < tol * s[0]:
            phi = vh[-1].conj()
            if not any(abs(np.vdot(phi, f)) ** 2 > 1 - 1e-8 for f in found):
                found.append(phi)
    return found


def _qutrit_sic_optimal(fiducial_phase: float) -> np.ndarray:
    """States orthogonal to exactly 3 SIC elements each.

    The Hesse-equivalent fiducials admit 12 such states (the complete MUB);
    a generic fiducial admits exactly one orthonormal basis of them.
    """
    states = catalog.qutrit_sic_states(fiducial_phase)
    cand = _orthogonality_candidates(states)
    if len(cand) == 12:
        return np.array(cand)
    # generic case: pick a maximal mutually orthogonal subset
    basis: list[np.ndarray] = []
    for phi in cand:
        if all(abs(np.vdot(phi, b)) ** 2 < 1e-8 for b in basis):
            basis.append(phi)
    if len(basis) != 3:
        raise RuntimeError(
            f"could not assemble the optimal basis: {len(cand)} candidates,"
            f" {len(basis)} mutually orthogonal")
    return np.array(basis)


def optimal_ensemble(family: str, dim: int | None = None,
                     fiducial_phase: float = 0.0) -> WeightedElementSet:
    """The capacity-achieving pure ensemble of the (depolarized) family.

    Optimal ensembles do not depend on lambda, are uniformly weighted, and
    average to the maximally mixed state. The uniform POVM has a continuous
    optimizer set and is not supported here.
    """
    if family == "qubit_sic":
        return pure_ensemble(2, catalog._bloch_amplitudes(-catalog._TETRAHEDRON),
                             label="dual_tetrahedron")
    if family == "qubit_mub":
        return pure_ensemble(2, catalog._bloch_amplitudes(catalog._OCTAHEDRON),
                             label="octahedron")
    if family == "icosahedron":
        return pure_ensemble(2, catalog._bloch_amplitudes(catalog._ICOSAHEDRON),
                             label="icosahedron")
    if family == "qutrit_sic":
        return pure_ensemble(3, _qutrit_sic_optimal(fiducial_phase), label="sic_orthogonal_basis")
    if family == "qutrit_mub":
        return pure_ensemble(3, catalog.qutrit_sic_states(0.0), label="hesse_sic")
    if family == "hoggar_sic":
        return pure_ensemble(8, catalog.hoggar_dual_states(), label="dual_hoggar")
    if family == "anti_sic":
        if dim == 2:
            return pure_ensemble(2, catalog._bloch_amplitudes(catalog._TETRAHEDRON),
                                 label="sic_states")
        if dim == 3:
            return pure_ensemble(3, catalog.qutrit_sic_states(fiducial_phase), label="sic_states")
        if dim == 8:
            return pure_ensemble(8, catalog.hoggar_states(), label="sic_states")
        raise catalog.UnsupportedFamilyError(f"anti_sic dim {dim}")
    if family == "uniform":
        raise catalog.UnsupportedFamilyError(
            "the uniform POVM's optimizer set is continuous; no finite ensemble exists")
    raise catalog.UnsupportedFamilyError(family)
