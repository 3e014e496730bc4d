"""Comparison measures and closed-form reference values.

Entanglement monotones (concurrence, entanglement of formation,
negativity), Schmidt analysis of bipartite pure states, and the known
closed forms for quantum discord and for the consonance of specific state
families.  All logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qstate import (DensityMatrix, PureState, ValidationError,
                     assert_normalized, assert_valid, partial_transpose)

CLOSED_FORM = "closed_form"
OPTIMIZER = "optimizer"
ORACLE = "oracle"


def _xlog2(x: float) -> float:
    """x * log2(x) continued by 0 at x = 0."""
    if x < 0.0:
        if x > -1e-12:
            return 0.0
        raise ValueError(f"xlog2 argument must be >= 0, got {x}")
    return 0.0 if x == 0.0 else x * math.log2(x)


def binary_entropy(p: float) -> float:
    if not -1e-12 <= p <= 1.0 + 1e-12:
        raise ValueError(f"probability out of [0, 1]: {p}")
    p = min(max(p, 0.0), 1.0)
    return (-_xlog2(p) - _xlog2(1.0 - p)) + 0.0   # + 0.0 folds -0.0 into 0.0


# --- Schmidt analysis ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """psi = sum_k c_k |left_k> (x) |right_k> with c_k descending.

    ``left_basis`` and ``right_basis`` hold the vectors as columns; there
    are min(d1, d2) of each and the coefficients satisfy sum c_k^2 = 1.
    """

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        out = np.zeros(self.left_basis.shape[0] * self.right_basis.shape[0],
                       dtype=np.complex128)
        for k, c in enumerate(self.coefficients):
            out += c * np.kron(self.left_basis[:, k], self.right_basis[:, k])
        return out


def schmidt_decompose(psi: PureState) -> SchmidtDecomposition:
    if psi.n_parties != 2:
        raise ValueError(f"Schmidt decomposition needs exactly two parties, "
                         f"got dims {psi.dims}")
    assert_normalized(psi)
    d1, d2 = psi.dims
    m = psi.amps.reshape(d1, d2)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    # psi = sum_k s_k u[:, k] (x) vh[k, :] with no conjugation on the right
    coeffs = s.copy()
    coeffs.setflags(write=False)
    return SchmidtDecomposition(coeffs, u, vh.T.copy())


def schmidt_coefficients(psi: PureState) -> np.ndarray:
    return schmidt_decompose(psi).coefficients


# --- entanglement monotones ---------------------------------------------

# sigma_y (x) sigma_y; real and symmetric
_SPIN_FLIP = np.array([[0, 0, 0, -1],
                       [0, 0, 1, 0],
                       [0, 1, 0, 0],
                       [-1, 0, 0, 0]], dtype=np.float64)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    if w.size and w[-1] > 0.0:
        # zero eigenvalues of rank-deficient inputs surface as O(eps) noise;
        # sqrt would amplify that to O(1e-8), so cut well above the noise floor
        w[w < 1e-13 * w[-1]] = 0.0
    return (v * np.sqrt(w)) @ v.conj().T


def concurrence_2x2(rho: DensityMatrix) -> float:
    """Two-qubit concurrence max{0, l1 - l2 - l3 - l4}.

    The l_k are computed as singular values of sqrt(rho) F sqrt(rho)^*
    with F the spin-flip matrix; that avoids taking square roots of
    near-zero eigenvalues of rho rho~, which would cap the accuracy at
    sqrt(machine eps) for rank-deficient states.
    """
    if rho.dims != (2, 2):
        raise ValueError(f"concurrence is defined for dims (2, 2), got {rho.dims}")
    assert_valid(rho)
    root = _psd_sqrt(rho.entries)
    lam = np.linalg.svd(root @ _SPIN_FLIP @ root.conj(), compute_uv=False)
    return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_werner(a: float) -> float:
    """Closed-form Werner concurrence max{0, (3a - 1)/2}."""
    a = float(a)
    if not -1e-12 <= a <= 1.0 + 1e-12:
        raise ValidationError(f"Werner parameter out of [0, 1]: {a}")
    return max(0.0, (3.0 * min(max(a, 0.0), 1.0) - 1.0) / 2.0)


def eof_from_concurrence(c: float) -> float:
    """Entanglement of formation h((1 + sqrt(1 - C^2)) / 2) in ebits."""
    c = float(c)
    if not -1e-12 <= c <= 1.0 + 1e-12:
        raise ValueError(f"concurrence out of [0, 1]: {c}")
    c = min(max(c, 0.0), 1.0)
    return binary_entropy(0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - c * c))))


def eof_2x2(rho: DensityMatrix) -> float:
    return eof_from_concurrence(concurrence_2x2(rho))


def negativity(rho: DensityMatrix, party: int = 0) -> float:
    """Trace norm of the partial transpose minus one, clamped at zero."""
    assert_valid(rho)
    pt = partial_transpose(rho, party)
    pt = (pt + pt.conj().T) / 2.0
    trace_norm = math.fsum(np.abs(np.linalg.eigvalsh(pt)).tolist())
    return max(0.0, trace_norm - 1.0)


# --- closed-form quantum discord ----------------------------------------


def discord_werner(a: float) -> float:
    """Discord of the Werner family at mixing parameter a in [0, 1]."""
    a = float(a)
    if not -1e-12 <= a <= 1.0 + 1e-12:
        raise ValidationError(f"Werner parameter out of [0, 1]: {a}")
    a = min(max(a, 0.0), 1.0)
    return 0.25 * (_xlog2(1.0 - a) + _xlog2(1.0 + 3.0 * a)
                   - 2.0 * _xlog2(1.0 + a)) + 0.0


def discord_bell_like(a, b) -> float:
    """Discord of a|01> + b|10> (or the |00>/|11> version): equals the EoF."""
    a, b = complex(a), complex(b)
    p = abs(a) ** 2
    if abs(p + abs(b) ** 2 - 1.0) > 1e-10:
        raise ValidationError(f"|a|^2 + |b|^2 must be 1, got {p + abs(b) ** 2}")
    # h(|a|^2), the EoF of the same state written through C = 2|a||b|
    return binary_entropy(p)


def discord_2x3(alpha: float, gamma: float) -> float:
    """Discord of the two-parameter qubit-qutrit family.

    The third weight is fixed by the trace, beta = (1 - 2 alpha - gamma)/3;
    all three weights must be nonnegative.
    """
    alpha, gamma = float(alpha), float(gamma)
    beta = (1.0 - 2.0 * alpha - gamma) / 3.0
    for name, w in (("alpha", alpha), ("gamma", gamma), ("beta", beta)):
        if w < -1e-12:
            raise ValidationError(f"{name} = {w} is negative; weights must be >= 0")
    beta = max(beta, 0.0)
    gamma = max(gamma, 0.0)
    # beta log2(2 beta) + gamma log2(2 gamma) - (beta + gamma) log2(beta + gamma)
    return (beta + gamma + _xlog2(beta) + _xlog2(gamma) - _xlog2(beta + gamma))


# --- closed-form consonance ---------------------------------------------


@dataclass(frozen=True)
class MeasureResult:
    """One evaluated measure, tagged with how it was obtained."""

    name: str
    value: float
    params: dict = field(default_factory=dict)
    method: str = CLOSED_FORM
    note: str | None = None


def _norm4(a, b, c, d):
    return abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2


def consonance_closed_form(family: str, **params) -> MeasureResult:
    """Known consonance values by state family.

    Supported families: ``werner`` (a), ``bell_like``/``psi_like`` (a, b),
    ``pure_2x2`` (a, b, c, d), ``two_param_2x3`` (alpha, gamma), ``ghz``.
    """
    family = family.replace("-", "_").lower()
    if family == "werner":
        a = float(params["a"])
        if not -1e-12 <= a <= 1.0 + 1e-12:
            raise ValidationError(f"Werner parameter out of [0, 1]: {a}")
        return MeasureResult("consonance", min(max(a, 0.0), 1.0),
                             {"a": a}, CLOSED_FORM)
    if family in ("bell_like", "psi_like"):
        a, b = complex(params["a"]), complex(params["b"])
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
            raise ValidationError("|a|^2 + |b|^2 must be 1")
        return MeasureResult("consonance", 2.0 * abs(a) * abs(b),
                             {"a": a, "b": b}, CLOSED_FORM)
    if family == "pure_2x2":
        a, b, c, d = (complex(params[k]) for k in "abcd")
        if abs(_norm4(a, b, c, d) - 1.0) > 1e-10:
            raise ValidationError("amplitudes must be normalized")
        return MeasureResult("consonance", 2.0 * abs(a * d - b * c),
                             {"a": a, "b": b, "c": c, "d": d}, CLOSED_FORM)
    if family == "two_param_2x3":
        alpha, gamma = float(params["alpha"]), float(params["gamma"])
        beta = (1.0 - 2.0 * alpha - gamma) / 3.0
        for name, w in (("alpha", alpha), ("gamma", gamma), ("beta", beta)):
            if w < -1e-12:
                raise ValidationError(f"{name} = {w} is negative")
        return MeasureResult("consonance", abs(beta - gamma),
                             {"alpha": alpha, "gamma": gamma}, CLOSED_FORM)
    if family == "ghz":
        return MeasureResult("consonance", 1.0, dict(params), CLOSED_FORM,
                             note="attained by a depth-3 non-global circuit; "
                                  "single-party frames do not reach it")
    raise ValueError(f"no closed-form consonance for family {family!r}")
