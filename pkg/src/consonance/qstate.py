"""States with an explicit tensor product structure.

A state value carries its subsystem dimensions alongside the amplitude
vector or matrix.  Flat basis indices are row major over the party
multi-index with the first party slowest,

    flat = sum_k  i_k * prod_{l > k} d_l,

which is the ordering produced by ``numpy.kron`` and C-order reshapes.
All operations return new values; stored arrays are marked read only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

TOL_NORM = 1e-10
TOL_HERM = 1e-10
TOL_TRACE = 1e-10
TOL_PSD = 1e-8
TOL_EIG = 1e-10


class ValidationError(ValueError):
    """A state, parameter, or state file violates a physicality invariant."""


def check_dims(dims) -> tuple[int, ...]:
    """Coerce ``dims`` to a tuple of ints and reject degenerate factors."""
    try:
        out = tuple(int(d) for d in dims)
    except TypeError as exc:
        raise ValueError(f"dims must be an iterable of ints, got {dims!r}") from exc
    if not out or any(d < 2 for d in out):
        raise ValueError(f"every subsystem dimension must be >= 2, got {out}")
    return out


def total_dim(dims) -> int:
    return int(math.prod(check_dims(dims)))


def _frozen_complex(data, shape, what: str) -> np.ndarray:
    arr = np.array(data, dtype=np.complex128)
    if arr.shape != shape:
        raise ValueError(f"{what} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """Amplitude vector over the product basis of ``dims``.

    The constructor checks structure (shape, finiteness) only; norm is
    enforced by the factories in :mod:`consonance.states` and by the file
    loader, so deliberately unnormalized vectors can still be built
    directly when needed.
    """

    dims: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        dims = check_dims(self.dims)
        amps = _frozen_complex(self.amps, (math.prod(dims),), "amplitude vector")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def norm_error(self) -> float:
        return abs(float(np.vdot(self.amps, self.amps).real) - 1.0)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Operator entries over the product basis of ``dims``.

    Structure (shape, finiteness) is checked on construction; hermiticity,
    unit trace and positivity are checked by :func:`validate` /
    :func:`assert_valid`, which every factory and the file loader call.
    The split keeps an escape hatch for deliberately non-physical inputs
    such as partial transposes.
    """

    dims: tuple[int, ...]
    entries: np.ndarray

    def __post_init__(self):
        dims = check_dims(self.dims)
        d = math.prod(dims)
        entries = _frozen_complex(self.entries, (d, d), "density matrix")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.dims)


State = PureState | DensityMatrix


@dataclass(frozen=True)
class Violation:
    invariant: str
    residual: float


def validate(rho: DensityMatrix, *, tol_herm: float = TOL_HERM,
             tol_trace: float = TOL_TRACE, tol_psd: float = TOL_PSD) -> list[Violation]:
    """Return the list of physicality violations of ``rho`` (empty if none).

    Checks hermiticity, unit trace and positive semidefiniteness, each
    against its own tolerance.  Residuals are reported in absolute terms:
    max elementwise deviation for hermiticity, ``|tr - 1|`` for trace and
    the magnitude of the most negative eigenvalue for positivity.
    """
    m = rho.entries
    out = []
    herm = float(np.max(np.abs(m - m.conj().T)))
    if herm > tol_herm:
        out.append(Violation("hermiticity", herm))
    tr = abs(complex(np.trace(m)) - 1.0)
    if tr > tol_trace:
        out.append(Violation("trace", tr))
    lam_min = float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2.0)))
    if lam_min < -tol_psd:
        out.append(Violation("positivity", -lam_min))
    return out


def assert_valid(rho: DensityMatrix, **tols) -> DensityMatrix:
    """Raise :class:`ValidationError` if ``rho`` is not a physical state."""
    bad = validate(rho, **tols)
    if bad:
        detail = "; ".join(f"{v.invariant} residual {v.residual:.3e}" for v in bad)
        raise ValidationError(f"density matrix is not a physical state: {detail}")
    return rho


def assert_normalized(psi: PureState, tol: float = TOL_NORM) -> PureState:
    err = psi.norm_error()
    if err > tol:
        raise ValidationError(f"pure state is not normalized: residual {err:.3e}")
    return psi


def density_from_pure(psi: PureState) -> DensityMatrix:
    """Outer product |psi><psi| as a :class:`DensityMatrix`."""
    assert_normalized(psi)
    return DensityMatrix(psi.dims, np.outer(psi.amps, psi.amps.conj()))


def tensor(a: State, b: State) -> State:
    """Tensor product of two states of the same kind.

    The result's parties are ``a``'s followed by ``b``'s, consistent with
    the row-major flat ordering.
    """
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(a.dims + b.dims, np.kron(a.amps, b.amps))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(a.dims + b.dims, np.kron(a.entries, b.entries))
    raise ValueError("tensor expects two PureState or two DensityMatrix values")


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every party not listed in ``keep`` (0-based indices)."""
    n = rho.n_parties
    keep = sorted(set(int(p) for p in keep))
    if not keep:
        raise ValueError("keep must name at least one party")
    if any(p < 0 or p >= n for p in keep):
        raise ValueError(f"keep={keep} out of range for {n} parties")
    traced = [p for p in range(n) if p not in keep]
    t = rho.entries.reshape(rho.dims + rho.dims)
    n_cur = n
    for p in sorted(traced, reverse=True):
        t = np.trace(t, axis1=p, axis2=p + n_cur)
        n_cur -= 1
    kept_dims = tuple(rho.dims[p] for p in keep)
    d = math.prod(kept_dims)
    return DensityMatrix(kept_dims, t.reshape(d, d))


def partial_transpose(rho: DensityMatrix, party: int) -> np.ndarray:
    """Transpose the given party's indices; returns a bare array.

    The result is generally not positive semidefinite, so it is not
    wrapped in :class:`DensityMatrix` semantics beyond the raw entries.
    """
    n = rho.n_parties
    party = int(party)
    if not 0 <= party < n:
        raise ValueError(f"party {party} out of range for {n} parties")
    t = rho.entries.reshape(rho.dims + rho.dims)
    axes = list(range(2 * n))
    axes[party], axes[n + party] = axes[n + party], axes[party]
    return np.ascontiguousarray(t.transpose(axes).reshape(rho.dim, rho.dim))


def hermitian_eigenvalues(matrix, *, tol: float = TOL_HERM) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, descending."""
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian: residual {dev:.3e}")
    return np.linalg.eigvalsh(m)[::-1].copy()


def singular_values(matrix) -> np.ndarray:
    """Singular values of an arbitrary matrix, descending."""
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    return np.linalg.svd(m, compute_uv=False)


# --- JSON state files ----------------------------------------------------
#
# {"dims": [2, 2], "kind": "pure" | "density", "data": [[re, im], ...]}
#
# For kind "pure" data holds D amplitude pairs; for kind "density" it holds
# D*D entry pairs in row-major order.


def _pairs(values: np.ndarray) -> list[list[float]]:
    flat = np.asarray(values).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def state_to_json(state: State) -> dict:
    if isinstance(state, PureState):
        return {"dims": list(state.dims), "kind": "pure", "data": _pairs(state.amps)}
    if isinstance(state, DensityMatrix):
        return {"dims": list(state.dims), "kind": "density", "data": _pairs(state.entries)}
    raise ValueError(f"not a state value: {state!r}")


def state_from_json(obj: dict, *, validate_state: bool = True) -> State:
    """Build a state from a parsed JSON object.

    ``validate_state=False`` skips the physicality checks (norm for pure
    states; hermiticity, trace and positivity for density matrices) but
    never the structural ones.
    """
    if not isinstance(obj, dict):
        raise ValidationError("state JSON must be an object")
    for key in ("dims", "kind", "data"):
        if key not in obj:
            raise ValidationError(f"state JSON is missing the {key!r} field")
    dims = check_dims(obj["dims"])
    d = math.prod(dims)
    kind = obj["kind"]
    data = obj["data"]
    if not isinstance(data, list) or not all(
            isinstance(p, (list, tuple)) and len(p) == 2 for p in data):
        raise ValidationError("state JSON data must be a list of [re, im] pairs")
    values = np.array([complex(p[0], p[1]) for p in data], dtype=np.complex128)
    if kind == "pure":
        if values.shape != (d,):
            raise ValidationError(f"pure state over dims {dims} needs {d} amplitudes, "
                                  f"got {values.shape[0]}")
        psi = PureState(dims, values)
        return assert_normalized(psi) if validate_state else psi
    if kind == "density":
        if values.shape != (d * d,):
            raise ValidationError(f"density matrix over dims {dims} needs {d * d} entries, "
                                  f"got {values.shape[0]}")
        rho = DensityMatrix(dims, values.reshape(d, d))
        return assert_valid(rho) if validate_state else rho
    raise ValidationError(f"unknown state kind {kind!r}")


def save_state(state: State, path) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_json(state), fh, indent=1)
        fh.write("\n")


def load_state(path, *, validate_state: bool = True) -> State:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"not a JSON state file: {exc}") from exc
    return state_from_json(obj, validate_state=validate_state)
