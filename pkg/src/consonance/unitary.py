"""Parameterized local unitaries and circuits of non-global layers.

A d-dimensional unitary is generated from d^2 real parameters through a
Hermitian matrix H(theta): the first d entries fill the diagonal, the
remaining d(d-1) entries fill the strict upper triangle in row-major
order as (re, im) pairs.  U = exp(iH), so theta = 0 gives the identity.

A circuit is an ordered list of layers; each layer acts on a strict
subset of the parties (its support) and is embedded in the full space as
U_layer (x) identity.  Layers are applied first to last, so the overall
unitary is U_L ... U_2 U_1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .qstate import DensityMatrix, PureState, check_dims

TOL_UNITARY = 1e-10

SINGLE_PARTY = "single_party"
NONGLOBAL = "nonglobal"


def n_params(dim: int) -> int:
    """Number of real parameters of a dim-dimensional unitary chart."""
    dim = int(dim)
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    return dim * dim


def hermitian_from_theta(dim: int, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (dim * dim,):
        raise ValueError(f"a {dim}-dimensional unitary takes {dim * dim} parameters, "
                         f"got shape {theta.shape}")
    h = np.diag(theta[:dim].astype(np.complex128))
    iu = np.triu_indices(dim, k=1)
    off = theta[dim::2] + 1j * theta[dim + 1::2]
    h[iu] = off
    h[(iu[1], iu[0])] = off.conj()
    return h


def expi_hermitian(h: np.ndarray) -> np.ndarray:
    """exp(iH) for Hermitian H via eigendecomposition (exactly unitary columns)."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ v.conj().T


@dataclass(frozen=True, eq=False)
class UnitaryParams:
    """Chart point theta in R^(dim^2); theta = 0 is the identity."""

    dim: int
    theta: np.ndarray

    def __post_init__(self):
        dim = int(self.dim)
        theta = np.array(self.theta, dtype=np.float64)
        if theta.shape != (dim * dim,):
            raise ValueError(f"theta must have shape ({dim * dim},), got {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("theta contains non-finite entries")
        theta.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "theta", theta)

    @classmethod
    def identity(cls, dim: int) -> "UnitaryParams":
        return cls(dim, np.zeros(n_params(dim)))


def build_unitary(params: UnitaryParams) -> np.ndarray:
    return expi_hermitian(hermitian_from_theta(params.dim, params.theta))


def params_for_unitary(u, *, tol: float = 1e-8) -> UnitaryParams:
    """Invert the chart: find theta with build_unitary(theta) ~ u.

    Uses the principal matrix logarithm, so it is defined for every
    unitary; branch choices make the round trip exact only up to the
    principal branch.  Raises ValueError if ``u`` is not unitary.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got {u.shape}")
    d = u.shape[0]
    dev = float(np.max(np.abs(u @ u.conj().T - np.eye(d))))
    if dev > tol:
        raise ValueError(f"matrix is not unitary: residual {dev:.3e}")
    h = scipy.linalg.logm(u) / 1j
    h = (h + h.conj().T) / 2.0
    theta = np.empty(d * d)
    theta[:d] = np.diag(h).real
    iu = np.triu_indices(d, k=1)
    theta[d::2] = h[iu].real
    theta[d + 1::2] = h[iu].imag
    return UnitaryParams(d, theta)


@dataclass(frozen=True, eq=False)
class CircuitLayer:
    """One unitary acting on ``support`` (sorted 0-based party indices)."""

    support: tuple[int, ...]
    params: UnitaryParams

    def __post_init__(self):
        support = tuple(int(p) for p in self.support)
        if not support:
            raise ValueError("layer support must not be empty")
        if any(p < 0 for p in support):
            raise ValueError(f"negative party index in support {support}")
        if any(a >= b for a, b in zip(support, support[1:])):
            raise ValueError(f"support must be strictly increasing, got {support}")
        object.__setattr__(self, "support", support)


@dataclass(frozen=True, eq=False)
class LocalCircuit:
    layers: tuple[CircuitLayer, ...]
    preset: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def n_theta(self) -> int:
        return sum(layer.params.theta.size for layer in self.layers)


def _check_layer(layer: CircuitLayer, dims: tuple[int, ...]) -> None:
    n = len(dims)
    if layer.support[-1] >= n:
        raise ValueError(f"support {layer.support} out of range for {n} parties")
    if len(layer.support) >= n:
        raise ValueError(f"support {layer.support} is not a strict subset of "
                         f"{n} parties; global layers are not allowed")
    d_need = math.prod(dims[p] for p in layer.support)
    if layer.params.dim != d_need:
        raise ValueError(f"layer on support {layer.support} of dims {dims} needs a "
                         f"{d_need}-dimensional unitary, got {layer.params.dim}")


@lru_cache(maxsize=None)
def _embed_plan(support: tuple[int, ...], dims: tuple[int, ...]):
    n = len(dims)
    rest = [p for p in range(n) if p not in support]
    order = list(support) + rest
    shape = [dims[p] for p in order]
    perm = [order.index(p) for p in range(n)]
    axes = perm + [n + q for q in perm]
    d_rest = math.prod(dims[p] for p in rest) if rest else 1
    d_full = math.prod(dims)
    return d_rest, tuple(shape), tuple(axes), d_full


def embed_matrix(u: np.ndarray, support: tuple[int, ...], dims: tuple[int, ...]) -> np.ndarray:
    """Lift a support-space unitary to the full space as u (x) identity."""
    d_rest, shape, axes, d_full = _embed_plan(tuple(support), tuple(dims))
    big = np.kron(u, np.eye(d_rest)) if d_rest > 1 else u
    t = big.reshape(shape + shape).transpose(axes)
    return np.ascontiguousarray(t.reshape(d_full, d_full))


def embed(layer: CircuitLayer, dims) -> np.ndarray:
    dims = check_dims(dims)
    _check_layer(layer, dims)
    return embed_matrix(build_unitary(layer.params), layer.support, dims)


def circuit_unitary(circuit: LocalCircuit, dims) -> np.ndarray:
    dims = check_dims(dims)
    total = np.eye(math.prod(dims), dtype=np.complex128)
    for layer in circuit.layers:
        _check_layer(layer, dims)
        total = embed_matrix(build_unitary(layer.params), layer.support, dims) @ total
    return total


def apply(circuit: LocalCircuit, state):
    """Conjugate a state by the circuit unitary (or rotate a pure vector)."""
    u = circuit_unitary(circuit, state.dims)
    if isinstance(state, PureState):
        return PureState(state.dims, u @ state.amps)
    if isinstance(state, DensityMatrix):
        return DensityMatrix(state.dims, u @ state.entries @ u.conj().T)
    raise ValueError(f"not a state value: {state!r}")


# --- presets -------------------------------------------------------------


def default_supports(n: int) -> list[tuple[int, ...]]:
    """All singleton and pair supports of n parties in lexicographic order."""
    if n < 2:
        raise ValueError("need at least two parties")
    pool = [(p,) for p in range(n)]
    if n > 2:
        # pairs are global (hence disallowed) when n == 2
        pool += [(p, q) for p in range(n) for q in range(p + 1, n)]
    return sorted(pool)


def single_party_circuit(dims) -> LocalCircuit:
    """One singleton layer per party, in party order, at theta = 0."""
    dims = check_dims(dims)
    if len(dims) < 2:
        raise ValueError("need at least two parties")
    layers = tuple(CircuitLayer((p,), UnitaryParams.identity(d))
                   for p, d in enumerate(dims))
    return LocalCircuit(layers, preset=SINGLE_PARTY)


def nonglobal_circuit(dims, depth: int = 3, supports=None) -> LocalCircuit:
    """At most ``depth`` layers drawn from the singleton-and-pair pool.

    Without an explicit ``supports`` list the first ``depth`` entries of
    :func:`default_supports` are used, cycling through the pool again if
    ``depth`` exceeds its length.
    """
    dims = check_dims(dims)
    depth = int(depth)
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    n = len(dims)
    if supports is None:
        pool = default_supports(n)
        chosen = [pool[k % len(pool)] for k in range(depth)]
    else:
        chosen = [tuple(int(p) for p in s) for s in supports]
        if len(chosen) > depth:
            raise ValueError(f"{len(chosen)} supports exceed depth {depth}")
    layers = []
    for s in chosen:
        d = math.prod(dims[p] for p in s)
        layers.append(CircuitLayer(s, UnitaryParams.identity(d)))
    circuit = LocalCircuit(tuple(layers), preset=f"{NONGLOBAL}:depth={depth}")
    for layer in circuit.layers:
        _check_layer(layer, dims)
    return circuit


# --- flat parameter vector <-> circuit ----------------------------------


def theta_vector(circuit: LocalCircuit) -> np.ndarray:
    if not circuit.layers:
        return np.zeros(0)
    return np.concatenate([layer.params.theta for layer in circuit.layers])


def with_theta(circuit: LocalCircuit, theta) -> LocalCircuit:
    """The same circuit shape with all layer parameters replaced by ``theta``."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (circuit.n_theta,):
        raise ValueError(f"theta must have shape ({circuit.n_theta},), got {theta.shape}")
    layers = []
    off = 0
    for layer in circuit.layers:
        k = layer.params.theta.size
        layers.append(CircuitLayer(layer.support,
                                   UnitaryParams(layer.params.dim, theta[off:off + k])))
        off += k
    return LocalCircuit(tuple(layers), preset=circuit.preset)


# --- serialization -------------------------------------------------------


def circuit_to_json(circuit: LocalCircuit) -> dict:
    return {
        "preset": circuit.preset,
        "layers": [
            {"support": list(layer.support), "theta": layer.params.theta.tolist()}
            for layer in circuit.layers
        ],
    }


def circuit_from_json(obj: dict) -> LocalCircuit:
    if not isinstance(obj, dict) or "layers" not in obj:
        raise ValueError("circuit JSON must be an object with a 'layers' field")
    layers = []
    for entry in obj["layers"]:
        support = tuple(int(p) for p in entry["support"])
        theta = np.asarray(entry["theta"], dtype=np.float64)
        dim = math.isqrt(theta.size)
        if dim * dim != theta.size:
            raise ValueError(f"layer theta length {theta.size} is not a perfect square")
        layers.append(CircuitLayer(support, UnitaryParams(dim, theta)))
    return LocalCircuit(tuple(layers), preset=str(obj.get("preset", "custom")))


def save_circuit(circuit: LocalCircuit, path) -> None:
    with open(path, "w") as fh:
        json.dump(circuit_to_json(circuit), fh, indent=1)
        fh.write("\n")


def load_circuit(path) -> LocalCircuit:
    with open(path) as fh:
        return circuit_from_json(json.load(fh))
