"""State family factories, subsystem rearrangement, and TPS relabeling.

Factories validate their parameters and return normalized states.  A
small text grammar, ``name`` or ``name:arg,arg,...`` with ``arg`` either
``key=value`` or a bare value for the family's single distinguished
parameter, builds states from the command line.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .qstate import (DensityMatrix, PureState, ValidationError, assert_valid,
                     check_dims, density_from_pure)

_SQRT2 = math.sqrt(2.0)


class FactorySpecError(ValueError):
    """The factory spec text is malformed or names an unknown family."""


def _basis(d: int, k: int) -> np.ndarray:
    v = np.zeros(d, dtype=np.complex128)
    v[k] = 1.0
    return v


def _check_pair_norm(a: complex, b: complex) -> None:
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
        raise ValidationError(f"|a|^2 + |b|^2 must be 1, got {abs(a)**2 + abs(b)**2}")


# --- two-qubit families --------------------------------------------------


_BELL_AMPS = {
    "phi+": ([0, 3], [1, 1]),
    "phi-": ([0, 3], [1, -1]),
    "psi+": ([1, 2], [1, 1]),
    "psi-": ([1, 2], [1, -1]),
}


def bell(kind: str = "phi+") -> PureState:
    """One of the four Bell states; kind in phi+, phi-, psi+, psi-."""
    kind = str(kind).lower()
    if kind not in _BELL_AMPS:
        raise ValidationError(f"unknown Bell state {kind!r}; "
                              f"choose from {sorted(_BELL_AMPS)}")
    positions, signs = _BELL_AMPS[kind]
    amps = np.zeros(4, dtype=np.complex128)
    for pos, sign in zip(positions, signs):
        amps[pos] = sign / _SQRT2
    return PureState((2, 2), amps)


def _pair_amps(a, b, a2) -> tuple[complex, complex]:
    """Resolve the (a, b) amplitude pair; a2 = |a|^2 is an alternate spelling."""
    if a2 is not None:
        if a is not None or b is not None:
            raise ValidationError("give either a2 or the (a, b) pair, not both")
        a2 = float(a2)
        if not -1e-12 <= a2 <= 1.0 + 1e-12:
            raise ValidationError(f"a2 must lie in [0, 1], got {a2}")
        a2 = min(max(a2, 0.0), 1.0)
        return complex(math.sqrt(a2)), complex(math.sqrt(1.0 - a2))
    if a is None:
        raise ValidationError("parameter a (or a2) is required")
    a = complex(a)
    b = complex(b) if b is not None else complex(math.sqrt(max(0.0, 1.0 - abs(a) ** 2)))
    _check_pair_norm(a, b)
    return a, b


def bell_like(a=None, b=None, a2=None) -> PureState:
    """a|00> + b|11>; accepts a2 = |a|^2, and b defaults to sqrt(1 - |a|^2)."""
    a, b = _pair_amps(a, b, a2)
    amps = np.zeros(4, dtype=np.complex128)
    amps[0], amps[3] = a, b
    return PureState((2, 2), amps)


def psi_like(a=None, b=None, a2=None) -> PureState:
    """a|01> + b|10>; accepts a2 = |a|^2, and b defaults to sqrt(1 - |a|^2)."""
    a, b = _pair_amps(a, b, a2)
    amps = np.zeros(4, dtype=np.complex128)
    amps[1], amps[2] = a, b
    return PureState((2, 2), amps)


def pure_2x2(a, b, c, d) -> PureState:
    """a|11> + b|10> + c|01> + d|00> (note the descending bit order)."""
    a, b, c, d = complex(a), complex(b), complex(c), complex(d)
    total = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    if abs(total - 1.0) > 1e-10:
        raise ValidationError(f"amplitudes must be normalized, got norm^2 {total}")
    return PureState((2, 2), np.array([d, c, b, a], dtype=np.complex128))


def werner(a: float) -> DensityMatrix:
    """a |psi-><psi-| + (1 - a)/4 identity, a in [0, 1]."""
    a = float(a)
    if not -1e-12 <= a <= 1.0 + 1e-12:
        raise ValidationError(f"Werner parameter out of [0, 1]: {a}")
    a = min(max(a, 0.0), 1.0)
    singlet = density_from_pure(bell("psi-")).entries
    rho = a * singlet + (1.0 - a) / 4.0 * np.eye(4)
    return DensityMatrix((2, 2), rho)


# --- qubit-qutrit family -------------------------------------------------


def two_param_qubit_qutrit(alpha: float, gamma: float) -> DensityMatrix:
    """Two-parameter 2x3 family mixing Bell-type pairs with |02> and |12>.

    Weights: alpha on each of |02><02| and |12><12|, beta on each of the
    three symmetric Bell-type projectors over the qutrit levels {0, 1},
    gamma on the antisymmetric one, with beta = (1 - 2 alpha - gamma)/3.
    """
    alpha, gamma = float(alpha), float(gamma)
    beta = (1.0 - 2.0 * alpha - gamma) / 3.0
    for name, w in (("alpha", alpha), ("gamma", gamma), ("beta", beta)):
        if w < -1e-12:
            raise ValidationError(f"{name} = {w} is negative; weights must be >= 0")
    alpha, gamma, beta = max(alpha, 0.0), max(gamma, 0.0), max(beta, 0.0)
    d1, d2 = 2, 3

    def ket(i, j):
        return np.kron(_basis(d1, i), _basis(d2, j))

    def proj(v):
        return np.outer(v, v.conj())

    phi_p = (ket(0, 0) + ket(1, 1)) / _SQRT2
    phi_m = (ket(0, 0) - ket(1, 1)) / _SQRT2
    psi_p = (ket(0, 1) + ket(1, 0)) / _SQRT2
    psi_m = (ket(0, 1) - ket(1, 0)) / _SQRT2
    rho = (alpha * (proj(ket(0, 2)) + proj(ket(1, 2)))
           + beta * (proj(phi_p) + proj(phi_m) + proj(psi_p))
           + gamma * proj(psi_m))
    return assert_valid(DensityMatrix((d1, d2), rho))


# --- multi-qubit families ------------------------------------------------


def ghz(n: int = 3) -> PureState:
    n = int(n)
    if n < 2:
        raise ValidationError(f"GHZ needs at least 2 parties, got {n}")
    amps = np.zeros(2 ** n, dtype=np.complex128)
    amps[0] = amps[-1] = 1.0 / _SQRT2
    return PureState((2,) * n, amps)


def w_state(n: int = 3) -> PureState:
    n = int(n)
    if n < 2:
        raise ValidationError(f"W state needs at least 2 parties, got {n}")
    amps = np.zeros(2 ** n, dtype=np.complex128)
    for k in range(n):
        amps[1 << (n - 1 - k)] = 1.0 / math.sqrt(n)
    return PureState((2,) * n, amps)


# --- rearrangement -------------------------------------------------------


def permute_subsystems(state, order):
    """Reorder the parties; ``order[k]`` is the old position of new party k."""
    n = len(state.dims)
    order = tuple(int(p) for p in order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order {order} is not a permutation of 0..{n - 1}")
    new_dims = tuple(state.dims[p] for p in order)
    if isinstance(state, PureState):
        t = state.amps.reshape(state.dims).transpose(order)
        return PureState(new_dims, t.reshape(-1))
    if isinstance(state, DensityMatrix):
        axes = list(order) + [n + p for p in order]
        t = state.entries.reshape(state.dims + state.dims).transpose(axes)
        return DensityMatrix(new_dims, t.reshape(state.dim, state.dim))
    raise ValueError(f"not a state value: {state!r}")


def regroup(state, sizes):
    """Merge consecutive parties into blocks; ``sizes`` partitions the parties.

    The amplitudes are untouched (the flat ordering is already row major),
    only the dims annotation changes, e.g. four qubits regrouped by
    (2, 2) become a 4x4 bipartite state.
    """
    n = len(state.dims)
    sizes = tuple(int(s) for s in sizes)
    if any(s < 1 for s in sizes) or sum(sizes) != n:
        raise ValueError(f"sizes {sizes} do not partition {n} parties")
    new_dims, pos = [], 0
    for s in sizes:
        new_dims.append(math.prod(state.dims[pos:pos + s]))
        pos += s
    new_dims = tuple(new_dims)
    if isinstance(state, PureState):
        return PureState(new_dims, state.amps)
    if isinstance(state, DensityMatrix):
        return DensityMatrix(new_dims, state.entries)
    raise ValueError(f"not a state value: {state!r}")


# --- tensor product structure relabeling ---------------------------------


@dataclass(frozen=True, eq=False)
class TpsRelabeling:
    """A change of tensor product structure as a basis-change matrix.

    Column t of ``matrix`` is the source-space vector that carries the
    target product label t, so states transform as M^dagger rho M and the
    matrix must be unitary.
    """

    source_dims: tuple[int, ...]
    target_dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        src = check_dims(self.source_dims)
        tgt = check_dims(self.target_dims)
        if math.prod(src) != math.prod(tgt):
            raise ValueError(f"source dims {src} and target dims {tgt} have "
                             f"different total dimension")
        d = math.prod(src)
        m = np.array(self.matrix, dtype=np.complex128)
        if m.shape != (d, d):
            raise ValueError(f"matrix must have shape ({d}, {d}), got {m.shape}")
        dev = float(np.max(np.abs(m @ m.conj().T - np.eye(d))))
        if dev > 1e-10:
            raise ValidationError(f"relabeling matrix is not unitary: residual {dev:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "source_dims", src)
        object.__setattr__(self, "target_dims", tgt)
        object.__setattr__(self, "matrix", m)


def index_relabeling(source_dims, target_dims, mapping) -> TpsRelabeling:
    """Relabeling that permutes product basis labels.

    ``mapping`` sends source multi-indices to target multi-indices and
    must be a bijection over the whole basis.
    """
    src = check_dims(source_dims)
    tgt = check_dims(target_dims)
    d = math.prod(src)
    m = np.zeros((d, d), dtype=np.complex128)
    seen = set()
    items = mapping.items() if isinstance(mapping, dict) else mapping
    for s_multi, t_multi in items:
        s = int(np.ravel_multi_index(tuple(s_multi), src))
        t = int(np.ravel_multi_index(tuple(t_multi), tgt))
        if t in seen:
            raise ValueError(f"target index {tuple(t_multi)} assigned twice")
        seen.add(t)
        m[s, t] = 1.0
    if len(seen) != d:
        raise ValueError(f"mapping covers {len(seen)} of {d} basis labels")
    return TpsRelabeling(src, tgt, m)


def identity_relabeling(dims) -> TpsRelabeling:
    dims = check_dims(dims)
    return TpsRelabeling(dims, dims, np.eye(math.prod(dims)))


def werner_f_prime() -> TpsRelabeling:
    """Two-qubit relabeling whose new product basis is the Bell basis.

    Target labels: (0,0) <- psi+, (0,1) <- psi-, (1,0) <- phi+,
    (1,1) <- phi-.  Under it the Werner family becomes diagonal with all
    nonlocal coherence removed by relabeling alone.
    """
    cols = [bell("psi+").amps, bell("psi-").amps,
            bell("phi+").amps, bell("phi-").amps]
    return TpsRelabeling((2, 2), (2, 2), np.column_stack(cols))


RELABELINGS = {
    "werner-F-prime": werner_f_prime,
}


def named_relabeling(name: str) -> TpsRelabeling:
    for key, maker in RELABELINGS.items():
        if key.lower() == str(name).lower():
            return maker()
    raise ValueError(f"unknown relabeling {name!r}; "
                     f"known: {', '.join(sorted(RELABELINGS))}")


def tps_remap(rho: DensityMatrix, relabeling: TpsRelabeling) -> DensityMatrix:
    """Express ``rho`` in the relabeled tensor product structure."""
    if rho.dims != relabeling.source_dims:
        raise ValueError(f"state dims {rho.dims} do not match relabeling source "
                         f"dims {relabeling.source_dims}")
    m = relabeling.matrix
    return DensityMatrix(relabeling.target_dims, m.conj().T @ rho.entries @ m)


# --- random states -------------------------------------------------------


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


def random_pure(dims, seed: int) -> PureState:
    dims = check_dims(dims)
    d = math.prod(dims)
    rng = _rng(seed)
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState(dims, z / np.linalg.norm(z))


def random_density(dims, seed: int, rank: int | None = None) -> DensityMatrix:
    """Mixture of ``rank`` Haar-random pure states with random weights."""
    dims = check_dims(dims)
    d = math.prod(dims)
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise ValueError(f"rank must be in 1..{d}, got {rank}")
    rng = _rng(seed)
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    q, _ = np.linalg.qr(g)
    weights = rng.uniform(size=rank)
    weights /= weights.sum()
    rho = (q * weights) @ q.conj().T
    return assert_valid(DensityMatrix(dims, rho))


# --- factory spec grammar ------------------------------------------------

# every family: (callable, ordered parameter names, name of the bare
# positional parameter or None, value parser overrides)
_FLOAT = float
_INT = int
_STR = str
_CPLX = complex

_FAMILIES: dict[str, tuple] = {
    "bell": (bell, ("kind",), "kind", {"kind": _STR}),
    "bell_like": (bell_like, ("a", "b", "a2"), "a",
                  {"a": _CPLX, "b": _CPLX, "a2": _FLOAT}),
    "psi_like": (psi_like, ("a", "b", "a2"), "a",
                 {"a": _CPLX, "b": _CPLX, "a2": _FLOAT}),
    "pure_2x2": (pure_2x2, ("a", "b", "c", "d"), None,
                 {k: _CPLX for k in "abcd"}),
    "werner": (werner, ("a",), "a", {"a": _FLOAT}),
    "two_param_2x3": (two_param_qubit_qutrit, ("alpha", "gamma"), None,
                      {"alpha": _FLOAT, "gamma": _FLOAT}),
    "ghz": (ghz, ("n",), "n", {"n": _INT}),
    "w": (w_state, ("n",), "n", {"n": _INT}),
}

_FAMILY_ALIASES = {
    "bell-like": "bell_like",
    "psi-like": "psi_like",
    "pure2x2": "pure_2x2",
    "two_param_qubit_qutrit": "two_param_2x3",
    "two-param-2x3": "two_param_2x3",
    "w_state": "w",
}

_NAME_RE = re.compile(r"^[A-Za-z0-9_+\-]+$")


def family_names() -> list[str]:
    return sorted(_FAMILIES)


def family_parameters(family: str) -> tuple[str, ...]:
    key = _FAMILY_ALIASES.get(family, family)
    if key not in _FAMILIES:
        raise FactorySpecError(f"unknown state family {family!r}; "
                               f"known: {', '.join(family_names())}")
    return _FAMILIES[key][1]


def _parse_value(text: str, parser):
    try:
        if parser is _CPLX:
            return complex(text.replace("i", "j"))
        return parser(text)
    except ValueError as exc:
        raise FactorySpecError(f"cannot parse value {text!r}: {exc}") from exc


def parse_factory_spec(spec: str):
    """Build a state from ``name`` or ``name:arg,arg,...`` text.

    Each arg is ``key=value``; a single bare value is accepted for the
    family's distinguished parameter (for example ``bell:psi-`` or
    ``werner:0.5``).
    """
    spec = spec.strip()
    name, _, arg_text = spec.partition(":")
    name = name.strip().lower()
    if not _NAME_RE.match(name or ""):
        raise FactorySpecError(f"malformed factory spec {spec!r}")
    key = _FAMILY_ALIASES.get(name, name)
    if key not in _FAMILIES:
        raise FactorySpecError(f"unknown state family {name!r}; "
                               f"known: {', '.join(family_names())}")
    fn, param_names, bare_param, parsers = _FAMILIES[key]
    kwargs = {}
    if arg_text:
        for chunk in arg_text.split(","):
            chunk = chunk.strip()
            if not chunk:
                raise FactorySpecError(f"empty argument in factory spec {spec!r}")
            if "=" in chunk:
                k, _, v = chunk.partition("=")
                k = k.strip()
                if k not in param_names:
                    raise FactorySpecError(
                        f"family {name!r} has no parameter {k!r}; "
                        f"expected one of {param_names}")
                if k in kwargs:
                    raise FactorySpecError(f"parameter {k!r} given twice")
                kwargs[k] = _parse_value(v.strip(), parsers[k])
            else:
                if bare_param is None:
                    raise FactorySpecError(
                        f"family {name!r} takes key=value arguments only")
                if bare_param in kwargs:
                    raise FactorySpecError(
                        f"parameter {bare_param!r} given twice")
                kwargs[bare_param] = _parse_value(chunk, parsers[bare_param])
    try:
        return fn(**kwargs)
    except TypeError as exc:
        raise FactorySpecError(f"bad arguments for family {name!r}: {exc}") from exc


def make_family(family: str, **params):
    """Build a family state from already-parsed parameters."""
    key = _FAMILY_ALIASES.get(family, family)
    if key not in _FAMILIES:
        raise FactorySpecError(f"unknown state family {family!r}")
    fn = _FAMILIES[key][0]
    try:
        return fn(**params)
    except TypeError as exc:
        raise FactorySpecError(f"bad arguments for family {family!r}: {exc}") from exc
