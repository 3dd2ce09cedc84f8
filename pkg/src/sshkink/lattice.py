"""Hopping-amplitude configurations and their tight-binding matrices.

Indexing convention: a configuration carries a global integer ``first_index``
n0, and matrix row k (0-based) is the site with global index ``n0 + k``.  The
bond amplitude ``t_n`` couples sites n and n+1, so the parity of ``n`` in
``(-1)**n`` is always the global one, also for windows that do not start at 0.

Two topologies exist:

* ``Closed(L)``: a ring of L sites and L bonds; bond ``n0 + L - 1`` closes the
  ring by coupling the last and the first site (the corner entry).
* ``Window(first_index, length)``: ``length`` consecutive sites of the
  infinite chain and the ``length - 1`` bonds between them.  Amplitudes beyond
  the window are represented by dimerized tails; the matrix itself is the open
  (Dirichlet) truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import DimensionMismatch, InvalidParams

TAU_MIN = 1e-8


@dataclass(frozen=True)
class DimerizedParams:
    """Mean hopping ``W`` and distortion ``delta`` of a 2-periodic chain."""

    W: float
    delta: float

    def __post_init__(self):
        W, delta = float(self.W), float(self.delta)
        if not (np.isfinite(W) and np.isfinite(delta)):
            raise InvalidParams("W and delta must be finite")
        if W <= 0:
            raise InvalidParams(f"W must be positive, got {W}")
        if delta < 0 or delta >= W:
            raise InvalidParams(f"need 0 <= delta < W, got delta={delta}, W={W}")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "delta", delta)

    def amplitude(self, n, sign: int = +1):
        """``W + sign * (-1)**n * delta`` for integer (array) ``n``."""
        n = np.asarray(n)
        stagger = np.where(n % 2 == 0, 1.0, -1.0)
        return self.W + _check_sign(sign) * stagger * self.delta

    @property
    def kappa(self) -> float:
        """Ratio (W - delta) / (W + delta) of weak to strong bond."""
        return (self.W - self.delta) / (self.W + self.delta)


@dataclass(frozen=True)
class Tail:
    params: DimerizedParams
    sign: int = +1

    def __post_init__(self):
        _check_sign(self.sign)

    def amplitude(self, n):
        return self.params.amplitude(n, self.sign)


@dataclass(frozen=True)
class Closed:
    L: int
    allow_odd: bool = False

    def __post_init__(self):
        if self.L < 3:
            raise InvalidParams(f"closed ring needs L >= 3 sites, got {self.L}")
        if not self.allow_odd and (self.L % 2 or self.L < 4):
            raise InvalidParams(
                f"closed ring needs even L >= 4, got {self.L} "
                "(odd rings only with allow_odd=True)")

    @property
    def n_sites(self) -> int:
        return self.L

    @property
    def n_bonds(self) -> int:
        return self.L


@dataclass(frozen=True)
class Window:
    first_index: int
    length: int
    left_tail: Optional[Tail] = None
    right_tail: Optional[Tail] = None

    def __post_init__(self):
        if self.length < 2:
            raise InvalidParams(f"window needs at least 2 sites, got {self.length}")

    @property
    def n_sites(self) -> int:
        return self.length

    @property
    def n_bonds(self) -> int:
        return self.length - 1


Topology = Union[Closed, Window]


def _check_sign(sign) -> int:
    if sign not in (1, -1):
        raise InvalidParams(f"sign must be +1 or -1, got {sign!r}")
    return int(sign)


@dataclass(frozen=True)
class Configuration:
    """Bond amplitudes over a topology, plus the global index of the first site.

    ``values`` is stored as a read-only float array.  Perturbations ``h`` are
    plain arrays of the same length; :meth:`with_values` builds the matching
    configuration without any positivity requirement.
    """

    topology: Topology
    values: np.ndarray
    first_index: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size != self.topology.n_bonds:
            raise DimensionMismatch(
                f"expected {self.topology.n_bonds} bond values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidParams("configuration values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if isinstance(self.topology, Window):
            object.__setattr__(self, "first_index", self.topology.first_index)
        object.__setattr__(self, "first_index", int(self.first_index))

    @property
    def closed(self) -> bool:
        return isinstance(self.topology, Closed)

    @property
    def n_sites(self) -> int:
        return self.topology.n_sites

    @property
    def n_bonds(self) -> int:
        return self.topology.n_bonds

    @property
    def bond_index(self) -> np.ndarray:
        """Global index n of every stored amplitude t_n."""
        return self.first_index + np.arange(self.n_bonds)

    @property
    def site_index(self) -> np.ndarray:
        return self.first_index + np.arange(self.n_sites)

    @property
    def bond_sites(self) -> tuple[np.ndarray, np.ndarray]:
        """Row indices (i, j) joined by each bond; the ring bond wraps to row 0."""
        i = np.arange(self.n_bonds)
        j = i + 1
        if self.closed:
            j[-1] = 0
        return i, j

    def with_values(self, values) -> "Configuration":
        return Configuration(self.topology, values, self.first_index)

    def shifted(self, k: int = 1) -> "Configuration":
        """Closed ring translated by k sites: t'_n = t_{n+k}."""
        if not self.closed:
            raise InvalidParams("shift is only defined on closed rings")
        return self.with_values(np.roll(self.values, -k))

    def require_positive(self, tau_min: float = TAU_MIN) -> None:
        if np.min(self.values) < tau_min:
            raise InvalidParams(
                f"amplitudes must be >= {tau_min}, min is {np.min(self.values)}")


def dimerized_configuration(params: DimerizedParams, sign: int,
                            topology: Topology, first_index: int = 0) -> Configuration:
    """t_n = W + sign * (-1)**n * delta on every bond of ``topology``."""
    if isinstance(topology, Closed) and topology.L % 2:
        raise InvalidParams("a dimerized ring needs an even number of sites")
    if isinstance(topology, Window):
        first_index = topology.first_index
    n = first_index + np.arange(topology.n_bonds)
    return Configuration(topology, params.amplitude(n, sign), first_index)


def closed_ring(values, first_index: int = 0, allow_odd: bool = False) -> Configuration:
    values = np.asarray(values, dtype=float)
    return Configuration(Closed(values.size, allow_odd=allow_odd), values, first_index)


def open_chain(values, first_index: int = 0, left_tail: Optional[Tail] = None,
               right_tail: Optional[Tail] = None) -> Configuration:
    values = np.asarray(values, dtype=float)
    return Configuration(Window(first_index, values.size + 1, left_tail, right_tail), values)


def heteroclinic_window(params: DimerizedParams, n_bonds: int,
                        u: Optional[np.ndarray] = None) -> Configuration:
    """Sharp junction: t^- on bonds n < 0, t^+ on bonds n >= 0.

    The window holds ``n_bonds`` bonds and is placed so both outermost bonds
    are strong (first bond index odd, last even) when ``n_bonds`` is even.
    The site count is then odd and the only zero mode is the junction state.
    ``u`` optionally adds a deviation on top of the sharp profile.
    """
    if n_bonds < 2:
        raise InvalidParams("need at least 2 bonds")
    first = -(n_bonds // 2)
    if first % 2 == 0:
        first += 1
    n = first + np.arange(n_bonds)
    values = np.where(n < 0, params.amplitude(n, -1), params.amplitude(n, +1))
    if u is not None:
        values = values + np.asarray(u, dtype=float)
    topo = Window(first, n_bonds + 1, Tail(params, -1), Tail(params, +1))
    return Configuration(topo, values)


@dataclass(frozen=True)
class HoppingOperator:
    """Symmetric tridiagonal matrix with zero diagonal, plus an optional ring corner."""

    dimension: int
    diag_off: np.ndarray
    corner: Optional[float] = None
    first_index: int = 0
    _norm: float = field(default=np.nan, repr=False, compare=False)

    def __post_init__(self):
        d = np.array(self.diag_off, dtype=float)
        if d.size != self.dimension - 1:
            raise DimensionMismatch("off-diagonal must have dimension - 1 entries")
        d.setflags(write=False)
        object.__setattr__(self, "diag_off", d)

    def to_dense(self) -> np.ndarray:
        T = np.zeros((self.dimension, self.dimension))
        k = np.arange(self.dimension - 1)
        T[k, k + 1] = self.diag_off
        T[k + 1, k] = self.diag_off
        if self.corner is not None:
            T[0, -1] = T[-1, 0] = self.corner
        return T

    def norm_bound(self) -> float:
        """2 * max|t|, an upper bound for the operator norm."""
        vals = np.abs(self.diag_off)
        m = vals.max() if vals.size else 0.0
        if self.corner is not None:
            m = max(m, abs(self.corner))
        return 2.0 * m


def build_operator(config: Configuration) -> HoppingOperator:
    v = config.values
    if config.closed:
        return HoppingOperator(config.n_sites, v[:-1], float(v[-1]), config.first_index)
    return HoppingOperator(config.n_sites, v, None, config.first_index)


def apply(op: HoppingOperator, v) -> np.ndarray:
    """Matrix-vector product in O(L); ``v`` may carry trailing batch axes."""
    v = np.asarray(v)
    if v.shape[0] != op.dimension:
        raise DimensionMismatch(f"vector length {v.shape[0]} != dimension {op.dimension}")
    t = op.diag_off.reshape((-1,) + (1,) * (v.ndim - 1))
    out = np.zeros(np.broadcast_shapes(v.shape, ()), dtype=np.result_type(v, float))
    out[:-1] += t * v[1:]
    out[1:] += t * v[:-1]
    if op.corner is not None:
        out[0] += op.corner * v[-1]
        out[-1] += op.corner * v[0]
    return out


def stagger(n_sites: int, first_index: int = 0) -> np.ndarray:
    """Diagonal of the sublattice sign map v_n -> (-1)**n v_n."""
    n = first_index + np.arange(n_sites)
    return np.where(n % 2 == 0, 1.0, -1.0)
