"""Physical problem definition: coupling families, Hamiltonian, thermal bath.

The interaction couples the system qubit's excitation to single-excitation
states of the environment: site n carries a (generally time-dependent,
complex) amplitude g_n(t), scaled by the global interaction strength alpha.
Units: hbar = 1, all rates in units of alpha.

Tensor-factor ordering is fixed everywhere as ancilla (x) system (x)
environment sites 1..N, with site 1 the most significant environment bit.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ContractError, DimensionError, DomainError
from .linalg import DEFAULT_DIM_CAP, DEFAULT_TOLERANCES, Tolerances


# ---------------------------------------------------------------------------
# Coupling families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SitesConstant:
    """Time-independent per-site amplitudes g_n (complex allowed)."""

    g: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(complex(x) for x in self.g))
        if not self.g:
            raise DomainError("sites_constant needs at least one amplitude")


@dataclass(frozen=True)
class TimeExponential:
    """g_n(t) = exp(-gamma*t) for every site; gamma may be complex.

    Only Re(gamma) affects |g(t)| and therefore the accumulated phase that
    drives the witness; an imaginary part adds a rotating phase that the
    closed-form description ignores.
    """

    gamma: complex

    def __post_init__(self):
        object.__setattr__(self, "gamma", complex(self.gamma))


@dataclass(frozen=True)
class TimePolynomial:
    """g_n(t) = t**exponent for every site, exponent >= 0."""

    exponent: float

    def __post_init__(self):
        if not (self.exponent >= 0):
            raise DomainError(f"polynomial exponent must be >= 0, got {self.exponent}")


@dataclass(frozen=True)
class SiteTimeExponential:
    """g_n(t) = exp(-gamma1*n*t): faster decay on higher sites."""

    gamma1: float


@dataclass(frozen=True)
class SiteTimePower:
    """g_n(t) = t**(-n*gamma) for t >= t0 > 0.

    The integral of t**(-n*gamma) diverges at t=0 once n*gamma >= 1, so the
    evolution must start at a strictly positive t0.
    """

    gamma: float
    t0: float = 1e-3

    def __post_init__(self):
        if not (self.gamma > 0):
            raise DomainError(f"site-time-power gamma must be > 0, got {self.gamma}")
        if not (self.t0 > 0):
            raise DomainError(f"site-time-power t0 must be > 0, got {self.t0}")


@dataclass(frozen=True)
class Tabulated:
    """Per-site sampled coupling magnitudes on a shared time grid.

    ``values[n-1, k]`` is |g_n(times[k])|; evaluation interpolates linearly
    and slice integrals use the exact piecewise-linear antiderivative.
    """

    times: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(tuple(float(v) for v in row) for row in self.values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if len(times) < 2 or any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("tabulated times must be strictly increasing, length >= 2")
        if any(len(row) != len(times) for row in values):
            raise DomainError("every tabulated row must match the time grid length")
        if any(v < 0 for row in values for v in row):
            raise DomainError("tabulated values are magnitudes and must be >= 0")


CouplingSpec = (
    SitesConstant | TimeExponential | TimePolynomial
    | SiteTimeExponential | SiteTimePower | Tabulated
)

FAMILY_NAMES = {
    SitesConstant: "sites_constant",
    TimeExponential: "time_exponential",
    TimePolynomial: "time_polynomial",
    SiteTimeExponential: "site_time_exponential",
    SiteTimePower: "site_time_power",
    Tabulated: "tabulated",
}


def family_name(spec: CouplingSpec) -> str:
    return FAMILY_NAMES[type(spec)]


def is_commuting(spec: CouplingSpec) -> bool:
    """True when the Hamiltonian commutes with itself across times.

    Constant couplings always commute; a site-independent real profile only
    rescales a fixed operator direction, so it commutes too.  A complex
    exponential rate rotates the coupling phase and breaks commutation.
    """
    if isinstance(spec, SitesConstant):
        return True
    if isinstance(spec, TimeExponential):
        return spec.gamma.imag == 0.0
    if isinstance(spec, TimePolynomial):
        return True
    return False


def start_time(spec: CouplingSpec) -> float:
    """Earliest admissible evolution time for this family."""
    if isinstance(spec, SiteTimePower):
        return spec.t0
    if isinstance(spec, Tabulated):
        return spec.times[0]
    return 0.0


# ---------------------------------------------------------------------------
# Model configuration
# ---------------------------------------------------------------------------

def excitation_probability(beta: float) -> float:
    """Ground-state population p = 1/(1+exp(-beta)); beta = inf maps to 1."""
    if beta != beta or beta < 0:
        raise DomainError(f"inverse temperature must be >= 0, got {beta}")
    if math.isinf(beta):
        return 1.0
    return 1.0 / (1.0 + math.exp(-beta))


@dataclass(frozen=True)
class ModelConfig:
    """Full problem definition: bath size, interaction scale, temperature, coupling.

    Exactly one of ``p`` (directly) or ``beta`` (inverse temperature) must be
    given; both are canonicalized to ``p``.  ``p`` ranges over [1/2, 1], with
    p = 1 the zero-temperature limit.
    """

    n: int
    alpha: float
    coupling: CouplingSpec
    p: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"environment size must be >= 1, got {self.n}")
        if not (self.alpha > 0):
            raise DomainError(f"interaction scale alpha must be > 0, got {self.alpha}")
        if (self.p is None) == (self.beta is None):
            raise DomainError("give exactly one of p or beta")
        if self.beta is not None:
            # canonicalize to p; beta is cleared so dataclasses.replace round-trips
            object.__setattr__(self, "p", excitation_probability(self.beta))
            object.__setattr__(self, "beta", None)
        if not (0.5 <= self.p <= 1.0):
            raise DomainError(f"ground population p must lie in [1/2, 1], got {self.p}")
        if isinstance(self.coupling, SitesConstant) and len(self.coupling.g) != self.n:
            raise DomainError(
                f"sites_constant has {len(self.coupling.g)} amplitudes for n={self.n}"
            )

    @property
    def start_time(self) -> float:
        return start_time(self.coupling)


# ---------------------------------------------------------------------------
# Coupling evaluation and slice integrals
# ---------------------------------------------------------------------------

def _check_site(n: int) -> None:
    if n < 1:
        raise DomainError(f"site index must be >= 1, got {n}")


def coupling_value(spec: CouplingSpec, n: int, t: float) -> complex:
    """g_n(t) for one site at one time."""
    _check_site(n)
    if isinstance(spec, SitesConstant):
        if n > len(spec.g):
            raise DomainError(f"site {n} beyond the {len(spec.g)} stored amplitudes")
        return spec.g[n - 1]
    if isinstance(spec, TimeExponential):
        return complex(np.exp(-spec.gamma * t))
    if isinstance(spec, TimePolynomial):
        if t < 0:
            raise DomainError("polynomial coupling is defined for t >= 0")
        return complex(t ** spec.exponent)
    if isinstance(spec, SiteTimeExponential):
        return complex(math.exp(-spec.gamma1 * n * t))
    if isinstance(spec, SiteTimePower):
        if t < spec.t0:
            raise DomainError(f"t = {t} below the regularized start t0 = {spec.t0}")
        return complex(t ** (-n * spec.gamma))
    if isinstance(spec, Tabulated):
        if n > len(spec.values):
            raise DomainError(f"site {n} beyond the {len(spec.values)} tabulated rows")
        if not (spec.times[0] <= t <= spec.times[-1]):
            raise DomainError(f"t = {t} outside the tabulated grid")
        return complex(np.interp(t, spec.times, spec.values[n - 1]))
    raise TypeError(f"unknown coupling family {type(spec)!r}")


def _antiderivative(spec: CouplingSpec, n: int, t: np.ndarray) -> np.ndarray:
    """F_n with F_n' = g_n, vectorized over t (domain already validated)."""
    if isinstance(spec, SitesConstant):
        return spec.g[n - 1] * t.astype(complex)
    if isinstance(spec, TimeExponential):
        if spec.gamma == 0:
            return t.astype(complex)
        return -np.exp(-spec.gamma * t) / spec.gamma
    if isinstance(spec, TimePolynomial):
        a = spec.exponent
        return (t ** (a + 1) / (a + 1)).astype(complex)
    if isinstance(spec, SiteTimeExponential):
        r = spec.gamma1 * n
        if r == 0:
            return t.astype(complex)
        return -np.exp(-r * t) / r
    if isinstance(spec, SiteTimePower):
        a = -n * spec.gamma
        if a == -1.0:
            return np.log(t).astype(complex)
        return (t ** (a + 1) / (a + 1)).astype(complex)
    if isinstance(spec, Tabulated):
        return _tabulated_antiderivative(spec, n, t)
    raise TypeError(f"unknown coupling family {type(spec)!r}")


def _tabulated_antiderivative(spec: Tabulated, n: int, t: np.ndarray) -> np.ndarray:
    knots = np.asarray(spec.times)
    vals = np.asarray(spec.values[n - 1])
    # cumulative trapezoid at the knots, then the exact linear-segment tail
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(knots))])
    idx = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, len(knots) - 2)
    dt = t - knots[idx]
    slope = (vals[idx + 1] - vals[idx]) / (knots[idx + 1] - knots[idx])
    return (cum[idx] + vals[idx] * dt + 0.5 * slope * dt * dt).astype(complex)


def _validate_interval(spec: CouplingSpec, t1: float, t2: float) -> None:
    if t2 < t1:
        raise DomainError(f"need t1 <= t2, got [{t1}, {t2}]")
    lo = start_time(spec)
    if t1 < lo - 1e-15:
        raise DomainError(f"t1 = {t1} below the family's start time {lo}")
    if isinstance(spec, Tabulated) and t2 > spec.times[-1] + 1e-15:
        raise DomainError(f"t2 = {t2} beyond the tabulated grid end {spec.times[-1]}")
    if isinstance(spec, TimePolynomial) and t1 < 0:
        raise DomainError("polynomial coupling is defined for t >= 0")


def coupling_slice_integral(
    spec: CouplingSpec, n: int, t1: float, t2: float, method: str = "analytic",
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> complex:
    """G_n = integral of g_n over [t1, t2].

    ``method="analytic"`` uses the family's exact antiderivative (exact
    per-segment trapezoids for tabulated data); ``method="quadrature"`` is
    the independent adaptive integrator used for cross-validation.
    """
    _check_site(n)
    _validate_interval(spec, t1, t2)
    if method == "analytic":
        ends = _antiderivative(spec, n, np.array([t1, t2], dtype=float))
        return complex(ends[1] - ends[0])
    if method == "quadrature":
        points = None
        if isinstance(spec, Tabulated):
            points = [x for x in spec.times if t1 < x < t2]
        re, _ = quad(lambda x: coupling_value(spec, n, x).real, t1, t2,
                     epsabs=1e-14, epsrel=tol.quadrature_rel, limit=200, points=points)
        im, _ = quad(lambda x: coupling_value(spec, n, x).imag, t1, t2,
                     epsabs=1e-14, epsrel=tol.quadrature_rel, limit=200, points=points)
        return complex(re, im)
    raise DomainError(f"unknown integration method {method!r}")


def slice_integrals(config: ModelConfig, edges: np.ndarray) -> np.ndarray:
    """Integrated amplitudes G_n over consecutive intervals, shape (len(edges)-1, n)."""
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2 or np.any(np.diff(edges) < 0):
        raise DomainError("edges must be nondecreasing with at least two entries")
    _validate_interval(config.coupling, float(edges[0]), float(edges[-1]))
    cols = [_antiderivative(config.coupling, n, edges) for n in range(1, config.n + 1)]
    f = np.stack(cols, axis=1)  # (len(edges), n)
    return np.diff(f, axis=0)


def coupling_norm_energy(config: ModelConfig, t: float) -> float:
    """Instantaneous nonzero eigenvalue magnitude alpha*sqrt(sum |g_n(t)|^2)."""
    g = np.array([coupling_value(config.coupling, n, t) for n in range(1, config.n + 1)])
    return config.alpha * float(np.linalg.norm(g))


# ---------------------------------------------------------------------------
# Hamiltonian and eigenstructure
# ---------------------------------------------------------------------------

def env_basis_index(n: int, site: int) -> int:
    """Environment basis index of the single excitation at ``site`` (1-based)."""
    return 2 ** (n - site)


def active_indices(n: int) -> np.ndarray:
    """system (x) environment basis indices of the dynamically active subspace.

    Entry 0 is |1>_s |vac>_e, entry m (1..n) is |0>_s |e_m>.
    """
    return np.array([2 ** n] + [env_basis_index(n, m) for m in range(1, n + 1)])


def hamiltonian_from_amplitudes(w: np.ndarray, n: int,
                                cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Dense system (x) environment matrix with couplings ``w`` (alpha folded in)."""
    dim = 2 ** (n + 1)
    if dim > cap:
        raise DimensionError(
            f"full Hamiltonian dimension {dim} exceeds cap {cap}; "
            "use the active-subspace fast path instead"
        )
    h = np.zeros((dim, dim), dtype=complex)
    top = 2 ** n  # |1>_s |vac>_e
    for m in range(1, n + 1):
        e = env_basis_index(n, m)
        h[e, top] = w[m - 1]
        h[top, e] = np.conj(w[m - 1])
    return h


def build_hamiltonian_full(config: ModelConfig, t: float,
                           cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Instantaneous interaction Hamiltonian on the full system (x) environment space."""
    g = np.array([coupling_value(config.coupling, m, t) for m in range(1, config.n + 1)])
    return hamiltonian_from_amplitudes(config.alpha * g, config.n, cap)


@dataclass(frozen=True)
class StructuredEigensystem:
    """Closed-form eigenstructure of the interaction Hamiltonian.

    Only two eigenvalues are nonzero; their eigenvectors live on
    span{|1,vac>, |0>|beta_0>}.  ``beta_site_basis`` holds site-coefficient
    rows beta_0..beta_{n-1}: beta_0 along the coupling profile, the rest a
    Gram-Schmidt completion of the single-excitation subspace.  The
    remaining null vectors are computational basis states, reachable via
    :meth:`null_vectors`.
    """

    n: int
    degenerate: bool
    e_plus: float
    e_minus: float
    chi_plus: np.ndarray | None
    chi_minus: np.ndarray | None
    beta_site_basis: np.ndarray | None

    @property
    def zero_multiplicity(self) -> int:
        return 2 ** (self.n + 1) - 2

    def env_vector(self, site_coeffs: np.ndarray) -> np.ndarray:
        vec = np.zeros(2 ** self.n, dtype=complex)
        for m in range(1, self.n + 1):
            vec[env_basis_index(self.n, m)] = site_coeffs[m - 1]
        return vec

    def null_vectors(self):
        """Yield an orthonormal basis of the zero-eigenvalue subspace (full se space)."""
        n, dim_e = self.n, 2 ** self.n
        vac = np.zeros(2 * dim_e, dtype=complex)
        vac[0] = 1.0  # |0>_s |vac>
        yield vac
        for q in range(1, n):  # phi_q = |0>_s |beta_q>
            v = np.zeros(2 * dim_e, dtype=complex)
            v[:dim_e] = self.env_vector(self.beta_site_basis[q])
            yield v
        for x in range(3, dim_e):  # u_j: >= 2 excitations, system ground
            if x & (x - 1) == 0:
                continue
            v = np.zeros(2 * dim_e, dtype=complex)
            v[x] = 1.0
            yield v
        for x in range(1, dim_e):  # v_r: system excited, environment not vacuum
            v = np.zeros(2 * dim_e, dtype=complex)
            v[dim_e + x] = 1.0
            yield v


def _complete_single_excitation_basis(beta0: np.ndarray) -> np.ndarray:
    """Gram-Schmidt completion of {beta0} over site-coefficient space."""
    n = beta0.size
    rows = [beta0]
    for seed in np.eye(n):
        v = seed.astype(complex)
        for b in rows:
            v -= np.vdot(b, v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            rows.append(v / norm)
        if len(rows) == n:
            break
    return np.stack(rows)


def structured_eigensystem(config: ModelConfig, t: float) -> StructuredEigensystem:
    """Eigenvalues and eigenvectors of the interaction Hamiltonian at time t."""
    g = np.array([coupling_value(config.coupling, m, t) for m in range(1, config.n + 1)])
    norm = float(np.linalg.norm(g))
    if norm == 0.0:
        return StructuredEigensystem(config.n, True, 0.0, 0.0, None, None, None)
    energy = config.alpha * norm
    beta0 = g / norm
    dim_e = 2 ** config.n
    xi = np.zeros(2 * dim_e, dtype=complex)
    for m in range(1, config.n + 1):
        xi[env_basis_index(config.n, m)] = beta0[m - 1]  # |0>_s |beta0>
    top = np.zeros(2 * dim_e, dtype=complex)
    top[dim_e] = 1.0  # |1>_s |vac>
    chi_plus = (top + xi) / np.sqrt(2)
    chi_minus = (top - xi) / np.sqrt(2)
    return StructuredEigensystem(
        config.n, False, energy, -energy, chi_plus, chi_minus,
        _complete_single_excitation_basis(beta0),
    )


# ---------------------------------------------------------------------------
# Thermal environment
# ---------------------------------------------------------------------------

def thermal_env_diagonal(p: float, n: int) -> np.ndarray:
    """Diagonal of the product thermal state, indexed by environment basis state."""
    if not (0.5 <= p <= 1.0):
        raise DomainError(f"p must lie in [1/2, 1], got {p}")
    excitations = np.array([bin(x).count("1") for x in range(2 ** n)])
    return p ** (n - excitations) * (1.0 - p) ** excitations


def thermal_env_state_full(p: float, n: int, cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Dense thermal density matrix [p|0><0| + (1-p)|1><1|]^(x)n."""
    if 2 ** n > cap:
        raise DimensionError(f"environment dimension 2^{n} exceeds cap {cap}")
    return np.diag(thermal_env_diagonal(p, n)).astype(complex)


@dataclass(frozen=True)
class ThermalSectorWeights:
    """Vacuum / single-excitation / frozen decomposition of the thermal state.

    ``single`` is the weight of each individual one-excitation basis state;
    ``frozen`` aggregates everything with two or more excitations.
    """

    p: float
    n: int
    vacuum: float
    single: float
    frozen: float

    def check(self, atol: float = 1e-12) -> None:
        total = self.vacuum + self.n * self.single + self.frozen
        if abs(total - 1.0) > atol:
            raise ContractError(f"sector weights sum to {total}, not 1")
        if min(self.vacuum, self.single, self.frozen) < -atol:
            raise ContractError("sector weights must be nonnegative")


def thermal_sector_weights(p: float, n: int) -> ThermalSectorWeights:
    """Group the thermal diagonal into the three dynamically distinct sectors."""
    if not (0.5 <= p <= 1.0):
        raise DomainError(f"p must lie in [1/2, 1], got {p}")
    vacuum = p ** n
    single = p ** (n - 1) * (1.0 - p)
    frozen = max(0.0, 1.0 - vacuum - n * single)
    w = ThermalSectorWeights(p, n, vacuum, single, frozen)
    w.check()
    return w
