"""Time evolution of the ancilla-system state.

Three engines with one contract:

* ``fast``    -- active-subspace propagation.  The Hamiltonian only moves
  amplitude inside span{|1>_s|vac>, |0>_s|e_n>}, an (n+1)-dimensional
  subspace, so one trace costs O(n^2) per slice instead of O(8^n).  The
  reduced state is assembled from three thermal sectors (vacuum, single
  excitation, frozen).
* ``oracle``  -- brute force on the full 2^(n+1) system-environment space:
  build the slice generator, exponentiate, conjugate, trace out the
  environment.  Exponentially expensive; exists to certify the fast path.
* ``closed_form`` -- the analytic reduced state for commuting couplings
  (constant site profiles, or site-independent time profiles), driven by
  the accumulated phase Omega(t).

The time-ordered exponential is approximated by a product of per-slice
exponentials of the exactly integrated Hamiltonian; for commuting families
that product is exact for any slicing.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.linalg.blas import zgemm

from . import linalg, model
from .errors import ContractError, DimensionError, DomainError, EngineError
from .linalg import DEFAULT_TOLERANCES, Tolerances

DEFAULT_ORACLE_CAP = 2 ** 12      # on the ancilla (x) system (x) environment dimension
ORACLE_CAP_ENV = "SPINSTAR_DIM_CAP"
MAX_SLICES_PER_SAMPLE = 2 ** 12
_CHUNK_SLICES = 4096              # bound on simultaneously materialized slice unitaries


def oracle_dimension_cap() -> int:
    raw = os.environ.get(ORACLE_CAP_ENV)
    if raw is None:
        return DEFAULT_ORACLE_CAP
    try:
        cap = int(raw)
        if cap < 8:
            raise ValueError
    except ValueError:
        raise DomainError(f"{ORACLE_CAP_ENV} must be a positive integer >= 8, got {raw!r}")
    return cap


# ---------------------------------------------------------------------------
# Grids and series containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling grid with a fixed number of Trotter slices per interval."""

    t_start: float
    t_end: float
    samples: int
    trotter_slices_per_sample: int = 16

    def __post_init__(self):
        if self.samples < 2:
            raise DomainError(f"need at least 2 samples, got {self.samples}")
        if not (self.t_end > self.t_start):
            raise DomainError(f"need t_end > t_start, got [{self.t_start}, {self.t_end}]")
        if self.trotter_slices_per_sample < 1:
            raise DomainError("trotter_slices_per_sample must be >= 1")

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.samples)

    def with_slices(self, slices: int) -> "TimeGrid":
        return TimeGrid(self.t_start, self.t_end, self.samples, slices)

    def extended(self, factor: float) -> "TimeGrid":
        """Stretch the horizon, keeping the sample spacing (approximately) fixed."""
        span = (self.t_end - self.t_start) * factor
        samples = int(round((self.samples - 1) * factor)) + 1
        return TimeGrid(self.t_start, self.t_start + span, samples,
                        self.trotter_slices_per_sample)


def validate_grid(config: model.ModelConfig, grid: TimeGrid) -> None:
    lo = config.start_time
    if grid.t_start < lo - 1e-15:
        raise DomainError(
            f"grid starts at {grid.t_start}, before the coupling's start time {lo}"
        )
    if isinstance(config.coupling, model.Tabulated) and \
            grid.t_end > config.coupling.times[-1] + 1e-15:
        raise DomainError("grid extends beyond the tabulated coupling data")


@dataclass
class StateSeries:
    """Sampled 4x4 ancilla-system density matrices along a grid."""

    grid: TimeGrid
    times: np.ndarray
    states: np.ndarray            # (samples, 4, 4)
    diagnostics: dict = field(default_factory=dict)


def bell_state() -> np.ndarray:
    """|Phi><Phi| with |Phi> = (|00> + |11>)/sqrt(2), ordering ancilla (x) system."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[0, 3] = rho[3, 0] = rho[3, 3] = 0.5
    return rho


# ---------------------------------------------------------------------------
# Fast path: active-subspace unitaries
# ---------------------------------------------------------------------------

def _active_unitaries_from_integrals(alpha: float, g_int: np.ndarray) -> np.ndarray:
    """Batch of (n+1)-dim slice unitaries from integrated amplitudes (m, n).

    exp(-iK) with K coupling index 0 (system excitation on vacuum) to the
    single-excitation entries: a rotation by ||alpha*G|| inside a 2-plane.
    Rows with zero integral give the identity exactly.
    """
    w = alpha * g_int
    m, n = w.shape
    energy = np.linalg.norm(w, axis=1)
    u = np.tile(np.eye(n + 1, dtype=complex), (m, 1, 1))
    act = energy > 0.0
    if not act.any():
        return u
    xi = w[act] / energy[act, None]
    c = np.cos(energy[act])
    s = np.sin(energy[act])
    u[act, 0, 0] = c
    u[act, 0, 1:] = -1j * s[:, None] * xi.conj()
    u[act, 1:, 0] = -1j * s[:, None] * xi
    u[act, 1:, 1:] += (c - 1.0)[:, None, None] * (xi[:, :, None] * xi.conj()[:, None, :])
    return u


def slice_unitary_active(config: model.ModelConfig, t1: float, t2: float) -> np.ndarray:
    """Active-subspace unitary for one slice, exp(-i integral of H)."""
    g_int = model.slice_integrals(config, np.array([t1, t2]))
    return _active_unitaries_from_integrals(config.alpha, g_int)[0]


def _interval_unitaries(config: model.ModelConfig, grid: TimeGrid) -> np.ndarray:
    """Product of slice unitaries over each sample interval, shape (samples-1, d, d)."""
    times = grid.times()
    s = grid.trotter_slices_per_sample
    d = config.n + 1
    out = np.empty((grid.samples - 1, d, d), dtype=complex)
    chunk = max(1, _CHUNK_SLICES // s)
    for lo in range(0, grid.samples - 1, chunk):
        hi = min(lo + chunk, grid.samples - 1)
        # slice edges for this block of intervals, (hi-lo)*s + 1 points;
        # the last column is pinned to the exact sample times so consecutive
        # intervals share their boundary bitwise
        t0s, t1s = times[lo:hi], times[lo + 1:hi + 1]
        frac = np.arange(s + 1) / s
        edges = (t0s[:, None] + (t1s - t0s)[:, None] * frac[None, :])
        edges[:, -1] = t1s
        flat = np.concatenate([edges[0, :1], edges[:, 1:].ravel()])
        g_int = model.slice_integrals(config, flat).reshape(hi - lo, s, config.n)
        # interval rows are independent; edge seams between rows never mix
        # because reshape keeps each interval's s integrals contiguous
        u = _active_unitaries_from_integrals(config.alpha, g_int.reshape(-1, config.n))
        u = u.reshape(hi - lo, s, d, d)
        prod = u[:, 0]
        for j in range(1, s):
            prod = u[:, j] @ prod
        out[lo:hi] = prod
    return out


def propagate_active(config: model.ModelConfig, grid: TimeGrid,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Cumulative active-subspace unitaries U(t_k, t_start), shape (samples, d, d)."""
    validate_grid(config, grid)
    d = config.n + 1
    steps = _interval_unitaries(config, grid)
    out = np.empty((grid.samples, d, d), dtype=complex)
    out[0] = np.eye(d)
    for k in range(grid.samples - 1):
        out[k + 1] = steps[k] @ out[k]
    linalg.check_unitary(out[-1], tol)
    return out


# ---------------------------------------------------------------------------
# Sector assembly of the reduced state
# ---------------------------------------------------------------------------

def assemble_rho_as(config: model.ModelConfig, u: np.ndarray,
                    weights: model.ThermalSectorWeights | None = None,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Reduced ancilla-system state from one active unitary and sector weights."""
    if weights is None:
        weights = model.thermal_sector_weights(config.p, config.n)
    if abs(weights.vacuum + weights.n * weights.single + weights.frozen - 1.0) > 1e-10:
        raise ContractError("sector weights do not sum to 1")
    rho = _assemble_series(weights, u[None, :, :])[0]
    linalg.check_state(rho, tol)
    return rho


def _assemble_series(weights: model.ThermalSectorWeights, u_series: np.ndarray) -> np.ndarray:
    """Vectorized three-sector assembly; basis order |00>,|01>,|10>,|11> (ancilla, system).

    Vacuum sector: the Bell branch |1>_a rides U|1,vac>; survival amplitude
    a = U[0,0] keeps the coherence, the leaked weight 1-|a|^2 lands on |10>.
    Single-excitation sector m: the |0>_a branch rides U|0,e_m>; the return
    amplitude b_m = U[0,m] moves weight to |01>, the diagonal d_mm keeps the
    coherence.  Frozen sector: untouched Bell state.
    """
    a = u_series[:, 0, 0]
    b_tot = (np.abs(u_series[:, 0, 1:]) ** 2).sum(axis=1)   # sum_m |b_m|^2
    d_sum = np.einsum("kmm->k", u_series[:, 1:, 1:])         # sum_m d_mm
    w_v, w_s, n = weights.vacuum, weights.single, weights.n

    # written as deviations from the Bell state so that u = identity
    # (a = 1, b = 0, d_sum = n) reproduces it exactly
    k = u_series.shape[0]
    leak = w_v * (1.0 - np.abs(a) ** 2)
    rho = np.zeros((k, 4, 4), dtype=complex)
    rho[:, 0, 0] = 0.5 * (1.0 - w_s * b_tot)
    rho[:, 1, 1] = 0.5 * w_s * b_tot
    rho[:, 2, 2] = 0.5 * leak
    rho[:, 3, 3] = 0.5 * (1.0 - leak)
    coh = 0.5 * (1.0 + w_v * (a.conj() - 1.0) + w_s * (d_sum.conj() - n))
    rho[:, 0, 3] = coh
    rho[:, 3, 0] = coh.conj()
    return rho


def fast_state_series(config: model.ModelConfig, grid: TimeGrid, *,
                      auto_refine: bool = True,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> StateSeries:
    """Fast-path state series with optional automatic slice refinement.

    Non-commuting couplings carry a Trotter error; the refinement doubles the
    slice count until halving the step changes no sampled entanglement value
    by more than ``tol.step_halving`` (commuting families skip the check).
    """
    validate_grid(config, grid)
    weights = model.thermal_sector_weights(config.p, config.n)

    def states_for(g: TimeGrid) -> np.ndarray:
        return _assemble_series(weights, propagate_active(config, g, tol))

    diagnostics = {"engine": "fast", "slices_used": grid.trotter_slices_per_sample,
                   "halving_residual": 0.0}
    if not auto_refine or model.is_commuting(config.coupling):
        states = states_for(grid)
    else:
        slices = grid.trotter_slices_per_sample
        states = states_for(grid.with_slices(slices))
        while True:
            finer = states_for(grid.with_slices(2 * slices))
            residual = float(np.max(np.abs(
                _entanglement_series(finer) - _entanglement_series(states))))
            slices *= 2
            states = finer
            if residual < tol.step_halving or slices >= MAX_SLICES_PER_SAMPLE:
                diagnostics["slices_used"] = slices
                diagnostics["halving_residual"] = residual
                break
    series = StateSeries(grid, grid.times(), states, diagnostics)
    _validate_series(series, tol)
    return series


def _entanglement_series(states: np.ndarray) -> np.ndarray:
    pts = states.reshape(-1, 2, 2, 2, 2).transpose(0, 1, 4, 3, 2).reshape(-1, 4, 4)
    lam = np.linalg.eigvalsh(pts)[:, 0]
    return np.maximum(0.0, -lam)


def _validate_series(series: StateSeries, tol: Tolerances) -> None:
    for rho in (series.states[0], series.states[-1]):
        linalg.check_state(rho, tol)
    traces = np.einsum("kii->k", series.states).real
    if np.max(np.abs(traces - 1.0)) > tol.state_trace:
        raise ContractError("state series lost trace normalization")


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def _full_slice_unitary_dense(config: model.ModelConfig, g_int: np.ndarray,
                              tol: Tolerances) -> np.ndarray:
    gen = model.hamiltonian_from_amplitudes(config.alpha * g_int, config.n)
    return linalg.unitary_from_generator(gen, 1.0, tol)


def _chi_pair(config: model.ModelConfig, g_int: np.ndarray):
    """Nonzero-eigenvalue data of the integrated slice generator on the full space."""
    w = config.alpha * g_int
    energy = float(np.linalg.norm(w))
    if energy == 0.0:
        return None
    dim_e = 2 ** config.n
    xi = np.zeros(2 * dim_e, dtype=complex)
    for m in range(1, config.n + 1):
        xi[model.env_basis_index(config.n, m)] = w[m - 1] / energy
    top = np.zeros(2 * dim_e, dtype=complex)
    top[dim_e] = 1.0
    chi = np.stack([(top + xi), (top - xi)], axis=1) / math.sqrt(2.0)
    return energy, chi


def _full_slice_unitary_structured(config: model.ModelConfig, g_int: np.ndarray
                                   ) -> np.ndarray:
    """Slice unitary as identity plus a rank-2 eigenprojector correction."""
    dim = 2 ** (config.n + 1)
    u = np.eye(dim, dtype=complex)
    pair = _chi_pair(config, g_int)
    if pair is None:
        return u
    energy, chi = pair
    phases = np.exp(-1j * np.array([energy, -energy])) - 1.0
    return u + (chi * phases) @ chi.conj().T


def _apply_structured_slice(config: model.ModelConfig, g_int: np.ndarray,
                            u_cum: np.ndarray) -> None:
    """In-place left-multiplication of the cumulative unitary by one slice.

    The update U += chi diag(phases) chi* U is accumulated through a single
    beta=1 gemm on the transposed view, so the big matrix is swept once
    instead of three times; this path is memory-bound at large n.
    """
    pair = _chi_pair(config, g_int)
    if pair is None:
        return
    energy, chi = pair
    phases = np.exp(-1j * np.array([energy, -energy])) - 1.0
    y = phases[:, None] * (chi.conj().T @ u_cum)
    # u_cum is C-ordered; its transpose is the Fortran view zgemm can update
    out = zgemm(1.0, y.T, chi.T, beta=1.0, c=u_cum.T, overwrite_c=1)
    if out.base is not u_cum and out is not u_cum.T:  # pragma: no cover
        u_cum[:] = out.T


def _reduced_state_literal(u_se: np.ndarray, env_diag: np.ndarray,
                           tol: Tolerances) -> np.ndarray:
    """Materialize the full ancilla-system-environment state and trace it down."""
    dim_e = env_diag.size
    rho0 = linalg.kron(bell_state(), np.diag(env_diag).astype(complex),
                       cap=4 * dim_e * 2)
    u_ase = linalg.kron(np.eye(2, dtype=complex), u_se, cap=4 * dim_e * 2)
    rho_t = u_ase @ rho0 @ u_ase.conj().T
    return linalg.partial_trace(rho_t, [2, 2, dim_e], keep=(0, 1), tol=tol)


def _reduced_state_contracted(u_se: np.ndarray, env_diag: np.ndarray) -> np.ndarray:
    """Same reduction without materializing the 4*2^n dimensional state.

    With a diagonal environment and the Bell pair (|00>+|11>)/sqrt(2), the
    reduced matrix is a reshuffle of M = W W* where W gathers the unitary's
    matrix elements against each environment basis state, weighted by the
    thermal populations.
    """
    half = u_se.shape[0] // 2
    t = u_se.reshape(2, half, 2, half)                    # [sigma, e, s, f]
    w = t * np.sqrt(env_diag)[None, None, None, :]
    w_flat = w.transpose(0, 2, 1, 3).reshape(4, -1)       # [(sigma, s), (e, f)]
    m = w_flat @ w_flat.conj().T
    return 0.5 * m.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)


def brute_force_propagate(config: model.ModelConfig, grid: TimeGrid, *,
                          env_diagonal: np.ndarray | None = None,
                          unitary_method: str = "auto",
                          tol: Tolerances = DEFAULT_TOLERANCES) -> StateSeries:
    """Reference engine: full-space time-ordered evolution plus partial trace.

    Parameters
    ----------
    env_diagonal : optional replacement for the thermal environment diagonal
        (e.g. a one-hot vector preparing a definite excitation pattern).
    unitary_method : "dense" (eigendecomposition of the built generator),
        "structured" (analytic rank-2 eigenprojector form), or "auto".
    """
    validate_grid(config, grid)
    dim_ase = 2 ** (config.n + 2)
    cap = oracle_dimension_cap()
    if dim_ase > cap:
        raise DimensionError(
            f"oracle needs dimension {dim_ase} > cap {cap} "
            f"(set {ORACLE_CAP_ENV} to override); use the fast engine instead"
        )
    if env_diagonal is None:
        env_diag = model.thermal_env_diagonal(config.p, config.n)
    else:
        env_diag = np.asarray(env_diagonal, dtype=float)
        if env_diag.shape != (2 ** config.n,):
            raise DimensionError("environment diagonal must have length 2^n")
        if abs(env_diag.sum() - 1.0) > tol.state_trace or env_diag.min() < 0:
            raise ContractError("environment diagonal must be a probability vector")
    if unitary_method == "auto":
        unitary_method = "dense" if dim_ase <= 2 ** 10 else "structured"
    if unitary_method not in ("dense", "structured"):
        raise DomainError(f"unknown oracle unitary method {unitary_method!r}")

    times = grid.times()
    s = grid.trotter_slices_per_sample
    dim_se = 2 ** (config.n + 1)
    u_cum = np.eye(dim_se, dtype=complex)
    states = np.empty((grid.samples, 4, 4), dtype=complex)
    literal = dim_ase <= 2 ** 10

    def record(k: int) -> None:
        if literal:
            states[k] = _reduced_state_literal(u_cum, env_diag, tol)
        else:
            states[k] = _reduced_state_contracted(u_cum, env_diag)
        linalg.check_state(states[k], tol)

    record(0)
    for k in range(grid.samples - 1):
        edges = np.linspace(times[k], times[k + 1], s + 1)
        g_int = model.slice_integrals(config, edges)
        for j in range(s):
            if unitary_method == "dense":
                u_cum = _full_slice_unitary_dense(config, g_int[j], tol) @ u_cum
            else:
                _apply_structured_slice(config, g_int[j], u_cum)
        record(k + 1)
    # guard against drift of the accumulated unitary (probe vectors keep it cheap)
    rng = np.random.default_rng(0)
    probe = rng.normal(size=(dim_se, 2)) + 1j * rng.normal(size=(dim_se, 2))
    probe /= np.linalg.norm(probe, axis=0)
    drift = float(np.abs(u_cum.conj().T @ (u_cum @ probe) - probe).max())
    if drift > tol.unitarity:
        raise ContractError(f"oracle unitary drift {drift:.3e} exceeds tolerance")
    return StateSeries(grid, times, states,
                       {"engine": "oracle", "unitary_method": unitary_method,
                        "unitarity_probe": drift})


# ---------------------------------------------------------------------------
# Closed forms for commuting couplings
# ---------------------------------------------------------------------------

def omega_phase(config: model.ModelConfig, t: float | np.ndarray,
                method: str = "analytic",
                tol: Tolerances = DEFAULT_TOLERANCES) -> float | np.ndarray:
    """Accumulated phase Omega(t) = alpha * integral of sqrt(sum |g_n|^2).

    Defined for the commuting families only; site-and-time dependent
    couplings have no single rotation phase.  For a complex exponential
    rate only the real part enters, because the phase integrates |g|.
    """
    spec = config.coupling
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -1e-15):
        raise DomainError("omega_phase needs t >= 0")
    if method == "quadrature":
        if isinstance(spec, (model.SiteTimeExponential, model.SiteTimePower,
                             model.Tabulated)):
            raise EngineError(
                f"no accumulated-phase description for family {model.family_name(spec)}"
            )
        def rate(x: float) -> float:
            g = [abs(model.coupling_value(spec, m, x)) for m in range(1, config.n + 1)]
            return config.alpha * float(np.linalg.norm(g))
        flat = np.atleast_1d(t_arr)
        vals = np.array([quad(rate, 0.0, x, epsabs=1e-14,
                              epsrel=tol.quadrature_rel, limit=200)[0] for x in flat])
        return vals.reshape(t_arr.shape) if t_arr.shape else float(vals[0])
    if method != "analytic":
        raise DomainError(f"unknown omega method {method!r}")

    if isinstance(spec, model.SitesConstant):
        rate0 = config.alpha * float(np.linalg.norm(np.asarray(spec.g)))
        out = rate0 * t_arr
    elif isinstance(spec, model.TimeExponential):
        gr = spec.gamma.real
        scale = config.alpha * math.sqrt(config.n)
        if gr == 0.0:
            out = scale * t_arr
        else:
            out = scale * (1.0 - np.exp(-gr * t_arr)) / gr
    elif isinstance(spec, model.TimePolynomial):
        a = spec.exponent
        out = config.alpha * math.sqrt(config.n) * t_arr ** (a + 1.0) / (a + 1.0)
    else:
        raise EngineError(
            f"no accumulated-phase description for family {model.family_name(spec)}"
        )
    return out if t_arr.shape else float(out)


@dataclass(frozen=True)
class ClosedFormParams:
    """Coefficients of the analytic minimum PT eigenvalue.

    c3 enters through the algebraic identity 1 + c3 = (2 p^(n-1) - 1)^2;
    it is nonpositive for p in (0, 1].
    """

    n: int
    p: float
    c1: float
    c2: float
    c3: float


def closed_form_params(config: model.ModelConfig) -> ClosedFormParams:
    p, n = config.p, config.n
    big_p = p ** (n - 1)
    return ClosedFormParams(
        n=n, p=p,
        c1=big_p / 2.0,
        c2=big_p ** 2 * (1.0 - 4.0 * p + 4.0 * p * p) / 4.0,
        c3=4.0 * big_p * (big_p - 1.0),
    )


def closed_form_rho_as(config: model.ModelConfig, t: float,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Analytic reduced state at time t (commuting families only)."""
    omega = omega_phase(config, t)
    rho = _closed_form_states(config, np.atleast_1d(np.asarray(omega, dtype=float)))[0]
    linalg.check_state(rho, tol)
    return rho


def _closed_form_states(config: model.ModelConfig, omegas: np.ndarray) -> np.ndarray:
    p, n = config.p, config.n
    big_p = p ** (n - 1)
    s2 = np.sin(omegas) ** 2
    sh2 = np.sin(omegas / 2.0) ** 2
    rho = np.zeros((omegas.size, 4, 4), dtype=complex)
    rho[:, 0, 0] = 1.0 - big_p * (1.0 - p) * s2
    rho[:, 1, 1] = big_p * (1.0 - p) * s2
    rho[:, 2, 2] = p ** n * s2
    rho[:, 3, 3] = 1.0 - p ** n * s2
    rho[:, 0, 3] = rho[:, 3, 0] = 1.0 - 2.0 * big_p * sh2
    return rho / 2.0


def lambda_from_omega(params: ClosedFormParams, omega: float | np.ndarray
                      ) -> float | np.ndarray:
    """The PT eigenvalue branch that can turn negative, as a function of Omega.

    The radicand is written as (1 - 2 p^(n-1) sin^2(Omega/2))^2 + c2 sin^4(Omega),
    which is the exact partial-transpose spectrum of the analytic state; the
    expanded form 1 - p^(n-1) sin^2 + c2 sin^4 + c3 sin^4(Omega/2) is identical.
    """
    omega = np.asarray(omega, dtype=float)
    big_p = 2.0 * params.c1
    s2 = np.sin(omega) ** 2
    sh2 = np.sin(omega / 2.0) ** 2
    radicand = (1.0 - 2.0 * big_p * sh2) ** 2 + params.c2 * s2 * s2
    out = 0.5 * (params.c1 * s2 - np.sqrt(radicand))
    return out if omega.shape else float(out)


def lambda_closed_form(config: model.ModelConfig, t: float | np.ndarray
                       ) -> float | np.ndarray:
    """Analytic lowest PT eigenvalue at time t (commuting families only)."""
    return lambda_from_omega(closed_form_params(config), omega_phase(config, t))


def closed_form_state_series(config: model.ModelConfig, grid: TimeGrid,
                             tol: Tolerances = DEFAULT_TOLERANCES) -> StateSeries:
    validate_grid(config, grid)
    times = grid.times()
    omegas = np.asarray(omega_phase(config, times), dtype=float)
    states = _closed_form_states(config, omegas)
    series = StateSeries(grid, times, states, {"engine": "closed_form"})
    _validate_series(series, tol)
    return series
