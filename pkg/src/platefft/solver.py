"""Operator-perturbation cell solver.

The periodic bending problem D*(C(y):(E0 + Dw)) = 0 is rewritten around a
constant scalar reference medium acting as xi -> lam0 * Tr(xi) * I and solved
by the fixed point

    E_{k+1} = E0 + Gamma * (dC : E_k),        dC(y) = C(y) - C0,

whose iterates are the partial sums of the Neumann series of the resolvent
(I - Gamma dC)^-1 E0.  Gamma annihilates means, so <E_k> = E0 at every step.
Convergence is monitored through the equilibrium residual, the discrete form
of D*(C:E) = 0:

    residual = sqrt( sum_{n != 0} |n . J_hat(n) . n|^2 ) / |J_hat(0)|,

with J = C:E and the sum restricted to unambiguous frequencies (on even grids
the Nyquist rows are excluded, matching the modes the grid operator resolves).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .green import FrequencyGrid, apply_gamma_coeffs
from .mandel import SymTensor2, mandel_size, trace_dyad
from .microstructure import CoefficientField

STRATEGIES = ("arithmetic", "geometric", "manual")


@dataclass(frozen=True)
class ReferenceMedium:
    """Scalar reference coefficient lam0 with the eigen-range it came from."""

    lambda0: float
    strategy: str
    mu_min: float
    mu_max: float

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not self.lambda0 > 0:
            raise ValueError(f"reference coefficient must be positive, got {self.lambda0}")
        if self.strategy == "arithmetic" and not self.lambda0 > self.mu_max / 2.0 > 0:
            raise ValueError("arithmetic reference must satisfy lambda0 > mu_max/2 > 0")


@dataclass(frozen=True)
class SolverConfig:
    """Stopping controls and the macroscopic curvature load."""

    e0: SymTensor2 | None = None
    tolerance: float = 1e-8
    max_iterations: int = 5000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass
class ConvergenceHistory:
    """Per-iteration diagnostics of one cell solve."""

    iterations: list[int] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    deltas: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)

    def append(self, iteration: int, residual: float, delta: float, energy: float) -> None:
        self.iterations.append(iteration)
        self.residuals.append(residual)
        self.deltas.append(delta)
        self.energies.append(energy)

    def __len__(self) -> int:
        return len(self.iterations)


@dataclass
class CellSolution:
    """Converged (or flagged non-converged) corrector state.

    curvature and moment are real grids of Mandel vectors, shape (N, N, m).
    """

    curvature: np.ndarray
    moment: np.ndarray
    e0: SymTensor2
    reference: ReferenceMedium
    iterations: int
    final_residual: float
    converged: bool
    history: ConvergenceHistory

    def mean_curvature(self) -> SymTensor2:
        return SymTensor2(self.curvature.mean(axis=(0, 1)))

    def mean_moment(self) -> SymTensor2:
        return SymTensor2(self.moment.mean(axis=(0, 1)))

    def energy(self) -> float:
        """<E : C : E> over the cell."""
        return float((self.curvature * self.moment).sum(axis=-1).mean())


def select_reference(
    field: CoefficientField, strategy: str, lambda0: float | None = None
) -> ReferenceMedium:
    """Choose the scalar reference coefficient from the coefficient eigen-range.

    arithmetic: lam0 = (mu_min + mu_max) / 2 (midpoint rule);
    geometric:  lam0 = sqrt(mu_min * mu_max), intended for high contrast;
    manual:     pass-through of `lambda0` with a positivity check.
    """
    mu_min, mu_max = field.eigen_range()
    if strategy == "arithmetic":
        lam = 0.5 * (mu_min + mu_max)
    elif strategy == "geometric":
        lam = math.sqrt(mu_min * mu_max)
    elif strategy == "manual":
        if lambda0 is None:
            raise ValueError("manual strategy requires an explicit lambda0")
        lam = float(lambda0)
        if not lam > 0:
            raise ValueError(f"reference coefficient must be positive, got {lam}")
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return ReferenceMedium(lam, strategy, mu_min, mu_max)


def spectral_bound(mu_min: float, mu_max: float) -> float:
    """Upper bound on the contraction factor under the arithmetic midpoint rule."""
    if not 0 < mu_min <= mu_max:
        raise ValueError(f"invalid eigen-range ({mu_min}, {mu_max})")
    return (mu_max - mu_min) / (mu_max + mu_min)


def series_factor(q: float) -> float:
    """Geometric-series factor 1/(1-q); inf is the divergence flag for q >= 1."""
    if q < 0:
        raise ValueError(f"contrast ratio must be nonnegative, got {q}")
    if q >= 1.0:
        return math.inf
    return 1.0 / (1.0 - q)


def apriori_bound(field: CoefficientField, ref: ReferenceMedium) -> float:
    """Series factor of the a-priori estimate: 1/(1 - q) with q = |dC|_inf / lam0.

    q takes the max over voxels of the Mandel operator norm of dC; math.inf is
    the divergence flag when the series condition q < 1 fails.  The kernel
    factor of the estimate is normalized to 1, so this is a series factor, not
    an error bound.
    """
    c0 = ref.lambda0 * trace_dyad(field.d)
    q = 0.0
    for pid in field.present_phases():
        dc = field.table.phases[pid].mandel_matrix - c0
        q = max(q, float(np.abs(np.linalg.eigvalsh(dc)).max()))
    return series_factor(q / ref.lambda0)


def _delta_c_grid(field: CoefficientField, lambda0: float) -> np.ndarray:
    return field.mandel_grid() - lambda0 * trace_dyad(field.d)


def _equilibrium_residual(j_hat: np.ndarray, grid: FrequencyGrid) -> float:
    """sqrt(sum over resolved n != 0 of |n.J_hat.n|^2) / |J_hat(0)|."""
    s = (grid.mandel_nn * j_hat).sum(axis=-1)
    num = math.sqrt(float((np.abs(s) ** 2)[grid.active_mask].sum()))
    den = float(np.linalg.norm(j_hat[0, 0]))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def solve_cell(
    field: CoefficientField, ref: ReferenceMedium, config: SolverConfig
) -> CellSolution:
    """Iterate the fixed point from the constant field E0 until equilibrium.

    On success the returned solution has residual <= tolerance; if the
    iteration budget is exhausted (or the iterates blow up), the result is
    flagged non-converged and carries the full history.
    """
    if config.e0 is None:
        raise ValueError("solver config has no macroscopic curvature e0")
    if field.d != 2:
        raise ValueError("the cell solver is two-dimensional")
    n = field.n
    e0 = config.e0.mandel
    m = e0.shape[0]
    history = ConvergenceHistory()

    c_grid = field.mandel_grid()
    if not e0.any():
        # zero load: the unique solution is the zero field
        zero = np.zeros((n, n, m))
        return CellSolution(zero, zero, config.e0, ref, 0, 0.0, True, history)

    grid = FrequencyGrid(field.d, n)
    dc_grid = _delta_c_grid(field, ref.lambda0)
    e_const = np.broadcast_to(e0, (n, n, m))
    e = np.array(e_const)
    converged = False
    residual = math.inf
    iterations = 0
    # divergent references overflow before the non-finite break triggers
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, config.max_iterations + 1):
            p = np.einsum("xyab,xyb->xya", dc_grid, e)
            p_hat = np.fft.fftn(p, axes=(0, 1))
            correction = apply_gamma_coeffs(p_hat, grid, ref.lambda0)
            e_new = e_const + np.real(np.fft.ifftn(correction, axes=(0, 1)))
            j = np.einsum("xyab,xyb->xya", c_grid, e_new)
            j_hat = np.fft.fftn(j, axes=(0, 1))
            residual = _equilibrium_residual(j_hat, grid)
            delta = math.sqrt(float(((e_new - e) ** 2).sum(axis=-1).mean()))
            energy = float((e_new * j).sum(axis=-1).mean())
            history.append(k, residual, delta, energy)
            e = e_new
            iterations = k
            if residual <= config.tolerance:
                converged = True
                break
            if not math.isfinite(residual):
                break  # divergent reference; no point burning the budget
    j = np.einsum("xyab,xyb->xya", c_grid, e)
    return CellSolution(e, j, config.e0, ref, iterations, residual, converged, history)


def estimate_spectral_radius(
    field: CoefficientField, ref: ReferenceMedium, iterations: int, seed: int
) -> float:
    """Power-iteration estimate of the contraction factor of the fixed point.

    Runs B: E -> -Gamma*(dC:E) on a seeded random zero-mean field and returns
    the geometric mean of the last five norm ratios; returns 0.0 if the
    iterate underflows (B vanishes on the relevant subspace).
    """
    if iterations < 10:
        raise ValueError(f"need at least 10 power iterations, got {iterations}")
    if field.d != 2:
        raise ValueError("the estimator is two-dimensional")
    n = field.n
    grid = FrequencyGrid(field.d, n)
    dc_grid = _delta_c_grid(field, ref.lambda0)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, n, mandel_size(field.d)))
    x -= x.mean(axis=(0, 1))
    x /= math.sqrt(float((x**2).sum(axis=-1).mean()))
    ratios = []
    for _ in range(iterations):
        p = np.einsum("xyab,xyb->xya", dc_grid, x)
        p_hat = np.fft.fftn(p, axes=(0, 1))
        y = -np.real(np.fft.ifftn(apply_gamma_coeffs(p_hat, grid, ref.lambda0), axes=(0, 1)))
        r = math.sqrt(float((y**2).sum(axis=-1).mean()))
        if r < 1e-13:
            return 0.0
        ratios.append(r)
        x = y / r
    return float(np.exp(np.log(ratios[-5:]).sum() / len(ratios[-5:])))
