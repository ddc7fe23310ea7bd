"""Steady state and time evolution of the affine system dx/dt = A x + b.

The system is linear, so the default propagator is the matrix exponential
(exact up to rounding); an adaptive Runge-Kutta backend is kept as an
independent cross-check.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .errors import SingularGenerator, StepFailure
from .model import AffineGenerator

COND_LIMIT = 1e14
RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class Trajectory:
    """States sampled on an ascending time grid (units of 1/gamma)."""

    times: np.ndarray
    states: np.ndarray  # shape (len(times), 15)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states lengths differ")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def component(self, index):
        return self.states[:, index]


# Pade coefficients for the degree-13 approximant of exp (Higham 2005).
_PADE13_B = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0, 670442572800.0,
    33522128640.0, 1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)
_PADE13_THETA = 5.371920351148152


def matrix_exponential(M):
    """exp(M) for a dense real or complex square matrix.

    Scaling and squaring with the degree-13 Pade approximant; accurate to
    close to machine precision for the small matrices used here.
    """
    M = np.asarray(M)
    n = M.shape[0]
    norm = np.linalg.norm(M, 1)
    if norm == 0.0:
        return np.eye(n, dtype=M.dtype)
    squarings = 0
    if norm > _PADE13_THETA:
        squarings = int(np.ceil(np.log2(norm / _PADE13_THETA)))
        M = M / (2.0 ** squarings)

    b = _PADE13_B
    ident = np.eye(n, dtype=M.dtype)
    M2 = M @ M
    M4 = M2 @ M2
    M6 = M4 @ M2
    U = M @ (M6 @ (b[13] * M6 + b[11] * M4 + b[9] * M2)
             + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * ident)
    V = (M6 @ (b[12] * M6 + b[10] * M4 + b[8] * M2)
         + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * ident)
    E = np.linalg.solve(V - U, V + U)
    for _ in range(squarings):
        E = E @ E
    return E


def _check_nonsingular(A):
    if np.linalg.cond(A) > COND_LIMIT:
        raise SingularGenerator(
            f"generator condition number exceeds {COND_LIMIT:g}")


def steady_state(gen: AffineGenerator) -> np.ndarray:
    """Solve A x = -b by LU with partial pivoting plus iterative refinement."""
    _check_nonsingular(gen.A)
    lu, piv = scipy.linalg.lu_factor(gen.A)
    x = scipy.linalg.lu_solve((lu, piv), -gen.b)
    # One refinement pass keeps the residual at rounding level even when
    # omega_rf >> Gamma inflates the condition number.
    for _ in range(2):
        r = -gen.b - gen.A @ x
        if np.max(np.abs(r)) < RESIDUAL_TOL:
            break
        x = x + scipy.linalg.lu_solve((lu, piv), r)
    residual = np.max(np.abs(gen.A @ x + gen.b))
    if residual > RESIDUAL_TOL:
        raise SingularGenerator(
            f"steady-state residual {residual:.2e} above {RESIDUAL_TOL:g}")
    return x


def evolve(gen: AffineGenerator, x0, times, backend="expm") -> Trajectory:
    """Propagate x0 along `times` (ascending, times[0] >= 0).

    x0 is the state at t = 0 regardless of where the grid starts.

    backend 'expm' uses x(t) = exp(A t)(x0 - xp) + xp with xp = -A^{-1} b,
    stepping between grid points; 'rk' integrates with an adaptive
    embedded Runge-Kutta pair at rtol 1e-10 / atol 1e-12.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a nonempty 1-d grid")
    if len(times) > 1 and np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if times[0] < 0:
        raise ValueError("times must start at t >= 0")
    x0 = np.asarray(x0, dtype=float)

    if backend == "expm":
        states = _evolve_expm(gen, x0, times)
    elif backend == "rk":
        states = _evolve_rk(gen, x0, times)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return Trajectory(times=times.copy(), states=states)


def _evolve_expm(gen, x0, times):
    _check_nonsingular(gen.A)
    xp = steady_state(gen)
    states = np.empty((len(times), x0.size))
    y = x0 - xp
    if times[0] > 0:
        y = matrix_exponential(gen.A * times[0]) @ y
    states[0] = y + xp
    for k in range(1, len(times)):
        dt = times[k] - times[k - 1]
        y = matrix_exponential(gen.A * dt) @ y
        states[k] = y + xp
    return states


def _evolve_rk(gen, x0, times):
    if times[-1] == 0.0:
        return x0[None, :].copy()
    sol = solve_ivp(
        lambda _t, x: gen.A @ x + gen.b,
        t_span=(0.0, times[-1]),
        y0=x0,
        t_eval=times,
        method="DOP853",
        rtol=1e-10,
        atol=1e-12,
    )
    if not sol.success:
        raise StepFailure(sol.message)
    return sol.y.T.copy()
