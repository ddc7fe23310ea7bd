"""Second-order photon correlations of the cascade fluorescence.

The regression theorem reduces every two-time average to a one-time solve:
prepare the atom in the level left behind by the first detected photon,
propagate, read off the population radiating the second photon, and divide
by that population's steady-state value.
"""

from dataclasses import dataclass, field

import numpy as np

from . import model
from .dynamics import evolve, steady_state
from .errors import GridMismatch, NoPeak, ZeroSteadyState
from .model import AffineGenerator, SystemParams, build_generator, prepare_state

# pair -> (preparation level, observed population index)
# Mode i is the |i+1> -> |i> emission; detecting it projects onto |i>,
# and the rate of mode j is proportional to rho_{j+1,j+1}.
PAIR_TABLE = {
    (1, 1): (1, model.P22),
    (3, 3): (3, model.P44),
    (3, 1): (3, model.P22),
    (2, 1): (2, model.P22),
    (3, 2): (3, model.P33),
}

DENOMINATOR_FLOOR = 1e-12
CLIP_TOL = 1e-10


def _validate_pair(pair):
    pair = tuple(pair)
    if pair not in PAIR_TABLE:
        raise ValueError(f"pair must be one of {sorted(PAIR_TABLE)}, got {pair}")
    return pair


@dataclass(frozen=True)
class CorrelationSeries:
    """One normalized g2_ij on a tau grid, with the steady-state denominator."""

    pair: tuple
    taus: np.ndarray
    values: np.ndarray
    norm: float


@dataclass(frozen=True)
class CSRatioResult:
    """Cauchy-Schwarz ratio R(tau) and its maximum over the grid."""

    taus: np.ndarray
    R: np.ndarray
    r_max: float
    tau_at_max: float
    definition: str


@dataclass(frozen=True)
class DelayScan:
    """Peak delay of the extreme-pair cross-correlation along a field sweep."""

    swept_field: str
    field_values: np.ndarray
    tau_d: np.ndarray
    failures: list = field(default_factory=list)  # (index, error name) pairs


def default_tau_grid(params: SystemParams, tau_max=None, n=2000, spacing="log_linear"):
    """Tau grid from 0 to 10/min(Gamma): a log run to tau_max/20, then linear.

    The log section resolves the rise near tau = 0 (first point at
    1e-4 tau_max); the linear section carries the slow tails.
    """
    if tau_max is None:
        tau_max = 10.0 / params.min_gamma
    if n < 16:
        raise ValueError("need at least 16 grid points")
    if spacing == "linear":
        return np.linspace(0.0, tau_max, n)
    if spacing != "log_linear":
        raise ValueError(f"unknown spacing {spacing!r}")
    n_log = n // 3
    knee = tau_max / 20.0
    head = np.geomspace(1e-4 * tau_max, knee, n_log)
    tail = np.linspace(knee, tau_max, n - n_log)[1:]
    return np.concatenate([[0.0], head, tail])


def g2(gen: AffineGenerator, pair, taus, backend="expm") -> CorrelationSeries:
    """g2_ij on the grid: population rho_{j+1,j+1}(tau) from |i><i|, over its
    steady-state value."""
    pair = _validate_pair(pair)
    level, obs = PAIR_TABLE[pair]
    taus = np.asarray(taus, dtype=float)

    x_ss = steady_state(gen)
    norm = x_ss[obs]
    if norm < DENOMINATOR_FLOOR:
        raise ZeroSteadyState(
            f"steady-state population for pair {pair} is {norm:.2e}; "
            "the correlation is undefined for these drives")

    traj = evolve(gen, prepare_state(level), taus, backend=backend)
    values = traj.states[:, obs] / norm
    # Populations can undershoot by rounding; clip only within tolerance.
    tiny = (values < 0.0) & (values > -CLIP_TOL)
    if np.any(tiny):
        values = values.copy()
        values[tiny] = 0.0
    return CorrelationSeries(pair=pair, taus=taus, values=values, norm=norm)


def cs_ratio(g31: CorrelationSeries, g11: CorrelationSeries,
             g33: CorrelationSeries, definition="equal_time") -> CSRatioResult:
    """R(tau) = g31^2 / (g33 g11).

    'equal_time' evaluates both denominators at tau (R set to 0 where the
    denominator underflows).  'literal' uses g33(0), floored at 1e-12: with
    the cascade's antibunching g33(0) = 0, so this variant is essentially a
    diagnostic of how singular the published expression is.
    """
    for s in (g11, g33):
        if s.taus.shape != g31.taus.shape or np.any(s.taus != g31.taus):
            raise GridMismatch("correlation series use different tau grids")
    if definition == "equal_time":
        den = g33.values * g11.values
    elif definition == "literal":
        den = max(g33.values[0], DENOMINATOR_FLOOR) * g11.values
    else:
        raise ValueError(f"unknown definition {definition!r}")
    ok = den > DENOMINATOR_FLOOR
    R = np.where(ok, g31.values ** 2 / np.where(ok, den, 1.0), 0.0)
    k = int(np.argmax(R))
    return CSRatioResult(taus=g31.taus, R=R, r_max=float(R[k]),
                         tau_at_max=float(g31.taus[k]), definition=definition)


def tau_delay(series: CorrelationSeries) -> float:
    """Delay of the first interior local maximum, parabolically refined.

    The first local maximum (not the global one) is used deliberately:
    strong rf drives superimpose fast oscillations, and the emission delay
    is set by the first crest.
    """
    v, t = series.values, series.taus
    if len(v) < 3:
        raise NoPeak("need at least 3 points")
    for k in range(1, len(v) - 1):
        if v[k] > v[k - 1] and v[k] > v[k + 1]:
            return _parabolic_vertex(t[k - 1:k + 2], v[k - 1:k + 2])
    raise NoPeak("series has no interior local maximum on this grid")


def _parabolic_vertex(ts, vs):
    # Exact vertex of the parabola through three (possibly nonuniform) points.
    t0, t1, t2 = ts
    f0, f1, f2 = vs
    denom = (t1 - t0) * (f1 - f2) - (t1 - t2) * (f1 - f0)
    if denom == 0.0:
        return float(t1)
    num = (t1 - t0) ** 2 * (f1 - f2) - (t1 - t2) ** 2 * (f1 - f0)
    return float(t1 - 0.5 * num / denom)


SWEEPABLE = {"omega1", "omega2", "omega_rf", "omega3"}


def g31_peak_delay(params: SystemParams, coarse_n=1600, refine=10):
    """tau_d for one parameter set: coarse pass, then a 10x local refinement."""
    gen = build_generator(params)
    taus = default_tau_grid(params, tau_max=min(6.0 / params.min_gamma, 40.0),
                            n=coarse_n)
    series = g2(gen, (3, 1), taus)
    td = tau_delay(series)
    k = np.searchsorted(taus, td)
    lo = taus[max(k - 2, 0)]
    hi = taus[min(k + 2, len(taus) - 1)]
    step = (hi - lo) / 4.0
    fine = np.linspace(max(lo - step, 0.0), hi + step, 4 * refine + 1)
    if fine[0] == 0.0:
        fine = fine[1:]
    return tau_delay(g2(gen, (3, 1), fine))


def scan_tau_d(base: SystemParams, swept: str, grid) -> DelayScan:
    """tau_d as a function of one drive strength; per-point errors recorded."""
    if swept not in SWEEPABLE:
        raise ValueError(f"swept field must be one of {sorted(SWEEPABLE)}")
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0) or np.any(grid <= 0):
        raise ValueError("sweep grid must be ascending and positive")
    key = "omega_rf" if swept == "omega2" else swept
    tau_d = np.full(len(grid), np.nan)
    failures = []
    for i, value in enumerate(grid):
        params = base.with_drives(**{key: value})
        try:
            tau_d[i] = g31_peak_delay(params)
        except (NoPeak, ZeroSteadyState) as exc:
            failures.append((i, type(exc).__name__))
    return DelayScan(swept_field=swept, field_values=grid, tau_d=tau_d,
                     failures=failures)
