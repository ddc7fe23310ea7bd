"""Laplace-domain utilities: rational functions, exponential sums, and two
independent inversion engines (partial fractions and fixed-Talbot quadrature).

Polynomial coefficient arrays are ascending (c[0] + c[1] s + ...).
"""

from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import IllConditionedPoles

CLUSTER_TOL = 1e-8
CLUSTER_TOL_UPPER = 1e-6
CLUSTER_SCALE_FLOOR = 1e-2


def poly_from_roots(roots):
    c = np.array([1.0 + 0.0j])
    for r in roots:
        c = np.convolve(c, np.array([-r, 1.0 + 0.0j]))
    return c


def poly_mul(a, b):
    return np.convolve(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def poly_add(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=complex)
    out[:len(a)] += a
    out[:len(b)] += b
    return out


def poly_eval(c, s):
    # Horner, highest degree first; works for complex and mpmath scalars.
    acc = 0
    for ck in reversed(list(c)):
        acc = acc * s + complex(ck)
    return acc


def _trim(c, rel=1e-13):
    c = np.asarray(c, dtype=complex)
    scale = np.max(np.abs(c)) if len(c) else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    keep = len(c)
    while keep > 1 and abs(c[keep - 1]) <= rel * scale:
        keep -= 1
    return c[:keep].copy()


def _realify(c, rel=1e-10):
    # Coefficients assembled from conjugate-paired numeric roots pick up tiny
    # imaginary residue; snapping it to zero keeps F(conj s) = conj F(s)
    # exact, which the one-sided Talbot fold relies on.
    scale = np.max(np.abs(c))
    if scale > 0.0 and np.max(np.abs(c.imag)) <= rel * scale:
        return c.real.astype(complex)
    return c


@dataclass(frozen=True)
class RationalFunction:
    """Strictly proper rational function N(s)/D(s), monic denominator.

    `den_factors`, when present, lists the denominator roots with
    multiplicities (exact product form), which lets the inversion skip the
    companion-matrix root solve.
    """

    numerator: np.ndarray
    denominator: np.ndarray
    provenance: str = ""
    den_factors: tuple = None  # ((root, multiplicity), ...) or None

    @classmethod
    def make(cls, numerator, denominator, provenance="", den_factors=None):
        num = _realify(_trim(numerator))
        den = _realify(_trim(denominator))
        if len(den) < 2:
            raise ValueError("denominator must have degree >= 1")
        if len(num) >= len(den):
            raise ValueError(
                f"rational function must be strictly proper "
                f"(deg N = {len(num)-1}, deg D = {len(den)-1})")
        lead = den[-1]
        num = num / lead
        den = den / lead
        if den_factors is not None:
            den_factors = tuple((complex(r), int(m)) for r, m in den_factors)
        return cls(numerator=num, denominator=den, provenance=provenance,
                   den_factors=den_factors)

    @classmethod
    def from_factors(cls, numerator, factors, provenance=""):
        """Build from numerator coefficients and denominator roots."""
        roots = []
        for r, m in factors:
            roots.extend([r] * m)
        return cls.make(numerator, poly_from_roots(roots), provenance,
                        den_factors=factors)

    def __call__(self, s):
        return poly_eval(self.numerator, s) / poly_eval(self.denominator, s)

    def degree(self):
        return len(self.numerator) - 1, len(self.denominator) - 1

    def initial_value(self):
        """lim s->inf of s F(s) = f(0+)."""
        dn, dd = self.degree()
        if dn + 1 == dd:
            return self.numerator[-1] / self.denominator[-1]
        return 0.0 + 0.0j

    def max_imag_pole(self):
        return max(abs(p.imag) for p in self.poles())

    def poles(self):
        if self.den_factors is not None:
            return [complex(r) for r, m in self.den_factors for _ in range(m)]
        return list(companion_roots(self.denominator))


def companion_roots(coeffs):
    """Roots of an ascending-coefficient polynomial via the companion matrix."""
    c = _trim(coeffs)
    n = len(c) - 1
    if n < 1:
        return np.array([], dtype=complex)
    monic = c / c[-1]
    comp = np.zeros((n, n), dtype=complex)
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -monic[:-1]
    return np.linalg.eigvals(comp)


def _cluster(points, rel_tol):
    """Single-linkage clusters of complex points at a relative tolerance."""
    points = list(points)
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            scale = max(abs(points[i]), abs(points[j]), CLUSTER_SCALE_FLOOR)
            if abs(points[i] - points[j]) <= rel_tol * scale:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(frozenset(g) for g in groups.values())


def cluster_poles(poles, multiplicities=None):
    """Group near-coincident poles; raise if the grouping is ambiguous.

    Ambiguity means the partition changes somewhere between relative
    tolerance 1e-8 and 1e-6 -- the caller cannot tell a repeated pole from a
    close pair, so guessing is refused.
    """
    poles = [complex(p) for p in poles]
    if multiplicities is None:
        multiplicities = [1] * len(poles)
    low = _cluster(poles, CLUSTER_TOL)
    high = _cluster(poles, CLUSTER_TOL_UPPER)
    if low != high:
        raise IllConditionedPoles(
            "pole clustering differs between tolerances 1e-8 and 1e-6")
    clusters = []
    for group in low:
        members = sorted(group)
        weight = sum(multiplicities[i] for i in members)
        centroid = sum(poles[i] * multiplicities[i] for i in members) / weight
        spread = max(abs(poles[i] - centroid) for i in members)
        clusters.append((centroid, weight, spread))
    return clusters


@dataclass(frozen=True)
class ExponentialSum:
    """f(t) = sum_k  coeff_k * t^power_k * exp(rate_k t), real-valued on t>=0."""

    terms: tuple  # of (coeff complex, rate complex, power int)
    provenance: str = ""

    IMAG_TOL = 1e-10

    def eval_complex(self, ts):
        ts = np.asarray(ts, dtype=float)
        out = np.zeros(ts.shape, dtype=complex)
        for coeff, rate, power in self.terms:
            term = coeff * np.exp(rate * ts)
            if power:
                term = term * ts ** power
            out += term
        return out

    def __call__(self, ts):
        vals = self.eval_complex(ts)
        scale = max(1.0, np.max(np.abs(vals)) if vals.size else 1.0)
        if np.max(np.abs(vals.imag)) > self.IMAG_TOL * scale:
            raise ArithmeticError(
                "exponential sum is not real on t >= 0 "
                f"(imag defect {np.max(np.abs(vals.imag)):.2e})")
        return vals.real

    def scaled(self, factor):
        return ExponentialSum(
            terms=tuple((c * factor, r, p) for c, r, p in self.terms),
            provenance=self.provenance)

    def value_at_zero(self):
        return sum(c for c, _r, p in self.terms if p == 0)

    def constant_term(self):
        return sum(c for c, r, p in self.terms if p == 0 and abs(r) < 1e-12)

    def significant_rates(self, rel=1e-9):
        scale = max(abs(c) for c, _r, _p in self.terms)
        return sorted({(round(r.real, 9), round(abs(r.imag), 9))
                       for c, r, _p in self.terms if abs(c) > rel * scale})


def laurent_coefficients(F, pole, order, radius, points=64):
    """Principal-part coefficients a_{-1} .. a_{-order} of F about `pole`.

    Trapezoid rule on a circle of `radius`; spectrally accurate while the
    nearest other singularity stays well outside the contour.
    """
    theta = 2.0 * np.pi * np.arange(points) / points
    ring = np.exp(1j * theta)
    samples = np.array([F(pole + radius * z) for z in ring], dtype=complex)
    coeffs = []
    for l in range(1, order + 1):
        coeffs.append(radius ** l * np.mean(samples * ring ** l))
    return coeffs


def invert_rational(rf: RationalFunction) -> ExponentialSum:
    """Partial-fraction inversion of a strictly proper rational function.

    Denominator roots come from the companion matrix (or the stored factor
    list); roots within 1e-8 relative distance are treated as one pole of
    higher multiplicity, and the inverse transform of 1/(s-p)^m contributes
    t^{m-1} e^{pt} / (m-1)!.
    """
    if rf.den_factors is not None:
        raw = [r for r, _m in rf.den_factors]
        mult = [m for _r, m in rf.den_factors]
    else:
        raw = list(companion_roots(rf.denominator))
        mult = [1] * len(raw)
    clusters = cluster_poles(raw, mult)

    dprime = np.polynomial.polynomial.polyder(rf.denominator)
    terms = []
    for centroid, order, spread in clusters:
        others = [c for c, _o, _s in clusters if c is not centroid and c != centroid]
        dist = min((abs(centroid - c) for c in others), default=1.0)
        if order == 1 and spread == 0.0:
            res = poly_eval(rf.numerator, centroid) / poly_eval(dprime, centroid)
            terms.append((res, centroid, 0))
            continue
        radius = 0.3 * dist
        if spread > 0.0:
            radius = max(radius, 10.0 * spread)
        if radius >= 0.5 * dist and others:
            raise IllConditionedPoles(
                f"cluster spread {spread:.2e} too close to neighbour at "
                f"distance {dist:.2e}")
        coeffs = laurent_coefficients(rf, centroid, order, radius)
        fact = 1.0
        for l, a in enumerate(coeffs, start=1):
            if l > 1:
                fact *= (l - 1)
            terms.append((a / fact, centroid, l - 1))
    return ExponentialSum(terms=tuple(terms), provenance=rf.provenance)


def talbot_nodes_required(t, max_imag, base=32):
    """Node count keeping the fixed-Talbot contour outside poles with large
    imaginary part (|Im p| up to max_imag) at time t, with enough surplus to
    resolve the resulting oscillation of the integrand."""
    if t <= 0 or max_imag <= 0:
        return base
    needed = int(np.ceil(3.0 * t * max_imag * 5.0 / (2.0 * np.pi))) + 32
    return max(base, needed)


def talbot_invert(F, t, nodes=32, dps=None):
    """Inverse Laplace transform at a single t > 0 by the fixed-Talbot rule.

    The contour parameter is r = 2*nodes/5; rounding amplification grows
    like exp(r), so the working precision is raised with the node count
    (mpmath).  F is called with an mpmath.mpc argument and may return any
    scalar mpmath/complex type.  The original f(t) is assumed real, i.e.
    F(conj s) = conj F(s): only the upper contour half is sampled.  For
    transforms with poles far off the real axis the node count must grow
    (see talbot_nodes_required), both to keep the contour outside the poles
    and to resolve the oscillation they imprint.
    """
    if t <= 0:
        raise ValueError("talbot_invert requires t > 0")
    if dps is None:
        dps = 20 + int(np.ceil(0.19 * nodes))
    with mpmath.workdps(dps):
        tmp = mpmath.mpf(t)
        M = nodes
        r = mpmath.mpf(2 * M) / 5
        total = mpmath.mpf(0)
        # k = 0 node sits on the real axis.
        p0 = r / tmp
        total += (mpmath.exp(p0 * tmp) / 2 * F(mpmath.mpc(p0))).real
        for k in range(1, M):
            theta = mpmath.pi * k / M
            cot = mpmath.cos(theta) / mpmath.sin(theta)
            pk = r / tmp * theta * mpmath.mpc(cot, 1)
            gamma = mpmath.exp(pk * tmp) * mpmath.mpc(1, theta * (1 + cot ** 2) - cot)
            total += (gamma * F(pk)).real
        return float(2 * total / (5 * tmp))


def talbot_invert_rf(rf: RationalFunction, t, nodes=None):
    """Talbot inversion of a rational function, choosing nodes from its poles."""
    if nodes is None:
        nodes = talbot_nodes_required(t, rf.max_imag_pole())
    num = [complex(c) for c in rf.numerator]
    den = [complex(c) for c in rf.denominator]

    def F(s):
        acc_n = 0
        for c in reversed(num):
            acc_n = acc_n * s + c
        acc_d = 0
        for c in reversed(den):
            acc_d = acc_d * s + c
        return acc_n / acc_d

    return talbot_invert(F, t, nodes=nodes)
