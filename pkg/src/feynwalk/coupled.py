"""Coupled probabilities ``|mu(S_l = j)|**2 / Z_l`` and the even-time Markov model."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

import numpy as np
from scipy.optimize import linprog

from .amplitudes import (
    DEFAULT_EXACT_CAP, EXACT, SCALED, AmplitudeTable, LOG5, amplitude_table,
    iter_exact_rows, ratio_row_scaled,
)

LOG4 = math.log(4.0)


@dataclass(frozen=True)
class CoupledDistribution:
    """Probabilities on ``j = -length..length``.

    ``log_scaled_Z`` is ``log(Z_l * 5**(-l))``.  When built from an exact table
    ``weights`` holds ``|mu|**2 * 4**l`` as integers so probabilities can be
    recovered as exact fractions.
    """

    length: int
    probs: np.ndarray
    log_scaled_Z: float
    weights: tuple | None = None

    def __getitem__(self, j: int) -> float:
        if abs(j) > self.length:
            return 0.0
        return float(self.probs[j + self.length])

    @property
    def js(self) -> np.ndarray:
        return np.arange(-self.length, self.length + 1)

    @property
    def is_exact(self) -> bool:
        return self.weights is not None

    def exact(self, j: int) -> Fraction:
        if self.weights is None:
            raise ValueError("distribution was built from floating amplitudes")
        if abs(j) > self.length:
            return Fraction(0)
        return Fraction(self.weights[j + self.length], sum(self.weights))

    def to_csv(self) -> str:
        lines = ["j,prob"]
        lines += [f"{j},{p!r}" for j, p in zip(range(-self.length, self.length + 1), self.probs.tolist())]
        return "\n".join(lines) + "\n"


def _log_int(x: int) -> float:
    # math.log accepts arbitrarily large ints
    return math.log(x)


def coupled_distribution(table: AmplitudeTable) -> CoupledDistribution:
    ell = table.length
    if table.backend == EXACT:
        w = table.abs2_exact()
        z = sum(w)
        assert z > 0, "Z_l vanished"
        probs = np.array([float(Fraction(x, z)) for x in w])
        log_z = _log_int(z) - ell * LOG4 - ell * LOG5
        return CoupledDistribution(ell, probs, log_z, tuple(w))
    a2 = np.abs(table.mantissas()) ** 2
    z = a2.sum()
    assert z > 0, "Z_l vanished"
    return CoupledDistribution(ell, a2 / z, math.log(z))


def coupled_from_length(ell: int, exact_cap: int = DEFAULT_EXACT_CAP) -> CoupledDistribution:
    backend = EXACT if ell <= exact_cap else SCALED
    return coupled_distribution(amplitude_table(ell, backend, exact_cap))


def binomial_prob(ell: int, j: int) -> Fraction:
    """Simple symmetric walk law ``P*(S*_l = j)``."""
    if abs(j) > ell or (ell + j) % 2:
        return Fraction(0)
    return Fraction(math.comb(ell, (ell + j) // 2), 1 << ell)


# ---------------------------------------------------------------------------
# binomial comparison and the small-n grid
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ComparisonRow:
    m: int
    coupled: Fraction | float
    binomial: Fraction

    @property
    def ratio(self) -> float:
        return float(self.coupled) / float(self.binomial) if self.binomial else math.inf


def binomial_comparison(dist: CoupledDistribution, m_max: int | None = None) -> list[ComparisonRow]:
    """Pair ``P(S_l = m)`` with the simple walk probability it tracks.

    Even ``l = 2n``: ``P*(S*_2n = 2m)``.  Odd ``l = 2n + 1``: ``P*(S*_{2n+1} = 2m - 1)``.
    """
    ell = dist.length
    if m_max is None:
        m_max = ell
    rows = []
    for m in range(-m_max, m_max + 1):
        c = dist.exact(m) if dist.is_exact else dist[m]
        b = binomial_prob(ell, 2 * m) if ell % 2 == 0 else binomial_prob(ell, 2 * m - 1)
        rows.append(ComparisonRow(m, c, b))
    return rows


def round4(x) -> int:
    """``round(x * 10**4)`` with ties away from zero, evaluated exactly."""
    x = Fraction(x)
    return math.floor(x * 10000 + Fraction(1, 2))


def format_cell(x, strip_zeros: bool) -> str:
    """Four-decimal string without the leading zero; exact zero prints as ``0``."""
    if x == 0:
        return "0"
    q = round4(x)
    whole, frac = divmod(q, 10000)
    s = f".{frac:04d}"
    if strip_zeros:
        s = s.rstrip("0")
        if s == ".":
            s = ".0"
    return (str(whole) if whole else "") + s


def table1_grid(n_max: int = 5, m_max: int = 4) -> dict[tuple[int, int], str]:
    """``{(n, m): "coupled/binomial"}`` for even lengths ``2n``, ``0 <= m <= m_max``."""
    grid = {}
    for n in range(1, n_max + 1):
        dist = coupled_distribution(amplitude_table(2 * n))
        for m in range(m_max + 1):
            c = dist.exact(m)
            b = binomial_prob(2 * n, 2 * m)
            grid[(n, m)] = f"{format_cell(c, False)}/{format_cell(b, True)}"
    return grid


def load_table1_golden(path=None) -> dict[tuple[int, int], str]:
    if path is None:
        text = resources.files("feynwalk").joinpath("data/table1_golden.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = json.loads(text)
    return {(int(n), int(m)): cell for n, row in raw["rows"].items() for m, cell in enumerate(row)}


def table1_diff(grid: dict, golden: dict) -> list[dict]:
    """Cells present in ``golden`` whose strings differ from ``grid``."""
    out = []
    for key in sorted(golden):
        got = grid.get(key)
        if got != golden[key]:
            out.append({"n": key[0], "m": key[1], "expected": golden[key], "computed": got})
    return out


# ---------------------------------------------------------------------------
# normaliser, tail ratio, tail mass
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class NormalizerReport:
    ells: list
    ratios: list
    c1_fit: float  # max |ratio - 1| * l**(1/3)


def normalizer_asymptote(ells, c2: complex, exact_cap: int = DEFAULT_EXACT_CAP) -> NormalizerReport:
    """``Z_l / (sqrt(2 pi / l) |c2|**2 5**l)`` for each ``l`` in ``ells``."""
    ratios = []
    for ell in ells:
        dist = coupled_from_length(ell, exact_cap)
        ratios.append(math.exp(dist.log_scaled_Z) / (math.sqrt(2 * math.pi / ell) * abs(c2) ** 2))
    c1 = max(abs(r - 1) * ell ** (1 / 3) for r, ell in zip(ratios, ells)) if ells else 0.0
    return NormalizerReport(list(ells), ratios, c1)


@dataclass(frozen=True)
class TailRatio:
    n: int
    max_value: float  # max_m |rho_{n,m}| exp(2m/n)
    argmax: int
    mode: str


def _tail_from_abs2(n: int, abs2: list[int]) -> TailRatio:
    # abs2[m] = |a_{n,m}|**2 times a common positive factor
    logs = [_log_int(x) if x else -math.inf for x in abs2]
    best, arg = -math.inf, 0
    for m in range(n):
        v = 0.5 * (logs[m + 1] - logs[m]) + 2 * m / n
        if v > best:
            best, arg = v, m
    return TailRatio(n, math.exp(best), arg, EXACT)


def tail_ratio_check(n: int, exact_cap: int = DEFAULT_EXACT_CAP) -> TailRatio:
    """Largest ``|rho_{n,m}| e^{2m/n}`` over ``0 <= m < n``; at most 1 when the bound holds."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if 2 * n <= exact_cap:
        table = amplitude_table(2 * n)
        w = table.abs2_exact()
        return _tail_from_abs2(n, [w[2 * n + 2 * m] for m in range(n + 1)])
    rho = ratio_row_scaled(n)
    vals = np.abs(rho[:n]) * np.exp(2 * np.arange(n) / n)
    k = int(np.argmax(vals))
    return TailRatio(n, float(vals[k]), k, SCALED)


def tail_ratio_sweep(n_max: int) -> list[TailRatio]:
    """Exact tail ratios for every ``n <= n_max`` from one pass of the convolution."""
    out = []
    for ell, re, im in iter_exact_rows(2 * n_max):
        if ell == 0 or ell % 2:
            continue
        n = ell // 2
        abs2 = [re[ell + 2 * m] ** 2 + im[ell + 2 * m] ** 2 for m in range(n + 1)]
        out.append(_tail_from_abs2(n, abs2))
    return out


def tail_profile(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(x, -log|rho_{n,m}|, 4 atanh x)`` for ``x = m/n``, ``0 <= m < n``."""
    rho = ratio_row_scaled(n)[:n]
    x = np.arange(n) / n
    return x, -np.log(np.abs(rho)), 4 * np.arctanh(x)


def tail_profile_limit(x) -> np.ndarray:
    """Large-``n`` limit of ``-log|rho_{n, xn}|``.

    Freezing the ratio recursion at ``m = xn`` leaves the quadratic
    ``(1+x)^2 r^2 - (2(1-x^2) + 8i x^2) r + (1-x)^2 = 0``; the decaying
    solution is its smaller root.
    """
    x = np.atleast_1d(np.asarray(x, float))
    out = np.empty(len(x))
    for i, xi in enumerate(x):
        roots = np.roots([(1 + xi) ** 2, -(2 * (1 - xi * xi) + 8j * xi * xi), (1 - xi) ** 2])
        out[i] = -math.log(min(abs(r) for r in roots))
    return out


@dataclass(frozen=True)
class TailMass:
    length: int
    mass: float
    envelope: float
    c4_fit: float  # (mass / envelope - 1) * l**(1/3); negative means below the envelope


def tail_mass(dist: CoupledDistribution) -> TailMass:
    ell = dist.length
    cut = ell ** (2 / 3) / 3
    mask = np.abs(dist.js) > cut
    mass = float(math.fsum(dist.probs[mask]))
    env = 4 * math.sqrt(ell / (2 * math.pi)) * math.exp(-(2 / 9) * ell ** (1 / 3)) if ell else math.inf
    c4 = (mass / env - 1) * ell ** (1 / 3) if ell else 0.0
    return TailMass(ell, mass, env, c4)


# ---------------------------------------------------------------------------
# even-time nearest-neighbour Markov fit
# ---------------------------------------------------------------------------
def fit_window(n: int) -> int:
    return int(math.floor(n ** (2 / 3) / 3))


@dataclass
class MarkovFit:
    """Fitted ``p_{n,j} = P(up | j)`` and ``q_{n,j} = P(down | j)`` for ``|j| <= J``.

    ``residual`` is the largest normalised Markov-inequality defect over the
    window, i.e. the smallest ``C5 n**(-1/3)`` that the fitted transitions satisfy.
    """

    n: int
    window: int
    p_up: dict
    p_down: dict
    residual: float
    baseline_residual: float
    status: str = "ok"

    @property
    def c5(self) -> float:
        return self.residual * self.n ** (1 / 3)

    @property
    def baseline_c5(self) -> float:
        return self.baseline_residual * self.n ** (1 / 3)

    @property
    def max_deviation(self) -> float:
        vals = list(self.p_up.values()) + list(self.p_down.values())
        return max(abs(v - 0.25) for v in vals)

    @property
    def c6(self) -> float:
        return self.max_deviation * self.n ** (1 / 3)

    def rows(self) -> list[dict]:
        return [{"n": self.n, "j": j, "p_up": self.p_up[j], "p_down": self.p_down[j],
                 "residual": self.residual} for j in sorted(self.p_up)]


def _markov_system(P, Pn, J):
    """Rows ``A x + c`` of the defect at ``j = 0..J`` and the weights.

    Unknowns ``x = (p_0..p_J, q_1..q_J)``; ``q_0 = p_0`` and ``p_{-1} = q_1`` by
    reflection; ``q_{J+1}`` is fixed to 1/4.
    """
    nv = 2 * J + 1

    def pi(j):
        return j

    def qi(j):
        return 0 if j == 0 else J + j

    A = np.zeros((J + 1, nv))
    c = np.zeros(J + 1)
    w = np.zeros(J + 1)
    for j in range(J + 1):
        c[j] = Pn(j) - P(j)
        A[j, pi(j)] += P(j)
        A[j, qi(j)] += P(j)
        # inflow from j + 1 going down
        if j + 1 <= J:
            A[j, qi(j + 1)] -= P(j + 1)
        else:
            c[j] -= 0.25 * P(j + 1)
        # inflow from j - 1 going up; p_{-1} = q_1
        if j == 0:
            if J >= 1:
                A[j, qi(1)] -= P(-1)
            else:
                c[j] -= 0.25 * P(-1)
        else:
            A[j, pi(j - 1)] -= P(j - 1)
        w[j] = P(j) + P(j - 2) + P(j + 2)
    return A, c, w, pi, qi


def fit_markov_transitions(dist_n: CoupledDistribution, dist_next: CoupledDistribution,
                           window: int | None = None) -> MarkovFit:
    """Chebyshev fit of nearest-neighbour transitions from time ``2n`` to ``2n + 2``.

    A first linear program minimises the largest normalised defect; a second one,
    holding that optimum, picks the transitions closest to 1/4.
    """
    if dist_next.length != dist_n.length + 2 or dist_n.length % 2:
        raise ValueError("need distributions at consecutive even times 2n and 2n+2")
    n = dist_n.length // 2
    J = fit_window(n) if window is None else window
    A, c, w, pi, qi = _markov_system(dist_n.__getitem__, dist_next.__getitem__, J)
    An, cn = A / w[:, None], c / w
    nv = A.shape[1]

    base = np.full(nv, 0.25)
    baseline = float(np.max(np.abs(An @ base + cn)))

    # p_j + q_j <= 1
    pair = []
    for j in range(J + 1):
        row = np.zeros(nv)
        row[pi(j)] += 1
        row[qi(j)] += 1
        pair.append(row)
    pair = np.array(pair)

    # LP 1: variables (x, t)
    A_ub = np.vstack([
        np.hstack([An, -np.ones((J + 1, 1))]),
        np.hstack([-An, -np.ones((J + 1, 1))]),
        np.hstack([pair, np.zeros((J + 1, 1))]),
    ])
    b_ub = np.concatenate([-cn, cn, np.ones(J + 1)])
    cost = np.zeros(nv + 1)
    cost[-1] = 1.0
    bounds = [(0.0, 1.0)] * nv + [(0.0, None)]
    res1 = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")

    def package(x, resid, status):
        p_up, p_down = {}, {}
        for j in range(J + 1):
            p_up[j] = float(x[pi(j)])
            p_down[j] = float(x[qi(j)])
        for j in range(1, J + 1):
            p_up[-j] = p_down[j]
            p_down[-j] = p_up[j]
        return MarkovFit(n, J, p_up, p_down, float(resid), baseline, status)

    if not res1.success:
        return package(base, baseline, f"infeasible: {res1.message}")
    t_star = float(res1.x[-1])
    cap = t_star * (1 + 1e-9) + 1e-13

    # LP 2: variables (x, s), minimise the largest deviation from 1/4
    A2 = np.vstack([
        np.hstack([An, np.zeros((J + 1, 1))]),
        np.hstack([-An, np.zeros((J + 1, 1))]),
        np.hstack([pair, np.zeros((J + 1, 1))]),
        np.hstack([np.eye(nv), -np.ones((nv, 1))]),
        np.hstack([-np.eye(nv), -np.ones((nv, 1))]),
    ])
    b2 = np.concatenate([cap - cn, cap + cn, np.ones(J + 1), np.full(nv, 0.25), np.full(nv, -0.25)])
    res2 = linprog(cost, A_ub=A2, b_ub=b2, bounds=bounds, method="highs")
    x = res2.x[:nv] if res2.success else res1.x[:nv]
    resid = float(np.max(np.abs(An @ x + cn)))
    return package(x, resid, "ok" if res2.success else "ok (first stage only)")


def markov_fit_for(n: int, exact_cap: int = DEFAULT_EXACT_CAP) -> MarkovFit:
    return fit_markov_transitions(coupled_from_length(2 * n, exact_cap),
                                  coupled_from_length(2 * n + 2, exact_cap))


# ---------------------------------------------------------------------------
# odd-time quasi-transitions
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class OddStepResult:
    """Signed solution of the nearest-neighbour balance from ``2n`` to ``2n + 1``.

    ``value`` is the quasi-probability of moving from 1 to 2.
    """

    n: int
    model: str
    p_up: dict
    p_down: dict

    @property
    def value(self) -> float:
        return float(self.p_up[1])


def _odd_laws(n: int, model: str, exact_cap: int):
    """Exact (even, odd) probability functions at half-times ``n`` and ``n + 1``."""
    out = []
    for k in (n, n + 1):
        if model == "binomial":
            ev = (lambda k_: lambda j: binomial_prob(2 * k_, 2 * j))(k)
            od = (lambda k_: lambda j: binomial_prob(2 * k_ + 1, 2 * j - 1))(k)
        elif model == "exact":
            de = coupled_from_length(2 * k, exact_cap)
            do = coupled_from_length(2 * k + 1, exact_cap)
            ev = de.exact if de.is_exact else (lambda d: lambda j: Fraction(d[j]))(de)
            od = do.exact if do.is_exact else (lambda d: lambda j: Fraction(d[j]))(do)
        else:
            raise ValueError("model must be 'binomial' or 'exact'")
        out.append((ev, od))
    return out


def _solve2(a11, a12, b1, a21, a22, b2):
    det = a11 * a22 - a12 * a21
    if det == 0:
        raise ZeroDivisionError("singular balance system")
    return (b1 * a22 - a12 * b2) / det, (a11 * b2 - b1 * a21) / det


def odd_step_anomaly(n: int, model: str = "binomial", j_max: int = 2,
                     exact_cap: int = DEFAULT_EXACT_CAP) -> OddStepResult:
    """Quasi-transition ``P(S_{2n+1} = 2 | S_{2n} = 1)`` by induction on ``j``.

    Transitions are assumed equal at half-times ``n`` and ``n + 1`` so that each
    ``j`` gives two linear equations for the pair ``(p_j, q_{j+1})``; no sign
    constraint is imposed.  ``model="binomial"`` feeds the leading order
    binomial laws, ``model="exact"`` the coupled probabilities themselves.
    """
    laws = _odd_laws(n, model, exact_cap)
    p, q = {}, {}
    # j = 0: P'(0) = 2 q_1 P(1) + (1 - 2 p_0) P(0), reflection p_{-1} = q_1, q_0 = p_0
    rows = [(-2 * ev(0), 2 * ev(1), od(0) - ev(0)) for ev, od in laws]
    p[0], q[1] = _solve2(*rows[0], *rows[1])
    q[0] = p[0]
    for j in range(1, j_max + 1):
        # P'(j) = q_{j+1} P(j+1) + p_{j-1} P(j-1) + (1 - p_j - q_j) P(j)
        rows = [(-ev(j), ev(j + 1), od(j) - p[j - 1] * ev(j - 1) - (1 - q[j]) * ev(j))
                for ev, od in laws]
        p[j], q[j + 1] = _solve2(*rows[0], *rows[1])
    return OddStepResult(n, model, {k: float(v) for k, v in p.items()},
                         {k: float(v) for k, v in q.items()})


__all__ = [
    "ComparisonRow", "CoupledDistribution", "MarkovFit", "NormalizerReport",
    "OddStepResult", "TailMass", "TailRatio", "binomial_comparison", "binomial_prob",
    "coupled_distribution", "coupled_from_length", "fit_markov_transitions", "fit_window",
    "format_cell", "load_table1_golden", "markov_fit_for", "normalizer_asymptote",
    "odd_step_anomaly", "round4", "table1_diff", "table1_grid", "tail_mass",
    "tail_profile", "tail_profile_limit", "tail_ratio_check", "tail_ratio_sweep",
]
