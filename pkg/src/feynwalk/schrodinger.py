"""Lattice Schrodinger solver built from the complex walk.

On level ``m`` the lattice is ``x_j = j dx`` with ``dx = 2**-m`` and time step
``dt = dx**2``.  One step is

    psi(k+1, x) = e^{-i V(x) dt} [ (i/2) psi(k, x-dx) + (1-i) psi(k, x) + (i/2) psi(k, x+dx) ].

The free step multiplies the lattice Fourier mode ``u`` by
``1 - 2i sin(u/2)**2``, whose modulus reaches ``sqrt(5)`` at ``u = pi``.  Any
error at high frequency is therefore amplified by up to ``sqrt(5)`` per step,
so double precision is only usable for short runs.  For long runs this module
offers a fixed-point evaluation with enough bits, and an exact spectral
evaluation for free Gaussian data.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np
from scipy.linalg import solve_banded

from .gaussian import GaussianRational, I_HALF, ONE_MINUS_I, ZERO

P_STEP = 0.5j
Q_STEP = 1 - 1j
KERNEL_NORM = 5 ** 0.25 / math.sqrt(2)
LOG2_SQRT5 = 0.5 * math.log2(5.0)
ORACLE_MAX_STEPS = 12


# ---------------------------------------------------------------------------
# data types
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PotentialSpec:
    """Potential ``V`` and initial condition ``g``, both functions of ``x``.

    ``V`` and ``g`` take float arrays.  ``V_mp``/``g_mp`` take an mpmath number
    and are needed for the fixed-point solver.  ``exact_phase`` maps a site
    index to a dyadic Gaussian rational that replaces ``e^{-i V dt}`` in exact
    runs; ``exact_g`` does the same for the initial data.
    """

    name: str
    V: Callable
    g: Callable
    V_mp: Callable | None = None
    g_mp: Callable | None = None
    bounded: bool = True
    c2: bool = True
    gaussian_sigma: float | None = None
    free: bool = False
    exact_phase: Callable | None = None
    exact_g: Callable | None = None
    support: float | None = None  # g vanishes for |x| > support

    def phases(self, x: np.ndarray, dt: float) -> np.ndarray:
        if self.free:
            return np.ones(len(x), complex)
        return np.exp(-1j * np.asarray(self.V(x), float) * dt)


def gaussian_packet(sigma: float = 1.0, V=None, V_mp=None, name=None) -> PotentialSpec:
    """Initial data ``exp(-x**2 / (2 sigma**2))`` under ``V`` (free if omitted)."""
    free = V is None
    return PotentialSpec(
        name or ("free-gaussian" if free else "gaussian"),
        V=(lambda x: np.zeros_like(np.asarray(x, float))) if free else V,
        g=lambda x: np.exp(-np.asarray(x, float) ** 2 / (2 * sigma ** 2)).astype(complex),
        V_mp=(lambda x: mpmath.mpf(0)) if free else V_mp,
        g_mp=lambda x: mpmath.exp(-x * x / (2 * sigma ** 2)),
        gaussian_sigma=sigma,
        free=free,
    )


def cosine_potential(sigma: float = 1.0) -> PotentialSpec:
    return gaussian_packet(sigma, V=np.cos, V_mp=mpmath.cos, name="cosine")


def constant_data(value: complex = 1.0) -> PotentialSpec:
    return PotentialSpec("constant", V=lambda x: np.zeros_like(np.asarray(x, float)),
                         g=lambda x: np.full(np.shape(x), value, complex), free=True)


def indicator_data(site: int = 0, m: int = 0) -> PotentialSpec:
    """``g`` equal to one at a single lattice site of level ``m``."""
    x0 = site * 2.0 ** (-m)
    h = 2.0 ** (-m) / 2
    return PotentialSpec(
        "indicator", V=lambda x: np.zeros_like(np.asarray(x, float)),
        g=lambda x: (np.abs(np.asarray(x, float) - x0) < h).astype(complex),
        free=True, support=abs(x0) + h,
        exact_g=lambda j: GaussianRational(1 if j == site else 0, 0, 0),
        exact_phase=lambda j: GaussianRational(1, 0, 0))


def from_samples(m: int, sites, V_values, g_values, name="samples") -> PotentialSpec:
    """Lattice-sampled data (for example read from CSV); zero off the given sites."""
    sites = np.asarray(sites, int)
    Vmap = dict(zip(sites.tolist(), np.asarray(V_values, float).tolist()))
    gmap = dict(zip(sites.tolist(), np.asarray(g_values, complex).tolist()))
    scale = 2.0 ** m

    def idx(x):
        return np.rint(np.asarray(x, float) * scale).astype(int)

    def V(x):
        return np.array([Vmap.get(j, 0.0) for j in np.atleast_1d(idx(x))])

    def g(x):
        return np.array([gmap.get(j, 0j) for j in np.atleast_1d(idx(x))])

    return PotentialSpec(name, V=V, g=g, support=(np.abs(sites).max() + 0.5) / scale,
                         free=not any(Vmap.values()))


@dataclass(frozen=True)
class LatticeWaveFunction:
    """Values ``psi_m(t_k, x_j)`` for ``j = j_lo .. j_lo + len(values) - 1``.

    ``values`` is a complex array, or an object array of ``GaussianRational``
    in exact runs.
    """

    m: int
    t_index: int
    j_lo: int
    values: np.ndarray

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    @property
    def dx(self) -> float:
        return 2.0 ** (-self.m)

    @property
    def dt(self) -> float:
        return 4.0 ** (-self.m)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.j_lo, self.j_lo + len(self.values))

    @property
    def x(self) -> np.ndarray:
        return self.sites * self.dx

    @property
    def t(self) -> float:
        return self.t_index * self.dt

    @property
    def support_radius(self) -> int:
        nz = [j for j, v in zip(self.sites, self.values) if v]
        return max((abs(int(j)) for j in nz), default=0)

    def value(self, j: int):
        i = j - self.j_lo
        if 0 <= i < len(self.values):
            return self.values[i]
        return ZERO if self.exact else 0j

    def to_csv(self) -> str:
        lines = ["x,re,im,abs2"]
        for xx, v in zip(self.x, map(complex, self.values)):
            lines.append(f"{float(xx)!r},{v.real!r},{v.imag!r},{abs(v) ** 2!r}")
        return "\n".join(lines) + "\n"


def initial_state(m: int, potential: PotentialSpec, radius: int, exact: bool = False) -> LatticeWaveFunction:
    """Sample ``g`` on sites ``|j| <= radius``."""
    js = np.arange(-radius, radius + 1)
    if exact:
        if potential.exact_g is None:
            raise ValueError("exact run needs exact_g")
        vals = np.array([potential.exact_g(int(j)) for j in js], dtype=object)
    else:
        vals = np.asarray(potential.g(js * 2.0 ** (-m)), complex)
    return LatticeWaveFunction(m, 0, -radius, vals)


# ---------------------------------------------------------------------------
# dynamic programme
# ---------------------------------------------------------------------------
def _free_step(v):
    """One free step on a window that grows by one site on each side."""
    n = len(v)
    if v.dtype == object:
        z = np.array([ZERO, ZERO], dtype=object)
        w = np.concatenate([z, v, z])
        return I_HALF * (w[:-2] + w[2:]) + w[1:-1] * ONE_MINUS_I if n else w[1:-1]
    w = np.zeros(n + 4, complex)
    w[2:-2] = v
    return P_STEP * (w[:-2] + w[2:]) + Q_STEP * w[1:-1]


def evolve(psi: LatticeWaveFunction, potential: PotentialSpec, steps: int) -> LatticeWaveFunction:
    """Advance ``steps`` time steps; the window grows one site per side per step."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    vals, j_lo = psi.values, psi.j_lo
    dx, dt = psi.dx, psi.dt
    for _ in range(steps):
        vals = _free_step(vals)
        j_lo -= 1
        js = np.arange(j_lo, j_lo + len(vals))
        if psi.exact:
            if not potential.free:
                if potential.exact_phase is None:
                    raise ValueError("exact run needs exact_phase")
                vals = np.array([potential.exact_phase(int(j)) * v for j, v in zip(js, vals)], dtype=object)
        elif not potential.free:
            vals = vals * potential.phases(js * dx, dt)
    return LatticeWaveFunction(psi.m, psi.t_index + steps, j_lo, vals)


def path_integral_oracle(j: int, potential: PotentialSpec, k: int, m: int, exact: bool = False):
    """Sum over all ``3**k`` lattice paths of length ``k`` starting at site ``j``.

    Each path contributes the product of its step amplitudes, the phase
    collected at the ``k`` sites it leaves, and ``g`` at its endpoint.
    """
    if k > ORACLE_MAX_STEPS:
        raise ValueError(f"path enumeration is limited to k <= {ORACLE_MAX_STEPS}")
    if exact:
        amp = {-1: I_HALF, 0: ONE_MINUS_I, 1: I_HALF}
        g = potential.exact_g
        phase = potential.exact_phase if not potential.free else (lambda s: GaussianRational(1, 0, 0))
        total = ZERO
        one = GaussianRational(1, 0, 0)
    else:
        amp = {-1: P_STEP, 0: Q_STEP, 1: P_STEP}
        dx, dt = 2.0 ** (-m), 4.0 ** (-m)
        reach = np.arange(j - k, j + k + 1)
        g = dict(zip(reach.tolist(), np.asarray(potential.g(reach * dx), complex).tolist())).__getitem__
        phase = dict(zip(reach.tolist(), potential.phases(reach * dx, dt).tolist())).__getitem__
        one = 1 + 0j
    terms = []
    for path in itertools.product((-1, 0, 1), repeat=k):
        w = one
        pos = j
        for s in path:
            w = w * phase(pos) * amp[s]
            pos += s
        terms.append(w * g(pos))
    if exact:
        for t in terms:
            total = total + t
        return total
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


# ---------------------------------------------------------------------------
# long runs
# ---------------------------------------------------------------------------
def amplification_bits(k: int) -> int:
    """Bits lost to the worst-case ``sqrt(5)**k`` amplification."""
    return int(math.ceil(k * LOG2_SQRT5))


def fixed_point_solution(potential: PotentialSpec, m: int, k: int, window: float,
                         guard_bits: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """``psi_m(t_k, x_j)`` for ``|x_j| <= window`` in fixed-point integer arithmetic.

    The precision covers the amplification of rounding errors, and ``g`` is
    truncated where it falls below the working precision.  Only sites inside
    the dependency cone of the output window are updated.
    """
    if potential.g_mp is None or (not potential.free and potential.V_mp is None):
        raise ValueError("fixed-point solver needs V_mp and g_mp")
    P = amplification_bits(k) + guard_bits + max(1, k).bit_length()
    dx = mpmath.mpf(2) ** (-m)
    with mpmath.workprec(P + 32):
        if potential.support is not None:
            X = potential.support
        elif potential.gaussian_sigma is not None:
            X = potential.gaussian_sigma * math.sqrt(2 * (P + 8) * math.log(2))
        else:
            raise ValueError("need compact support or a Gaussian tail to truncate g")
        J = int(math.ceil(X * 2 ** m)) + 1
        J_out = int(math.floor(window * 2 ** m))
        scale = mpmath.mpf(2) ** P

        def fx(v):
            return int(mpmath.nint(v * scale))

        lo = -J
        re = np.empty(2 * J + 1, dtype=object)
        im = np.empty(2 * J + 1, dtype=object)
        for i in range(2 * J + 1):
            gv = mpmath.mpc(potential.g_mp((lo + i) * dx))
            re[i], im[i] = fx(gv.real), fx(gv.imag)
        if not potential.free:
            dt = dx * dx
            lim = J + k + 1
            cr, ci = {}, {}
            for j in range(-lim, lim + 1):
                a = -potential.V_mp(j * dx) * dt
                cr[j], ci[j] = fx(mpmath.cos(a)), fx(mpmath.sin(a))
    for s in range(k):
        remaining = k - s - 1
        new_lo = max(lo - 1, -(J_out + remaining))
        new_hi = min(lo + len(re), J_out + remaining)
        n = new_hi - new_lo + 1
        zpad = np.array([0, 0], dtype=object)
        wr = np.concatenate([zpad, re, zpad])
        wi = np.concatenate([zpad, im, zpad])
        # wr[t] holds site lo - 2 + t
        off = new_lo - (lo - 2)
        b_r, b_i = wr[off:off + n], wi[off:off + n]
        a_r, a_i = wr[off - 1:off - 1 + n], wi[off - 1:off - 1 + n]
        c_r, c_i = wr[off + 1:off + 1 + n], wi[off + 1:off + 1 + n]
        n_re = b_r + b_i - ((a_i + c_i) >> 1)
        n_im = b_i - b_r + ((a_r + c_r) >> 1)
        if not potential.free:
            pr = np.array([cr[j] for j in range(new_lo, new_lo + n)], dtype=object)
            pi = np.array([ci[j] for j in range(new_lo, new_lo + n)], dtype=object)
            n_re, n_im = (n_re * pr - n_im * pi) >> P, (n_re * pi + n_im * pr) >> P
        re, im, lo = n_re, n_im, new_lo
    sites = np.arange(-J_out, J_out + 1)
    out = np.zeros(len(sites), complex)
    for t, j in enumerate(sites):
        i = j - lo
        if 0 <= i < len(re):
            out[t] = complex(_fixed_to_float(re[i], P), _fixed_to_float(im[i], P))
    return sites * 2.0 ** (-m), out


def _fixed_to_float(n: int, P: int) -> float:
    try:
        return n / (1 << P)
    except OverflowError:
        return math.copysign(math.inf, n)


def fixed_point_cost(potential: PotentialSpec, m: int, k: int, window: float) -> float:
    """Rough work estimate ``steps * sites * bits`` for the fixed-point solver."""
    P = amplification_bits(k) + 64
    if potential.support is not None:
        X = potential.support
    elif potential.gaussian_sigma is not None:
        X = potential.gaussian_sigma * math.sqrt(2 * P * math.log(2))
    else:
        return math.inf
    sites = 2 * (min(X, window + k * 2.0 ** (-m)) * 2 ** m + k / 2)
    return float(k) * sites * P


def _log_free_multiplier(u: np.ndarray) -> np.ndarray:
    """``log(1 - 2i sin(u/2)**2)`` without cancellation near ``u = 0``."""
    s2 = np.sin(u / 2) ** 2
    return 0.5 * np.log1p(4 * s2 * s2) + 1j * np.arctan(-2 * s2)


def free_gaussian_lattice(sigma: float, m: int, k: int, window: float,
                          oversample: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``psi_m(t_k, .)`` for free Gaussian data, through the lattice Fourier integral.

    The integrand ``g_hat(u) * (1 - 2i sin(u/2)**2)**k`` is formed in log space,
    so no rounding error is amplified.  The periodic trapezoid rule on ``N``
    nodes returns the values summed over period ``N``; ``N`` is chosen large
    enough for that to be negligible.
    """
    dx = 2.0 ** (-m)
    t = k * dx * dx
    spread = math.sqrt(sigma ** 2 + (t / sigma) ** 2)
    half = max(window, 0.0) + 40 * spread
    N = 1 << int(math.ceil(math.log2(max(2 * half / dx, 16) * oversample / 4)))
    u = 2 * math.pi * np.fft.fftfreq(N)
    a = sigma / dx
    # lattice transform of g by Poisson summation (aliases are far below 1e-300 for a >= 4)
    log_ghat = math.log(math.sqrt(2 * math.pi) * a) - 0.5 * (a * u) ** 2
    F = np.exp(log_ghat + k * _log_free_multiplier(u))
    vals = np.fft.ifft(F)  # vals[j] = (1/N) sum F(u) e^{iuj} = psi(j) up to aliasing
    J = int(math.floor(window / dx))
    sites = np.arange(-J, J + 1)
    return sites * dx, vals[sites % N]


def free_gaussian_exact(t: float, x, sigma: float = 1.0):
    """Continuum free evolution of ``exp(-x**2/(2 sigma**2))`` under ``i psi_t = -psi_xx/2``."""
    s = sigma ** 2 + 1j * t
    x = np.asarray(x, float)
    return np.sqrt(sigma ** 2 / s) * np.exp(-x * x / (2 * s))


def crank_nicolson(potential: PotentialSpec, t: float, dx: float, dt: float,
                   half_width: float) -> tuple[np.ndarray, np.ndarray]:
    """Implicit midpoint scheme for ``i psi_t = -psi_xx/2 + V psi`` with zero boundary values."""
    n_int = int(round(half_width / dx))
    x = np.arange(-n_int, n_int + 1) * dx
    psi = np.asarray(potential.g(x), complex)
    Vx = np.asarray(potential.V(x), float)
    steps = int(round(t / dt))
    if abs(steps * dt - t) > 1e-12 * max(1.0, t):
        raise ValueError("t must be a multiple of dt")
    r = 1j * dt / (4 * dx * dx)
    diag_l = 1 + 2 * r + 0.5j * dt * Vx
    diag_r = 1 - 2 * r - 0.5j * dt * Vx
    ab = np.zeros((3, len(x)), complex)
    ab[0, 1:] = -r
    ab[1] = diag_l
    ab[2, :-1] = -r
    for _ in range(steps):
        rhs = diag_r * psi
        rhs[1:] += r * psi[:-1]
        rhs[:-1] += r * psi[1:]
        psi = solve_banded((1, 1), ab, rhs)
        psi[0] = psi[-1] = 0
    return x, psi


# ---------------------------------------------------------------------------
# comparison with the continuum
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ErrorRow:
    m: int
    t_m: float
    error: float | None
    method: str
    note: str = ""


@dataclass(frozen=True)
class ComparisonTable:
    potential: str
    t_final: float
    reference: str
    rows: list
    reference_check: float | None = None

    @property
    def errors(self) -> list:
        return [r.error for r in self.rows]

    @property
    def monotone(self) -> bool:
        errs = self.errors
        if None in errs:
            return False
        return all(b < a or a == b == 0 for a, b in zip(errs, errs[1:]))

    def flags(self) -> list[int]:
        """Levels ``m`` ending a run of three non-decreasing consecutive errors."""
        out = []
        for a, b, c in zip(self.rows, self.rows[1:], self.rows[2:]):
            if None in (a.error, b.error, c.error):
                continue
            if not (a.error > b.error > c.error) and c.error > 0:
                out.append(c.m)
        return out

    def to_dict(self) -> dict:
        return {"potential": self.potential, "t_final": self.t_final, "reference": self.reference,
                "reference_check": self.reference_check, "monotone": self.monotone,
                "rows": [r.__dict__ for r in self.rows]}


def snap_time(t: float, m: int) -> tuple[int, float]:
    k = int(math.floor(t * 4 ** m + 1e-9))
    return k, k * 4.0 ** (-m)


def lattice_solution(potential: PotentialSpec, m: int, k: int, window: float,
                     method: str = "auto", budget: float = 2e10):
    """``psi_m(t_k, x_j)`` on ``|x_j| <= window`` and the method used.

    ``auto`` picks the spectral formula for free Gaussian data, the float DP
    while ``sqrt(5)**k`` stays below ``1e4``, and the fixed-point solver within
    ``budget``; otherwise it returns ``None`` values.
    """
    if method == "auto":
        if potential.free and potential.gaussian_sigma is not None:
            method = "spectral"
        elif k * LOG2_SQRT5 < 13:
            method = "float"
        elif fixed_point_cost(potential, m, k, window) <= budget:
            method = "fixed"
        else:
            return None, None, "skipped"
    if method == "spectral":
        x, v = free_gaussian_lattice(potential.gaussian_sigma, m, k, window)
    elif method == "fixed":
        x, v = fixed_point_solution(potential, m, k, window)
    elif method == "float":
        if potential.support is not None:
            radius = int(math.ceil(potential.support * 2 ** m))
        elif potential.gaussian_sigma is not None:
            radius = int(math.ceil(potential.gaussian_sigma * 40 * 2 ** m))
        else:
            radius = int(math.ceil(window * 2 ** m)) + k
        psi = evolve(initial_state(m, potential, radius), potential, k)
        J = int(math.floor(window * 2 ** m))
        x = np.arange(-J, J + 1) * 2.0 ** (-m)
        v = np.array([psi.value(int(j)) for j in range(-J, J + 1)], complex)
    else:
        raise ValueError(f"unknown method {method!r}")
    return x, v, method


def continuum_comparison(potential: PotentialSpec, t_final: float, m_list, window: float = 4.0,
                         budget: float = 2e10, ref_refine: int = 2,
                         ref_half_width: float = 24.0) -> ComparisonTable:
    """Sup distance over ``|x| <= window`` between ``psi_m(t^(m), .)`` and a continuum reference.

    Free Gaussian data use the closed form.  Otherwise the reference is the
    implicit scheme on a grid ``2**ref_refine`` times finer than the finest
    level, and it is first checked against the closed form on free data.
    """
    m_list = list(m_list)
    if constant := (potential.name == "constant"):
        ref = lambda x: np.asarray(potential.g(x), complex)  # noqa: E731
        ref_name, check = "constant", None
    elif potential.free and potential.gaussian_sigma is not None:
        sig = potential.gaussian_sigma
        ref = lambda x: free_gaussian_exact(t_final, x, sig)  # noqa: E731
        ref_name, check = "closed form", None
    else:
        m_ref = max(m_list) + ref_refine
        dx = 2.0 ** (-m_ref)
        xr, pr = crank_nicolson(potential, t_final, dx, dx, ref_half_width)
        sig = potential.gaussian_sigma or 1.0
        xf, pf = crank_nicolson(gaussian_packet(sig), t_final, dx, dx, ref_half_width)
        check = float(np.max(np.abs(pf - free_gaussian_exact(t_final, xf, sig))[np.abs(xf) <= window]))
        lookup = dict(zip(np.rint(xr / dx).astype(int).tolist(), pr))

        def ref(x):
            return np.array([lookup[int(round(v / dx))] for v in x])
        ref_name = f"implicit midpoint, dx=dt=2^-{m_ref}"
    rows = []
    for m in m_list:
        k, t_m = snap_time(t_final, m)
        if constant:
            J = int(window * 2 ** m)
            x = np.arange(-J, J + 1) * 2.0 ** (-m)
            psi = evolve(initial_state(m, potential, J + k), potential, k)
            v = np.array([psi.value(int(j)) for j in range(-J, J + 1)])
            method = "float"
        else:
            x, v, method = lattice_solution(potential, m, k, window, budget=budget)
        if v is None:
            rows.append(ErrorRow(m, t_m, None, method, "over work budget"))
            continue
        err = float(np.max(np.abs(v - ref(x))))
        rows.append(ErrorRow(m, t_m, err, method))
    return ComparisonTable(potential.name, t_final, ref_name, rows, check)


# ---------------------------------------------------------------------------
# complex transition kernel
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ComplexTransitionKernel:
    t: float

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("t must be positive")

    def density(self, x, y):
        d = np.asarray(y, float) - np.asarray(x, float)
        return np.sqrt((2 + 1j) / (2 * np.pi * self.t)) * np.exp(-(2 + 1j) * d * d / (2 * self.t))


def adaptive_trapezoid(f, a: float, b: float, tol: float = 1e-14, n0: int = 64,
                       max_level: int = 22):
    """Trapezoid rule with interval halving until two estimates agree to ``tol``."""
    n = n0
    x = np.linspace(a, b, n + 1)
    fx = f(x)
    h = (b - a) / n
    est = h * (np.sum(fx, axis=0) - 0.5 * (fx[0] + fx[-1]))
    for _ in range(max_level):
        mid = a + h * (np.arange(n) + 0.5)
        new = 0.5 * est + 0.5 * h * np.sum(f(mid), axis=0)
        n *= 2
        h /= 2
        if np.all(np.abs(new - est) <= tol * np.maximum(1.0, np.abs(new))):
            return new
        est = new
    raise RuntimeError("trapezoid rule did not converge")


@dataclass(frozen=True)
class KernelReport:
    integral: complex
    abs_integral: float
    ck_max_deviation: float
    window: float
    tail_mass: float


def kernel_checks(t1: float, t2: float, x: float = 0.0, width: float = 8.0,
                  y_radius: float = 5.0, n_y: int = 201) -> KernelReport:
    """Mass, total variation and the Chapman-Kolmogorov identity for ``nu_t``.

    Integrals run over ``|y - x| <= width * sqrt(t)``; outside it the envelope
    ``exp(-(y-x)**2/t)`` leaves relative mass ``erfc(width)``.
    """
    tail = math.erfc(width)
    if tail > 1e-12:
        raise ValueError(f"quadrature window too narrow: envelope mass outside is {tail:.3e}")
    k1, k2, k12 = ComplexTransitionKernel(t1), ComplexTransitionKernel(t2), ComplexTransitionKernel(t1 + t2)
    r1 = width * math.sqrt(t1)
    integral = complex(adaptive_trapezoid(lambda y: k1.density(x, y), x - r1, x + r1))
    abs_int = float(adaptive_trapezoid(lambda y: np.abs(k1.density(x, y)), x - r1, x + r1).real)
    ys = np.linspace(x - y_radius, x + y_radius, n_y)
    r2 = width * math.sqrt(t2)
    lo, hi = min(x - r1, ys[0] - r2), max(x + r1, ys[-1] + r2)

    def integrand(z):
        z = np.asarray(z)[:, None]
        return k1.density(x, z) * k2.density(z, ys[None, :])

    conv = adaptive_trapezoid(integrand, lo, hi)
    dev = float(np.max(np.abs(conv - k12.density(x, ys))))
    return KernelReport(integral, abs_int, dev, r1, tail)


__all__ = [
    "ComparisonTable", "ComplexTransitionKernel", "ErrorRow", "KERNEL_NORM", "KernelReport",
    "LatticeWaveFunction", "PotentialSpec", "adaptive_trapezoid", "amplification_bits",
    "constant_data", "continuum_comparison", "cosine_potential", "crank_nicolson", "evolve",
    "fixed_point_cost", "fixed_point_solution", "free_gaussian_exact", "free_gaussian_lattice",
    "from_samples", "gaussian_packet", "indicator_data", "initial_state", "kernel_checks",
    "lattice_solution", "path_integral_oracle", "snap_time",
]
