"""Reproducible acceptance checks, one function per criterion.

Each check returns a :class:`CriterionResult`.  Tolerances and workload knobs
come from :class:`~feynwalk.config.RunConfig`; the defaults are the published
targets, so a red result means the target was not met.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import amplitudes as amp
from . import asymptotics as asy
from . import brownian as br
from . import coupled as cp
from . import schrodinger as sch
from .config import RunConfig
from .gaussian import GaussianRational, ZERO


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    summary: str
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {self.summary} ({self.seconds:.2f} s)"

    def to_dict(self, timings: bool = True) -> dict:
        """Plain dict; ``timings=False`` drops wall-clock fields for reproducible payloads."""
        detail = self.detail if timings else {k: v for k, v in self.detail.items() if k != "seconds"}
        out = {"number": self.number, "name": self.name, "passed": self.passed,
               "summary": self.summary, "detail": detail}
        if timings:
            out["seconds"] = self.seconds
        return out


def _timed(number: int, name: str):
    def wrap(fn):
        def run(config: RunConfig | None = None) -> CriterionResult:
            config = config or RunConfig()
            t0 = time.perf_counter()
            passed, summary, detail = fn(config)
            return CriterionResult(number, name, bool(passed), summary, detail,
                                   time.perf_counter() - t0)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        run.number = number
        return run
    return wrap


# ---------------------------------------------------------------------------
# amplitudes and coupled probabilities
# ---------------------------------------------------------------------------
@_timed(1, "table1")
def table1_reproduction(config):
    """Coupled/binomial grid for n = 1..5, |m| <= 4 against the golden strings."""
    t0 = time.perf_counter()
    grid = cp.table1_grid()
    elapsed = time.perf_counter() - t0
    diff = cp.table1_diff(grid, cp.load_table1_golden())
    limit = config.tol("table1_seconds")
    ok = not diff and elapsed < limit
    return ok, f"{25 - len(diff)}/25 cells match, runtime limit {limit:g} s", {"mismatches": diff, "seconds": elapsed}


@_timed(2, "four-method agreement")
def four_methods(config):
    """Direct sum, hypergeometric, length recursion and m-recursion for l <= 40."""
    ell_max = int(config.tol("four_method_ell"))
    bad = []
    for ell in range(ell_max + 1):
        rep = amp.four_method_report(ell)
        if not rep["agree"]:
            bad.append(ell)
    return not bad, f"l = 0..{ell_max}: {ell_max + 1 - len(bad)} lengths bit-identical", {"disagree": bad}


@_timed(3, "normalization")
def normalization(config):
    """Exact sum of amplitudes equals one for every l <= 100."""
    ell_max = int(config.tol("sum_ell"))
    bad = [ell for ell in range(ell_max + 1)
           if amp.sum_check(amp.amplitude_table(ell, amp.EXACT, max(config.exact_cap, ell)))]
    return not bad, f"l = 0..{ell_max}: {ell_max + 1 - len(bad)} exact sums equal 1", {"failures": bad}


# ---------------------------------------------------------------------------
# lattice path integral oracle
# ---------------------------------------------------------------------------
_UNITS = (GaussianRational(1, 0, 0), GaussianRational(0, 1, 0),
          GaussianRational(-1, 0, 0), GaussianRational(0, -1, 0))


def random_exact_instance(rng: np.random.Generator, k: int) -> sch.PotentialSpec:
    """Unit-modulus dyadic phases and dyadic ``g`` on five sites around 0."""
    reach = 2 * k + 3
    phase = {j: _UNITS[int(rng.integers(4))] for j in range(-reach, reach + 1)}
    g = {j: GaussianRational(int(rng.integers(-16, 17)), int(rng.integers(-16, 17)), 4)
         for j in range(-2, 3)}
    return sch.PotentialSpec("random-exact", V=None, g=None,
                             exact_phase=phase.__getitem__,
                             exact_g=lambda j: g.get(j, ZERO))


def random_float_instance(rng: np.random.Generator, k: int, m: int) -> sch.PotentialSpec:
    """Bounded random ``V`` and complex ``g`` on five sites around 0, sampled at level ``m``."""
    reach = 2 * k + 3
    sites = np.arange(-reach, reach + 1)
    V = rng.uniform(-4, 4, len(sites))
    g = np.where(np.abs(sites) <= 2, rng.normal(size=len(sites)) + 1j * rng.normal(size=len(sites)), 0)
    return sch.from_samples(m, sites, V, g)


@_timed(4, "path-enumeration oracle")
def path_oracle(config):
    """DP against the 3**k path sum, exact and floating, on random instances."""
    rng = br.make_rng(config.seed)
    count = int(config.tol("oracle_instances"))
    k_max = int(config.tol("oracle_k_max"))
    tol = config.tol("oracle_float")
    exact_bad, worst = [], 0.0
    for i in range(count):
        k = i % (k_max + 1)
        site = int(rng.integers(-1, 2))
        pot = random_exact_instance(rng, k)
        psi = sch.evolve(sch.initial_state(0, pot, k + 3, exact=True), pot, k)
        if psi.value(site) != sch.path_integral_oracle(site, pot, k, 0, exact=True):
            exact_bad.append(i)
        m = int(rng.integers(0, 4))
        pot = random_float_instance(rng, k, m)
        psi = sch.evolve(sch.initial_state(m, pot, k + 3), pot, k)
        worst = max(worst, abs(psi.value(site) - sch.path_integral_oracle(site, pot, k, m)))
    ok = not exact_bad and worst <= tol
    return ok, (f"{count - len(exact_bad)}/{count} exact matches, float max error {worst:.2e}"),\
        {"exact_failures": exact_bad, "float_max_error": worst}


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------
@_timed(5, "c2 estimate")
def c2_estimate(config):
    """Scaled-recursion estimate at n = 1000 against the published value and conjecture."""
    t0 = time.perf_counter()
    c2 = asy.estimate_c2(1000)
    elapsed = time.perf_counter() - t0
    d = c2 - asy.C2_PAPER_N1000
    dist = abs(c2 - asy.C2_CONJECTURE)
    tol = config.tol("c2_component")
    ok = (abs(d.real) <= tol and abs(d.imag) <= tol and dist < config.tol("c2_conjecture")
          and elapsed < config.tol("c2_seconds"))
    return ok, f"c2 = {c2.real:.7f}{c2.imag:+.7f}i, conjecture distance {dist:.2e}", \
        {"c2": [c2.real, c2.imag], "conjecture_distance": dist, "seconds": elapsed}


@_timed(6, "h_inh limit")
def h_inh(config):
    """Limit of the inhomogeneous series at m = 0."""
    h = asy.h_inh_limit(0.0, tol=1e-12)
    d = h - asy.H_INH_INF0_PAPER
    tol = config.tol("h_inh_component")
    ok = abs(d.real) <= tol and abs(d.imag) <= tol
    return ok, f"h = {h.real:.7f}{h.imag:+.7f}i, target {asy.H_INH_INF0_PAPER}", \
        {"value": [h.real, h.imag], "deviation": [d.real, d.imag]}


@_timed(7, "asymptotic relative error")
def asymptotic_error(config):
    """One constant C with |ratio - 1| <= C l**(-1/3) over the central windows."""
    params = asy.AsymptoticParams.from_estimate(1000)
    rows = asy.residual_table([64, 128, 256, 512], params, config.exact_cap)
    C = asy.fitted_constant(rows)
    return C < config.tol("residual_constant"), f"fitted C = {C:.4f} over {len(rows)} points", \
        {"C": C, "points": len(rows)}


@_timed(8, "tail ratio bound")
def tail_ratio(config):
    """|rho_{n,m}| <= exp(-2m/n) for every n <= 256, exactly."""
    n_max = int(config.tol("tail_n_max"))
    res = cp.tail_ratio_sweep(n_max)
    bad = [r.n for r in res if r.max_value > 1]
    worst = max(res, key=lambda r: r.max_value)
    return not bad, (f"n = 1..{n_max}: max |rho| e^(2m/n) = {worst.max_value:.6f} "
                     f"at n={worst.n}, m={worst.argmax}"), {"violations": bad, "max": worst.max_value}


@_timed(9, "markov fit")
def markov(config):
    """Fitted transition deviations bounded by C6 n**(-1/3); odd-step value near -1/12."""
    lo, hi = int(config.tol("markov_n_min")), int(config.tol("markov_n_max"))
    fits = [cp.markov_fit_for(n, config.exact_cap) for n in range(lo, hi + 1)]
    c6 = max(f.c6 for f in fits)
    status = sorted({f.status for f in fits})
    odd = cp.odd_step_anomaly(hi, "binomial", exact_cap=config.exact_cap).value
    ok = c6 < config.tol("markov_c6") and status == ["ok"] and abs(odd + 1 / 12) <= config.tol("odd_step")
    return ok, f"C6 = {c6:.2e} over n = {lo}..{hi}, odd step {odd:.4f} at n={hi}", \
        {"c6": c6, "status": status, "odd_step": odd}


# ---------------------------------------------------------------------------
# Brownian construction
# ---------------------------------------------------------------------------
@_timed(10, "lazy bridge law")
def lazy_bridges(config):
    """T(1) against Geometric(1/2): KS distance, mean and variance."""
    samples = int(config.tol("bridge_samples"))
    walk = br.sample_lazy_walk(4 * samples + 1000, config.seed)
    st = br.stopping_times(walk.partials)
    dur = st.durations[:samples].astype(float)
    if len(dur) < samples:
        return False, f"only {len(dur)} bridges", {}
    ks = br.geometric_ks(dur)
    mean, var = float(dur.mean()), float(dur.var(ddof=1))
    se_mean = math.sqrt(var / samples)
    se_var = math.sqrt((np.mean((dur - mean) ** 4) - var ** 2) / samples)
    zm, zv = (mean - 2) / se_mean, (var - 2) / se_var
    k = config.tol("sigma")
    ok = ks < config.tol("ks") and abs(zm) <= k and abs(zv) <= k
    return ok, f"KS {ks:.4f}, mean {mean:.4f} (z {zm:+.2f}), var {var:.4f} (z {zv:+.2f})", \
        {"ks": ks, "mean": mean, "var": var, "z_mean": zm, "z_var": zv}


@_timed(11, "refinement identities")
def refinement(config):
    """Exact refinement on lazy and coupled hierarchies over several replicas."""
    levels = int(config.tol("refine_levels"))
    reps = int(config.tol("refine_replicas"))
    stats = {}
    for mode in br.MODES:
        checked = violations = broken = unexplained = 0
        for seed in br.replica_seeds(config.seed + br.MODES.index(mode), reps):
            h = br.build_hierarchy(levels, 1, seed, mode, sampler=_sampler(config, mode))
            rep = h.refinement()
            checked += sum(r.checked for r in rep)
            v = sum(r.violations for r in rep)
            violations += v
            broken += v > 0
            unexplained += sum(not r.explained for r in rep)
        stats[mode] = {"checked": checked, "violations": violations, "hierarchies_with_violations": broken,
                       "violations_before_overshoot": unexplained}
    checked = sum(d["checked"] for d in stats.values())
    violations = sum(d["violations"] for d in stats.values())
    ok = violations == 0 and checked >= 1000
    text = "; ".join(f"{m}: {d['violations']} violations in {d['hierarchies_with_violations']}/{reps} "
                     f"hierarchies" for m, d in stats.items())
    return ok, f"{text} ({checked} anchors)", stats


def _sampler(config, mode):
    if mode != br.COUPLED:
        return None
    return br.fitted_sampler(n0=config.thresholds["n0"], exact_cap=config.exact_cap)


def _variance_check(config, mode: str, replicas: int, level: int) -> dict:
    sampler = _sampler(config, mode)
    t_min = config.thresholds["k1"] * 4.0 ** (-level) if mode == br.COUPLED else 0.0
    start = math.ceil(t_min * 4) / 4
    partition = [start, 0.5, 1.0] if start < 0.5 else [start, 1.0]
    seeds = br.replica_seeds(config.seed + (1 if mode == br.COUPLED else 0), replicas)
    lv = [br.build_hierarchy(level, 1, s, mode, sampler=sampler).levels[level] for s in seeds]
    rep = br.gaussianity_report(lv, partition, mode)
    return {"partition": partition,
            "var": [r.var for r in rep.increments],
            "expected": [r.expected_var for r in rep.increments],
            "z": [r.var_z for r in rep.increments]}


@_timed(12, "convergence rates")
def convergence_rates(config):
    """Sup-distance slope over m = 4..12 and increment variances over many replicas."""
    top = int(config.tol("slope_m_max"))
    reps = int(config.tol("slope_replicas"))
    dists = np.zeros(top + 1)
    for s in br.replica_seeds(config.seed, reps):
        dists += br.build_hierarchy(top + 1, 1, s, br.LAZY).sup_distances()
    dists /= reps
    ms = np.arange(4, top + 1)
    slope = br.rate_slope(ms, dists[4:top + 1])
    level = int(config.tol("variance_level"))
    replicas = int(config.tol("variance_replicas"))
    var = {mode: _variance_check(config, mode, replicas, level) for mode in br.MODES}
    z = max(abs(v) for d in var.values() for v in d["z"])
    ok = slope <= config.tol("rate_slope") and z <= config.tol("sigma")
    return ok, f"log2 slope {slope:.3f} over m = 4..{top}, max variance |z| {z:.2f}", \
        {"slope": slope, "mean_sup_distance": dists.tolist(), "variance": var}


# ---------------------------------------------------------------------------
# Schroedinger
# ---------------------------------------------------------------------------
@_timed(13, "schroedinger convergence")
def schrodinger_convergence(config):
    """Free packet against the closed form, cosine potential against the implicit scheme."""
    ms = range(4, 10)
    free = sch.continuum_comparison(sch.gaussian_packet(1.0), 1.0, ms)
    cos = sch.continuum_comparison(sch.cosine_potential(1.0), 1.0, ms)
    last = free.errors[-1]
    ok_free = free.monotone and last is not None and last < config.tol("schrodinger_m9")
    ok = ok_free and cos.monotone

    def fmt(tab):
        return ", ".join("-" if e is None else f"{e:.1e}" for e in tab.errors)
    return ok, f"free [{fmt(free)}], cosine [{fmt(cos)}]", {"free": free.to_dict(), "cosine": cos.to_dict()}


@_timed(14, "kernel checks")
def kernel(config):
    """Mass, total variation and Chapman-Kolmogorov for the complex kernel."""
    rep = sch.kernel_checks(0.5, 0.5)
    mass_err = abs(rep.integral - 1)
    tv_err = abs(rep.abs_integral - sch.KERNEL_NORM)
    ok = (mass_err <= config.tol("kernel_mass") and tv_err <= config.tol("kernel_norm")
          and rep.ck_max_deviation < config.tol("chapman_kolmogorov"))
    return ok, f"mass error {mass_err:.1e}, norm error {tv_err:.1e}, CK {rep.ck_max_deviation:.1e}", \
        {"mass_error": mass_err, "norm_error": tv_err, "ck_deviation": rep.ck_max_deviation}


CRITERIA = (table1_reproduction, four_methods, normalization, path_oracle, c2_estimate, h_inh,
            asymptotic_error, tail_ratio, markov, lazy_bridges, refinement, convergence_rates,
            schrodinger_convergence, kernel)


def run_all(config: RunConfig | None = None, only=None, log=None) -> list[CriterionResult]:
    """Run the selected criteria (all by default) in order."""
    out = []
    for fn in CRITERIA:
        if only and fn.number not in only:
            continue
        res = fn(config)
        if log:
            log(res.line())
        out.append(res)
    return out


__all__ = ["CRITERIA", "CriterionResult", "random_exact_instance", "random_float_instance",
           "run_all"] + [fn.__name__ for fn in CRITERIA]
