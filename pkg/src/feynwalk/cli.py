"""Command-line entry point.

Exit codes: 0 success, 1 failed check, 2 usage error.  Every command writes
its payloads plus a ``run.json`` artifact under the output directory.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import acceptance
from . import amplitudes as amp
from . import asymptotics as asy
from . import brownian as br
from . import coupled as cp
from . import schrodinger as sch
from .config import ArtifactWriter, RunConfig

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(z: complex) -> str:
    return f"{z.real:.7f} {'+' if z.imag >= 0 else '-'} {abs(z.imag):.7f}i"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _map(config: RunConfig, fn, items):
    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------------------
# amplitudes / table1 / asymptotics
# ---------------------------------------------------------------------------
def cmd_amplitudes(args, config, out):
    ell = args.ell
    if ell < 0:
        raise UsageError("--ell must be non-negative")
    backend = args.backend or (amp.EXACT if ell <= config.exact_cap else amp.SCALED)
    try:
        table = amp.amplitude_table(ell, backend, config.exact_cap)
    except (amp.DomainError, amp.BackendError) as exc:
        raise UsageError(str(exc)) from exc
    out.write_text(f"amplitudes_{ell}.csv", table.to_csv())
    out.write_text(f"amplitudes_{ell}.json", table.to_json(indent=1) + "\n")
    if args.j is not None:
        if abs(args.j) > ell:
            raise UsageError("--j must satisfy |j| <= ell")
        js = [args.j]
    else:
        js = range(-ell, ell + 1)
    for j in js:
        print(f"{j}\t{table[j]}")
    if not args.verify:
        return EXIT_OK, {"ell": ell, "backend": backend}
    if backend != amp.EXACT:
        raise UsageError("--verify needs the exact backend")
    reports = [amp.four_method_report(k) for k in range(ell + 1)]
    methods = ("hypergeometric", "recursion", "m_recursion")
    agree = 1 + sum(all(not r["mismatches"].get(m) for r in reports) for m in methods)
    out.write_json("verify.json", reports)
    print(f"{agree}/4 methods agree (direct, hypergeometric, l-recursion, m-recursion; l <= {ell})")
    return (EXIT_OK if agree == 4 else EXIT_FAIL), {"methods_agree": agree}


def _grid_text(grid: dict, n_max: int, m_max: int) -> str:
    lines = ["n\\m\t" + "\t".join(str(m) for m in range(m_max + 1))]
    for n in range(1, n_max + 1):
        lines.append(f"{n}\t" + "\t".join(grid[(n, m)] for m in range(m_max + 1)))
    return "\n".join(lines) + "\n"


def cmd_table1(args, config, out):
    if args.n_max < 1:
        raise UsageError("--n-max must be at least 1")
    t0 = time.perf_counter()
    grid = cp.table1_grid(args.n_max, 4)
    elapsed = time.perf_counter() - t0
    text = _grid_text(grid, args.n_max, 4)
    print(text, end="")
    out.write_text("table1.tsv", text)
    golden = cp.load_table1_golden(args.golden)
    golden = {k: v for k, v in golden.items() if k[0] <= args.n_max}
    diff = cp.table1_diff(grid, golden)
    out.write_json("table1_diff.json", diff)
    for d in diff:
        print(f"MISMATCH n={d['n']} m={d['m']}: expected {d['expected']}, computed {d['computed']}",
              file=sys.stderr)
    print(f"{len(golden) - len(diff)}/{len(golden)} golden cells match ({elapsed:.3f} s)")
    return (EXIT_FAIL if diff else EXIT_OK), {"mismatches": len(diff)}


def cmd_c2(args, config, out):
    if args.n < 1:
        raise UsageError("--n must be positive")
    c2 = asy.estimate_c2(args.n)
    dist = abs(c2 - asy.C2_CONJECTURE)
    print(f"estimate   c2(n={args.n}) = {_fmt(c2)}")
    print(f"published  c2(n=1000) = {_fmt(asy.C2_PAPER_N1000)}")
    print(f"conjecture sqrt((2+i)pi/40) = {_fmt(asy.C2_CONJECTURE)}")
    print(f"distance to conjecture = {dist:.3e}")
    payload = {"n": args.n, "c2": c2, "published_n1000": asy.C2_PAPER_N1000,
               "conjecture": asy.C2_CONJECTURE, "conjecture_distance": dist}
    if args.extrapolate:
        ex = asy.extrapolate_c2(args.n)
        print(f"extrapolated limit = {_fmt(ex.c2)}")
        payload["extrapolated"] = ex.c2
        payload["kappa"] = ex.kappa
    out.write_json("c2.json", payload)
    return EXIT_OK, {"c2": [c2.real, c2.imag]}


def cmd_residuals(args, config, out):
    ells = args.ells
    if any(ell < 1 for ell in ells):
        raise UsageError("lengths must be positive")
    params = asy.AsymptoticParams.from_estimate(args.c2_n)
    rows = asy.residual_table(ells, params, config.exact_cap)
    text = _csv(["ell", "j", "relative_error", "modulus_ratio"],
                [[r.ell, r.j, repr(r.relative_error), repr(r.modulus_ratio)] for r in rows])
    print(text, end="")
    out.write_text("residuals.csv", text)
    C = asy.fitted_constant(rows)
    print(f"fitted C = {C:.6f}", file=sys.stderr)
    return EXIT_OK, {"fitted_C": C}


def cmd_hinh(args, config, out):
    h = asy.h_inh_limit(args.m, tol=1e-12)
    print(f"h_inh(inf, m={args.m:g}) = {_fmt(h)}")
    out.write_json("h_inh.json", {"m": args.m, "value": h})
    return EXIT_OK, {"value": [h.real, h.imag]}


# ---------------------------------------------------------------------------
# coupled probabilities and Markov fit
# ---------------------------------------------------------------------------
def cmd_coupled_dist(args, config, out):
    if args.ell < 0:
        raise UsageError("--ell must be non-negative")
    dist = cp.coupled_from_length(args.ell, config.exact_cap)
    text = dist.to_csv()
    print(text, end="")
    out.write_text(f"coupled_{args.ell}.csv", text)
    return EXIT_OK, {"ell": args.ell}


def cmd_tail(args, config, out):
    if args.n_max < 1:
        raise UsageError("--n-max must be positive")
    res = cp.tail_ratio_sweep(args.n_max)
    text = _csv(["n", "max_ratio", "argmax"], [[r.n, repr(r.max_value), r.argmax] for r in res])
    out.write_text("tail_ratio.csv", text)
    bad = [r.n for r in res if r.max_value > 1]
    print(f"{len(res) - len(bad)}/{len(res)} lengths satisfy |rho| <= exp(-2m/n)")
    return (EXIT_FAIL if bad else EXIT_OK), {"violations": bad}


def cmd_markov_fit(args, config, out):
    if args.n < 1:
        raise UsageError("--n must be positive")
    fit = cp.markov_fit_for(args.n, config.exact_cap)
    payload = {"n": fit.n, "window": fit.window, "status": fit.status, "residual": fit.residual,
               "baseline_residual": fit.baseline_residual, "c5": fit.c5, "c6": fit.c6,
               "rows": fit.rows()}
    out.write_json(f"markov_{args.n}.json", payload)
    out.write_text(f"markov_{args.n}.csv",
                   _csv(["n", "j", "p_up", "p_down", "residual"],
                        [[r["n"], r["j"], repr(r["p_up"]), repr(r["p_down"]), repr(r["residual"])]
                         for r in fit.rows()]))
    print(json.dumps(payload, indent=1))
    return (EXIT_OK if fit.status == "ok" else EXIT_FAIL), {"status": fit.status}


def cmd_markov_odd(args, config, out):
    res = cp.odd_step_anomaly(args.n, args.model, exact_cap=config.exact_cap)
    print(f"P(S_(2n+1)=2 | S_2n=1) at n={args.n} ({args.model} laws): {res.value:.6f}")
    out.write_json(f"odd_step_{args.n}.json", {"n": res.n, "model": res.model, "value": res.value,
                                               "p_up": res.p_up, "p_down": res.p_down})
    return EXIT_OK, {"value": res.value}


# ---------------------------------------------------------------------------
# Brownian hierarchy
# ---------------------------------------------------------------------------
def cmd_brownian(args, config, out):
    if args.levels < 1 or args.horizon < 1 or args.replicas < 1:
        raise UsageError("--levels, --horizon and --replicas must be positive")
    seed = config.seed if args.build_seed is None else args.build_seed
    sampler = (br.fitted_sampler(n0=config.thresholds["n0"], exact_cap=config.exact_cap)
               if args.mode == br.COUPLED else None)
    seeds = br.replica_seeds(seed, args.replicas)

    def build(s):
        return br.build_hierarchy(args.levels, args.horizon, s, args.mode, sampler=sampler)

    hs = _map(config, build, seeds)
    diag = []
    for r, h in enumerate(hs):
        if r < args.write_lines:
            for lv in h.levels:
                K = int(round(args.horizon / lv.dt))
                t = np.arange(K + 1) * lv.dt
                text = _csv(["t", "value"], zip(map(repr, t.tolist()), map(repr, lv.values()[:K + 1].tolist())))
                out.write_text(f"replica{r}_level{lv.m}.csv", text)
        ref = h.refinement()
        diag.append({"replica": r, "refinement_checked": [x.checked for x in ref],
                     "refinement_violations": [x.violations for x in ref],
                     "sup_distances": h.sup_distances(), "lags": h.lags(),
                     "shortfall": h.shortfall, "overshoots": h.overshoots})
    payload = {"mode": args.mode, "levels": args.levels, "horizon": args.horizon, "seed": seed,
               "replicas": diag}
    top = args.levels
    partition = _partition(args.mode, top, args.horizon, config)
    if args.replicas >= 2 and partition is not None:
        rep = br.gaussianity_report([h.levels[top] for h in hs], partition, args.mode)
        payload["variance"] = [r.__dict__ for r in rep.increments]
        payload["correlation"] = {"r": rep.correlation, "z": rep.correlation_z}
    out.write_json("diagnostics.json", payload)
    violations = sum(sum(d["refinement_violations"]) for d in diag)
    print(f"{args.replicas} replica(s), levels 0..{top}: {violations} refinement violations")
    return (EXIT_FAIL if violations else EXIT_OK), {"refinement_violations": violations}


def _partition(mode, m, horizon, config):
    """Two cells on ``[t_min, T]`` with at least 100 steps each, else ``None``."""
    t_min = config.thresholds["k1"] * 4.0 ** (-m) if mode == br.COUPLED else 0.0
    mid = (t_min + horizon) / 2
    if min(mid - t_min, horizon - mid) * 4 ** m < 100:
        return None
    return [t_min, mid, float(horizon)]


# ---------------------------------------------------------------------------
# Schroedinger
# ---------------------------------------------------------------------------
def _read_lattice(path, m: int, flag: str) -> dict:
    """Two-column CSV ``x, value`` on the level-``m`` lattice as ``{site: value}``."""
    if not path:
        raise UsageError(f"{flag} is required")
    out = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if len(row) < 2 or row[0].strip().startswith("#"):
                continue
            try:
                x = float(row[0])
            except ValueError:
                continue  # header
            j = x * 2 ** m
            if abs(j - round(j)) > 1e-9:
                raise UsageError(f"{path}: x = {x} is not on the level-{m} lattice")
            out[int(round(j))] = complex(row[1].strip().replace(" ", "").replace("i", "j"))
    return out


def _build_potential(args) -> sch.PotentialSpec:
    m = args.m
    if "file" in (args.potential, args.g):
        if args.g != "file" or args.potential == "cosine":
            raise UsageError("file data: use --g file with --potential zero or file")
        gs = _read_lattice(args.g_file, m, "--g-file")
        Vs = _read_lattice(args.potential_file, m, "--potential-file") if args.potential == "file" else {}
        sites = sorted(set(Vs) | set(gs))
        return sch.from_samples(m, sites, [Vs.get(j, 0).real for j in sites], [gs.get(j, 0j) for j in sites])
    if args.g == "indicator":
        base = sch.indicator_data(0, m)
        if args.potential == "cosine":
            return sch.PotentialSpec("cosine-indicator", V=np.cos, g=base.g, support=base.support)
        return base
    if args.potential == "cosine":
        return sch.cosine_potential(args.sigma)
    return sch.gaussian_packet(args.sigma)


def cmd_evolve(args, config, out):
    if args.m < 0 or args.steps < 0:
        raise UsageError("--m and --steps must be non-negative")
    pot = _build_potential(args)
    if pot.support is not None:
        radius = int(math.ceil(pot.support * 2 ** args.m))
    else:
        radius = int(math.ceil(args.radius * 2 ** args.m))
    psi = sch.evolve(sch.initial_state(args.m, pot, radius), pot, args.steps)
    text = psi.to_csv()
    out.write_text("psi.csv", text)
    print(text, end="")
    growth = args.steps * math.log10(math.sqrt(5))
    if growth > 8:
        print(f"warning: high Fourier modes can grow by 10^{growth:.1f}; "
              "use `schrodinger converge` for long runs", file=sys.stderr)
    return EXIT_OK, {"sites": len(psi.values), "t": psi.t}


def cmd_converge(args, config, out):
    if args.m_min < 0 or args.m_max < args.m_min:
        raise UsageError("need 0 <= --m-min <= --m-max")
    pots = {"free": sch.gaussian_packet(args.sigma), "cosine": sch.cosine_potential(args.sigma),
            "constant": sch.constant_data(1.0)}
    tab = sch.continuum_comparison(pots[args.potential], args.t, range(args.m_min, args.m_max + 1),
                                   window=args.window, budget=args.budget)
    out.write_json("converge.json", tab.to_dict())
    for r in tab.rows:
        err = "skipped" if r.error is None else f"{r.error:.3e}"
        print(f"m={r.m}\tt_m={r.t_m:.6f}\terror={err}\t{r.method}")
    if tab.flags():
        print(f"non-monotone error ending at m = {tab.flags()}; consider refining the reference",
              file=sys.stderr)
    return EXIT_OK, {"monotone": tab.monotone}


def cmd_kernel(args, config, out):
    rep = sch.kernel_checks(args.t1, args.t2, args.x)
    payload = {"integral": rep.integral, "abs_integral": rep.abs_integral,
               "expected_abs_integral": sch.KERNEL_NORM, "ck_max_deviation": rep.ck_max_deviation}
    out.write_json("kernel.json", payload)
    print(json.dumps(payload, default=lambda z: [z.real, z.imag], indent=1))
    return EXIT_OK, {}


# ---------------------------------------------------------------------------
# acceptance suite
# ---------------------------------------------------------------------------
def cmd_all(args, config, out):
    only = set(args.only) if args.only else None
    results = acceptance.run_all(config, only, log=lambda line: print(line, flush=True))
    out.write_json("acceptance.json", [r.to_dict(timings=False) for r in results])
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    summary = {"passed": passed, "total": len(results),
               "seconds": {r.number: r.seconds for r in results}}
    return (EXIT_OK if passed == len(results) else EXIT_FAIL), summary


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="feynwalk", description="Complex-measure random walk toolkit.")
    p.add_argument("--config", help="JSON RunConfig file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--output-dir", help="override the config output directory")
    p.add_argument("--exact-cap", type=int, help="largest length handled by the exact backend")
    p.add_argument("--threads", type=int, help="worker threads for replica-parallel commands")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("amplitudes", help="amplitude table at one length")
    a.add_argument("--ell", type=int, required=True)
    a.add_argument("--j", type=int)
    a.add_argument("--backend", choices=amp.BACKENDS)
    a.add_argument("--verify", action="store_true", help="cross-check all routes for every l <= ell")
    a.set_defaults(func=cmd_amplitudes, subdir="amplitudes")

    def add_table1(parser):
        parser.add_argument("--n-max", type=int, default=5)
        parser.add_argument("--golden", help="alternative golden JSON")
        parser.set_defaults(func=cmd_table1, subdir="table1")

    add_table1(sub.add_parser("table1", help="coupled/binomial ratio grid"))

    c = sub.add_parser("c2", help="estimate of the constant c2")
    c.add_argument("--n", type=int, default=1000)
    c.add_argument("--extrapolate", action="store_true")
    c.set_defaults(func=cmd_c2, subdir="c2")

    asp = sub.add_parser("asympt", help="asymptotic expansion").add_subparsers(dest="action", required=True)
    x = asp.add_parser("c2")
    x.add_argument("--n", type=int, default=1000)
    x.add_argument("--extrapolate", action="store_true")
    x.set_defaults(func=cmd_c2, subdir="c2")
    x = asp.add_parser("residuals")
    x.add_argument("--ells", type=int, nargs="+", default=[64, 128, 256, 512])
    x.add_argument("--c2-n", type=int, default=1000)
    x.set_defaults(func=cmd_residuals, subdir="residuals")
    x = asp.add_parser("hinh")
    x.add_argument("--m", type=float, default=0.0)
    x.set_defaults(func=cmd_hinh, subdir="hinh")

    csp = sub.add_parser("coupled", help="coupled probabilities").add_subparsers(dest="action", required=True)
    add_table1(csp.add_parser("table1"))
    x = csp.add_parser("dist")
    x.add_argument("--ell", type=int, required=True)
    x.set_defaults(func=cmd_coupled_dist, subdir="coupled")
    x = csp.add_parser("tail")
    x.add_argument("--n-max", type=int, default=256)
    x.set_defaults(func=cmd_tail, subdir="tail")

    msp = sub.add_parser("markov", help="even-time transition fit").add_subparsers(dest="action", required=True)
    x = msp.add_parser("fit")
    x.add_argument("--n", type=int, required=True)
    x.set_defaults(func=cmd_markov_fit, subdir="markov")
    x = msp.add_parser("odd")
    x.add_argument("--n", type=int, default=256)
    x.add_argument("--model", choices=("binomial", "exact"), default="binomial")
    x.set_defaults(func=cmd_markov_odd, subdir="markov")

    bsp = sub.add_parser("brownian", help="twist-and-shrink hierarchy").add_subparsers(dest="action", required=True)
    x = bsp.add_parser("build")
    x.add_argument("--mode", choices=br.MODES, default=br.LAZY)
    x.add_argument("--levels", type=int, default=8)
    x.add_argument("--horizon", type=int, default=1)
    x.add_argument("--seed", type=int, dest="build_seed")
    x.add_argument("--replicas", type=int, default=1)
    x.add_argument("--write-lines", type=int, default=1, help="replicas whose broken lines are saved")
    x.set_defaults(func=cmd_brownian, subdir="brownian")

    ssp = sub.add_parser("schrodinger", help="lattice Schroedinger solver").add_subparsers(dest="action", required=True)
    x = ssp.add_parser("evolve")
    x.add_argument("--m", type=int, required=True)
    x.add_argument("--steps", type=int, required=True)
    x.add_argument("--potential", choices=("zero", "cosine", "file"), default="zero")
    x.add_argument("--g", choices=("gaussian", "indicator", "file"), default="gaussian")
    x.add_argument("--potential-file")
    x.add_argument("--g-file")
    x.add_argument("--sigma", type=float, default=1.0)
    x.add_argument("--radius", type=float, default=8.0, help="initial window half-width in x")
    x.set_defaults(func=cmd_evolve, subdir="schrodinger")
    x = ssp.add_parser("converge")
    x.add_argument("--potential", choices=("free", "cosine", "constant"), default="free")
    x.add_argument("--t", type=float, default=1.0)
    x.add_argument("--m-min", type=int, default=4)
    x.add_argument("--m-max", type=int, default=9)
    x.add_argument("--sigma", type=float, default=1.0)
    x.add_argument("--window", type=float, default=4.0)
    x.add_argument("--budget", type=float, default=2e10)
    x.set_defaults(func=cmd_converge, subdir="schrodinger")
    x = ssp.add_parser("kernel")
    x.add_argument("--t1", type=float, default=0.5)
    x.add_argument("--t2", type=float, default=0.5)
    x.add_argument("--x", type=float, default=0.0)
    x.set_defaults(func=cmd_kernel, subdir="kernel")

    x = sub.add_parser("all", help="run the acceptance suite")
    x.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    x.set_defaults(func=cmd_all, subdir="acceptance")
    return p


def _config_from(args) -> RunConfig:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    if args.seed is not None:
        config.seed = args.seed
    if args.output_dir:
        config.output_dir = args.output_dir
    if args.exact_cap is not None:
        config.exact_cap = args.exact_cap
    if args.threads is not None:
        config.threads = args.threads
    if config.threads < 1 or config.exact_cap < 0:
        raise UsageError("--threads must be >= 1 and --exact-cap >= 0")
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _config_from(args)
        out = ArtifactWriter(config, ["feynwalk"] + list(argv if argv is not None else sys.argv[1:]),
                             args.subdir)
        code, summary = args.func(args, config, out)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.finish(code, summary)
    return code


if __name__ == "__main__":
    sys.exit(main())
