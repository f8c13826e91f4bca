"""Command-line interface: ``hypwalk <subcommand> [flags]``.

Results go to stdout, or to ``PREFIX.csv`` / ``PREFIX.json`` plus a run
manifest ``PREFIX.manifest.json`` when ``--out PREFIX`` is given.  Any flag
can also come from a TOML file passed with ``--config``; a manifest written by
an earlier run is accepted there too, which reproduces that run exactly.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from importlib.metadata import PackageNotFoundError, version

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import acceptance, braids, hyperbolic as hyp, spectral as sp
from .groups import MalformedWord, ResourceLimit, UnsupportedMode, Word, b3_sigma, cayley_ball, get_framing
from .walks import (
    ConfigError,
    InsufficientSamples,
    WalkConfig,
    drift_profile,
    estimate_return_probability,
    exact_return_probabilities,
    flux_framing,
    simulate_flux,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_RESOURCE = 4
EXIT_SAMPLES = 5
EXIT_NUMERICAL = 6

CSV_HEADER = "n,estimate,stderr,samples,seed"


def fmt(x) -> str:
    """Numbers in CSV output carry 12 significant digits."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def csv_rows(header: str, rows) -> str:
    lines = [header]
    for r in rows:
        lines.append(",".join(fmt(v) for v in r))
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    def default(o):
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        if isinstance(o, complex):
            return [o.real, o.imag]
        if isinstance(o, np.ndarray):
            return o.tolist()
        return str(o)

    return json.dumps(obj, indent=2, sort_keys=True, default=default) + "\n"


def package_version() -> str:
    try:
        return version("hypwalk")
    except PackageNotFoundError:
        return "unknown"


def max_mem_bytes() -> int | None:
    raw = os.environ.get("HYPWALK_MAX_MEM")
    if not raw:
        return None
    units = {"K": 2**10, "M": 2**20, "G": 2**30}
    raw = raw.strip().upper().rstrip("B")
    mult = units.get(raw[-1:], 1)
    if raw[-1:] in units:
        raw = raw[:-1]
    try:
        return int(float(raw) * mult)
    except ValueError:
        raise ConfigError(f"cannot parse HYPWALK_MAX_MEM={os.environ['HYPWALK_MAX_MEM']!r}")


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: int | None
    library_version: str
    wall_time: float
    output_checksum: str


# ---------------------------------------------------------------------------
# subcommands; each returns a dict {extension: text}


def cmd_drift(a) -> dict:
    fr = get_framing(a.group)
    functional = a.functional or ("b3-lower" if fr.is_braid else "graph-L")
    cps = sorted(set(a.checkpoints or []) | {a.n})
    cfg = WalkConfig(fr, a.n, a.samples, a.seed, a.walk, workers=a.workers)
    prof = drift_profile(cfg, functional, cps)
    rows = [(n, e.mean, e.standard_error, e.count, a.seed) for n, e in prof.items()]
    return {"csv": csv_rows(CSV_HEADER, rows)}


def cmd_flux(a) -> dict:
    cfg = WalkConfig(flux_framing(a.basis), a.n, a.samples, a.seed, workers=a.workers,
                     closure_filter="projection-closed" if a.closed else "none")
    r = simulate_flux(cfg, a.basis)
    row = [(a.n, r.variance_per_step, r.variance_standard_error(), r.accepted, a.seed)]
    info = {"basis": a.basis, "n": a.n, "variance_per_step": r.variance_per_step,
            "variance_per_step_se": r.variance_standard_error(), "mean": r.estimate.mean,
            "accepted": r.accepted, "proposals": r.proposals, "acceptance_rate": r.acceptance_rate,
            "histogram_sixths": {str(k): v for k, v in sorted(r.histogram.items())}, "seed": a.seed}
    return {"csv": csv_rows(CSV_HEADER, row), "json": _json(info)}


def cmd_return_prob(a) -> dict:
    if a.chain:
        mem = max_mem_bytes()
        if mem is not None and 24 * (a.n_max + 2) > mem:
            raise ResourceLimit(f"chain lattice for n_max={a.n_max} exceeds HYPWALK_MAX_MEM")
        prof = sp.honeycomb_return_profile(a.n_max, exact=a.exact)
        out = {"csv": csv_rows("n,P_n(0)", [(n, float(p)) for n, p in enumerate(prof)])}
        if a.n_max >= a.fit_hi:
            fit = sp.fit_return_profile(prof, a.fit_lo, a.fit_hi)
            out["json"] = _json(fit.to_dict() | {"lambda_target": sp.LAMBDA_PSL, "C_target": sp.C_PSL})
        return out
    fr = get_framing(a.group)
    if a.exact:
        ps = exact_return_probabilities(fr, a.n_max)
        rows = [(n, ps[n], 0.0, 0, a.seed) for n in range(1, a.n_max + 1)]
        return {"csv": csv_rows(CSV_HEADER, rows)}
    res = estimate_return_probability(fr, list(range(1, a.n_max + 1)), a.samples, a.seed, a.workers)
    rows = []
    for r in res:
        se = (r.p_hat * (1 - r.p_hat) / r.samples) ** 0.5
        rows.append((r.n, r.p_hat, se, r.samples, a.seed))
    return {"csv": csv_rows(CSV_HEADER, rows)}


def cmd_spectral(a) -> dict:
    if a.rho:
        rho = tuple(a.rho)
        lb, diag = sp.backbone_drift_details(a.q, rho)
        factor = 1 + sum((i - 1) * rho[i - 1] for i in range(2, len(rho) + 1)) / (1 - rho[0])
        rec = sp.DriftResult(a.q, lb, lb * factor, rho, {"residual": None, "iterations": 0})
    else:
        rec = sp.graph_drift(a.q, a.omega)
    return {"json": _json(rec.to_dict())}


def cmd_measure(a) -> dict:
    fr = get_framing(a.group)
    gens = hyp.generator_set(fr)
    mu = hyp.iterate_invariant_measure(gens, a.grid, a.tol, a.max_sweeps)
    ly = hyp.lyapunov_from_measure(gens, mu)
    info = {"group": a.group, "grid": a.grid, "converged": mu.converged, "sweeps": mu.sweeps,
            "last_change": mu.trajectory[-1] if mu.trajectory else None} | ly.to_dict()
    if not mu.converged:
        info["l1_trajectory_tail"] = mu.trajectory[-20:]
    return {"csv": mu.to_csv(), "json": _json(info)}


def cmd_lyapunov(a) -> dict:
    fr = get_framing(a.group)
    if a.u is not None:
        if fr.group_id not in ("PSL2Z_sigma", "B3"):
            raise ConfigError("--u applies to the projected-braid framing only")
        from .groups import psl2z_sigma

        fr = psl2z_sigma(a.u)
    r = hyp.lyapunov_mc(fr, a.walk, a.n, a.samples, a.seed, a.workers)
    return {"json": _json(r.to_dict() | {"group": a.group, "u": a.u})}


def cmd_table1(a) -> dict:
    rows = hyp.table1(a.n, a.samples, a.seed, a.workers)
    header = "group,s_f,gamma_simple,gamma_simple_se,gamma_directed,gamma_directed_se,ratio,ratio_se,graph_drift"
    data = [(r.name, r.scale_factor, r.gamma_simple.gamma1, r.gamma_simple.standard_error,
             r.gamma_directed.gamma1, r.gamma_directed.standard_error, r.ratio, r.ratio_error,
             r.graph_drift) for r in rows]
    lines = [header] + [",".join([d[0]] + [fmt(v) for v in d[1:]]) for d in data]
    return {"csv": "\n".join(lines) + "\n", "txt": hyp.format_table1(rows) + "\n"}


def cmd_relation(a) -> dict:
    r = hyp.check_length_trace_relation(a.group, a.n, a.samples, a.seed, a.workers)
    return {"json": _json(r.to_dict())}


def cmd_alexander(a) -> dict:
    if a.word is not None:
        w = Word(tuple(a.word), b3_sigma())
        rec = braids.alexander_record(w, a.u)
        return {"json": _json(rec.to_json())}
    if a.stats:
        st = braids.alexander_statistics(a.checkpoints or [100, 200, 300, 400], a.samples, a.u, a.seed, a.workers)
        means = st.mean_log_nabla()
        info = {"u": a.u, "slope": st.slope, "slope_se": st.slope_error,
                "checkpoints": st.checkpoints,
                "mean_log_nabla": [e.mean for e in means], "mean_log_nabla_se": [e.standard_error for e in means],
                "p_variance_per_step": [st.p_variance(n).variance / n for n in st.checkpoints]}
        if a.asymptotic:
            asy = braids.asymptotic_alexander(st.checkpoints[-1], a.u, seed=a.seed)
            info["asymptotic"] = asy.to_dict()
        return {"json": _json(info)}
    from .stats import block_rng

    rng = block_rng(a.seed, 0)
    lines = []
    for _ in range(a.samples):
        rec = braids.alexander_record(braids.random_braid(rng, a.length), a.u)
        lines.append(json.dumps(rec.to_json(), sort_keys=True))
    return {"jsonl": "\n".join(lines) + "\n"}


def cmd_ball(a) -> dict:
    fr = get_framing(a.group)
    mem = max_mem_bytes()
    cap = None if mem is None else max(1, mem // 512)
    ball = cayley_ball(fr, a.radius, max_radius=a.max_radius, max_vertices=cap)
    info = {"group": a.group, "radius": a.radius, "vertices": len(ball), "sphere_sizes": ball.sphere_sizes()}
    return {"csv": ball.to_csv(), "json": _json(info)}


# ---------------------------------------------------------------------------
# parsing


def positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def int_list(s: str) -> list[int]:
    return [int(x) for x in s.replace(",", " ").split()]


def float_list(s: str) -> list[float]:
    return [float(x) for x in s.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypwalk", description=__doc__.splitlines()[0])
    subs = p.add_subparsers(dest="subcommand", required=True)
    p.commands = {}

    def add(name, help, seed=0):
        # common flags are added per subcommand so their defaults stay independent
        s = p.commands[name] = subs.add_parser(name, help=help)
        s.add_argument("--seed", type=int, default=seed)
        s.add_argument("--workers", type=positive_int, default=1,
                       help="worker processes for sample-parallel runs (results do not depend on it)")
        s.add_argument("--config", help="TOML file of flag values, or a manifest of an earlier run")
        s.add_argument("--out", help="output prefix; writes PREFIX.<ext> and PREFIX.manifest.json")
        return s

    s = add("drift", "drift <L>/n by Monte Carlo")
    s.add_argument("--group", default="H3")
    s.add_argument("--n", type=positive_int, default=10_000)
    s.add_argument("--samples", type=positive_int, default=10_000)
    s.add_argument("--walk", choices=("simple", "directed"), default="simple")
    s.add_argument("--functional", choices=("graph-L", "backbone-k", "b3-lower", "b3-upper"))
    s.add_argument("--checkpoints", type=int_list)
    s.set_defaults(func=cmd_drift)

    s = add("flux", "flux variance of PSL(2,Z) walks")
    s.add_argument("--basis", choices=("ab", "sigma"), default="ab")
    s.add_argument("--n", type=positive_int, default=100_000)
    s.add_argument("--samples", type=positive_int, default=100_000)
    s.add_argument("--closed", action="store_true", help="keep only walks closed in PSL(2,Z)")
    s.set_defaults(func=cmd_flux)

    s = add("return-prob", "return probabilities")
    s.add_argument("--group", default="PSL2Z_sigma", choices=("PSL2Z_sigma", "B3"))
    s.add_argument("--n-max", type=positive_int, default=16)
    s.add_argument("--samples", type=positive_int, default=1_000_000)
    s.add_argument("--exact", action="store_true", help="exact enumeration (or exact rationals with --chain)")
    s.add_argument("--chain", action="store_true", help="iterate the generation chain instead")
    s.add_argument("--fit-lo", type=positive_int, default=500)
    s.add_argument("--fit-hi", type=positive_int, default=2000)
    s.set_defaults(func=cmd_return_prob)

    s = add("spectral", "transfer-matrix drift on H_q")
    s.add_argument("--q", type=int, default=3)
    s.add_argument("--rho", type=float_list, help="fixed vertex weights instead of the self-consistent ones")
    s.add_argument("--omega", type=float, default=0.5)
    s.set_defaults(func=cmd_spectral)

    s = add("measure", "invariant measure of the direction process")
    s.add_argument("--group", default="F2")
    s.add_argument("--grid", type=positive_int, default=4096)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--max-sweeps", type=positive_int, default=20_000)
    s.set_defaults(func=cmd_measure)

    s = add("lyapunov", "Lyapunov exponent by Monte Carlo")
    s.add_argument("--group", default="PSL2Z_sigma")
    s.add_argument("--walk", choices=("simple", "directed"), default="simple")
    s.add_argument("--n", type=positive_int, default=10_000)
    s.add_argument("--samples", type=positive_int, default=1000)
    s.add_argument("--u", type=float)
    s.set_defaults(func=cmd_lyapunov)

    s = add("table1", "simple/directed Lyapunov ratios")
    s.add_argument("--n", type=positive_int, default=10_000)
    s.add_argument("--samples", type=positive_int, default=1000)
    s.set_defaults(func=cmd_table1)

    s = add("relation", "<L> against (s_f/gamma_d) <ln Tr>")
    s.add_argument("--group", choices=("F3", "F4", "H3", "PSL2Z"), default="H3")
    s.add_argument("--n", type=positive_int, default=10_000)
    s.add_argument("--samples", type=positive_int, default=1000)
    s.set_defaults(func=cmd_relation)

    s = add("alexander", "Alexander polynomials of closed 3-braids")
    s.add_argument("--word", type=int_list, help="braid word as signed generator indices, e.g. '1 2 -1'")
    s.add_argument("--stats", action="store_true", help="growth statistics of ln|nabla(u)|")
    s.add_argument("--asymptotic", action="store_true", help="with --stats, add the typical value")
    s.add_argument("--u", type=float, default=1.2)
    s.add_argument("--samples", type=positive_int, default=100)
    s.add_argument("--length", type=int, default=20)
    s.add_argument("--checkpoints", type=int_list)
    s.set_defaults(func=cmd_alexander)

    s = add("ball", "Cayley-graph ball by breadth-first search")
    s.add_argument("--group", default="PSL2Z_sigma")
    s.add_argument("--radius", type=int, default=6)
    s.add_argument("--max-radius", type=int, default=12)
    s.set_defaults(func=cmd_ball)

    s = add("verify", "run the acceptance suite", seed=2024)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--quick", dest="scale", action="store_const", const="quick")
    g.add_argument("--full", dest="scale", action="store_const", const="full")
    s.add_argument("--only", type=int_list, help="criterion numbers to run")
    s.set_defaults(func=None, scale="quick")
    return p


CONFIG_EXCLUDE = {"func", "config", "out"}


def load_config(path: str) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read()
    if path.endswith(".json"):
        data = json.loads(raw)
        return data.get("config", data)
    data = tomllib.loads(raw.decode())
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = load_config(args.config)
        except (OSError, ValueError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        cfg.pop("subcommand", None)
        sub = parser.commands[args.subcommand]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)  # explicit flags override the file
    return args


def snapshot(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in CONFIG_EXCLUDE}


def run_verify(args) -> int:
    results = acceptance.run_all(args.scale, args.seed,
                                 only=set(args.only) if args.only else None, echo=print)
    print()
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_VERIFY_FAILED


def main(argv=None) -> int:
    try:
        args = parse(argv)
    except ConfigError as exc:
        print(f"hypwalk: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    if args.subcommand == "verify":
        return run_verify(args)
    t0 = time.perf_counter()
    try:
        outputs = args.func(args)
    except (sp.SpectralError, hyp.GeometryError, hyp.MeasureNotConverged, FloatingPointError) as exc:
        print(f"hypwalk: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, MalformedWord, UnsupportedMode, KeyError, ValueError) as exc:
        print(f"hypwalk: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimit as exc:
        print(f"hypwalk: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InsufficientSamples as exc:
        print(f"hypwalk: insufficient samples: {exc}", file=sys.stderr)
        return EXIT_SAMPLES
    wall = time.perf_counter() - t0
    digest = hashlib.sha256()
    for ext in sorted(outputs):
        digest.update(outputs[ext].encode())
    if args.out:
        for ext, text in outputs.items():
            with open(f"{args.out}.{ext}", "w") as fh:
                fh.write(text)
        man = RunManifest(args.subcommand, snapshot(args) | {"subcommand": args.subcommand},
                          getattr(args, "seed", None), package_version(), wall, digest.hexdigest())
        with open(f"{args.out}.manifest.json", "w") as fh:
            fh.write(_json(asdict(man)))
    else:
        for ext in ("txt", "csv", "json", "jsonl"):
            if ext in outputs:
                sys.stdout.write(outputs[ext])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
