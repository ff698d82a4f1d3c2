"""Command-line driver: single evaluations, figure sweeps and verification.

Settings are resolved as command defaults < ``--config`` file < flags.  The
config file is flat ``key = value`` text; ``#`` starts a comment and list
values are comma separated (``gamma_set = 0, 0.1, 1``).
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, acceptance, core, oracle, rows
from .entropy import (
    LatticeGeometry,
    contraction_consistency,
    kappa_fit_values,
    mps_purity_demo,
    renyi_finite,
    renyi_thermodynamic,
)
from .linalg import ConvergenceError

EXIT_OK, EXIT_COMPUTE, EXIT_VERIFY, EXIT_INPUT = 0, 1, 2, 3

PARAM_KEYS = ("alpha", "beta", "gamma", "delta")
INT_KEYS = {"n", "N1", "N2", "R1", "R2", "seed", "threads", "R2_min", "R2_max", "chi", "N", "start", "L", "draws"}
LIST_KEYS = {"gamma_set", "beta_set", "R1_set"}
STR_KEYS = {"method", "out"}

FIG_GEOM = dict(N1=4, N2=100, R1=2, R2=20)

DEFAULTS = {
    "spectrum": dict(alpha=1.0, beta=0.1, gamma=0.0, delta=0.95, n=2, N1=4),
    "fig5": dict(alpha=1.0, beta=0.1, gamma=0.0, delta=0.95, n=2, N1=4, N2=100, R1_set="1,2,3",
                 R2_min=5, R2_max=50),
    "fig6": dict(alpha=1.0, beta=0.1, gamma_set="0,0.1,1", delta_min=0.8, delta_max=1.2,
                 delta_step=0.005, n=2, **FIG_GEOM),
    "fig7": dict(alpha=1.0, beta_set="0.1,1", gamma_min=0.0, gamma_max=2.0, gamma_step=0.1,
                 delta_min=0.0, delta_max=2.0, delta_step=0.1, n=2, **FIG_GEOM),
    "entropy": dict(alpha=1.0, beta=0.1, gamma=0.0, delta=0.95, n=2, method="both", **FIG_GEOM),
    "oracle-verify": dict(alpha=1.0, beta=0.1, gamma=0.0, delta=0.95, n=2, N1=3, N2=3, R1=1, R2=1,
                          draws=0, seed=0),
    "mps-demo": dict(chi=2, N=8, start=0, L=3, seed=0),
    "consistency": dict(alpha=1.0, beta=0.1, gamma=0.0, delta=0.95, n=2, N1=3, N2=3, R1=1, R2=1),
    "verify": dict(),
}
for _d in DEFAULTS.values():
    _d.setdefault("seed", 0)
    _d.setdefault("threads", 1)
    _d.setdefault("out", "-")


class BadInput(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def read_config(path) -> dict:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    with open(path) as fh:
        cp.read_string("[config]\n" + fh.read())
    return dict(cp["config"])


def _convert(key, value):
    if key in STR_KEYS:
        return str(value)
    if key in LIST_KEYS:
        if isinstance(value, (list, tuple)):
            return [float(v) for v in value]
        return [float(v) for v in str(value).split(",") if v.strip()]
    if key in INT_KEYS:
        f = float(value)
        if f != int(f):
            raise BadInput(f"{key} must be an integer, got {value!r}")
        return int(f)
    return float(value)


def resolve(command: str, args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS[command])
    if args.config:
        cfg = read_config(args.config)
        unknown = set(cfg) - set(settings)
        if unknown:
            raise BadInput(f"unknown config keys for '{command}': {sorted(unknown)}")
        settings.update(cfg)
    for key in settings:
        v = getattr(args, key, None)
        if v is not None:
            settings[key] = v
    try:
        return {k: _convert(k, v) for k, v in settings.items()}
    except ValueError as exc:
        raise BadInput(str(exc)) from exc


def params_of(s: dict) -> core.PepsParams:
    return core.PepsParams(*(s[k] for k in PARAM_KEYS))


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return "%.17g" % float(x)


def write_csv(out, header: list[str], columns: list[str], rows_: list, summary: list[str] = ()):
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows_:
        w.writerow([fmt(v) for v in r])
    for line in summary:
        buf.write(f"# summary {line}\n")
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def meta_header(command: str, s: dict) -> list[str]:
    keys = ", ".join(f"{k}={s[k]}" for k in sorted(s) if k not in ("out", "threads"))
    return [f"z2renyi {__version__} {command}", keys]


def parallel_map(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


# ---- sweep workers (module level so they pickle) ------------------------------

def _finite_point(job):
    p, geom, n = job
    return renyi_finite(p, LatticeGeometry(*geom), n).value


def _fig5_point(job):
    p, N1, N2, R1, R2, n = job
    return (renyi_finite(p, LatticeGeometry(N1, N2, R1, R2), n).value,
            renyi_thermodynamic(p, R1, R2, N1, n).value)


# ---- commands -----------------------------------------------------------------

def cmd_spectrum(s):
    spec = core.spectral_decompose(core.tau0_explicit(params_of(s)))
    n, N1 = s["n"], s["N1"]
    s1 = rows.spectrum(rows.assemble_row(spec, 1, N1))
    sn = rows.spectrum(rows.assemble_row(spec, n, N1))
    out = []
    for R in range(1, N1):
        sp = rows.spectrum(rows.assemble_row(spec, n, N1, insertions=R))
        out.append([R, sn.rho1.real, sp.rho1.real, sn.degeneracy, sp.degeneracy, sn.gap_ratio])
    header = meta_header("spectrum", s) + [
        f"rho1_single={fmt(s1.rho1.real)} rho1_single^n={fmt(s1.rho1.real ** n)} K_single={s1.degeneracy}"]
    rp = np.array([r[2] for r in out])
    summary = [f"rho1_prime_rel_spread={fmt((rp.max() - rp.min()) / rp.max())}"] if len(rp) else []
    write_csv(s["out"], header, ["R", "rho1", "rho1_prime", "K", "Kprime", "gap"], out, summary)
    return EXIT_OK


def cmd_fig5(s):
    p = params_of(s).as_tuple()
    R2s = list(range(s["R2_min"], s["R2_max"] + 1))
    jobs = [(p, s["N1"], s["N2"], int(R1), R2, s["n"]) for R1 in s["R1_set"] for R2 in R2s]
    vals = parallel_map(_fig5_point, jobs, s["threads"])
    out = [[j[3], j[4], f, t, abs(f - t)] for j, (f, t) in zip(jobs, vals)]
    summary = [f"max_abs_diff={fmt(max(r[4] for r in out))}"]
    for R1 in s["R1_set"]:
        sel = [r for r in out if r[0] == int(R1)]
        x = np.array([r[1] for r in sel], float)
        y = np.array([r[2] for r in sel])
        if len(x) >= 2:
            coef = np.polyfit(x, y, 1)
            summary.append(f"R1={int(R1)} slope={fmt(coef[0])} max_affine_dev={fmt(np.abs(y - np.polyval(coef, x)).max())}")
    write_csv(s["out"], meta_header("fig5", s), ["R1", "R2", "S2_finite", "S2_thermo", "abs_diff"], out, summary)
    return EXIT_OK


def cmd_fig6(s):
    deltas = acceptance.grid(s["delta_min"], s["delta_max"], s["delta_step"])
    geom = (s["N1"], s["N2"], s["R1"], s["R2"])
    LatticeGeometry(*geom)
    jobs = [((s["alpha"], s["beta"], g, float(d)), geom, s["n"]) for g in s["gamma_set"] for d in deltas]
    vals = parallel_map(_finite_point, jobs, s["threads"])
    out, summary = [], []
    m = len(deltas)
    for k, g in enumerate(s["gamma_set"]):
        S = np.array(vals[k * m:(k + 1) * m])
        d2 = [None] + list(acceptance.second_difference(S)) + [None] if m >= 3 else [None] * m
        for d, v, dd in zip(deltas, S, d2):
            out.append([d, g, v, "" if dd is None else dd])
        if m >= 4 and deltas[0] < 1.0 < deltas[-1]:
            r_kink, r_max = acceptance.kink_ratios(deltas, S)
            summary.append(f"gamma={fmt(g)} kink_ratio={fmt(r_kink)} max_over_median={fmt(r_max)}")
    write_csv(s["out"], meta_header("fig6", s), ["delta", "gamma", "S2", "d2"], out, summary)
    return EXIT_OK


def cmd_fig7(s):
    gammas = acceptance.grid(s["gamma_min"], s["gamma_max"], s["gamma_step"])
    deltas = acceptance.grid(s["delta_min"], s["delta_max"], s["delta_step"])
    geom = (s["N1"], s["N2"], s["R1"], s["R2"])
    LatticeGeometry(*geom)
    jobs = [((s["alpha"], b, float(g), float(d)), geom, s["n"]) for b in s["beta_set"] for d in deltas for g in gammas]
    vals = parallel_map(_finite_point, jobs, s["threads"])
    out, summary = [], []
    for (p, _, _), v in zip(jobs, vals):
        out.append([p[2], p[3], p[1], v])
    per = len(gammas) * len(deltas)
    for k, b in enumerate(s["beta_set"]):
        S = np.array(vals[k * per:(k + 1) * per]).reshape(len(deltas), len(gammas))
        if len(gammas) >= 2:
            summary.append(f"beta={fmt(b)} max_rise_in_gamma={fmt(np.diff(S, axis=1).max())}")
    write_csv(s["out"], meta_header("fig7", s), ["gamma", "delta", "beta", "S2"], out, summary)
    return EXIT_OK


def cmd_entropy(s):
    method = s["method"]
    if method not in ("finite", "thermodynamic", "both"):
        raise BadInput(f"method must be finite, thermodynamic or both, got {method!r}")
    p = params_of(s)
    geom = LatticeGeometry(s["N1"], s["N2"], s["R1"], s["R2"])
    out = []
    if method in ("finite", "both"):
        r = renyi_finite(p, geom, s["n"])
        out.append(["finite", r.value, r.components["purity"]])
    if method in ("thermodynamic", "both"):
        r = renyi_thermodynamic(p, geom.R1, geom.R2, geom.N1, s["n"])
        out.append(["thermodynamic", r.value, math.exp((1 - s["n"]) * r.value)])
    write_csv(s["out"], meta_header("entropy", s), ["method", "S", "purity"], out)
    return EXIT_OK


def cmd_oracle_verify(s):
    geom = LatticeGeometry(s["N1"], s["N2"], s["R1"], s["R2"])
    draws = [params_of(s).as_tuple()] + acceptance.random_params(s["seed"], s["draws"])
    links = oracle.link_partition(geom)
    out, worst = [], 0.0
    for k, p in enumerate(draws):
        psi = oracle.enumerate_state(p, geom.N1, geom.N2)
        rho = oracle.reduced_density(psi, links)
        ent = oracle.exact_entropies(rho, [s["n"]])
        exact = oracle.purity_exact(rho, s["n"])
        transfer = math.exp((1 - s["n"]) * renyi_finite(p, geom, s["n"]).value)
        rel = abs(transfer - exact) / exact
        worst = max(worst, rel)
        gauss = max(oracle.gauss_check_full(psi), oracle.gauss_check_reduced(rho, geom))
        out.append([k, *p, transfer, exact, rel, ent[1], gauss])
    cols = ["draw", "alpha", "beta", "gamma", "delta", "p_transfer", "p_oracle", "rel_diff", "S1_oracle", "gauss"]
    ok = worst <= 1e-10 and all(r[-1] <= 1e-12 for r in out)
    write_csv(s["out"], meta_header("oracle-verify", s), cols, out, [f"max_rel_diff={fmt(worst)} pass={ok}"])
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_mps_demo(s):
    a, b = mps_purity_demo(s["chi"], s["N"], (s["start"], s["L"]), seed=s["seed"])
    write_csv(s["out"], meta_header("mps-demo", s), ["p2_transfer", "p2_direct", "abs_diff"], [[a, b, abs(a - b)]])
    return EXIT_OK


def cmd_consistency(s):
    geom = LatticeGeometry(s["N1"], s["N2"], s["R1"], s["R2"])
    res, pr, pc = contraction_consistency(params_of(s), geom, s["n"])
    write_csv(s["out"], meta_header("consistency", s), ["p_rowwise", "p_columnwise", "rel_diff"], [[pr, pc, res]])
    return EXIT_OK


def permutation_boundary(n):
    """Flag permutation swapping (-,+) and (+,-)-type states; a wrong boundary for negative controls."""
    if n != 2:
        return rows.boundary_site_operator(n).matrix
    return np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], float)


def cmd_verify(s, args):
    checks = list(acceptance.ALL_CHECKS)
    if args.only:
        wanted = {int(x) for x in args.only.split(",")}
        checks = [c for i, c in enumerate(checks, 1) if i in wanted]
    results = []
    for c in checks:
        if args.inject_x and c is acceptance.check_oracle_equivalence:
            results.append(c(boundary=permutation_boundary, corner=False))
        elif args.inject_kappa is not None and c is acceptance.check_r_independence:
            Rs = np.array([1, 2, 3], float)
            results.append(c(rho_prime=2.0 * np.exp(-args.inject_kappa * Rs)))
        else:
            results.append(c())
    out = [[r.name, "pass" if r.passed else "fail", r.value, r.tolerance, r.seconds] for r in results]
    if args.inject_kappa is not None:
        _, kappa, _ = kappa_fit_values([1, 2, 3], 2.0 * np.exp(-args.inject_kappa * np.array([1.0, 2.0, 3.0])))
        out.append(["injected kappa fit", "info", kappa, args.inject_kappa, 0.0])
    write_csv(s["out"], meta_header("verify", s), ["check", "status", "value", "tolerance", "seconds"], out,
              [f"passed={sum(r.passed for r in results)}/{len(results)}"])
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "spectrum": cmd_spectrum,
    "fig5": cmd_fig5,
    "fig6": cmd_fig6,
    "fig7": cmd_fig7,
    "entropy": cmd_entropy,
    "oracle-verify": cmd_oracle_verify,
    "mps-demo": cmd_mps_demo,
    "consistency": cmd_consistency,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for k in PARAM_KEYS:
        common.add_argument(f"--{k}", type=float)
    for k in ("n", "N1", "N2", "R1", "R2", "seed", "threads"):
        common.add_argument(f"--{k}", type=int)
    common.add_argument("--method", choices=["finite", "thermodynamic", "both"])
    common.add_argument("--out", help="output CSV path ('-' for stdout)")
    common.add_argument("--config", help="flat key = value settings file")

    p = _Parser(prog="z2renyi", description="Renyi entropies of the Z2 gauge PEPS by transfer operators.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "fig5":
            sp.add_argument("--R1-set", dest="R1_set")
            sp.add_argument("--R2-min", dest="R2_min", type=int)
            sp.add_argument("--R2-max", dest="R2_max", type=int)
        if name in ("fig6", "fig7"):
            for k in ("delta_min", "delta_max", "delta_step"):
                sp.add_argument("--" + k.replace("_", "-"), dest=k, type=float)
        if name == "fig6":
            sp.add_argument("--gamma-set", dest="gamma_set")
        if name == "fig7":
            sp.add_argument("--beta-set", dest="beta_set")
            for k in ("gamma_min", "gamma_max", "gamma_step"):
                sp.add_argument("--" + k.replace("_", "-"), dest=k, type=float)
        if name == "oracle-verify":
            sp.add_argument("--draws", type=int)
        if name == "mps-demo":
            for k in ("chi", "N", "start", "L"):
                sp.add_argument(f"--{k}", type=int)
        if name == "verify":
            sp.add_argument("--only", help="comma-separated criterion numbers")
            sp.add_argument("--inject-x", action="store_true",
                            help="negative control: use a permutation boundary matrix without the corner row")
            sp.add_argument("--inject-kappa", type=float,
                            help="negative control: feed rho'(R) = 2 exp(-kappa R) to the R-independence check")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        s = resolve(args.command, args)
        if args.command == "verify":
            return cmd_verify(s, args)
        return COMMANDS[args.command](s)
    except (ArithmeticError, ConvergenceError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (ValueError, OSError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
