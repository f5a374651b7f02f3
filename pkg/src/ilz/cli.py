"""Command-line front end: tables, CSV or JSON on stdout or --out."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .errors import IlzError

SCHEMA = 1
SIG_DIGITS = 12


# --------------------------------------------------------------------------
# Formatting


def _clean(v):
    """Round floats to 12 significant digits; map numpy scalars and complex values."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.{SIG_DIGITS}g}")
    if isinstance(v, complex):
        return {"re": _clean(v.real), "im": _clean(v.imag)}
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    if isinstance(v, dict):
        return f"{v['re']:.{SIG_DIGITS}g}{v['im']:+.{SIG_DIGITS}g}j"
    return str(v)


def render(command: str, rows: list[dict], meta: dict, fmt: str) -> str:
    rows = [_clean(r) for r in rows]
    meta = _clean(meta)
    if fmt == "json":
        return json.dumps({"schema": SCHEMA, "command": command, "meta": meta, "rows": rows}, indent=2) + "\n"
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in cols])
        return buf.getvalue()
    lines = []
    for k, v in meta.items():
        lines.append(f"# {k}: {json.dumps(v) if isinstance(v, list) else _cell(v)}")
    table = [cols] + [[_cell(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    for j, row in enumerate(table):
        lines.append("  ".join(x.rjust(w) for x, w in zip(row, widths)))
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) > 2:
        raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE or RE,IM, got {text!r}") from None
    return complex(vals[0], vals[1] if len(vals) == 2 else 0.0)


def read_gram_file(path: str) -> np.ndarray:
    """First line d, then d lines of d floats."""
    with open(path) as fh:
        tokens = [line.split() for line in fh if line.strip()]
    d = int(tokens[0][0])
    rows = tokens[1 : 1 + d]
    if len(rows) != d or any(len(r) != d for r in rows):
        from .errors import DimensionMismatch

        raise DimensionMismatch(f"gram file must hold {d} rows of {d} numbers")
    return np.array([[float(x) for x in r] for r in rows])


# --------------------------------------------------------------------------
# Commands


def cmd_field_info(a):
    from .characters import conductor_product, enumerate_characters
    from .cyclo_field import create_field

    K = create_field(a.n)
    row = {
        "n": K.n,
        "d": K.degree,
        "r2": K.r2,
        "abs_disc": K.abs_disc,
        "torsion_order": K.torsion_order,
        "n_characters": len(enumerate_characters(K.n)),
        "conductor_product": conductor_product(K.n),
    }
    return [row], {}


def cmd_zeta(a):
    from .characters import dedekind_zeta

    v = complex(dedekind_zeta(a.K, a.s))
    return [{"n": a.K, "s": a.s, "zeta_K": v, "abs": abs(v)}], {}


def cmd_epstein(a):
    from .epstein import LatticeGram, completed_epstein, epstein_continued, epstein_direct

    L = LatticeGram(read_gram_file(a.gram))
    row = {"d": L.dim, "covolume": L.covolume, "s": a.s, "continued": epstein_continued(L, a.s)}
    if a.s.real > L.dim:
        r = epstein_direct(L, a.s, a.cutoff)
        row.update(direct=r.value, direct_tail_estimate=r.tail_estimate, direct_tail_error_bound=r.tail_error_bound)
    if abs(L.covolume - 1) <= 1e-9 and a.s not in (0, L.dim):
        row["completed"] = completed_epstein(L, a.s)
    return [row], {}


def cmd_hecke_check(a):
    from .hecke import hecke_lhs_mc, hecke_rhs

    mc = hecke_lhs_mc(a.n, a.s, a.samples, a.seed)
    rhs = hecke_rhs(a.n, a.s)
    z = (mc.mean - rhs) / mc.stderr if mc.stderr > 0 else (0.0 if mc.mean == rhs else math.copysign(math.inf, mc.mean - rhs))
    return [{"n": a.n, "s": a.s, "samples": a.samples, "seed": a.seed, "lhs_mean": mc.mean, "lhs_stderr": mc.stderr, "rhs": rhs, "z_score": z}], {}


def cmd_mean_count(a):
    from .arakelov import mean_count_mc
    from .cyclo_field import create_field
    from .hecke import error_term

    K = create_field(a.n)
    mc = mean_count_mc(K, a.volume, a.samples, a.seed, threads=a.threads)
    row = {"n": a.n, "volume": a.volume, "samples": a.samples, "seed": a.seed, "mc_mean": mc.mean, "mc_stderr": mc.stderr}
    row["counts_1_mod_n"] = bool(np.all((mc.counts - 1) % K.n == 0))
    if K.r2 >= 4:
        r = error_term(K, a.volume)
        row.update(
            prediction=1 + a.volume + r.epsilon,
            epsilon=r.epsilon,
            quad_error_est=r.quad_error_est,
            tail_bound=r.tail_bound,
            within=abs(mc.mean - (1 + a.volume + r.epsilon)) < 3 * mc.stderr + r.quad_error_est + r.tail_bound,
        )
    return [row], {}


def cmd_error_term(a):
    from .hecke import error_term

    r = error_term(a.n, a.volume, a.sigma, a.tmax)
    return [
        {
            "n": a.n,
            "volume": a.volume,
            "R": r.R,
            "sigma": r.sigma,
            "T": r.T,
            "epsilon": r.epsilon,
            "quad_error_est": r.quad_error_est,
            "tail_bound": r.tail_bound,
            "tail_bound_heuristic": r.tail_bound_heuristic,
            "imag_part": r.imag_part,
            "n_nodes": r.n_nodes,
        }
    ], {}


def cmd_packing_certify(a):
    from .hecke import radius_diagnostic
    from .packing import certified_volume_bound, mc_soundness_check

    c = certified_volume_bound(a.n, a.margin, T=a.tmax)
    row = c.as_dict()
    row["check"] = c.check()
    if a.check_samples:
        sc = mc_soundness_check(c, a.check_samples, a.seed, threads=a.threads)
        row.update(mc_mean=sc.mc_mean, mc_stderr=sc.mc_stderr, mc_sound=sc.passed)
    meta = {f"radius_{k}": v for k, v in radius_diagnostic(a.n, c.V_star).items()}
    meta["radius_note"] = "descriptive only, asymptotic constants have no finite-n value"
    return [row], meta


def cmd_primorial_table(a):
    from .packing import primorial_table

    return [vars(r) for r in primorial_table(a.kmax)], {}


def cmd_gamma_bound(a):
    from .gamma_mellin import _bound_excess, fit_gamma_constant, gamma_ratio_bound_grid_ok, log_gamma_ratio_abs, log_gamma_ratio_direct

    cfg = fit_gamma_constant(a.rmax, a.tmax, a.tstep)
    t = np.linspace(0.0, a.tmax, int(round(a.tmax / a.tstep)) + 1)
    rs = range(1, a.rmax + 1)
    ok = gamma_ratio_bound_grid_ok(cfg, rs, t)
    exc = _bound_excess(rs, t)
    rows = []
    for i, r in enumerate(rs):
        dev = float(np.max(np.abs(log_gamma_ratio_abs(r, t) - log_gamma_ratio_direct(r, t))))
        rows.append({"r": r, "max_excess": float(np.max(exc[i])), "bound_holds": bool(np.all(ok[i])), "closed_vs_loggamma": dev})
    return rows, {"C": cfg.C, "fitted_over": cfg.fitted_over}


def cmd_subconvexity_profile(a):
    from .characters import subconvexity_profile

    t = np.arange(0.0, a.tmax + 0.5 * a.step, a.step)
    return subconvexity_profile(a.n, t), {"note": "descriptive curves, implicit constants unknown"}


def cmd_stark(a):
    from .arakelov import ALLOWLIST
    from .characters import residue_at_one
    from .cyclo_field import create_field
    from .packing import stark_floor

    rows = []
    for n in sorted(ALLOWLIST) if a.n is None else [a.n]:
        K = create_field(n)
        res, fl = residue_at_one(K), stark_floor(K)
        rows.append({"n": n, "d": K.degree, "residue": res, "stark_floor": fl, "holds": res >= fl})
    return rows, {}


# --------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["table", "csv", "json"], default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="write output to FILE instead of stdout")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (default ILZ_THREADS or all cores)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="ilz", description=__doc__, parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help, parents=[common])
        sp.set_defaults(func=fn)
        return sp

    sp = add("field-info", cmd_field_info, "degree, discriminant and characters of Q(zeta_n)")
    sp.add_argument("n", type=int)

    sp = add("zeta", cmd_zeta, "Dedekind zeta of Q(zeta_K) at s")
    sp.add_argument("K", type=int)
    sp.add_argument("--s", type=_parse_complex, required=True, metavar="RE[,IM]")

    sp = add("epstein", cmd_epstein, "Epstein zeta of a Gram matrix file")
    sp.add_argument("--gram", required=True, metavar="FILE")
    sp.add_argument("--s", type=_parse_complex, required=True, metavar="RE[,IM]")
    sp.add_argument("--cutoff", type=float, default=50.0, help="cutoff radius for the direct sum")

    sp = add("hecke-check", cmd_hecke_check, "Monte Carlo vs closed form of the Hecke formula")
    sp.add_argument("n", type=int)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--samples", type=int, default=2000)

    sp = add("mean-count", cmd_mean_count, "Monte Carlo mean lattice-point count vs 1 + V + eps")
    sp.add_argument("n", type=int)
    sp.add_argument("--volume", type=float, required=True)
    sp.add_argument("--samples", type=int, default=10000)

    sp = add("error-term", cmd_error_term, "contour quadrature of eps(R, K)")
    sp.add_argument("n", type=int)
    sp.add_argument("--volume", type=float, required=True)
    sp.add_argument("--sigma", type=float, default=0.5)
    sp.add_argument("--tmax", type=float, default=60.0)

    sp = add("packing-certify", cmd_packing_certify, "numerically certified packing volume V*")
    sp.add_argument("n", type=int)
    sp.add_argument("--margin", type=float, default=None, help="default 0.01 n")
    sp.add_argument("--tmax", type=float, default=60.0)
    sp.add_argument("--check-samples", type=int, default=0, help="Monte Carlo soundness check with this many samples")

    sp = add("primorial-table", cmd_primorial_table, "n = product of the first k primes")
    sp.add_argument("--kmax", type=int, required=True)

    sp = add("gamma-bound", cmd_gamma_bound, "fit and check the gamma-ratio constant C")
    sp.add_argument("--rmax", type=int, default=64)
    sp.add_argument("--tmax", type=float, default=100.0)
    sp.add_argument("--tstep", type=float, default=0.1)

    sp = add("subconvexity-profile", cmd_subconvexity_profile, "|zeta_K(1/2+it)| with comparison curves")
    sp.add_argument("n", type=int)
    sp.add_argument("--tmax", type=float, default=50.0)
    sp.add_argument("--step", type=float, default=1.0)

    sp = add("stark", cmd_stark, "residue at s = 1 against the Stark floor")
    sp.add_argument("n", type=int, nargs="?", default=None)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    fmt = getattr(a, "format", "table")
    a.seed = getattr(a, "seed", 0)
    a.threads = getattr(a, "threads", None)
    out = getattr(a, "out", None)
    try:
        rows, meta = a.func(a)
    except IlzError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, OSError) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 1
    text = render(a.command, rows, meta, fmt)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
