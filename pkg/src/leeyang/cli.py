"""Command-line front end.

Every subcommand prints a JSON run report (or writes it to ``--out``) and
exits 0 on PASS, 1 on FAIL, 2 on bad input. Tabular data goes to ``--csv``
with a fixed header per subcommand:

    zpoly       sites,re,im
    zeros       re,im,modulus
    circle      re,im,modulus,deviation
    certify     site,radius
    audit       re,im,modulus
    pncheck     re,im,modulus
    correlate   h_re,h_im,|f|,Re(f),Im(f),lower,upper,ratio_re_min
    newman      h_re,h_im,ratio_re_min
    sandwich    h_re,h_im,|f|,lower,upper
    ursell      u_re,u_im,fd_re,fd_im
    massgap     distance,log_truncated,fit_slope,oracle
    gausslucas  poly,crit_re,crit_im,hull_distance,reconstruction_error
    bounds      h_re,h_im,alpha,cayley_re,cayley_im
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, asano, correlations, gibbs, measures, ursell
from .polycore import ma_diagonal, members

HEADERS = {
    "zpoly": ["sites", "re", "im"],
    "zeros": ["re", "im", "modulus"],
    "circle": ["re", "im", "modulus", "deviation"],
    "certify": ["site", "radius"],
    "audit": ["re", "im", "modulus"],
    "pncheck": ["re", "im", "modulus"],
    "correlate": ["h_re", "h_im", "|f|", "Re(f)", "Im(f)", "lower", "upper", "ratio_re_min"],
    "newman": ["h_re", "h_im", "ratio_re_min"],
    "sandwich": ["h_re", "h_im", "|f|", "lower", "upper"],
    "ursell": ["u_re", "u_im", "fd_re", "fd_im"],
    "massgap": ["distance", "log_truncated", "fit_slope", "oracle"],
    "gausslucas": ["poly", "crit_re", "crit_im", "hull_distance", "reconstruction_error"],
    "bounds": ["h_re", "h_im", "alpha", "cayley_re", "cayley_im"],
}


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    status: str = "PASS"
    metrics: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def fail(self, name: str, value):
        self.status = "FAIL"
        self.violations.append({"invariant": name, "value": _num(value)})

    def to_json(self) -> str:
        d = {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "status": self.status,
            "metrics": {k: _num(v) for k, v in self.metrics.items()},
            "artifacts": self.artifacts,
            "violations": self.violations,
        }
        d.update(self.extra)
        return json.dumps(d, indent=2, sort_keys=True)


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_num(complex(v).real), _num(complex(v).imag)]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    return v


def parse_complex(text: str) -> complex:
    text = text.strip().replace(" ", "")
    if "," in text:
        re, im = text.split(",")
        return complex(float(re), float(im))
    return complex(text.replace("i", "j"))


def _load_json(arg: str) -> dict:
    arg = arg.strip()
    if arg.startswith("{"):
        return json.loads(arg)
    return json.loads(Path(arg).read_text())


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def _grid(args) -> list[complex]:
    if args.h:
        return [parse_complex(h) for h in args.h]
    nre, nim = (int(x) for x in args.grid.lower().split("x"))
    return correlations.default_grid(nre, nim, args.re_max, args.im_max)


def _pmap(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------------------
# subcommands: each fills in the report and returns CSV rows


def cmd_zpoly(args, rep):
    spec = gibbs.InteractionSpec.from_dict(args.model_dict)
    P = gibbs.fugacity_poly(spec)
    rep.metrics["nterms"] = len(P)
    return [[" ".join(map(str, members(int(k)))), v.real, v.imag] for k, v in zip(P.keys, P.values)]


def _diag_roots(spec):
    return analysis.roots(ma_diagonal(gibbs.fugacity_poly(spec)))


def cmd_zeros(args, rep):
    zs = _diag_roots(gibbs.InteractionSpec.from_dict(args.model_dict))
    rep.metrics.update(nroots=zs.size, min_modulus=float(np.abs(zs).min()), max_modulus=float(np.abs(zs).max()))
    return [[z.real, z.imag, abs(z)] for z in zs]


def cmd_circle(args, rep):
    spec = gibbs.InteractionSpec.from_dict(args.model_dict)
    zs = _diag_roots(spec)
    dev = np.abs(np.abs(zs) - 1)
    tol = args.tol if args.tol is not None else 1e-8
    rep.metrics.update(max_circle_deviation=float(dev.max()), tol=tol, nroots=zs.size)
    if not (spec.is_ferromagnetic() and spec.is_pair()):
        rep.metrics["circle_theorem_applies"] = False
    if dev.max() > tol:
        rep.fail("max_circle_deviation", float(dev.max()))
    return [[z.real, z.imag, abs(z), d] for z, d in zip(zs, dev)]


def _j0(args):
    return args.j0 if args.j0 is not None else None


def cmd_certify(args, rep):
    spec = gibbs.InteractionSpec.from_dict(args.model_dict)
    _, cert = asano.contract_model(spec, _j0(args))
    region = asano.certify_region(spec, _j0(args))
    cert.h_radius = region.h_radius
    stats = gibbs.family_stats(spec, _j0(args))
    rep.metrics.update(h_radius=region.h_radius, re_h_threshold=region.re_h_threshold, q=stats.q, I0=stats.I0, min_radius=min(cert.radii))
    if stats.v is not None:
        rep.metrics["v"] = stats.v
    rep.extra["certificate"] = cert.to_dict()
    if args.cert_out:
        Path(args.cert_out).write_text(json.dumps(cert.to_dict(), indent=2, sort_keys=True))
        rep.artifacts.append(args.cert_out)
    return [[i, r] for i, r in enumerate(cert.radii)]


def cmd_audit(args, rep):
    spec = gibbs.InteractionSpec.from_dict(args.model_dict)
    if args.cert:
        cert = asano.ZeroFreeCertificate.from_dict(_load_json(args.cert))
    else:
        _, cert = asano.contract_model(spec, _j0(args))
    if args.inflate != 1.0:
        cert = cert.scaled(args.inflate)
    a = asano.audit_certificate(spec, cert, args.samples, args.seed)
    rep.metrics.update(a.metrics())
    if not a.passed:
        rep.fail("zero_inside_certified_polydisc", a.min_root_modulus)
    zs = _diag_roots(spec)
    return [[z.real, z.imag, abs(z)] for z in zs]


def cmd_pncheck(args, rep):
    mu = measures.DiscreteEvenMeasure.from_dict(args.measure_dict)
    v = measures.pn_check(mu, args.tol if args.tol is not None else 1e-8)
    rep.metrics.update(is_pn=v.is_pn, max_circle_deviation=v.max_circle_deviation, L=measures.L_constant(mu))
    if not v.is_pn:
        rep.metrics["witness"] = complex(v.witness)
        rep.fail("is_pn", v.max_circle_deviation)
    return [[w.real, w.imag, abs(w)] for w in v.roots]


def _ratio_min(spec, sites, h):
    f = correlations.prefix_correlations(spec, sites, h)
    prev = np.concatenate([[1.0], f[:-1]])
    return float(np.min((f / prev).real))


def cmd_correlate(args, rep):
    base = gibbs.InteractionSpec.from_dict(args.model_dict)
    sites = _int_list(args.sites)
    if args.volumes:
        hs = _grid(args)
        if len(hs) != 1:
            raise ValueError("--volumes needs exactly one --h")
        h = hs[0]
        specs = [gibbs.periodic_resize(base, (n,)) for n in _int_list(args.volumes)]
    else:
        specs = [base]
    rows = []
    values = []
    ok = True
    for spec in specs:
        hs = _grid(args)

        def point(h, spec=spec):
            c = correlations.correlation(spec, sites, h)
            rmin = _ratio_min(spec, sites, h)
            return h, c, rmin

        for h, c, rmin in _pmap(point, hs, args.threads):
            rows.append([h.real, h.imag, abs(c.value), c.value.real, c.value.imag, c.lower, c.upper, rmin])
            if c.has_bounds and not (c.lower - 1e-10 <= abs(c.value) <= c.upper + 1e-10):
                ok = False
                rep.fail(f"sandwich_at_{h}", abs(c.value))
            values.append(c.value)
    rep.metrics["npoints"] = len(rows)
    if args.volumes:
        diffs = [abs(b - a) for a, b in zip(values, values[1:])]
        monotone = all(d2 < d1 for d1, d2 in zip(diffs, diffs[1:]))
        tol = args.tol if args.tol is not None else 1e-3
        rep.metrics.update(volume_diffs=diffs, monotone=monotone, last_diff=diffs[-1] if diffs else float("nan"))
        if not monotone:
            rep.fail("successive_differences_monotone", diffs)
        if diffs and diffs[-1] > tol:
            rep.fail("last_difference", diffs[-1])
    rep.metrics["bounds_ok"] = ok
    return rows


def cmd_newman(args, rep):
    spec = gibbs.InteractionSpec.from_dict(args.model_dict)
    sites = _int_list(args.sites)
    r = correlations.newman_ratio_check(spec, sites, _grid(args), all_orders=args.all_orders)
    rep.metrics.update(min_ratio_re=r.min_value, checks=r.checks, violations=r.violations)
    if not r.passed:
        rep.fail("ratio_real_part_positive", r.min_value)
    return [[h.real, h.imag, m] for h, m in r.rows]


def cmd_sandwich(args, rep):
    spec = gibbs.InteractionSpec.from_dict(args.model_dict)
    r = correlations.sandwich_check(spec, _int_list(args.sites), _grid(args))
    rep.metrics.update(min_margin=r.min_value, checks=r.checks, violations=r.violations)
    rep.metrics.update({k: v for k, v in r.extras.items()})
    if not r.passed:
        rep.fail("sandwich_bounds", r.min_value)
    return [[h.real, h.imag, f, lo, hi] for h, f, lo, hi in r.rows]


def cmd_ursell(args, rep):
    spec = gibbs.InteractionSpec.from_dict(args.model_dict)
    obs = [_int_list(o) for o in args.obs.split(";")]
    h = parse_complex(args.h[0]) if args.h else spec.field
    u = ursell.ursell(spec, obs, h)
    fd = ursell.ursell_finite_difference(spec, obs, h)
    rel = abs(u - fd) / max(abs(u), abs(fd), 1e-300)
    rep.metrics.update(u=u, u_fd=fd, rel_diff=rel)
    tol = args.tol if args.tol is not None else 1e-5
    if rel > tol and max(abs(u), abs(fd)) > 1e-12:
        rep.fail("partition_vs_finite_difference", rel)
    return [[u.real, u.imag, fd.real, fd.imag]]


def cmd_massgap(args, rep):
    base = gibbs.InteractionSpec.from_dict(args.model_dict)
    h = parse_complex(args.h[0]) if args.h else base.field
    window = tuple(_int_list(args.window)) if args.window else None
    specs = [gibbs.periodic_resize(base, (n,)) for n in _int_list(args.volumes)] if args.volumes else [base]
    rows = []
    fits = []
    for spec in specs:
        est = ursell.mass_gap_fit(spec, h, window)
        fits.append(est.m_fit)
        for d, lg in zip(est.distances, est.log_truncated):
            rows.append([d, lg, -est.m_fit, est.m_oracle if est.m_oracle is not None else float("nan")])
        if not est.passed:
            rep.fail(f"mass_gap_n{spec.nsites}", est.m_fit)
        rep.metrics["m_oracle"] = est.m_oracle if est.m_oracle is not None else float("nan")
    rep.metrics["m_fit"] = fits[-1]
    if len(fits) > 1:
        rep.metrics["m_fit_by_volume"] = fits
    return rows


def cmd_gausslucas(args, rep):
    polys = []
    if args.coeffs:
        polys.append(analysis.UniPoly([parse_complex(c) for c in args.coeffs.split(";")]))
    else:
        rng = np.random.default_rng(args.seed)
        for _ in range(args.random):
            deg = int(rng.integers(2, args.degree + 1))
            polys.append(analysis.UniPoly(rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)))
    rows = []
    worst_d = 0.0
    worst_r = 0.0
    tol = args.tol if args.tol is not None else analysis.HULL_TOL
    for i, p in enumerate(polys):
        for w in analysis.gauss_lucas_check(p):
            scale = max(1.0, float(np.abs(w.roots).max()))
            rerr = w.reconstruction_error / scale
            worst_d = max(worst_d, w.hull_distance)
            worst_r = max(worst_r, rerr)
            rows.append([i, w.critical_point.real, w.critical_point.imag, w.hull_distance, rerr])
    rep.metrics.update(npolys=len(polys), max_hull_distance=worst_d, max_reconstruction_error=worst_r)
    if worst_d > tol:
        rep.fail("hull_distance", worst_d)
    if worst_r > 1e-8:
        rep.fail("witness_reconstruction", worst_r)
    return rows


def cmd_bounds(args, rep):
    rows = []
    for h in _grid(args):
        a = analysis.alpha(h)
        z = analysis.cayley(h)
        rows.append([h.real, h.imag, a, z.real, z.imag])
        if abs((1 + abs(z)) / (1 - abs(z)) - a) > 1e-9 * a:
            rep.fail(f"alpha_cayley_identity_at_{h}", a)
    rep.metrics["npoints"] = len(rows)
    rep.metrics["max_alpha"] = max(r[2] for r in rows)
    return rows


COMMANDS = {
    "zpoly": cmd_zpoly,
    "zeros": cmd_zeros,
    "circle": cmd_circle,
    "certify": cmd_certify,
    "audit": cmd_audit,
    "pncheck": cmd_pncheck,
    "correlate": cmd_correlate,
    "newman": cmd_newman,
    "sandwich": cmd_sandwich,
    "ursell": cmd_ursell,
    "massgap": cmd_massgap,
    "gausslucas": cmd_gausslucas,
    "bounds": cmd_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="leeyang", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--csv", help="write tabular output here")
        p.add_argument("--threads", type=int, default=1)

    def model(p):
        p.add_argument("--model", required=True, help="model JSON file or inline JSON")

    def grid(p):
        p.add_argument("--h", action="append", help="field value, e.g. 1+0.5i (repeatable); overrides --grid")
        p.add_argument("--grid", default="5x5", help="NRExNIM grid with Re h in (0, re-max], Im h in [-im-max, im-max]")
        p.add_argument("--re-max", type=float, default=2.0)
        p.add_argument("--im-max", type=float, default=2.0)

    helps = {
        "zpoly": "fugacity polynomial coefficients",
        "zeros": "roots of the diagonal fugacity polynomial",
        "circle": "unit-circle audit of Lee-Yang zeros",
        "certify": "Asano zero-free certificate and analyticity region",
        "audit": "falsification audit of a certificate",
        "pncheck": "PN classification of a discrete measure",
        "correlate": "correlation function with growth bounds",
        "newman": "ratio positivity of successive correlations",
        "sandwich": "two-sided growth bounds on correlations",
        "ursell": "Ursell function with finite-difference cross-check",
        "massgap": "decay rate of the truncated two-point function",
        "gausslucas": "critical points versus root hull",
        "bounds": "half-plane growth factor and Cayley map",
    }
    ps = {name: sub.add_parser(name, help=text, description=f"{text}. CSV header: {','.join(HEADERS[name])}") for name, text in helps.items()}
    for name, p in ps.items():
        common(p)
        if name not in ("pncheck", "gausslucas", "bounds"):
            model(p)
    for name in ("correlate", "newman", "sandwich", "ursell", "massgap", "bounds"):
        grid(ps[name])
    for name in ("certify", "audit"):
        ps[name].add_argument("--j0", type=float, default=None, help="uniform coupling bound J0 (default |J(A)|)")
    ps["certify"].add_argument("--cert-out")
    ps["audit"].add_argument("--cert", help="certificate JSON (default: build one)")
    ps["audit"].add_argument("--samples", type=int, default=256)
    ps["audit"].add_argument("--inflate", type=float, default=1.0, help="scale certificate radii before auditing")
    ps["pncheck"].add_argument("--measure", required=True, help="measure JSON file or inline JSON")
    for name in ("correlate", "newman", "sandwich"):
        ps[name].add_argument("--sites", required=True, help="comma-separated site list")
    ps["correlate"].add_argument("--volumes", help="ring sizes n1,n2,... (periodic 1D models)")
    ps["newman"].add_argument("--all-orders", action="store_true")
    ps["ursell"].add_argument("--obs", required=True, help="observables as site lists separated by ';', e.g. '0;1;2,3'")
    ps["massgap"].add_argument("--window", help="distance window lo,hi")
    ps["massgap"].add_argument("--volumes", help="ring sizes n1,n2,...")
    ps["gausslucas"].add_argument("--coeffs", help="ascending coefficients separated by ';'")
    ps["gausslucas"].add_argument("--random", type=int, default=100)
    ps["gausslucas"].add_argument("--degree", type=int, default=12)
    return ap


def _digest(args) -> str:
    skip = {"out", "csv", "threads", "cert_out", "model", "measure"}
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 2
    rep = RunReport(args.command, "")
    try:
        if getattr(args, "model", None):
            args.model_dict = _load_json(args.model)
        if getattr(args, "measure", None):
            args.measure_dict = _load_json(args.measure)
        if args.threads < 1:
            raise ValueError("--threads must be >= 1")
        rep.inputs_digest = _digest(args)
        rows = COMMANDS[args.command](args, rep)
        if args.csv:
            with open(args.csv, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(HEADERS[args.command])
                for r in rows:
                    w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
            rep.artifacts.append(args.csv)
    except Exception as e:  # any failure is an ERROR report, never a traceback
        rep.status = "ERROR"
        rep.extra["error"] = f"{type(e).__name__}: {e}"
    text = rep.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return {"PASS": 0, "FAIL": 1, "ERROR": 2}[rep.status]


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
