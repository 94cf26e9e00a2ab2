"""Command-line surface: method generation, inversion, diagnostics,
fluid-queue queries, and the benchmark experiment harness.

Exit codes: 0 success, 1 numerical failure, 2 usage error.  Failures are
reported as one-line JSON objects on stderr.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import catalog, diagnostics
from .domains import Disc, ImagSegment, RealSegment, discretize, parse_domain
from .errors import NumericalError
from .invert import Transform, invert, invert_curve
from .methods import (euler_method, gaver_method, load_method, save_method,
                      talbot_method, to_full, zakian_method)
from .numerics import U, matrix_exponential
from .queueing import (FluidQueueModel, GeneratorMatrix, fluid_psi_transform,
                       make_experiment_model, psi_infinity)
from .tame import PRESET_ROWS, build_tame, preset_entry, preset_tame


def _fmt(x):
    return format(float(x), ".17g")


def _fail(obj):
    print(json.dumps(obj), file=sys.stderr)


def _parse_tgrid(text):
    """a:b:n -> n equispaced points from a to b inclusive."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"bad t-grid {text!r}: expected a:b:n")
    a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise ValueError("t-grid needs at least one point")
    return np.linspace(a, b, n)


_GENERATORS = {
    "euler": euler_method,
    "talbot": talbot_method,
    "gaver": gaver_method,
    "zakian": zakian_method,
}


def _parse_method(spec, r_hint=None):
    """name:nprime for built-in generators, 'tame' (preset by r_hint),
    or a path to a saved parameter file."""
    if os.path.exists(spec) or spec.endswith(".json"):
        return load_method(spec)[0]
    name, _, arg = spec.partition(":")
    if name in _GENERATORS:
        if not arg:
            raise ValueError(f"method {name!r} needs a node count, "
                             f"e.g. {name}:8")
        return _GENERATORS[name](int(arg))
    if name == "tame":
        if arg:
            return preset_tame(float(arg))
        if r_hint is None:
            raise ValueError("tame preset selection needs a radius, "
                             "e.g. tame:4.0")
        return preset_tame(r_hint)
    raise ValueError(f"unknown method spec {spec!r}")


# -- gen ---------------------------------------------------------------------

def cmd_gen(args):
    if args.method == "tame":
        if args.domain is None:
            raise ValueError("gen --method tame needs --domain")
        domain = parse_domain(args.domain)
        m, meta, report = build_tame(domain, args.nprime, tol=args.tol,
                                     count=args.count)
        save_method(args.out, m, meta)
        print(json.dumps({"out": args.out, "entries": m.n_entries,
                          "n": m.n_full, "epsilon": meta.epsilon,
                          "max_abs_weight": meta.max_abs_weight,
                          "eta": meta.eta,
                          "termination": report.termination}))
        return 0
    if args.method not in _GENERATORS:
        raise ValueError(f"unknown method {args.method!r}")
    m = _GENERATORS[args.method](args.nprime)
    save_method(args.out, m)
    print(json.dumps({"out": args.out, "entries": m.n_entries,
                      "n": m.n_full}))
    return 0


# -- invert ------------------------------------------------------------------

def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def cmd_invert(args):
    m, _ = load_method(args.params)
    transform = catalog.parse_transform(args.transform).transform
    if (args.t is None) == (args.t_grid is None):
        raise ValueError("give exactly one of --t and --t-grid")
    if args.t is not None:
        val = invert(m, transform, args.t)
        out = _fmt(val) if isinstance(val, float) else repr(val)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(out + "\n")
        else:
            print(out)
        return 0
    ts = _parse_tgrid(args.t_grid)
    points = invert_curve(m, transform, ts)
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh)
        w.writerow(["t", "value"])
        for p in points:
            if p.error is not None:
                _fail({"notice": f"t={p.t}: {p.error}"})
                w.writerow([_fmt(p.t), ""])
            else:
                v = p.value
                w.writerow([_fmt(p.t),
                            _fmt(v) if isinstance(v, float) else repr(v)])
    finally:
        if args.out:
            fh.close()
    return 0


# -- diag --------------------------------------------------------------------

_BOUND_KEYS = {
    "se": ("eps", "c"),
    "me": ("eps", "norm_v", "norm_u"),
    "phase_type": ("eps", "q_l1", "d", "mean"),
    "fluid": ("eps", "lam", "psi_inf"),
    "fluid_cdf": ("eps", "lam", "F_inf", "first_moment"),
    "ls": ("eps", "eta", "mu_total", "dirac_l1"),
    "lipschitz": ("H", "L", "t", "scv"),
    "moment_estimate": ("f", "fprime", "t"),
}


def _parse_kv(blob):
    out = {}
    for kv in blob.split(","):
        if "=" not in kv:
            raise ValueError(f"bad key=value pair {kv!r}")
        k, v = kv.split("=", 1)
        out[k.strip()] = ([float(p) for p in v.split("|")]
                          if "|" in v else float(v))
    return out

def _eval_bound(m, spec):
    tag, _, blob = spec.partition(":")
    if tag not in _BOUND_KEYS:
        raise ValueError(f"unknown bound class {tag!r}; "
                         f"known: {sorted(_BOUND_KEYS)}")
    kv = _parse_kv(blob) if blob else {}
    unknown = set(kv) - set(_BOUND_KEYS[tag])
    if unknown:
        raise ValueError(f"unknown {tag} bound arguments {sorted(unknown)}")
    if tag == "se":
        c = kv["c"] if isinstance(kv["c"], list) else [kv["c"]]
        return {"class": tag, "bound": diagnostics.bound_se(kv["eps"], c)}
    if tag == "me":
        return {"class": tag, "bound": diagnostics.bound_me(
            kv["eps"], kv["norm_v"], kv["norm_u"])}
    if tag == "phase_type":
        b = diagnostics.bound_phase_type(kv["eps"], kv["q_l1"],
                                         d=kv.get("d"),
                                         alpha_Qinv_one=kv.get("mean"))
        return {"class": tag, "pdf": b.pdf, "cdf_dimension": b.cdf_dimension,
                "cdf_moment": b.cdf_moment}
    if tag == "fluid":
        return {"class": tag, "bound": diagnostics.bound_fluid(
            kv["eps"], kv["lam"], kv["psi_inf"])}
    if tag == "fluid_cdf":
        return {"class": tag, "bound": diagnostics.bound_fluid_cdf(
            kv["eps"], kv["lam"], kv["F_inf"], kv["first_moment"])}
    if tag == "ls":
        dirac_l1 = kv.get("dirac_l1")
        if dirac_l1 is None:
            dirac_l1 = diagnostics.dirac_l1_norm(m)
        return {"class": tag, "bound": diagnostics.bound_ls(
            kv["eps"], kv["eta"], kv["mu_total"], dirac_l1)}
    if tag == "lipschitz":
        return {"class": tag, "bound": diagnostics.bound_lipschitz(
            kv["H"], kv["L"], kv["t"], kv["scv"])}
    return {"class": tag, "estimate": diagnostics.moment_error_estimate(
        m, kv["f"], kv["fprime"], kv["t"])}


def cmd_diag(args):
    m, _ = load_method(args.params)
    if args.dirac_grid:
        ys = _parse_tgrid(args.dirac_grid)
        fh = _open_out(args.out)
        try:
            w = csv.writer(fh)
            w.writerow(["y", "value"])
            for y in ys:
                w.writerow([_fmt(y), _fmt(diagnostics.dirac_eval(m, float(y)))])
        finally:
            if args.out:
                fh.close()
        return 0
    report = {"name": m.name, "entries": m.n_entries, "n": m.n_full}
    if args.domain:
        Z = discretize(parse_domain(args.domain), args.count)
        eps = diagnostics.epsilon_accuracy(m, Z)
        maxw = max(abs(complex(w)) for w in to_full(m).weights)
        report["epsilon"] = eps
        report["max_abs_weight"] = maxw
        report["eta"] = diagnostics.eta_proxy(eps, maxw)
    if args.moments:
        mom = diagnostics.moments(m)
        report["moments"] = {"mu0": mom.mu0, "mu1": mom.mu1, "mu2": mom.mu2,
                             "nu2": mom.nu2, "scv": mom.scv}
    if args.bounds:
        report["bounds"] = [_eval_bound(m, spec) for spec in args.bounds]
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


# -- fluid -------------------------------------------------------------------

def _load_model(path):
    with open(path) as fh:
        obj = json.load(fh)
    gen = GeneratorMatrix(np.asarray(obj["Q"], dtype=float),
                          kind=obj.get("kind", "generator"),
                          lam=obj.get("lam"))
    return FluidQueueModel(gen=gen, rates=np.asarray(obj["rates"],
                                                     dtype=float))


def save_model(path, model):
    """Write a fluid-queue model in the JSON format `aw fluid` reads."""
    obj = {"Q": model.gen.Q.tolist(), "rates": model.rates.tolist(),
           "kind": model.gen.kind, "lam": model.gen.lam}
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def cmd_fluid(args):
    model = _load_model(args.model)
    if not args.t > 0:
        raise ValueError("t must be positive")
    psi, Psi = fluid_psi_transform(model)
    transform = psi if args.quantity == "psi" else Psi
    m = _parse_method(args.method, r_hint=model.gen.lam * args.t)
    val = invert(m, transform, args.t)
    val = np.asarray(val)
    if args.entry != "all":
        i, j = (int(p) for p in args.entry.split(":"))
        print(_fmt(val[i, j].real if np.iscomplexobj(val) else val[i, j]))
        return 0
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh)
        w.writerow(["i", "j", "value"])
        for i in range(val.shape[0]):
            for j in range(val.shape[1]):
                v = val[i, j]
                w.writerow([i, j, _fmt(v.real if np.iscomplexobj(val) else v)])
    finally:
        if args.out:
            fh.close()
    return 0


# -- bench -------------------------------------------------------------------

def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(["" if x is None else
                        (x if isinstance(x, (str, int)) else _fmt(x))
                        for x in row])
    return path


def _classical_sweep(nprimes):
    """Yield (label, method) over the built-in generators, skipping node
    counts a generator does not support (parity constraints)."""
    for label, gen in _GENERATORS.items():
        for np_ in nprimes:
            try:
                yield label, gen(np_)
            except ValueError:
                continue


def _matrix_err(ref, val):
    return float(np.linalg.norm(np.asarray(ref) - np.asarray(val), np.inf))


def _estimate(m, f_norm, fprime_norm, t):
    try:
        return diagnostics.moment_error_estimate(m, f_norm, fprime_norm, t)
    except (ValueError, NumericalError):
        return None


def _cme_method(args):
    if args.cme_params:
        return load_method(args.cme_params)[0]
    _fail({"notice": "no --cme-params file given; CME rows omitted"})
    return None


def _bench_a(args, out_dir):
    model = make_experiment_model(5, 10, args.seed)
    lam = model.gen.lam
    t = 1.0
    psi, Psi = fluid_psi_transform(model)
    ref_m = talbot_method(32)
    refs = {"pdf": (psi, invert(ref_m, psi, t)),
            "cdf": (Psi, invert(ref_m, Psi, t))}
    # reference time-derivative for the moment estimate, by a central
    # difference of the reference curve (display aid only)
    h = 1e-3
    dref = {k: (invert(ref_m, tr, t + h) - invert(ref_m, tr, t - h)) / (2 * h)
            for k, (tr, _) in refs.items()}
    psi_inf_norm = float(np.linalg.norm(psi_infinity(model), np.inf))
    nprimes = range(1, (6 if args.quick else args.nprime_max) + 1)
    tame_max = 4 if args.quick else args.tame_nprime_max
    cme = _cme_method(args)
    paths = []
    for key in ("pdf", "cdf"):
        transform, ref = refs[key]
        ref_norm = float(np.linalg.norm(ref, np.inf))
        dref_norm = float(np.linalg.norm(dref[key], np.inf))
        rows = []

        def add(label, m, bound=None):
            try:
                err = _matrix_err(ref, invert(m, transform, t))
            except NumericalError as exc:
                _fail({"notice": f"{label} N'={m.n_entries}: {exc}"})
                return
            rows.append([label, m.n_entries, m.n_full, err, bound,
                         _estimate(m, ref_norm, dref_norm, t)])

        for label, m in _classical_sweep(nprimes):
            add(label, m)
        if cme is not None:
            add("cme", cme)
        for np_ in range(1, tame_max + 1):
            m, meta, _ = build_tame(Disc(complex(-lam * t), lam * t), np_)
            bound = (diagnostics.bound_fluid(meta.eta, lam, psi_inf_norm)
                     if key == "pdf" else None)
            add("tame", m, bound)
        paths.append(_write_csv(
            os.path.join(out_dir, f"expA_{key}.csv"),
            ["method", "nprime", "n", "error", "bound", "estimate"], rows))
    return paths


def _bench_b(args, out_dir):
    model = make_experiment_model(5, 10, args.seed)
    lam = model.gen.lam
    psi, _ = fluid_psi_transform(model)
    ts = (1.0, 3.0) if args.quick else (1.0, 3.0, 10.0, 30.0, 100.0)
    radii = (0.5, 1.0) if args.quick else (0.5, 1.0, 3.0, 10.0, 100.0)
    nprimes = (4, 8) if args.quick else (4, 8, 12, 16)
    refs = {t: invert(talbot_method(24), psi, t) for t in ts}
    rows = []
    methods = []
    for r in radii:
        for np_ in nprimes:
            m, _, _ = build_tame(Disc(complex(-r), r), np_)
            methods.append(("tame", r, m))
    for r_max, np_ in PRESET_ROWS:
        m, _, _ = preset_entry(r_max)
        methods.append(("tame_preset", r_max, m))
    for t in ts:
        for label, r, m in methods:
            try:
                err = _matrix_err(refs[t], invert(m, psi, t))
            except NumericalError as exc:
                _fail({"notice": f"{label} r={r} t={t}: {exc}"})
                continue
            rows.append([label, r, t, m.n_entries, err])
    return [_write_csv(os.path.join(out_dir, "expB.csv"),
                       ["method", "r", "t", "nprime", "error"], rows)]


def _bench_c(args, out_dir):
    from .domains import (fov_circle_bound, fov_hermitian_bound,
                          fov_rectangle_bound)
    model = make_experiment_model(5, 10, args.seed)
    Q = model.gen.Q
    lam = model.gen.lam
    d = Q.shape[0]
    t = 1.0
    eye = np.eye(d)
    transform = Transform(
        evaluator=lambda s: np.linalg.solve(s * eye - Q, eye),
        conjugate_symmetric=True,
        singularities=tuple(np.linalg.eigvals(Q)), name="resolvent")
    ref = matrix_exponential(t * Q).real
    ref_norm = float(np.linalg.norm(ref, np.inf))
    dref_norm = float(np.linalg.norm(Q @ ref, np.inf))
    rows = []

    def add(label, m, bound=None):
        try:
            err = _matrix_err(ref, invert(m, transform, t))
        except NumericalError as exc:
            _fail({"notice": f"{label} N'={m.n_entries}: {exc}"})
            return
        rows.append([label, m.n_entries, m.n_full, err, bound,
                     _estimate(m, ref_norm, dref_norm, t)])

    nprimes = range(1, (6 if args.quick else args.nprime_max) + 1)
    for label, m in _classical_sweep(nprimes):
        add(label, m)
    cme = _cme_method(args)
    if cme is not None:
        add("cme", cme)
    for r_max, np_ in (PRESET_ROWS[:2] if args.quick else PRESET_ROWS):
        m, meta, _ = preset_entry(r_max)
        add("tame_preset", m)
    tame_sweep = (2, 4) if args.quick else (2, 4, 6, 8, 10, 12)
    variants = (("tame_circle", fov_circle_bound(d, lam)),
                ("tame_rect", fov_rectangle_bound(d, lam)),
                ("tame_fov", fov_hermitian_bound(t * Q, generator=True)))
    for label, domain in variants:
        for np_ in tame_sweep:
            m, meta, _ = build_tame(domain, np_)
            add(label, m, bound=(1 + math.sqrt(2)) * meta.eta)
    return [_write_csv(os.path.join(out_dir, "expC.csv"),
                       ["method", "nprime", "n", "error", "bound",
                        "estimate"], rows)]


def _curve_rows(m, entry, ts):
    rows = []
    cache = {}
    for t in ts:
        t = float(t)
        try:
            ref = entry.f(t)
        except ValueError:
            continue  # ground truth undefined at a jump point
        try:
            val = invert(m, entry.transform, t, _cache=cache)
        except NumericalError as exc:
            _fail({"notice": f"t={t}: {exc}"})
            rows.append([t, None, ref, None])
            continue
        rows.append([t, val, ref, abs(val - ref)])
    return rows


def _offset_grid(upper, n):
    return upper * (np.arange(n) + 0.5) / n


def _bench_d(args, out_dir):
    n = 100 if args.quick else 600
    ts = _offset_grid(6.0, n)
    # the long imaginary segment needs a denser boundary sampling than the
    # default for the fit to resolve the oscillatory target
    m, _, _ = build_tame(ImagSegment(80.0), 20, count=4000)
    paths = []
    for name in ("triangular_wave", "square_wave"):
        e = catalog.entry(name)
        paths.append(_write_csv(
            os.path.join(out_dir, f"expD_{name.split('_')[0]}.csv"),
            ["t", "value", "reference", "error"], _curve_rows(m, e, ts)))
    return paths


def _bench_e(args, out_dir):
    n = 50 if args.quick else 500
    ts = _offset_grid(50.0, n)
    e = catalog.entry("bs_call", {"q_price": 80.0, "strike": 100.0,
                                  "rate": 0.05, "sigma": 0.1})
    tame, _, _ = build_tame(RealSegment(100.0), 33)
    paths = []
    for label, m in (("talbot", talbot_method(20)), ("tame", tame)):
        paths.append(_write_csv(
            os.path.join(out_dir, f"expE_{label}.csv"),
            ["t", "value", "reference", "error"], _curve_rows(m, e, ts)))
    return paths


_EXPERIMENTS = {"A": _bench_a, "B": _bench_b, "C": _bench_c,
                "D": _bench_d, "E": _bench_e}


def cmd_bench(args):
    os.makedirs(args.out_dir, exist_ok=True)
    paths = _EXPERIMENTS[args.experiment](args, args.out_dir)
    print(json.dumps({"experiment": args.experiment, "files": paths}))
    return 0


# -- entry point ---------------------------------------------------------------

def _build_parser():
    p = argparse.ArgumentParser(
        prog="aw", description="Inverse Laplace transforms with "
        "Abate-Whitt methods")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate method parameters")
    g.add_argument("--method", required=True,
                   help="euler|talbot|gaver|zakian|tame")
    g.add_argument("--nprime", type=int, required=True,
                   help="reduced node count (full count for zakian)")
    g.add_argument("--domain", help="tame only: disc:c:R | rseg:L | iseg:r "
                   "| rect:x0:x1:y0:y1")
    g.add_argument("--tol", type=float, default=0.0)
    g.add_argument("--count", type=int, default=1000)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    i = sub.add_parser("invert", help="invert a transform at t")
    i.add_argument("--params", required=True, help="method parameter file")
    i.add_argument("--transform", required=True,
                   help="builtin:name[:k=v,...]")
    i.add_argument("--t", type=float)
    i.add_argument("--t-grid", help="a:b:n")
    i.add_argument("--out")
    i.set_defaults(func=cmd_invert)

    d = sub.add_parser("diag", help="method quality diagnostics")
    d.add_argument("--params", required=True)
    d.add_argument("--domain", help="measure epsilon on this domain")
    d.add_argument("--count", type=int, default=4000)
    d.add_argument("--moments", action="store_true")
    d.add_argument("--dirac-grid", help="a:b:n (CSV output)")
    d.add_argument("--bounds", action="append",
                   help="class:k=v,... (repeatable); classes: "
                   + ",".join(sorted(_BOUND_KEYS)))
    d.add_argument("--out")
    d.set_defaults(func=cmd_diag)

    f = sub.add_parser("fluid", help="fluid-queue first-return quantities")
    f.add_argument("--model", required=True, help="model JSON file")
    f.add_argument("--quantity", choices=("psi", "Psi"), default="psi")
    f.add_argument("--t", type=float, required=True)
    f.add_argument("--method", default="talbot:20",
                   help="name:nprime | tame | tame:r | params file")
    f.add_argument("--entry", default="all", help="i:j or all")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fluid)

    b = sub.add_parser("bench", help="experiment harness (CSV output)")
    b.add_argument("--experiment", required=True,
                   choices=sorted(_EXPERIMENTS))
    b.add_argument("--out-dir", required=True)
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--nprime-max", type=int, default=25)
    b.add_argument("--tame-nprime-max", type=int, default=12)
    b.add_argument("--cme-params", help="optional CME method file for A/C")
    b.add_argument("--quick", action="store_true",
                   help="smaller sweeps and grids")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except NumericalError as exc:
        _fail({"error": type(exc).__name__, "message": str(exc)})
        return 1
    except (ValueError, OSError, KeyError) as exc:
        _fail({"error": type(exc).__name__, "message": str(exc)})
        return 2


if __name__ == "__main__":
    sys.exit(main())
