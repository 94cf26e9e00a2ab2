"""Construction of TAME methods via a modified AAA rational approximation.

The approximant is kept strictly proper (it vanishes at infinity) by
augmenting the barycentric denominator with a constant term u0:

    r(z) = (sum_k u_k f_k / (z - z_k)) / (u0 + sum_k u_k / (z - z_k))

The greedy loop runs in binary64 (which acts as a safeguard against weight
growth); only the pole eigenproblem is solved in extended precision.
"""

import os
from dataclasses import dataclass
from importlib import resources

import mpmath
import numpy as np

from .domains import (Disc, Discretization, ImagSegment, RealSegment,
                      Rectangle, discretize, distance_to, domain_scale,
                      format_domain)
from .errors import NumericalError, PoleInsideDomainError
from .methods import (AWMethod, load_method, make_metadata, pair_conjugates,
                      to_reduced)
from .numerics import (EXTENDED_DPS, U, dense_eigenvalues,
                       smallest_singular_vector)


@dataclass(frozen=True)
class BarycentricApproximant:
    support: np.ndarray   # z_1 .. z_K
    values: np.ndarray    # f_1 .. f_K
    weights: np.ndarray   # u_0, u_1 .. u_K


@dataclass(frozen=True)
class AAAReport:
    residuals: tuple          # max residual on Z after each iteration
    epsilon: float
    support_order: tuple      # support points in the order they were chosen
    termination: str          # tolerance | max_order | no_room_for_pair


def barycentric_eval(b, z):
    """Evaluate r(z); interpolates exactly at support points."""
    zs = np.asarray(z, dtype=complex)
    scalar = zs.ndim == 0
    pts = np.atleast_1d(zs)
    if len(b.support) == 0:
        out = np.zeros(len(pts), dtype=complex)
        return complex(out[0]) if scalar else out
    diffs = pts[:, None] - b.support[None, :]
    exact = diffs == 0
    hit = exact.any(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        C = 1.0 / diffs
        num = C @ (b.weights[1:] * b.values)
        den = b.weights[0] + C @ b.weights[1:]
    out = np.empty(len(pts), dtype=complex)
    free = ~hit
    if np.any(den[free] == 0):
        raise NumericalError("barycentric denominator vanishes (pole hit)")
    out[free] = num[free] / den[free]
    for i in np.flatnonzero(hit):
        out[i] = b.values[int(np.argmax(exact[i]))]
    return complex(out[0]) if scalar else out


def _is_real_point(z):
    return abs(z.imag) <= 1e-12 * (1.0 + abs(z))


def aaa_fit(target, Z, max_order, tol=0.0, loop_precision="working"):
    """Greedy AAA fit of ``target`` on the discretization Z.

    Support points are added at the residual argmax (lowest index on
    ties); a non-real point is added together with its conjugate so the
    fit stays conjugate-symmetric, or the loop stops with termination
    reason ``no_room_for_pair`` if only one slot is left.  Returns
    ``(BarycentricApproximant, AAAReport)``.
    """
    if loop_precision != "working":
        raise ValueError("only binary64 loop arithmetic is supported")
    if max_order < 2:
        raise ValueError("max_order must be >= 2")
    pts = Z.points if isinstance(Z, Discretization) else np.asarray(Z, complex)
    pts = np.asarray(pts, dtype=complex)
    if len(pts) < 2 * max_order:
        raise ValueError("need |Z| >= 2 * max_order")
    F = np.array([complex(target(complex(z))) for z in pts])
    if not np.all(np.isfinite(F)):
        raise ValueError("target is non-finite on Z")

    first_index = {}
    for i, z in enumerate(pts):
        first_index.setdefault(complex(z), i)
    fscale = max(1.0, float(np.max(np.abs(F))))
    symmetric = all(complex(z).conjugate() in first_index for z in pts)
    if symmetric:
        symmetric = all(
            abs(F[first_index[complex(z).conjugate()]] - F[i].conjugate())
            <= 1e-12 * fscale for i, z in enumerate(pts))

    support = []          # indices into pts
    groups = []           # positions in `support` added together (1 or 2)
    u = None
    active = np.ones(len(pts), dtype=bool)
    residual = np.abs(F).astype(float)
    history = []
    termination = None

    while True:
        resmax = float(residual[active].max())
        if resmax <= tol:
            termination = "tolerance"
            break
        if len(support) >= max_order:
            termination = "max_order"
            break
        masked = np.where(active, residual, -np.inf)
        masked[~np.isfinite(masked) & active] = np.inf  # pole hits first
        j = int(np.argmax(masked))
        z_new = complex(pts[j])
        if _is_real_point(z_new):
            new = [j]
        else:
            if len(support) + 2 > max_order:
                termination = "no_room_for_pair"
                break
            jc = first_index.get(z_new.conjugate())
            if jc is None or not active[jc]:
                raise NumericalError("conjugate partner missing in Z")
            new = [j, jc]
        pos = len(support)
        support.extend(new)
        groups.append(tuple(range(pos, pos + len(new))))
        for k in new:
            active[k] = False

        zs = pts[support]
        fs = F[support]
        rows = np.flatnonzero(active)
        C = 1.0 / (pts[rows, None] - zs[None, :])
        Ct = np.concatenate([np.ones((len(rows), 1)), C], axis=1)
        d2 = np.concatenate([[0.0], fs])
        Atil = F[rows, None] * Ct - Ct * d2[None, :]
        u = smallest_singular_vector(Atil)
        if symmetric:
            for g in groups:
                if len(g) == 2:
                    a = 0.5 * (u[1 + g[0]] + u[1 + g[1]].conjugate())
                    u[1 + g[0]] = a
                    u[1 + g[1]] = a.conjugate()
                else:
                    u[1 + g[0]] = complex(u[1 + g[0]].real)
            u[0] = complex(u[0].real)
            nrm = np.linalg.norm(u)
            if nrm > 0:
                u = u / nrm

        with np.errstate(divide="ignore", invalid="ignore"):
            num = C @ (u[1:] * fs)
            den = u[0] + C @ u[1:]
            r = num / den
        residual = np.zeros(len(pts))
        err = np.abs(F[rows] - r)
        err[~np.isfinite(err)] = np.inf
        residual[rows] = err
        history.append(float(residual[rows].max()))

    if u is None:
        u = np.array([1.0 + 0j])
    eps = history[-1] if history else float(np.max(np.abs(F)))
    b = BarycentricApproximant(support=pts[support].copy(),
                               values=F[support].copy(),
                               weights=np.asarray(u, dtype=complex))
    report = AAAReport(residuals=tuple(history), epsilon=eps,
                       support_order=tuple(complex(z) for z in pts[support]),
                       termination=termination)
    return b, report


def extract_poles(b):
    """Poles of r as the K finite eigenvalues of the arrowhead pencil.

    The pencil is solved in extended precision; the two structurally
    infinite eigenvalues are discarded.
    """
    K = len(b.support)
    u = b.weights
    if K == 0:
        return np.empty(0, dtype=complex)
    if abs(u[0]) <= 1e2 * U * np.linalg.norm(u):
        raise ValueError("u0 vanishes: approximant is not strictly proper")
    A = np.zeros((K + 2, K + 2), dtype=complex)
    A[0, 1:] = u
    A[1, 0] = 1.0
    A[1, 1] = -1.0
    for k in range(K):
        A[2 + k, 0] = 1.0
        A[2 + k, 2 + k] = b.support[k]
    B = np.diag([0.0, 0.0] + [1.0] * K).astype(complex)
    finite, _ = dense_eigenvalues(A, B, extended=True)
    if len(finite) != K:
        raise NumericalError(
            f"expected {K} finite eigenvalues, got {len(finite)}")
    if _support_symmetric(b):
        poles, _ = pair_conjugates(finite, finite)
        return np.asarray(poles, dtype=complex)
    return np.sort_complex(finite)


def _support_symmetric(b):
    sup = set(complex(z) for z in b.support)
    return all(z.conjugate() in sup for z in sup)


def extract_residues(b, poles):
    """Abate-Whitt weights w with r(z) = sum w / (pole - z), via d'."""
    poles = np.asarray(poles, dtype=complex)
    for i, p in enumerate(poles):
        if np.min(np.abs(p - b.support)) <= 1e-12 * (1.0 + abs(p)):
            raise NumericalError("pole coincides with a support point")
        if np.any(np.abs(poles[i + 1:] - p) <= 1e-12 * (1.0 + abs(p))):
            raise ValueError("poles must be distinct")
    # The residue formula suffers heavy cancellation in binary64 (weights of
    # magnitude ~1e4 summing to O(1) values), so evaluate it in extended
    # precision and round the result.
    with mpmath.workdps(EXTENDED_DPS):
        us = [mpmath.mpc(x) for x in b.weights[1:]]
        fs = [mpmath.mpc(x) for x in b.values]
        zs = [mpmath.mpc(x) for x in b.support]
        w = np.empty(len(poles), dtype=complex)
        for i, p in enumerate(poles):
            pp = mpmath.mpc(p)
            inv = [1 / (pp - z) for z in zs]
            n = mpmath.fsum(u * f * q for u, f, q in zip(us, fs, inv))
            dprime = -mpmath.fsum(u * q * q for u, q in zip(us, inv))
            w[i] = complex(-n / dprime)
    # enforce exact conjugate residues at conjugate poles
    for i, p in enumerate(poles):
        if p.imag > 0:
            match = np.flatnonzero(poles == p.conjugate())
            if match.size:
                j = int(match[0])
                w[i] = 0.5 * (w[i] + w[j].conjugate())
                w[j] = w[i].conjugate()
    return w


def _domain_symmetric(domain):
    if isinstance(domain, Disc):
        return domain.center.imag == 0.0
    if isinstance(domain, (RealSegment, ImagSegment)):
        return True
    if isinstance(domain, Rectangle):
        return domain.y_min == -domain.y_max
    return False


def build_tame(domain, n_reduced_target, tol=0.0, count=1000, prune=True):
    """Fit e^z on the domain boundary and package poles/residues as a method.

    ``n_reduced_target`` is the targeted number of reduced-form entries;
    the AAA loop gets a budget of twice that many support points.  Every
    pole must end up strictly outside the closed domain.  Returns
    ``(method, metadata, report)`` with the method in reduced form when
    the domain is symmetric about the real axis (full form otherwise) and
    the metadata's epsilon re-measured on a 4x finer boundary grid.
    """
    if n_reduced_target < 1:
        raise ValueError("n_reduced_target must be >= 1")
    Z = discretize(domain, count)
    max_order = 2 * n_reduced_target
    first_failure = True
    while True:
        b, report = aaa_fit(np.exp, Z, max_order=max_order, tol=tol)
        try:
            poles = extract_poles(b)
        except (ValueError, NumericalError):
            # A budget far past the roundoff floor of the fit produces
            # spurious support points that degenerate the denominator
            # (u0 -> 0) or the pole pencil.  Refit with the order capped
            # at the floor the residual history shows was attainable,
            # then step down by 2 if that is still too optimistic.
            if max_order <= 2:
                raise
            if first_failure:
                first_failure = False
                floor = max(tol, 1e2 * U * float(np.max(np.abs(np.exp(Z.points)))))
                hit = [k for k, r in enumerate(report.residuals, start=1)
                       if r <= floor]
                cap = hit[0] if hit else max_order - 2
                max_order = min(max_order - 2, max(2, cap))
            else:
                max_order -= 2
            continue
        break
    weights = extract_residues(b, poles)
    if prune and len(weights):
        keep = np.abs(weights) >= 1e2 * U * np.max(np.abs(weights))
        poles, weights = poles[keep], weights[keep]
    symmetric = _domain_symmetric(domain)
    if symmetric:
        nodes, ws = pair_conjugates(poles, weights)
    else:
        nodes, ws = list(poles), list(weights)
    scale = domain_scale(domain)
    for p in nodes:
        if distance_to(domain, complex(p)) <= 1e-10 * scale:
            raise PoleInsideDomainError(
                f"pole {p} lies inside or on the domain {domain}")
    name = f"tame{n_reduced_target}@{format_domain(domain)}"
    full = AWMethod(name=name, weights=tuple(ws), nodes=tuple(nodes),
                    reduced=False)
    fine = discretize(domain, 4 * count)
    eps = _epsilon_on(full, fine.points)
    maxw = max(abs(w) for w in full.weights)
    meta = make_metadata(eps, maxw, domain)
    method = to_reduced(full) if symmetric else full
    return method, meta, report


def _epsilon_on(full_method, pts):
    w = np.asarray(full_method.weights)
    beta = np.asarray(full_method.nodes)
    R = (w[None, :] / (beta[None, :] - pts[:, None])).sum(axis=1)
    return float(np.max(np.abs(np.exp(pts) - R)))


# -- Table of precomputed quasi-optimal methods ------------------------------

#: (r_max, n_reduced) rows of the shipped preset family
PRESET_ROWS = ((0.6, 3), (1.8, 4), (4.0, 5), (7.0, 6),
               (11.2, 7), (16.8, 8), (22.7, 9), (31.6, 10))


def preset_filename(r_max, n_reduced):
    return f"tame_r{r_max:g}_n{n_reduced}.json"


def _preset_path(r_max, n_reduced):
    override = os.environ.get("AW_PRESET_DIR")
    if override:
        return os.path.join(override, preset_filename(r_max, n_reduced))
    return resources.files("awilt").joinpath("presets").joinpath(
        preset_filename(r_max, n_reduced))


def preset_entry(r_needed):
    """(method, metadata, r_max) for the smallest preset with r_max >= r."""
    if not r_needed > 0:
        raise ValueError("r_needed must be positive")
    for r_max, nprime in PRESET_ROWS:
        if r_max >= r_needed:
            m, meta = load_method(_preset_path(r_max, nprime))
            return m, meta, r_max
    raise ValueError(
        f"r_needed={r_needed} exceeds the largest preset radius "
        f"{PRESET_ROWS[-1][0]}; call build_tame for a custom domain")


def preset_tame(r_needed):
    return preset_entry(r_needed)[0]


def build_presets(out_dir, count=1000):
    """Regenerate the preset family; returns the written paths."""
    from .methods import save_method
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for r_max, nprime in PRESET_ROWS:
        method, meta, _ = build_tame(Disc(complex(-r_max), r_max), nprime,
                                     tol=0.0, count=count)
        path = os.path.join(out_dir, preset_filename(r_max, nprime))
        save_method(path, method, meta)
        paths.append(path)
    return paths
