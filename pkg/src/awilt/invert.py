"""Evaluate an Abate-Whitt method against a Laplace-transform callable."""

from dataclasses import dataclass, field

import numpy as np

from .errors import NodeCollisionError, NumericalError
from .methods import to_full


@dataclass(frozen=True)
class Transform:
    """A Laplace transform 𝓛f as a callable s -> complex (or matrix).

    ``conjugate_symmetric`` declares 𝓛f(conj s) = conj 𝓛f(s), which holds
    whenever f is real-valued; it is required for reduced-form inversion.
    ``singularities`` lists known poles/branch points of 𝓛f used for
    node-collision checks.  ``concurrency_safe`` declares whether the
    evaluator may be called from several threads at once (this package
    evaluates sequentially, but callers may not).
    """
    evaluator: object
    conjugate_symmetric: bool = False
    singularities: tuple = ()
    concurrency_safe: bool = True
    name: str = ""

    def __call__(self, s):
        return self.evaluator(s)


def _check_collisions(m, transform, t):
    sing = transform.singularities
    if not sing:
        return
    for b in m.nodes:
        s = b / t
        for s0 in sing:
            if abs(s - s0) <= 1e-10 * max(1.0, abs(s0)):
                raise NodeCollisionError(
                    f"node {b}/t collides with singularity {s0} at t={t}")
        if m.reduced:
            sc = s.conjugate()
            for s0 in sing:
                if abs(sc - s0) <= 1e-10 * max(1.0, abs(s0)):
                    raise NodeCollisionError(
                        f"node conj({b})/t collides with singularity {s0} "
                        f"at t={t}")


def invert(m, transform, t, _cache=None):
    """f_N(t): full form sum (w/t) F(b/t); reduced form sum Re((w'/t) F(b/t)).

    Returns a real scalar / real array for reduced methods, a complex
    scalar / complex array for full-form methods.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if m.reduced and not transform.conjugate_symmetric:
        raise ValueError("reduced-form inversion needs a conjugate-symmetric "
                         "transform")
    _check_collisions(m, transform, t)
    cache = _cache if _cache is not None else {}
    vals = []
    for b in m.nodes:
        s = complex(b) / t
        key = (s.real, s.imag)
        if key not in cache:
            cache[key] = np.asarray(transform(s))
        vals.append(cache[key])
    w = np.asarray(m.weights)
    if vals[0].ndim == 0:
        terms = w * np.array([complex(v) for v in vals])
        if m.reduced:
            return float(np.sum(terms.real) / t)
        return complex(np.sum(terms) / t)
    stack = np.stack([np.asarray(v, dtype=complex) for v in vals])
    terms = w.reshape((-1,) + (1,) * vals[0].ndim) * stack
    if m.reduced:
        return np.sum(terms.real, axis=0) / t
    return np.sum(terms, axis=0) / t


@dataclass(frozen=True)
class CurvePoint:
    t: float
    value: object = None
    error: str = None


def invert_curve(m, transform, ts):
    """Pointwise inversion over a t-grid; per-point failures are flagged
    in the output instead of aborting the curve.  Transform evaluations
    are cached across the whole call keyed by the exact value of b/t."""
    ts = list(ts)
    if not ts:
        raise ValueError("empty t-grid")
    if any(not t > 0 for t in ts):
        raise ValueError("all t must be positive")
    cache = {}
    out = []
    for t in ts:
        try:
            out.append(CurvePoint(t=float(t),
                                  value=invert(m, transform, t, _cache=cache)))
        except (NumericalError, FloatingPointError, ZeroDivisionError,
                OverflowError) as exc:
            out.append(CurvePoint(t=float(t), error=str(exc)))
    return out
