"""CTMC utilities, phase-type distributions, and fluid-queue transforms.

The fluid-queue first-return density transform psi_hat(s) is the minimal
solution of a nonsymmetric algebraic Riccati equation, obtained here from
the stable invariant subspace of a 2x2-block matrix followed by two Newton
refinement steps.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import RiccatiError, SpectralGapError
from .invert import Transform
from .numerics import matrix_exponential


@dataclass(frozen=True)
class GeneratorMatrix:
    Q: np.ndarray
    kind: str = "generator"          # generator | subgenerator
    lam: float = None                # uniformization rate

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        object.__setattr__(self, "Q", Q)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        scale = max(np.linalg.norm(Q), 1e-300)
        off = Q - np.diag(np.diag(Q))
        if np.min(off) < -1e-12 * scale:
            raise ValueError("off-diagonal entries must be nonnegative")
        rs = Q.sum(axis=1)
        if self.kind == "generator":
            if np.max(np.abs(rs)) > 1e-12 * scale:
                raise ValueError("generator rows must sum to zero")
        elif self.kind == "subgenerator":
            if np.max(rs) > 1e-12 * scale:
                raise ValueError("subgenerator rows must sum to <= 0")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")
        lam = self.lam
        dmax = float(np.max(np.abs(np.diag(Q))))
        if lam is None:
            lam = dmax
        elif lam < dmax * (1.0 - 1e-12):
            raise ValueError("uniformization rate below max |Q_ii|")
        object.__setattr__(self, "lam", float(lam))

    @property
    def dim(self):
        return self.Q.shape[0]


@dataclass(frozen=True)
class PhaseType:
    alpha: np.ndarray
    Q: np.ndarray                    # subgenerator

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        object.__setattr__(self, "alpha", alpha)
        GeneratorMatrix(self.Q, kind="subgenerator")  # validates
        object.__setattr__(self, "Q", np.asarray(self.Q, dtype=float))
        if np.any(alpha < 0) or abs(alpha.sum() - 1.0) > 1e-12:
            raise ValueError("alpha must be a stochastic vector")
        if np.any(self.exit_rates < -1e-12 * max(np.linalg.norm(self.Q), 1)):
            raise ValueError("exit rates must be nonnegative")

    @property
    def exit_rates(self):
        return -self.Q.sum(axis=1)

    @property
    def dim(self):
        return self.Q.shape[0]


def phase_type_transform(p):
    """(pdf transform, cdf transform) of a phase-type distribution."""
    Q = p.Q
    alpha = p.alpha
    q = p.exit_rates
    eye = np.eye(p.dim)
    eigs = tuple(np.linalg.eigvals(Q))

    def pdf(s):
        return complex(alpha @ np.linalg.solve(s * eye - Q, q))

    def cdf(s):
        return pdf(s) / s

    return (Transform(evaluator=pdf, conjugate_symmetric=True,
                      singularities=eigs, name="phase_type_pdf"),
            Transform(evaluator=cdf, conjugate_symmetric=True,
                      singularities=eigs + (0.0,), name="phase_type_cdf"))


def phase_type_ground_truth(p, t):
    """(pdf(t), cdf(t)) via the matrix exponential."""
    E = matrix_exponential(t * p.Q).real
    pdf = float(p.alpha @ E @ p.exit_rates)
    cdf = 1.0 - float(p.alpha @ E @ np.ones(p.dim))
    return pdf, cdf


@dataclass(frozen=True)
class FluidQueueModel:
    gen: GeneratorMatrix
    rates: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=float)
        object.__setattr__(self, "rates", r)
        if len(r) != self.gen.dim:
            raise ValueError("rates length must match generator dimension")
        if np.any(r == 0):
            raise ValueError("rates must be nonzero")
        if not (np.any(r > 0) and np.any(r < 0)):
            raise ValueError("need at least one positive and one negative rate")

    @property
    def plus_idx(self):
        return np.flatnonzero(self.rates > 0)

    @property
    def minus_idx(self):
        return np.flatnonzero(self.rates < 0)

    @property
    def d_plus(self):
        return len(self.plus_idx)

    @property
    def d_minus(self):
        return len(self.minus_idx)


def _riccati_blocks(model, s):
    Q = model.gen.Q
    C_inv = 1.0 / np.abs(model.rates)
    A = C_inv[:, None] * (Q - s * np.eye(model.gen.dim))
    ip, im = model.plus_idx, model.minus_idx
    return (A[np.ix_(ip, ip)], A[np.ix_(ip, im)],
            A[np.ix_(im, ip)], A[np.ix_(im, im)], A)


def _newton_refine(blocks, X, s, max_steps=5, min_steps=2):
    App, Apm, Amp, Amm = blocks

    def residual(X):
        return Apm + App @ X + X @ Amm + X @ Amp @ X

    def term_scale(X):
        # Backward-error denominator: the residual can only be expected to
        # reach roundoff relative to the magnitude of the NARE terms, which
        # is much larger than ||A|| when ||X|| is large (continuation at
        # Re s < 0 can make X big).
        nx = np.linalg.norm(X, np.inf)
        return (np.linalg.norm(Apm, np.inf)
                + np.linalg.norm(App, np.inf) * nx
                + nx * np.linalg.norm(Amm, np.inf)
                + nx * np.linalg.norm(Amp, np.inf) * nx)

    for k in range(max_steps):
        R = residual(X)
        if k >= min_steps and np.linalg.norm(R, np.inf) <= 1e-12 * term_scale(X):
            break
        try:
            delta = scipy.linalg.solve_sylvester(App + X @ Amp,
                                                 Amm + Amp @ X, -R)
        except Exception as exc:
            raise RiccatiError(f"Newton step failed at s={s}: {exc}") from None
        X = X + delta
    res = np.linalg.norm(residual(X), np.inf)
    if not np.isfinite(res) or res > 1e-12 * term_scale(X):
        raise RiccatiError(
            f"Riccati residual {res:.3e} exceeds 1e-12 of the term scale "
            f"at s={s}")
    return X


def _solve_psi_sorted(model, s, gap_rtol=1e-8):
    """Subspace solve selecting the d- eigenvalues of smallest real part.

    This is the minimal solution for Re(s) >= 0; for Re(s) < 0 the sorted
    selection can silently pick a different branch than the analytic
    continuation, so callers use :func:`solve_psi` instead.
    """
    App, Apm, Amp, Amm, _ = _riccati_blocks(model, s)
    dm = model.d_minus
    H = np.block([[Amm, Amp], [-Apm, -App]])
    vals, vecs = np.linalg.eig(H)
    order = np.argsort(vals.real, kind="stable")
    spread = max(float(vals.real.max() - vals.real.min()), 1.0)
    gap = vals.real[order[dm]] - vals.real[order[dm - 1]]
    if gap <= gap_rtol * spread:
        raise SpectralGapError(
            f"ambiguous eigenvalue splitting at s={s}: gap {gap:.3e}")
    V = vecs[:, order[:dm]]
    try:
        X = V[dm:, :] @ np.linalg.inv(V[:dm, :])
    except np.linalg.LinAlgError as exc:
        raise RiccatiError(f"singular subspace basis at s={s}: {exc}") from None
    return _newton_refine((App, Apm, Amp, Amm), X, s)


def solve_psi(model, s, gap_rtol=1e-8):
    """psi_hat(s): the d+ x d- minimal-solution matrix of the NARE.

    Solves A_pm + A_pp X + X A_mm + X A_mp X = 0 where A(s) is
    C^{-1}(Q - sI) partitioned by rate sign, C = diag(|r_i|).  For
    Re(s) >= 0 the solution comes from the invariant subspace of
    H = [[A_mm, A_mp], [-A_pm, -A_pp]] for the d- eigenvalues of smallest
    real part, refined by Newton steps (Sylvester solves).  For
    Re(s) < 0 that splitting no longer tracks the analytic continuation
    of psi_hat, so the solution is continued from |s| along the
    constant-radius arc to s, Newton-refining at each step.
    """
    s = complex(s)
    if s.real >= 0:
        return _solve_psi_sorted(model, s, gap_rtol=gap_rtol)
    radius = abs(s)
    theta = np.angle(s)
    X = _solve_psi_sorted(model, complex(radius), gap_rtol=gap_rtol)
    blocks = None
    steps = 16
    k = 0
    while k < steps:
        k += 1
        sk = radius * np.exp(1j * theta * k / steps)
        blocks = _riccati_blocks(model, sk)[:4]
        try:
            X = _newton_refine(blocks, X, sk, max_steps=12, min_steps=1)
        except RiccatiError:
            if steps >= 4096:
                raise
            # halve the step size and restart the failed step
            k = 2 * (k - 1)
            steps *= 2
    return X


def fluid_psi_transform(model):
    """(psi_hat transform, Psi_hat = psi_hat/s transform), matrix-valued."""
    def psi(s):
        return solve_psi(model, s)

    def Psi(s):
        return solve_psi(model, s) / s

    return (Transform(evaluator=psi, conjugate_symmetric=True,
                      name="fluid_psi"),
            Transform(evaluator=Psi, conjugate_symmetric=True,
                      singularities=(0.0,), name="fluid_Psi"))


def psi_infinity(model, s=1e-8):
    """Psi(inf) = lim_{s->0+} psi_hat(s), approximated at a small real s."""
    return solve_psi(model, s)


def make_experiment_model(d_plus, d_minus, seed, normalize=True):
    """Reproducible random fluid-queue model.

    Off-diagonal rates are |N(0,1)| draws (numpy default_rng, portable),
    diagonals are set for zero row sums; fluid rates are uniform on (0, 1]
    for the first d_plus states and [-1, 0) for the rest.  With
    ``normalize=True`` the generator is rescaled in time so that the
    uniformization rate is 1, matching the reference experiment setup.
    """
    rng = np.random.default_rng(seed)
    d = d_plus + d_minus
    Q = np.abs(rng.standard_normal((d, d)))
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    if normalize:
        Q = Q / np.max(np.abs(np.diag(Q)))
    rates = np.concatenate([1.0 - rng.random(d_plus),
                            -(1.0 - rng.random(d_minus))])
    return FluidQueueModel(gen=GeneratorMatrix(Q, kind="generator"),
                           rates=rates)
