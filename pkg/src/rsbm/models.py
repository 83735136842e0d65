"""Profile log-likelihoods of the standard, degree-corrected and regularized
stochastic block models, their estimators and single-move deltas.

All three objectives are instances of one family. With node factors ``I_i``
(used inside a block) and ``O_i`` (used across blocks), the Poisson rate is
``omega_rs I_i I_j`` or ``omega_rs O_i O_j`` and, at the MLE of ``omega``,

    L = sum_rs m_rs log(m_rs / Lambda_rs) + 2 sum_i (k+_i log I_i + k-_i log O_i)

with ``Lambda_rr = (sum_{i in r} I_i)^2`` and ``Lambda_rs = sum_r O * sum_s O``.
Sums over ``rs`` run over ordered block pairs and logs are natural.

Degenerate values never produce ``-inf`` or NaN: an ordered pair with
``m_rs > 0`` and ``Lambda_rs = 0`` contributes ``-10000``, and log arguments
of the node terms are floored at ``1e-10``. ``0 log 0`` is 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .blocks import BlockStats, Partition, compute_block_stats
from .graph import Multigraph

LOG_FLOOR = K.LOG_FLOOR
DEGENERATE_PAIR = K.DEGENERATE_PAIR


def _flog(x):
    return np.log(np.maximum(x, LOG_FLOOR))


def _xlogy(x, y):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x != 0, x * _flog(y), 0.0)


# ------------------------------------------------------------------ priors

@dataclass(frozen=True)
class PriorSpec:
    """Prior in-degree ratios ``f_i`` and node budgets ``theta_i``.

    ``alpha_form``: ``f(k) = alpha + (1 - alpha) / k``.
    ``floor_form``: ``f(k) = max(f, 1 / k)``.
    ``explicit``: per-node ``f_values``; ``theta`` defaults to the degrees.
    """

    kind: str
    alpha: float | None = None
    f: float | None = None
    f_values: tuple | None = None
    theta: tuple | None = None

    def __post_init__(self):
        if self.kind == "alpha_form":
            if self.alpha is None or not 0.0 <= self.alpha <= 1.0:
                raise ValueError("alpha_form needs alpha in [0, 1]")
        elif self.kind == "floor_form":
            if self.f is None or not 0.0 < self.f < 1.0:
                raise ValueError("floor_form needs f in (0, 1)")
        elif self.kind == "explicit":
            if self.f_values is None:
                raise ValueError("explicit prior needs f_values")
            fv = np.asarray(self.f_values, dtype=float)
            if np.any((fv < 0) | (fv > 1)):
                raise ValueError("f_values must lie in [0, 1]")
        else:
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if self.theta is not None and np.any(np.asarray(self.theta, dtype=float) <= 0):
            raise ValueError("theta must be positive")

    @classmethod
    def alpha_form(cls, alpha: float) -> "PriorSpec":
        return cls("alpha_form", alpha=float(alpha))

    @classmethod
    def floor_form(cls, f: float) -> "PriorSpec":
        return cls("floor_form", f=float(f))

    @classmethod
    def explicit(cls, f_values, theta=None) -> "PriorSpec":
        return cls("explicit", f_values=tuple(np.asarray(f_values, dtype=float).tolist()),
                   theta=None if theta is None else tuple(np.asarray(theta, dtype=float).tolist()))

    def with_theta(self, theta) -> "PriorSpec":
        return PriorSpec(self.kind, self.alpha, self.f, self.f_values,
                         tuple(np.asarray(theta, dtype=float).tolist()))

    def ratios(self, degree) -> np.ndarray:
        """``f_i`` per node. Isolated nodes get 1 (their terms vanish anyway)."""
        k = np.asarray(degree)
        if self.kind == "explicit":
            fv = np.asarray(self.f_values, dtype=float)
            if fv.shape != k.shape:
                raise ValueError("f_values length must equal node count")
            return fv
        out = np.ones(k.shape, dtype=float)
        pos = k > 0
        out[pos] = [prior_ratio(self, int(x)) for x in k[pos]]
        return out

    def thetas(self, degree) -> np.ndarray:
        k = np.asarray(degree, dtype=float)
        if self.theta is None:
            return k.copy()
        th = np.asarray(self.theta, dtype=float)
        if th.shape != k.shape:
            raise ValueError("theta length must equal node count")
        return th


def prior_ratio(spec: PriorSpec, k: int) -> float:
    """Prior in-degree ratio for a node of degree ``k >= 1``."""
    if k < 1:
        raise ValueError("prior ratio needs degree >= 1")
    if k == 1 and spec.kind in ("alpha_form", "floor_form"):
        return 1.0  # exact, so O_i is exactly 0 for leaves
    if spec.kind == "alpha_form":
        return spec.alpha + (1.0 - spec.alpha) / k
    if spec.kind == "floor_form":
        return max(spec.f, 1.0 / k)
    raise ValueError("prior_ratio is defined for alpha_form and floor_form only")


@dataclass(frozen=True, eq=False)
class NodeFactors:
    """Within-block factors ``I`` and across-block factors ``O``."""

    I: np.ndarray
    O: np.ndarray

    def __post_init__(self):
        I = np.asarray(self.I, dtype=float)
        O = np.asarray(self.O, dtype=float)
        if I.shape != O.shape or np.any(I < 0) or np.any(O < 0):
            raise ValueError("I and O must be nonnegative arrays of equal shape")
        object.__setattr__(self, "I", I)
        object.__setattr__(self, "O", O)

    @classmethod
    def from_prior(cls, spec: PriorSpec, degree) -> "NodeFactors":
        f = spec.ratios(degree)
        th = spec.thetas(degree)
        return cls(f * th, (1.0 - f) * th)

    @classmethod
    def unit(cls, n: int) -> "NodeFactors":
        return cls(np.ones(n), np.ones(n))

    @classmethod
    def degree(cls, degree) -> "NodeFactors":
        k = np.asarray(degree, dtype=float)
        return cls(k, k.copy())


# ------------------------------------------------------------------ models

@dataclass(frozen=True)
class Model:
    """Objective selector: ``ssbm``, ``dcsbm``, ``rsbm`` (needs ``prior``) or
    ``general`` (needs ``factors``)."""

    kind: str
    prior: PriorSpec | None = None
    factors: NodeFactors | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("ssbm", "dcsbm", "rsbm", "general"):
            raise ValueError(f"unknown model {self.kind!r}")
        if self.kind == "rsbm" and self.prior is None:
            raise ValueError("rsbm needs a PriorSpec")
        if self.kind == "general" and self.factors is None:
            raise ValueError("general model needs NodeFactors")

    @classmethod
    def ssbm(cls):
        return cls("ssbm")

    @classmethod
    def dcsbm(cls):
        return cls("dcsbm")

    @classmethod
    def rsbm(cls, prior: PriorSpec):
        return cls("rsbm", prior=prior)

    @classmethod
    def general(cls, factors: NodeFactors):
        return cls("general", factors=factors)

    def terms(self, degree):
        """Return ``(I, O, a, b)`` so the node part is ``2 sum(k+ a + k- b)``."""
        k = np.asarray(degree, dtype=float)
        n = len(k)
        if self.kind == "ssbm":
            return np.ones(n), np.ones(n), np.zeros(n), np.zeros(n)
        if self.kind == "dcsbm":
            return k.copy(), k.copy(), np.zeros(n), np.zeros(n)
        if self.kind == "rsbm":
            f = self.prior.ratios(degree)
            th = self.prior.thetas(degree)
            return f * th, (1.0 - f) * th, _flog(f), _flog(1.0 - f)
        I, O = self.factors.I, self.factors.O
        return I, O, _flog(I), _flog(O)

    def theta_term(self, degree) -> float:
        """``2 sum k log(theta / k)``: zero for theta = k, else the part of
        ``2 sum k log theta`` that is not a function of the degrees alone."""
        if self.kind != "rsbm" or self.prior.theta is None:
            return 0.0
        k = np.asarray(degree, dtype=float)
        th = self.prior.thetas(degree)
        pos = k > 0
        return float(2.0 * np.sum(k[pos] * np.log(th[pos] / k[pos])))


def _block_factor_sums(stats: BlockStats, I, O):
    B = stats.n_blocks
    return K.block_sums(I, stats.assignment, B), K.block_sums(O, stats.assignment, B)


def objective_terms(stats: BlockStats, model: Model) -> dict:
    """Objective with its breakdown into block, node and theta terms."""
    I, O, a, b = model.terms(stats.degree)
    SI, SO = _block_factor_sums(stats, I, O)
    block = float(K.pair_sum(stats.M, SI, SO))
    node = 2.0 * float(np.sum(np.where(stats.kplus != 0, stats.kplus * a, 0.0)
                              + np.where(stats.kminus != 0, stats.kminus * b, 0.0)))
    theta = model.theta_term(stats.degree)
    return {"block_term": block, "node_term": node, "theta_term": theta,
            "objective": block + node + theta}


def objective(stats: BlockStats, model: Model) -> float:
    return objective_terms(stats, model)["objective"]


def ssbm_objective(stats: BlockStats) -> float:
    """sum_rs m_rs log(m_rs / (n_r n_s))."""
    return objective(stats, Model.ssbm())


def dcsbm_objective(stats: BlockStats) -> float:
    """sum_rs m_rs log(m_rs / (kappa_r kappa_s))."""
    return objective(stats, Model.dcsbm())


def rsbm_objective(stats: BlockStats, spec: PriorSpec) -> float:
    """Regularized objective: block term minus twice the degree-weighted
    cross entropy between observed and prior in-degree ratios."""
    return objective(stats, Model.rsbm(spec))


def general_objective(stats: BlockStats, factors: NodeFactors) -> float:
    return objective(stats, Model.general(factors))


def information_form_objective(stats: BlockStats) -> float:
    """KL(p_degree || p_null) - 2 E_k[H(k+/k)].

    ``p_degree(r, s) = m_rs / 2m``; the null keeps within-block and
    across-block edge ends apart: ``(kappa+_r / 2m)^2`` on the diagonal and
    ``kappa-_r kappa-_s / (2m)^2`` off it.
    """
    two_m = stats.two_m
    if two_m <= 0:
        raise ValueError("information form needs at least one edge")
    M = stats.M.astype(float)
    kp, km = stats.kappa_plus.astype(float), stats.kappa_minus.astype(float)
    null = np.outer(km, km)
    np.fill_diagonal(null, kp ** 2)
    p = M / two_m
    q = null / two_m ** 2
    nz = p > 0
    kl = float(np.sum(p[nz] * np.log(p[nz] / q[nz])))
    k = stats.degree.astype(float)
    pos = k > 0
    x = stats.kplus[pos] / k[pos]
    H = -(_xlogy(x, x) + _xlogy(1 - x, 1 - x))
    expected_H = float(np.sum(k[pos] / two_m * H))
    return kl - 2.0 * expected_H


# ------------------------------------------------------------- estimators

def mle_omega(stats: BlockStats, factors: NodeFactors) -> np.ndarray:
    """``m_rs / Lambda_rs``; 0 where ``m_rs = 0``, ``inf`` where the estimate is
    degenerate (``m_rs > 0`` but ``Lambda_rs = 0``)."""
    SI, SO = _block_factor_sums(stats, factors.I, factors.O)
    lam = np.outer(SO, SO)
    np.fill_diagonal(lam, SI ** 2)
    M = stats.M.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        om = np.where(M > 0, M / lam, 0.0)
    return om


def dcsbm_mle_params(stats: BlockStats):
    """``(beta, omega)`` with ``beta_i = k_i / kappa_{g_i}`` and ``omega = M``.

    ``beta`` is NaN for nodes of blocks with zero total degree.
    """
    kap = stats.kappa[stats.assignment].astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(kap > 0, stats.degree / kap, np.nan)
    return beta, stats.M.astype(float)


def expected_degrees(stats: BlockStats, factors: NodeFactors) -> np.ndarray:
    """``sum_j lambda_ij`` under the fitted ``omega`` (self-loop mean doubled)."""
    g = stats.assignment
    SI, SO = _block_factor_sums(stats, factors.I, factors.O)
    M = stats.M.astype(float)
    internal = np.diag(M)
    external = M.sum(axis=1) - internal
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(internal > 0, internal / SI, 0.0)
        b = np.where(external > 0, external / SO, 0.0)
    return factors.I * a[g] + factors.O * b[g]


class ThetaFitError(RuntimeError):
    def __init__(self, msg, theta, residual):
        super().__init__(msg)
        self.theta = theta
        self.residual = residual


def fit_theta(stats: BlockStats, spec: PriorSpec, tol: float = 1e-10,
              max_iter: int = 10_000) -> np.ndarray:
    """Fixed point of ``k_i / theta_i = f_i m_rr / sum_r f theta +
    (1 - f_i) m_r,out / sum_r (1 - f) theta`` started from ``theta = k``.

    The solution is only defined up to one scale per block; the iterate
    reached from the degrees is returned.
    """
    k = stats.degree.astype(float)
    if np.any(k < 1):
        raise ValueError("fit_theta needs every node to have degree >= 1")
    f = spec.ratios(stats.degree)
    g = stats.assignment
    B = stats.n_blocks
    M = stats.M.astype(float)
    internal = np.diag(M)
    external = M.sum(axis=1) - internal
    theta = k.copy()
    rel = np.inf
    for _ in range(max_iter):
        SI = np.bincount(g, weights=f * theta, minlength=B)
        SO = np.bincount(g, weights=(1 - f) * theta, minlength=B)
        with np.errstate(divide="ignore", invalid="ignore"):
            a = np.where(internal > 0, internal / SI, 0.0)
            b = np.where(external > 0, external / SO, 0.0)
        rate = f * a[g] + (1 - f) * b[g]
        if np.any(rate <= 0) or not np.all(np.isfinite(rate)):
            raise ThetaFitError("fixed point undefined: a node has no active term",
                                theta, np.inf)
        new = k / rate
        rel = float(np.max(np.abs(new - theta) / new))
        theta = new
        if rel < tol:
            return theta
    raise ThetaFitError(f"no convergence after {max_iter} iterations", theta, rel)


# ------------------------------------------------------------------ deltas

def delta_objective(stats: BlockStats, node: int, to_block: int, model: Model,
                    g: Multigraph) -> float:
    """Change of the objective when ``node`` moves to ``to_block``.

    Only the rows and columns of the two blocks involved and the node's
    neighbors are touched; ``stats`` is left unchanged.
    """
    I, O, a, b = model.terms(stats.degree)
    s = stats.copy()
    B = s.n_blocks
    SI, SO = _block_factor_sums(s, I, O)
    return float(K.move_delta(node, to_block, g.indptr, g.indices, g.weights, s.assignment,
                              s.M, s.kappa, s.sizes, s.kplus, I, O, SI, SO,
                              K.nonzero_counts(I, s.assignment, B),
                              K.nonzero_counts(O, s.assignment, B), a - b))


def score_partition(g: Multigraph, p: Partition, model: Model) -> float:
    return objective(compute_block_stats(g, p), model)


def model_to_dict(model: Model) -> dict:
    """JSON-friendly description of a model (explicit factors excluded)."""
    if model.kind in ("ssbm", "dcsbm"):
        return {"kind": model.kind}
    if model.kind == "general":
        raise ValueError("general models with explicit factors are not serializable")
    p = model.prior
    d = {"kind": "rsbm", "prior": p.kind}
    if p.kind == "alpha_form":
        d["alpha"] = p.alpha
    elif p.kind == "floor_form":
        d["f"] = p.f
    else:
        d["f_values"] = list(p.f_values)
    if p.theta is not None:
        d["theta"] = list(p.theta)
    return d


def model_from_dict(d: dict) -> Model:
    kind = d.get("kind")
    if kind == "ssbm":
        return Model.ssbm()
    if kind == "dcsbm":
        return Model.dcsbm()
    if kind != "rsbm":
        raise ValueError(f"unknown model kind {kind!r}")
    prior = d.get("prior", "alpha_form")
    if prior == "alpha_form":
        spec = PriorSpec.alpha_form(d.get("alpha", 0.8))
    elif prior == "floor_form":
        spec = PriorSpec.floor_form(d["f"])
    elif prior == "explicit":
        spec = PriorSpec.explicit(d["f_values"])
    else:
        raise ValueError(f"unknown prior kind {prior!r}")
    if d.get("theta") is not None:
        spec = spec.with_theta(d["theta"])
    return Model.rsbm(spec)
