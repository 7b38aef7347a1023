"""Single-shot IQ readout: synthesis, mixture fitting, population recovery.

A measurement record is a cloud of IQ-plane points, one 2D Gaussian blob
per ladder state.  This module draws synthetic records from a known
blob geometry, fits a Gaussian mixture to records by expectation
maximization, and converts within-1-sigma counts into corrected state
populations via a Monte Carlo confusion matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp

from .seeding import named_rng

STATE_LABELS = ("g", "e", "f", "h")
EM_MAX_ITER = 500
EM_RELTOL = 1e-8
COLLAPSE_DET_FLOOR = 1e-12
COND_LIMIT = 1e8
N_MC_DEFAULT = 100_000


class CovarianceCollapseError(RuntimeError):
    """A mixture component collapsed twice onto too few points."""


class SingularCorrectionError(RuntimeError):
    """Confusion matrix too ill-conditioned to invert (overlapping blobs)."""


@dataclass(frozen=True)
class ReadoutModel:
    """Per-state blob geometry: means (k,2), covariances (k,2,2), labels."""

    means: np.ndarray
    covariances: np.ndarray
    labels: tuple[str, ...] = STATE_LABELS

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        covs = np.asarray(self.covariances, dtype=float)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covs)
        k = means.shape[0]
        if means.shape != (k, 2) or covs.shape != (k, 2, 2):
            raise ValueError("means must be (k,2) and covariances (k,2,2)")
        if len(self.labels) != k:
            raise ValueError(f"{k} components but {len(self.labels)} labels")
        for j, c in enumerate(covs):
            if np.abs(c - c.T).max() > 1e-12 or np.linalg.eigvalsh(c).min() <= 0:
                raise ValueError(f"covariance {j} is not symmetric positive definite")

    @property
    def n_components(self) -> int:
        return self.means.shape[0]


def default_model(
    separation: float = 3.0, sigma: float = 1.0, h_scale: float = 2.0
) -> ReadoutModel:
    """Benchmark blob geometry.

    Four means on a circle at 90 degree spacing with adjacent means
    ``separation`` sigma apart, isotropic covariance sigma^2, and the
    h-state cloud broadened by ``h_scale``.
    """
    if separation <= 0 or sigma <= 0 or h_scale <= 0:
        raise ValueError("separation, sigma and h_scale must be positive")
    radius = separation * sigma / math.sqrt(2.0)
    angles = np.deg2rad([0.0, 90.0, 180.0, 270.0])
    means = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    covs = np.repeat(np.eye(2)[None] * sigma**2, 4, axis=0)
    covs[3] *= h_scale
    return ReadoutModel(means=means, covariances=covs)


def synthesize_shots(
    populations,
    model: ReadoutModel,
    n_shots: int,
    seed: int = 0,
    return_states: bool = False,
):
    """Draw n_shots IQ points from the mixture defined by ``populations``.

    States are sampled first (one categorical draw per shot), then each
    point from its blob's Gaussian, all from the named sub-stream
    ("shots", seed).  Returns an (n,2) array, plus the state index per
    shot when ``return_states``.
    """
    p = np.asarray(populations, dtype=float)
    if p.shape != (model.n_components,):
        raise ValueError(f"populations must have shape ({model.n_components},)")
    if p.min() < 0 or p.sum() <= 0:
        raise ValueError("populations must be non-negative with positive sum")
    if n_shots < 1:
        raise ValueError(f"n_shots must be positive, got {n_shots}")
    p = p / p.sum()

    rng = named_rng(seed, "shots")
    states = rng.choice(model.n_components, size=n_shots, p=p)
    z = rng.standard_normal((n_shots, 2))
    chol = np.linalg.cholesky(model.covariances)  # (k,2,2)
    shots = model.means[states] + np.einsum("nij,nj->ni", chol[states], z)
    if return_states:
        return shots, states
    return shots


def fraction_within_sigma(m: float = 1.0) -> float:
    """Probability mass of a 2D Gaussian within Mahalanobis radius m.

    Closed form 1 - exp(-m^2/2); the 1-sigma ellipse captures 39.34%.
    """
    if m < 0:
        raise ValueError(f"radius must be non-negative, got {m}")
    return 1.0 - math.exp(-0.5 * m * m)


def mahalanobis_sq(points, mean, cov) -> np.ndarray:
    """Squared Mahalanobis distance of each point to (mean, cov)."""
    diff = np.asarray(points, dtype=float) - np.asarray(mean, dtype=float)
    sol = np.linalg.solve(np.asarray(cov, dtype=float), diff.T)
    return np.einsum("ni,in->n", diff, sol)


@dataclass
class GmmModel:
    """Gaussian mixture fitted by EM.

    loglik_history holds the EM objective after every iteration -- the
    data log likelihood, plus the calibration-prior log density when the
    fit is anchored.  EM guarantees the objective never decreases, and
    the tests hold it to that.  ``loglik`` is always the plain data log
    likelihood of the returned parameters.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    labels: tuple[str, ...]
    loglik: float
    converged: bool
    n_iter: int
    loglik_history: np.ndarray = field(repr=False, default=None)

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    def as_readout_model(self) -> ReadoutModel:
        return ReadoutModel(
            means=self.means.copy(),
            covariances=self.covariances.copy(),
            labels=self.labels,
        )


def _log_gaussian(shots, mean, cov):
    diff = shots - mean
    det = np.linalg.det(cov)
    sol = np.linalg.solve(cov, diff.T)
    maha = np.einsum("ni,in->n", diff, sol)
    return -math.log(2.0 * math.pi) - 0.5 * math.log(det) - 0.5 * maha


def _kmeanspp_init(shots, k, rng):
    # D^2-weighted center choice, then one nearest-center partition for
    # the starting covariances.
    n = shots.shape[0]
    centers = [shots[rng.integers(n)]]
    for _ in range(k - 1):
        d2 = np.min(
            [np.sum((shots - c) ** 2, axis=1) for c in centers], axis=0
        )
        total = d2.sum()
        probs = d2 / total if total > 0 else np.full(n, 1.0 / n)
        centers.append(shots[rng.choice(n, p=probs)])
    means = np.array(centers)
    assign = np.argmin(
        ((shots[:, None, :] - means[None]) ** 2).sum(axis=2), axis=1
    )
    global_cov = np.cov(shots.T) + 1e-6 * np.eye(2)
    covs = np.empty((k, 2, 2))
    weights = np.empty(k)
    for j in range(k):
        pts = shots[assign == j]
        weights[j] = max(pts.shape[0], 1) / n
        covs[j] = np.cov(pts.T) if pts.shape[0] > 2 else global_cov
        if np.linalg.det(covs[j]) <= 0:
            covs[j] = global_cov
    return weights / weights.sum(), means, covs


def _log_anchor_prior(means, covs, m0, psi0, kappa0, nu0):
    # Normal-inverse-Wishart log density up to parameter-independent
    # constants: the quantity EM-MAP is guaranteed to ascend is the data
    # log likelihood plus this.
    d = means.shape[1]
    total = 0.0
    for j in range(means.shape[0]):
        inv = np.linalg.inv(covs[j])
        diff = means[j] - m0[j]
        total += (
            -0.5 * (nu0 + d + 2) * math.log(np.linalg.det(covs[j]))
            - 0.5 * float(np.trace(psi0[j] @ inv))
            - 0.5 * kappa0 * float(diff @ inv @ diff)
        )
    return total


def fit_gmm(
    shots,
    n_components: int = 4,
    init: ReadoutModel | None = None,
    seed: int = 0,
    anchor: float | None = None,
) -> GmmModel:
    """Expectation-maximization fit of a Gaussian mixture to IQ shots.

    Initialized from calibration blob geometry when ``init`` is given
    (component labels are then matched back to the calibration labels by
    nearest means), else by seeded k-means++ (components labelled by
    decreasing weight).  Iterates until the relative change of the
    objective drops below 1e-8 or 500 iterations.  A component whose
    covariance determinant falls below 1e-12 of the data scale is
    re-seeded once; a second collapse raises CovarianceCollapseError.

    Parameters
    ----------
    anchor : float, optional
        Strength, in effective shots, of a conjugate
        Normal-inverse-Wishart prior holding each component's mean and
        covariance near the calibration geometry (MAP EM).  Defaults to
        200 when ``init`` is given and 0 (plain maximum likelihood)
        otherwise.  Without it, a component holding a few dozen shots
        next to a thousandfold-larger cloud is free to wander off and
        model the big cloud's tails instead; anchoring also keeps the
        seed-to-seed wobble of the 1-sigma ellipses from inflating the
        variance of the population estimator downstream.
    """
    shots = np.asarray(shots, dtype=float)
    if shots.ndim != 2 or shots.shape[1] != 2:
        raise ValueError(f"shots must be (n, 2), got {shots.shape}")
    n = shots.shape[0]
    k = n_components
    d = 2
    if n < 10 * k:
        raise ValueError(f"need at least {10 * k} shots to fit {k} components")

    rng = named_rng(seed, "gmm-init")
    if init is not None:
        if init.n_components != k:
            raise ValueError("init model component count mismatch")
        weights = np.full(k, 1.0 / k)
        means = init.means.copy()
        covs = init.covariances.copy()
    else:
        weights, means, covs = _kmeanspp_init(shots, k, rng)

    if anchor is None:
        anchor = 200.0 if init is not None else 0.0
    if anchor < 0:
        raise ValueError(f"anchor must be non-negative, got {anchor}")
    if anchor > 0 and init is None:
        raise ValueError("anchor requires an init model to anchor to")
    anchored = anchor > 0
    if anchored:
        kappa0 = nu0 = float(anchor)
        m0 = init.means.copy()
        # scaled so the no-data mode of the covariance is exactly the
        # calibration covariance
        psi0 = (nu0 + d + 2) * init.covariances.copy()

    data_scale = float(np.var(shots, axis=0).sum())
    det_floor = COLLAPSE_DET_FLOOR * data_scale**2
    reseeded = np.zeros(k, dtype=bool)

    history = []
    prev_obj = -math.inf
    converged = False
    just_reseeded = False
    it = 0
    for it in range(1, EM_MAX_ITER + 1):
        # E step
        log_resp = np.empty((n, k))
        for j in range(k):
            log_resp[:, j] = math.log(weights[j]) + _log_gaussian(
                shots, means[j], covs[j]
            )
        norm = logsumexp(log_resp, axis=1)
        ll = float(norm.sum())
        obj = ll
        if anchored:
            obj += _log_anchor_prior(means, covs, m0, psi0, kappa0, nu0)
        resp = np.exp(log_resp - norm[:, None])

        # EM ascent guarantee; a reseed restarts the sequence
        if (
            history
            and not just_reseeded
            and obj < history[-1] - 1e-10 * abs(history[-1])
        ):
            raise RuntimeError(
                f"EM objective decreased at iteration {it}: "
                f"{history[-1]} -> {obj}"
            )
        history.append(obj)
        just_reseeded = False

        # M step
        nk = resp.sum(axis=0)
        weights = nk / n
        xbar = (resp.T @ shots) / nk[:, None]
        if anchored:
            means = (kappa0 * m0 + nk[:, None] * xbar) / (kappa0 + nk)[:, None]
            for j in range(k):
                diff = shots - xbar[j]
                s_j = (resp[:, j][:, None] * diff).T @ diff
                pull = xbar[j] - m0[j]
                shrink = kappa0 * nk[j] / (kappa0 + nk[j])
                covs[j] = (psi0[j] + s_j + shrink * np.outer(pull, pull)) / (
                    nu0 + nk[j] + d + 2
                )
        else:
            means = xbar
            for j in range(k):
                diff = shots - means[j]
                covs[j] = (resp[:, j][:, None] * diff).T @ diff / nk[j]

        collapsed = [j for j in range(k) if np.linalg.det(covs[j]) < det_floor]
        for j in collapsed:
            if reseeded[j]:
                raise CovarianceCollapseError(
                    f"component {j} collapsed twice (det < {det_floor:.3e})"
                )
            reseeded[j] = True
            means[j] = shots[rng.integers(n)]
            covs[j] = np.cov(shots.T) + 1e-6 * np.eye(2)
            weights[j] = 1.0 / k
            weights = weights / weights.sum()
            prev_obj = -math.inf  # restart the convergence window
            just_reseeded = True

        if not collapsed:
            if abs(obj - prev_obj) <= EM_RELTOL * abs(obj):
                converged = True
                break
            prev_obj = obj

    if init is not None:
        # match fitted components back to the calibration labels
        dist = np.linalg.norm(means[:, None, :] - init.means[None], axis=2)
        rows, cols = linear_sum_assignment(dist)
        labels = tuple(init.labels[c] for c in cols[np.argsort(rows)])
    else:
        order = np.argsort(-weights)
        rank = np.empty(k, dtype=int)
        rank[order] = np.arange(k)
        labels = tuple(STATE_LABELS[r] if k == 4 else str(r) for r in rank)

    return GmmModel(
        weights=weights,
        means=means,
        covariances=covs,
        labels=labels,
        loglik=ll,
        converged=converged,
        n_iter=it,
        loglik_history=np.array(history),
    )


@dataclass(frozen=True)
class PopulationEstimate:
    """Corrected populations with their raw ellipse counts."""

    populations: np.ndarray
    raw_counts: np.ndarray
    correction: np.ndarray  # (k, k) Monte Carlo confusion matrix
    labels: tuple[str, ...]
    condition_number: float


def correction_matrix(
    model, n_mc: int = N_MC_DEFAULT, seed: int = 0
) -> np.ndarray:
    """Monte Carlo confusion matrix M_ij.

    M_ij is the probability that a draw from blob j falls inside the
    1-sigma ellipse of blob i, estimated from n_mc (>= 1e5) draws per
    component on the ("correction", j) sub-streams.
    """
    if n_mc < N_MC_DEFAULT:
        raise ValueError(f"n_mc must be at least {N_MC_DEFAULT}, got {n_mc}")
    means, covs = np.asarray(model.means), np.asarray(model.covariances)
    k = means.shape[0]
    m = np.empty((k, k))
    chol = np.linalg.cholesky(covs)
    for j in range(k):
        rng = named_rng(seed, "correction", j)
        pts = means[j] + rng.standard_normal((n_mc, 2)) @ chol[j].T
        for i in range(k):
            m[i, j] = float(np.mean(mahalanobis_sq(pts, means[i], covs[i]) <= 1.0))
    return m


def estimate_populations(
    shots,
    model,
    n_mc: int = N_MC_DEFAULT,
    seed: int = 0,
) -> PopulationEstimate:
    """Populations from within-1-sigma counts, confusion-corrected.

    Counts how many shots fall inside each component's 1-sigma ellipse
    (a shot may land in several or none), solves M p = counts/n with the
    Monte Carlo confusion matrix, clips negatives and renormalizes.

    Raises SingularCorrectionError when cond(M) > 1e8, which is what
    heavily overlapping blob geometries produce.
    """
    shots = np.asarray(shots, dtype=float)
    means = np.asarray(model.means)
    covs = np.asarray(model.covariances)
    k = means.shape[0]

    counts = np.array(
        [
            int(np.sum(mahalanobis_sq(shots, means[i], covs[i]) <= 1.0))
            for i in range(k)
        ],
        dtype=float,
    )

    m = correction_matrix(model, n_mc=n_mc, seed=seed)
    cond = float(np.linalg.cond(m))
    if cond > COND_LIMIT:
        raise SingularCorrectionError(
            f"confusion matrix condition number {cond:.3e} exceeds {COND_LIMIT:.0e}"
        )

    p = np.linalg.solve(m, counts / shots.shape[0])
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if total <= 0:
        raise SingularCorrectionError("corrected populations sum to zero")
    labels = tuple(getattr(model, "labels", tuple(str(i) for i in range(k))))
    return PopulationEstimate(
        populations=p / total,
        raw_counts=counts,
        correction=m,
        labels=labels,
        condition_number=cond,
    )
