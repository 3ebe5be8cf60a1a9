"""Exact spectral oracles for counting statistics.

Nystrom discretization of a scalar kernel on Gauss-Legendre nodes, a
deterministic cyclic Jacobi eigensolver, the Bernoulli-sum counting
distribution (pmf by sequential convolution), the Fredholm generating
function, a Parlett-Reid Pfaffian, correlation functions, and two analytic
cross-checks (Ginibre disk eigenvalues, scaled Legendre normalization).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels as _kernels
from . import specfun
from .specfun import QuadratureRule, gauss_legendre, incomplete_gamma_ratio

__all__ = [
    "DiscretizedKernel",
    "Spectrum",
    "CountDistribution",
    "SpectrumRangeError",
    "TruncationError",
    "discretize",
    "spectrum",
    "eigensystem",
    "jacobi_eigh",
    "count_distribution",
    "tail",
    "exp_moment_sq",
    "exp_moment_sq_bracket",
    "generating_function",
    "pfaffian",
    "correlation_function",
    "ginibre_disk_eigenvalues",
    "ginibre_disk_nystrom_eigenvalues",
    "legendre_partition",
]


class SpectrumRangeError(RuntimeError):
    """Raw eigenvalue too far outside [0, 1]: discretization is unconverged."""


class TruncationError(RuntimeError):
    """Truncated spectral mass cannot certify the requested quantity."""


@dataclass(frozen=True)
class DiscretizedKernel:
    rule: QuadratureRule
    matrix: np.ndarray
    kernel_id: str
    window: tuple

    @property
    def trace(self):
        return float(np.trace(self.matrix))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of the restricted kernel: HKPV Bernoulli success probabilities."""

    eigenvalues: np.ndarray
    raw_out_of_range: float

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", ev)
        if ev.size and (ev.min() < 0.0 or ev.max() > 1.0):
            raise ValueError("eigenvalues must be clipped to [0, 1]")
        if np.any(np.diff(ev) > 0):
            raise ValueError("eigenvalues must be descending")

    def to_json_dict(self):
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "raw_out_of_range": float(self.raw_out_of_range),
        }


@dataclass(frozen=True)
class CountDistribution:
    pmf: np.ndarray
    truncation_error_bound: float
    n_truncated: int = 0          # dropped Bernoulli components (caps the support)

    def __post_init__(self):
        p = np.asarray(self.pmf, dtype=float)
        object.__setattr__(self, "pmf", p)
        if np.any(p < 0):
            raise ValueError("pmf entries must be nonnegative")
        if abs(float(p.sum()) - 1.0) > 1e-10:
            raise ValueError("pmf must sum to 1 within 1e-10")

    def to_json_dict(self):
        return {
            "pmf": [float(v) for v in self.pmf],
            "truncation_error_bound": float(self.truncation_error_bound),
        }


# ---------------------------------------------------------------------------
# Nystrom discretization
# ---------------------------------------------------------------------------

def _kernel_gram(spec, xs):
    if hasattr(spec, "kind"):
        return _kernels.kernel_matrix(spec, xs)
    # plain callable kernel (x, y) -> value, used by tests and custom kernels
    n = len(xs)
    m = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            v = float(spec(xs[i], xs[j]))
            m[i, j] = v
            m[j, i] = v
    return m


def discretize(spec, window, order):
    """Symmetrized Nystrom matrix sqrt(w_i w_j) Pi(x_i, x_j) on a GL rule."""
    order = int(order)
    if order < 8:
        raise ValueError("need order >= 8")
    rule = gauss_legendre(order, window.a, window.b)
    gram = _kernel_gram(spec, rule.nodes)
    sw = np.sqrt(rule.weights)
    mat = sw[:, None] * gram * sw[None, :]
    mat = 0.5 * (mat + mat.T)
    ident = spec.identifier if hasattr(spec, "identifier") else "custom"
    return DiscretizedKernel(rule, mat, ident, (float(window.a), float(window.b)))


# ---------------------------------------------------------------------------
# cyclic Jacobi eigensolver (round-robin parallel ordering, deterministic)
# ---------------------------------------------------------------------------

def _round_robin_pairs(n):
    """Tournament schedule: n-1 rounds of floor(n/2) disjoint pairs covering
    every index pair exactly once."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)
                 if players[i] >= 0 and players[m - 1 - i] >= 0]
        rounds.append([(min(p, q), max(p, q)) for p, q in pairs])
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a, want_vectors=False, tol=1e-14, max_sweeps=50):
    """Eigenvalues (and optionally vectors) of a symmetric matrix by cyclic
    Jacobi sweeps.  Stops when the off-diagonal Frobenius norm drops below
    tol or after max_sweeps.  The rotation order is a fixed round-robin,
    so results are bit-reproducible; rotations within one round act on
    disjoint index pairs and are applied as a single orthogonal similarity.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        return (a.ravel().copy(), np.ones((1, 1))) if want_vectors else a.ravel().copy()
    v = np.eye(n) if want_vectors else None
    rounds = _round_robin_pairs(n)
    skip = tol / (4.0 * n)
    for _ in range(max_sweeps):
        # off-diagonal Frobenius norm, summed directly (the subtraction form
        # ||A||_F^2 - ||diag||^2 cancels catastrophically near convergence)
        hollow = a - np.diag(np.diag(a))
        off = math.sqrt(float(np.sum(hollow * hollow)))
        if off < tol:
            break
        for pairs in rounds:
            ps = np.array([p for p, q in pairs])
            qs = np.array([q for p, q in pairs])
            apq = a[ps, qs]
            act = np.abs(apq) > skip
            if not np.any(act):
                continue
            ps, qs, apq = ps[act], qs[act], apq[act]
            app = a[ps, ps]
            aqq = a[qs, qs]
            tau = (aqq - app) / (2.0 * apq)
            t = np.sign(tau) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            t[tau == 0.0] = 1.0
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            rp = a[ps, :].copy()
            rq = a[qs, :].copy()
            a[ps, :] = c[:, None] * rp - s[:, None] * rq
            a[qs, :] = s[:, None] * rp + c[:, None] * rq
            cp = a[:, ps].copy()
            cq = a[:, qs].copy()
            a[:, ps] = cp * c[None, :] - cq * s[None, :]
            a[:, qs] = cp * s[None, :] + cq * c[None, :]
            a[ps, qs] = 0.0
            a[qs, ps] = 0.0
            if want_vectors:
                vp = v[:, ps].copy()
                vq = v[:, qs].copy()
                v[:, ps] = vp * c[None, :] - vq * s[None, :]
                v[:, qs] = vp * s[None, :] + vq * c[None, :]
    evals = np.diag(a).copy()
    if want_vectors:
        return evals, v
    return evals


_RANGE_BAND = 1e-6


def _spectrum_from_raw(raw, vectors=None):
    order = np.argsort(-raw)
    raw = raw[order]
    viol = max(0.0, float(-raw.min()), float(raw.max() - 1.0))
    if viol > _RANGE_BAND:
        raise SpectrumRangeError(
            f"raw eigenvalue outside [-1e-6, 1+1e-6] by {viol:.3e}; raise the quadrature order")
    spec = Spectrum(np.clip(raw, 0.0, 1.0), viol)
    if vectors is None:
        return spec
    return spec, vectors[:, order]


def spectrum(d):
    """Spectrum of a DiscretizedKernel, eigenvalues descending and clipped."""
    return _spectrum_from_raw(jacobi_eigh(d.matrix))


def eigensystem(d):
    """(Spectrum, eigenvector matrix) with columns matching the eigenvalues."""
    raw, vectors = jacobi_eigh(d.matrix, want_vectors=True)
    return _spectrum_from_raw(raw, vectors)


# ---------------------------------------------------------------------------
# counting distribution of the independent-Bernoulli representation
# ---------------------------------------------------------------------------

_EIGEN_FLOOR = 1e-16


def effective_eigen_floor(s):
    """Pinned floor 1e-16, widened to the eigensolver noise scale.

    A double-precision eigensolve perturbs eigenvalues at absolute scale
    ~ n*eps*||A||, so retaining everything above the bare 1e-16 floor would
    keep pure numerical noise as fake Bernoulli components.
    """
    n = len(s.eigenvalues)
    lam_max = float(s.eigenvalues[0]) if n else 1.0
    return max(_EIGEN_FLOOR, 8.0 * n * np.finfo(float).eps * max(lam_max, 1e-30))


def count_distribution(s):
    """pmf of the particle count: convolution of Bernoulli(lambda_k)."""
    floor = effective_eigen_floor(s)
    lams = [float(v) for v in s.eigenvalues if v > floor]
    small = [float(v) for v in s.eigenvalues if 0.0 < v <= floor]
    pmf = np.array([1.0])
    for lam in lams:
        nxt = np.zeros(pmf.size + 1)
        nxt[:-1] = pmf * (1.0 - lam)
        nxt[1:] += pmf * lam
        pmf = nxt
    return CountDistribution(pmf, float(sum(small)) + s.raw_out_of_range, len(small))


def tail(c, n):
    """Certified upper value of P(count >= n)."""
    n = int(n)
    if n <= 0:
        return 1.0
    base = float(np.sum(c.pmf[n:])) if n < c.pmf.size else 0.0
    return min(1.0, base + c.truncation_error_bound)


def exp_moment_sq(c, lam):
    """E exp(lam * count^2) as a plain pmf sum.

    Guard (as contracted): exp(lam N^2) * truncation_error_bound must stay
    below 1e-10 of the running sum, otherwise the truncated mass could move
    the answer and a TruncationError is raised; use exp_moment_sq_bracket
    for a certified two-sided answer at large lam.
    """
    lam = float(lam)
    if lam < 0:
        raise ValueError("need lam >= 0")
    big_n = c.pmf.size - 1
    total = float(np.sum(np.exp(lam * np.arange(c.pmf.size) ** 2.0) * c.pmf))
    trunc = c.truncation_error_bound
    if trunc > 0.0:
        log_guard = lam * big_n * big_n + math.log(trunc)
        if log_guard > math.log(1e-10 * total):
            raise TruncationError(
                "truncated spectral mass is uncontrolled at this lambda "
                f"(guard exp({log_guard:.3g}) vs 1e-10*sum)")
    return total


def exp_moment_sq_bracket(c, lam, tail_log_fn=None):
    """Certified bracket (log_lower, log_upper) for log E exp(lam * count^2).

    log_lower is the plain pmf sum over the retained Bernoulli components.
    The upper side adds two rigorous corrections for the truncated spectral
    mass T (the count is retained + J with J an independent Poisson-binomial
    of total mass T over n_truncated components, so the full support is
    [0, N + n_truncated]):

    - perturbation/dropped mass inflates the moment by at most
      exp(T * e^{lam (2N+1)}) while the count stays within the retained range;
    - a count of N + j needs j dropped components to fire:
      P(# >= N + j) <= min(1, T^j/j!, exp(tail_log_fn(N + j))); the last
      entry is the analytic divided-difference chain, the only handle below
      the double-precision spectral noise floor.
    """
    lam = float(lam)
    s_low = float(np.sum(np.exp(lam * np.arange(c.pmf.size) ** 2.0) * c.pmf))
    big_n = c.pmf.size - 1
    log_up = math.log(s_low)
    t = c.truncation_error_bound
    if t > 0.0:
        log_up += t * math.exp(min(700.0, lam * (2 * big_n + 1)))
    if t > 0.0 and c.n_truncated > 0:
        log_t = math.log(t)
        # counts beyond the retained support need j = k - N of the dropped
        # components to fire, and the support is capped at N + n_truncated
        terms = []
        for j in range(1, c.n_truncated + 1):
            k = big_n + j
            cap = min(0.0, j * log_t - math.lgamma(j + 1.0))
            if tail_log_fn is not None:
                cap = min(cap, tail_log_fn(k))
            terms.append(lam * k * k + cap)
        peak = max(terms)
        if peak > -math.inf:
            extra = peak + math.log(sum(math.exp(v - peak) for v in terms))
            log_up = float(np.logaddexp(log_up, extra))
    return math.log(s_low), log_up


def generating_function(s, z):
    """prod_k (1 + (z - 1) lambda_k), the Fredholm-type generating function."""
    z = float(z)
    return float(np.prod(1.0 + (z - 1.0) * np.asarray(s.eigenvalues)))


# ---------------------------------------------------------------------------
# Pfaffian via Parlett-Reid tridiagonalization with partial pivoting
# ---------------------------------------------------------------------------

def pfaffian(m):
    """Pfaffian of a real skew-symmetric matrix; odd dimension gives 0."""
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need a square matrix")
    n = a.shape[0]
    if n == 0:
        return 1.0
    if float(np.max(np.abs(a + a.T))) > 1e-12:
        raise ValueError("matrix is not skew-symmetric within 1e-12")
    if n % 2 == 1:
        return 0.0
    pf = 1.0
    for k in range(0, n - 2, 2):
        # pivot the largest entry of row k into position k+1
        rel = int(np.argmax(np.abs(a[k, k + 1:])))
        piv = k + 1 + rel
        if a[k, piv] == 0.0:
            return 0.0
        if piv != k + 1:
            a[[k + 1, piv], :] = a[[piv, k + 1], :]
            a[:, [k + 1, piv]] = a[:, [piv, k + 1]]
            pf = -pf
        alpha = a[k, k + 1]
        pf *= alpha
        # zero row/col k beyond k+1 using row/col k+1, then row/col k+1
        # beyond k+1 using row/col k; Gauss transforms leave Pf invariant
        mu = a[k, k + 2:] / alpha
        a[:, k + 2:] -= np.outer(a[:, k + 1], mu)
        a[k + 2:, :] -= np.outer(mu, a[k + 1, :])
        nu = a[k + 1, k + 2:] / a[k + 1, k]
        a[:, k + 2:] -= np.outer(a[:, k], nu)
        a[k + 2:, :] -= np.outer(nu, a[k, :])
    return pf * a[n - 2, n - 1]


def correlation_function(spec, points):
    """n-point correlation: det for scalar kernels, Pf of the 2n x 2n
    particle-major block matrix for 2x2-block kernels."""
    pts = [float(p) for p in points]
    n = len(pts)
    if n == 0:
        return 1.0
    if n > 16:
        raise ValueError("correlation_function supports n <= 16")
    if getattr(spec, "block_size", 1) == 2:
        big = np.zeros((2 * n, 2 * n))
        for i in range(n):
            for j in range(n):
                big[2 * i:2 * i + 2, 2 * j:2 * j + 2] = _kernels.eval_matrix(spec, pts[i], pts[j])
        big = 0.5 * (big - big.T)
        return pfaffian(big)
    gram = _kernel_gram(spec, np.array(pts))
    return float(np.linalg.det(gram))


# ---------------------------------------------------------------------------
# analytic cross-checks
# ---------------------------------------------------------------------------

def ginibre_disk_eigenvalues(radius, kmax):
    """Analytic spectrum of the Ginibre kernel on a centered disk:
    lambda_k = gamma(k+1, r^2)/k!, descending in k."""
    radius = float(radius)
    if radius <= 0 or radius > 12.0:
        raise specfun.DomainError("need 0 < radius <= 12")
    kmax = int(kmax)
    if kmax < 0 or kmax > 200:
        raise specfun.DomainError("need 0 <= kmax <= 200")
    x = radius * radius
    return [incomplete_gamma_ratio(k, x) for k in range(kmax + 1)]


def ginibre_disk_nystrom_eigenvalues(radius, n_radial=24, n_angular=48):
    """2-d Nystrom oracle on the disk: Gauss-Legendre in radius, trapezoid
    in angle (spectrally accurate for the periodic direction), Hermitian
    eigenvalues of the weighted kernel matrix."""
    rule = gauss_legendre(int(n_radial), 0.0, float(radius))
    thetas = 2.0 * np.pi * np.arange(n_angular) / n_angular
    wt = 2.0 * np.pi / n_angular
    rr, tt = np.meshgrid(rule.nodes, thetas, indexing="ij")
    z = (rr * np.exp(1j * tt)).ravel()
    w = np.repeat(rule.weights * rule.nodes, n_angular) * wt
    gram = (1.0 / np.pi) * np.exp(
        np.outer(z, np.conj(z)) - 0.5 * np.abs(z)[:, None] ** 2 - 0.5 * np.abs(z)[None, :] ** 2)
    sw = np.sqrt(w)
    mat = sw[:, None] * gram * sw[None, :]
    ev = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
    return np.sort(ev)[::-1]


def legendre_partition(n):
    """Normalization of the scaled uniform-weight ensemble on [-n/2, n/2].

    Returns (formula_value, quadrature_value): the closed-form product and,
    for n <= 3, a brute-force tensor Gauss-Legendre evaluation of
    int prod (t_i - t_j)^2.  Known edge case: at n = 1 the closed form gives
    2 while the direct integral is 1; both are returned, callers flag it.
    """
    n = int(n)
    if n < 1 or n > 6:
        raise ValueError("formula supported for 1 <= n <= 6")
    prod = 1.0
    for k in range(n):
        prod *= math.factorial(k) ** 2 / math.factorial(2 * k + 1)
    formula = float(n) ** (n * (n - 1) / 2.0) * 2.0 ** (n * (n + 1) / 2.0) * prod
    if n > 3:
        return formula, None
    order = 40
    rule = gauss_legendre(order, -n / 2.0, n / 2.0)
    x, w = rule.nodes, rule.weights
    if n == 1:
        quad = float(np.sum(w))
    elif n == 2:
        d = x[:, None] - x[None, :]
        quad = float(np.einsum("i,j,ij->", w, w, d * d))
    else:
        d01 = (x[:, None] - x[None, :]) ** 2
        quad = float(np.einsum("i,j,k,ij,ik,jk->", w, w, w, d01, d01, d01))
    return formula, quad
