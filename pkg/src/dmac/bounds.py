"""l2-gain certificates for the zero, H-infinity and minimax adaptive controllers."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from dmac.dynamics import UncertainNetwork, admissible_interval
from dmac.graph import NetworkGraph

# above this size gamma_thm1 stops diagonalising the Laplacian densely
DENSE_SPECTRUM_LIMIT = 2000


class NoPositiveRootError(ArithmeticError):
    """The gain polynomial has no positive real root."""


@dataclass(frozen=True)
class GainBounds:
    gamma_lower: float
    gamma_thm1: float
    gamma_upper: float
    zero_control_gains: np.ndarray
    cubic: tuple[float, float, float, float]
    real_roots: tuple[float, ...]

    def to_record(self) -> dict:
        rec = asdict(self)
        gains = np.asarray(self.zero_control_gains)
        rec["zero_control_gains"] = gains.tolist()
        rec["zero_control_gain_min"] = float(gains.min())
        rec["zero_control_gain_max"] = float(gains.max())
        f1, f2, f3, f4 = self.cubic
        rec.update(f1=f1, f2=f2, f3=f3, f4=f4)
        rec["cubic"] = list(self.cubic)
        rec["real_roots"] = list(self.real_roots)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> GainBounds:
        return cls(
            float(rec["gamma_lower"]),
            float(rec["gamma_thm1"]),
            float(rec["gamma_upper"]),
            np.asarray(rec["zero_control_gains"], dtype=float),
            tuple(float(f) for f in rec["cubic"]),
            tuple(float(r) for r in rec["real_roots"]),
        )


# ---------------------------------------------------------------------------
# zero control


def zero_control_gain(b: float, d: int) -> float:
    """Worst-case l2 gain of an uncontrolled node of degree ``d``."""
    _, hi = admissible_interval(b, d)
    return 1.0 / (1.0 - hi)


# ---------------------------------------------------------------------------
# lower bound


@dataclass(frozen=True)
class EigenResult:
    value: float
    vector: np.ndarray
    iterations: int


def smallest_eigenvalue(
    matrix, tol: float = 1e-10, max_iter: int = 10_000, v0: np.ndarray | None = None
) -> EigenResult:
    """Smallest eigenvalue of a sparse symmetric positive definite matrix.

    Inverse power iteration on a single sparse LU factorisation; stops when the
    Rayleigh quotient changes by less than ``tol`` relative.
    """
    mat = sp.csc_matrix(matrix)
    n = mat.shape[0]
    solve = spla.splu(mat).solve
    v = np.ones(n) if v0 is None else np.asarray(v0, dtype=float).copy()
    v /= np.linalg.norm(v)
    mu = float(v @ (mat @ v))
    for it in range(1, max_iter + 1):
        y = solve(v)
        v = y / np.linalg.norm(y)
        mu_new = float(v @ (mat @ v))
        if abs(mu_new - mu) <= tol * abs(mu_new):
            return EigenResult(mu_new, v, it)
        mu = mu_new
    raise RuntimeError(f"inverse iteration did not converge in {max_iter} iterations (last estimate {mu:.6g})")


def lower_bound_matrix(net: UncertainNetwork) -> sp.csc_matrix:
    """``(A_bar - I)^2 + B B^T`` with ``A_bar`` the per-node largest candidate."""
    diag = sp.diags((net.node_upper - 1.0) ** 2)
    return (diag + net.b**2 * net.graph.laplacian_matrix()).tocsc()


def gamma_lower(net: UncertainNetwork, method: str = "sparse") -> float:
    """Gain of the H-infinity controller for the slowest admissible realisation."""
    mat = lower_bound_matrix(net)
    if method == "sparse":
        lam = smallest_eigenvalue(mat).value
    elif method == "dense":
        lam = float(np.linalg.eigvalsh(mat.toarray())[0])
    else:
        raise ValueError(f"unknown method {method!r}")
    return 1.0 / math.sqrt(lam)


def lemma3_check(a_values, gamma: float) -> bool:
    """Whether ``I - A > gamma^-2 I`` for the diagonal matrix of ``a_values``."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return 1.0 - float(np.max(a_values)) > gamma**-2


def riccati_residual(a_values, graph: NetworkGraph, b: float, gamma: float) -> float:
    """Smallest eigenvalue of the H-infinity Riccati inequality slack.

    Uses ``P = (I - A)^{-1}`` and ``K = B^T (A - I)^{-1}``; a non-negative value
    certifies the inequality at level ``gamma``. Dense; meant for small networks.
    """
    a = np.asarray(a_values, dtype=float)
    if not lemma3_check(a, gamma):
        raise ValueError(f"gamma={gamma} too small: need 1 - max(a) > gamma^-2")
    n = graph.node_count
    bmat = b * graph.incidence_matrix().toarray()
    k = bmat.T / (a - 1.0)[None, :]
    acl = np.diag(a) + bmat @ k
    p = np.diag(1.0 / (1.0 - a))
    w = 1.0 / ((1.0 - a) - gamma**-2)
    slack = p - np.eye(n) - k.T @ k - acl.T @ (w[:, None] * acl)
    return float(np.linalg.eigvalsh(0.5 * (slack + slack.T))[0])


# ---------------------------------------------------------------------------
# homogeneous network bound


def _thm1_ratio(lam: np.ndarray, a_bar: float, b: float) -> np.ndarray:
    # eigenvalues of G ((1 - a) G - F)^{-1} on the Laplacian eigenvector for lam
    g = ((1.0 - a_bar) * a_bar - b * b * lam) / (1.0 - a_bar) ** 2
    f = (a_bar + b * b * lam / (a_bar - 1.0)) ** 2
    den = (1.0 - a_bar) * g - f
    if np.any(np.abs(den) < 1e-14):
        raise ZeroDivisionError("(1 - a) G - F is singular")
    return g / den


def gamma_thm1(a_bar: float, graph: NetworkGraph, b: float, method: str = "auto") -> float:
    """Gain level certified by the Riccati inequality when every node uses ``a_bar``."""
    if not 0.0 < a_bar < 1.0:
        raise ValueError(f"a_bar must lie in (0, 1), got {a_bar}")
    n = graph.node_count
    if method == "auto":
        method = "spectral"
    if method == "dense":
        bbt = b * b * graph.laplacian_matrix().toarray()
        eye = np.eye(n)
        g = ((1.0 - a_bar) * a_bar * eye - bbt) / (1.0 - a_bar) ** 2
        m = a_bar * eye + bbt / (a_bar - 1.0)
        f = m.T @ m
        den = (1.0 - a_bar) * g - f
        if np.linalg.cond(den) > 1e14:
            raise ZeroDivisionError("(1 - a) G - F is singular")
        return math.sqrt(np.linalg.norm(g @ np.linalg.inv(den), 2))
    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")
    lap = graph.laplacian_matrix()
    if n <= DENSE_SPECTRUM_LIMIT:
        lam = np.linalg.eigvalsh(lap.toarray())
    else:
        # the ratio is 1 / ((1 - a)^2 + b^2 lam): monotone, so the spectrum ends suffice
        lam_max = spla.eigsh(lap.astype(float), k=1, which="LA", return_eigenvectors=False)[0]
        lam = np.array([0.0, lam_max])
    return math.sqrt(float(np.max(np.abs(_thm1_ratio(lam, a_bar, b)))))


# ---------------------------------------------------------------------------
# minimax upper bound


def cubic_coefficients(a_bar: float, a_lower: float) -> tuple[float, float, float, float]:
    """Coefficients ``(f1, f2, f3, f4)`` of the gain polynomial in ``beta = gamma^2``."""
    if a_bar == 1.0:
        raise ZeroDivisionError("a_bar must differ from 1")
    ab, al = a_bar, a_lower
    f1 = (1.0 - ab) * (ab - al) ** 2 / 8.0
    f2 = (-2 * ab**3 + 4 * ab**2 - 2 * al**2 + 4 * ab * al - 2 * ab - 2 * al) / 4.0
    f3 = (4 * ab**3 - 14 * ab**2 + 16 * ab - 4 * al - 18) / (4.0 * (1.0 - ab))
    f4 = -1.0 / (ab - 1.0) ** 2
    return f1, f2, f3, f4


def poly_eval(coeffs, x: float) -> float:
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def poly_scale(coeffs, x: float) -> float:
    """Sum of absolute term magnitudes at ``x``; the natural residual scale."""
    deg = len(coeffs) - 1
    return sum(abs(c) * abs(x) ** (deg - k) for k, c in enumerate(coeffs))


def _trim(coeffs) -> list[float]:
    coeffs = [float(c) for c in coeffs]
    while coeffs and coeffs[0] == 0.0:
        coeffs.pop(0)
    return coeffs


def companion_matrix(coeffs) -> np.ndarray:
    """Companion matrix of the polynomial with leading-first ``coeffs``."""
    c = _trim(coeffs)
    deg = len(c) - 1
    if deg < 1:
        raise ValueError("polynomial must have degree >= 1")
    comp = np.zeros((deg, deg))
    comp[0, :] = -np.asarray(c[1:]) / c[0]
    comp[1:, :-1] = np.eye(deg - 1)
    return comp


def real_roots(coeffs, newton_steps: int = 3) -> np.ndarray:
    """Sorted real roots via companion eigenvalues, Newton-polished."""
    c = _trim(coeffs)
    if len(c) < 2:
        return np.array([])
    eig = np.linalg.eigvals(companion_matrix(c))
    radius = float(np.max(np.abs(eig)))
    roots = np.sort(eig[np.abs(eig.imag) <= 1e-9 * max(radius, 1.0)].real)
    dc = [c[k] * (len(c) - 1 - k) for k in range(len(c) - 1)]
    polished = []
    for r in roots:
        for _ in range(newton_steps):
            slope = poly_eval(dc, r)
            if slope == 0.0:
                break
            step = poly_eval(c, r) / slope
            if not np.isfinite(step) or abs(step) > 1e-6 * max(1.0, abs(r)):
                break
            r -= step
        polished.append(r)
    return np.array(sorted(polished))


def smallest_positive_root_bisection(coeffs, tol: float = 1e-14, points_per_decade: int = 400) -> float:
    """Smallest positive root by a geometric sign-change scan and bisection."""
    c = _trim(coeffs)
    cauchy = 1.0 + max(abs(x / c[0]) for x in c[1:])
    lo_exp = -8.0
    hi_exp = math.log10(cauchy) + 0.01
    grid = np.logspace(lo_exp, hi_exp, int((hi_exp - lo_exp) * points_per_decade) + 2)
    vals = np.array([poly_eval(c, x) for x in grid])
    sign = np.sign(vals)
    hits = np.flatnonzero(sign[:-1] * sign[1:] <= 0)
    if hits.size == 0:
        raise NoPositiveRootError("no sign change on the positive axis")
    lo, hi = float(grid[hits[0]]), float(grid[hits[0] + 1])
    flo = poly_eval(c, lo)
    if flo == 0.0:
        return lo
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        fm = poly_eval(c, mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gamma_upper_roots(a_bar: float, a_lower: float) -> tuple[float, np.ndarray]:
    """``(beta_min, all real roots)`` of the gain polynomial."""
    if not 0.0 < a_lower <= a_bar < 1.0:
        raise ValueError(f"need 0 < a_lower <= a_bar < 1, got {a_lower}, {a_bar}")
    coeffs = cubic_coefficients(a_bar, a_lower)
    roots = real_roots(coeffs)
    positive = roots[roots > 0]
    if positive.size == 0:
        raise NoPositiveRootError(
            f"gain polynomial {coeffs} has no positive real root (a_bar={a_bar}, a_lower={a_lower})"
        )
    beta = float(positive[0])
    resid = abs(poly_eval(coeffs, beta))
    if resid > 1e-8 * max(1.0, poly_scale(coeffs, beta)):
        raise ArithmeticError(f"root residual {resid:.3g} too large at beta={beta}")
    probe = beta * (1.0 + np.linspace(1e-6, 1e-3, 16))
    scale = poly_scale(coeffs, beta)
    if any(poly_eval(coeffs, p) < -1e-8 * scale for p in probe):
        raise ArithmeticError(f"polynomial negative just above beta_min={beta}")
    return beta, roots


def gamma_upper(a_bar: float, a_lower: float) -> float:
    """Square root of the smallest positive root of the gain polynomial."""
    return math.sqrt(gamma_upper_roots(a_bar, a_lower)[0])


def compute_bounds(net: UncertainNetwork, thm1_method: str = "auto") -> GainBounds:
    beta, roots = gamma_upper_roots(net.a_bar, net.a_lower)
    return GainBounds(
        gamma_lower=gamma_lower(net),
        gamma_thm1=gamma_thm1(net.a_bar, net.graph, net.b, thm1_method),
        gamma_upper=math.sqrt(beta),
        zero_control_gains=np.array([zero_control_gain(net.b, int(d)) for d in net.graph.degrees]),
        cubic=cubic_coefficients(net.a_bar, net.a_lower),
        real_roots=tuple(float(r) for r in roots),
    )
