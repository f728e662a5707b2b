"""Nodal basis on the reference element [0, 1].

Provides Gauss-Legendre / Gauss-Lobatto-Legendre quadrature, the Lagrange
differentiation matrix, boundary extrapolation vectors, Radau correction
function gradients and the nodal <-> Legendre modal transform. Everything a
degree-N collocation scheme needs is precomputed once and stored in a
:class:`Basis`.
"""

from dataclasses import dataclass, field

import numpy as np

_NEWTON_TOL = 1e-15
_NEWTON_MAXIT = 100


def legendre_poly(n: int, x):
    """Evaluate the Legendre polynomial P_n and its derivative at x.

    Uses the three-term recurrence; x may be a scalar or an ndarray in
    [-1, 1]. Returns (P_n(x), P_n'(x)).
    """
    x = np.asarray(x, dtype=float)
    p0 = np.ones_like(x)
    if n == 0:
        return p0, np.zeros_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    # derivative from the standard identity (1-x^2) P_n' = n (P_{n-1} - x P_n)
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = n * (p0 - x * p1) / (1.0 - x * x)
    # endpoints: P_n'(+-1) = (+-1)^{n-1} n(n+1)/2
    endpoint = np.abs(np.abs(x) - 1.0) < 1e-14
    if np.any(endpoint):
        val = np.sign(x) ** (n - 1) * n * (n + 1) / 2.0
        dp = np.where(endpoint, val, dp)
    return p1, dp


def gauss_legendre_01(n: int):
    """Gauss-Legendre nodes and weights on [0, 1].

    Nodes are the roots of P_n found by Newton iteration from Chebyshev
    initial guesses; weights come from the classical formula and are halved
    for the unit interval. Exact for polynomials of degree <= 2n - 1.
    """
    if n < 1:
        raise ValueError("point count must be >= 1")
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(_NEWTON_MAXIT):
        p, dp = legendre_poly(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    _, dp = legendre_poly(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # symmetrize to kill the last bits of Newton noise
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return (x + 1.0) / 2.0, w / 2.0


def gauss_lobatto_01(n: int):
    """Gauss-Lobatto-Legendre nodes and weights on [0, 1] (n >= 2 points).

    Endpoints are included; interior nodes are roots of P_{n-1}'. Exact for
    polynomials of degree <= 2n - 3.
    """
    if n < 2:
        raise ValueError("Lobatto rule needs at least 2 points")
    p = n - 1
    x = np.cos(np.pi * np.arange(n) / p)
    for _ in range(_NEWTON_MAXIT):
        pp, dpp = legendre_poly(p, x)
        # Newton on (1-x^2) P_p'(x); interior roots only, endpoints stay put
        second = (2.0 * x * dpp - p * (p + 1) * pp) / np.where(
            np.abs(1.0 - x * x) < 1e-14, 1.0, 1.0 - x * x
        )
        dx = np.where(np.abs(np.abs(x) - 1.0) < 1e-14, 0.0, dpp / second)
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    pp, _ = legendre_poly(p, x)
    w = 2.0 / (p * (p + 1) * pp * pp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    x[0], x[-1] = -1.0, 1.0
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return (x + 1.0) / 2.0, w / 2.0


def lagrange_eval_matrix(nodes, points):
    """Matrix S with S[i, j] = l_j(points[i]) for Lagrange polynomials on nodes."""
    nodes = np.asarray(nodes, dtype=float)
    points = np.asarray(points, dtype=float)
    ns = nodes.size
    S = np.ones((points.size, ns))
    for j in range(ns):
        for k in range(ns):
            if k != j:
                S[:, j] *= (points - nodes[k]) / (nodes[j] - nodes[k])
    return S


def _barycentric_weights(nodes):
    ns = nodes.size
    lam = np.ones(ns)
    for j in range(ns):
        for k in range(ns):
            if k != j:
                lam[j] /= nodes[j] - nodes[k]
    return lam


def differentiation_matrix(nodes):
    """D[i, j] = l_j'(nodes[i]) via the barycentric form."""
    nodes = np.asarray(nodes, dtype=float)
    ns = nodes.size
    lam = _barycentric_weights(nodes)
    D = np.zeros((ns, ns))
    for i in range(ns):
        for j in range(ns):
            if i != j:
                D[i, j] = (lam[j] / lam[i]) / (nodes[i] - nodes[j])
        D[i, i] = -np.sum(D[i, :])
    return D


@dataclass(frozen=True)
class Basis:
    """Precomputed degree-N nodal basis on [0, 1].

    Attributes mirror what the solvers consume: quadrature nodes/weights,
    the differentiation matrix, boundary extrapolation vectors, nodal
    derivatives of the Radau correction functions and the orthonormal
    (on [0,1]) Legendre transform matrices.
    """

    degree: int
    family: str
    nodes: np.ndarray
    weights: np.ndarray
    diff_matrix: np.ndarray
    interp_left: np.ndarray      # l_j(0)
    interp_right: np.ndarray     # l_j(1)
    correction_grad_left: np.ndarray
    correction_grad_right: np.ndarray
    legendre_vandermonde: np.ndarray   # modal-from-nodal, q_hat = V @ values
    modal_to_nodal: np.ndarray
    diff_matrix_t: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "diff_matrix_t", np.ascontiguousarray(self.diff_matrix.T))

    @property
    def nnodes(self) -> int:
        return self.degree + 1


def build_basis(degree: int, family: str = "GL") -> Basis:
    """Construct the nodal basis of the given degree.

    family is "GL" (Gauss-Legendre, the default used throughout) or "GLL"
    (Gauss-Lobatto-Legendre). Correction gradients are the nodal derivatives
    of the right Radau polynomial of degree N+1 mapped to [0, 1] and of its
    mirror image.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    n = degree + 1
    if family == "GL":
        nodes, weights = gauss_legendre_01(n)
    elif family == "GLL":
        nodes, weights = gauss_lobatto_01(n)
    else:
        raise ValueError(f"unsupported node family: {family!r}")

    D = differentiation_matrix(nodes)
    interp = lagrange_eval_matrix(nodes, np.array([0.0, 1.0]))

    gl = _radau_gradient(degree, nodes)
    gr = -_radau_gradient(degree, 1.0 - nodes)

    V, M = _legendre_transform(degree, nodes, weights)

    return Basis(
        degree=degree,
        family=family,
        nodes=nodes,
        weights=weights,
        diff_matrix=D,
        interp_left=interp[0],
        interp_right=interp[1],
        correction_grad_left=gl,
        correction_grad_right=gr,
        legendre_vandermonde=V,
        modal_to_nodal=M,
    )


def _radau_gradient(degree: int, xi):
    """d/dxi of the left correction function (right Radau polynomial) at xi.

    On [0,1] the function is g_L(xi) = (-1)^{N+1}/2 [P_{N+1}(x) - P_N(x)]
    with x = 2 xi - 1, satisfying g_L(0)=1, g_L(1)=0.
    """
    x = 2.0 * np.asarray(xi) - 1.0
    _, dp1 = legendre_poly(degree + 1, x)
    _, dp0 = legendre_poly(degree, x)
    return (-1.0) ** (degree + 1) * (dp1 - dp0)


def _legendre_transform(degree: int, nodes, weights):
    """Orthonormal (on [0,1]) Legendre transform matrices for the node set."""
    n = degree + 1
    M = np.zeros((n, n))  # M[q, j] = Ltilde_j(nodes[q])
    x = 2.0 * nodes - 1.0
    for j in range(n):
        pj, _ = legendre_poly(j, x)
        M[:, j] = np.sqrt(2 * j + 1) * pj
    V = M.T * weights  # V[j, q] = Ltilde_j(nodes[q]) * w_q
    return V, M


def nodal_to_legendre(values, basis: Basis):
    """Legendre coefficients of nodal data via the node quadrature.

    values has the node axis last; the returned array has the same shape
    with modal index last. Exact (a round-trip identity) for degree-N data.
    """
    return np.asarray(values) @ basis.legendre_vandermonde.T


def legendre_to_nodal(coeffs, basis: Basis):
    """Inverse of :func:`nodal_to_legendre` on degree-N data."""
    return np.asarray(coeffs) @ basis.modal_to_nodal.T
