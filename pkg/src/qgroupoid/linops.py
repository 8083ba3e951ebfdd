"""Dense operator toolkit for multi-matrix algebras and their modular data.

Inner products are linear in the first slot, ``(a|b) = vdot(b, a)``.
Antilinear maps are stored as a matrix ``A`` acting by ``v -> A @ conj(v)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL = 1e-9
T_GRID = (1.0, -1.0, 0.5, -0.5, 0.25, -0.25)

_rng = np.random.default_rng(20240611)


class StructureError(ValueError):
    """Raised when input data does not define the requested structure."""


# ---------------------------------------------------------------- basics

def inner(a, b):
    return np.vdot(b, a)


def dag(x):
    return np.conj(np.swapaxes(x, -1, -2))


def opnorm(x):
    """Operator norm; above 64×64 the Frobenius norm, an upper bound, is used instead."""
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    if x.ndim == 1 or x.size > 4096:
        return float(np.linalg.norm(x))
    return float(np.linalg.norm(x, 2))


def hermitize(x):
    return 0.5 * (x + dag(x))


def herm_fun(p, f):
    """Apply ``f`` to the spectrum of a Hermitian matrix."""
    w, v = np.linalg.eigh(hermitize(np.asarray(p, dtype=complex)))
    return (v * f(w)) @ dag(v)


def op_power(p, z):
    """``p**z`` for a positive invertible matrix (Hermitian calculus only)."""
    w = np.linalg.eigvalsh(hermitize(p))
    if w.size and w.min() <= 0:
        raise StructureError("op_power needs a strictly positive matrix")
    return herm_fun(p, lambda e: np.exp(z * np.log(e)))


def op_log(p):
    return herm_fun(p, np.log)


def op_exp(h):
    return herm_fun(h, np.exp)


def pinv_sqrt(q, tol=TOL):
    """Pseudo-inverse square root of a positive matrix, rank cut at tol*|q|."""
    w, v = np.linalg.eigh(hermitize(q))
    cut = tol * max(1.0, abs(w).max() if w.size else 1.0)
    inv = np.where(w > cut, 1.0 / np.sqrt(np.clip(w, cut, None)), 0.0)
    return (v * inv) @ dag(v)


def psd_sqrt(q, tol=TOL):
    """Square root of a positive matrix; eigenvalues below tol*|q| count as zero."""
    w, v = np.linalg.eigh(hermitize(q))
    cut = tol * max(1.0, abs(w).max() if w.size else 1.0)
    root = np.where(w > cut, np.sqrt(np.clip(w, 0, None)), 0.0)
    return (v * root) @ dag(v)


def support(q, tol=TOL):
    """Orthonormal basis (columns) of the range of a positive matrix."""
    w, v = np.linalg.eigh(hermitize(q))
    cut = tol * max(1.0, abs(w).max() if w.size else 1.0)
    return v[:, w > cut]


def orth_span(vectors, tol=TOL):
    """Orthonormal basis of the span of the columns."""
    m = np.asarray(vectors, dtype=complex)
    if m.size == 0:
        return m.reshape(m.shape[0], 0)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    cut = tol * max(1.0, s[0] if s.size else 1.0)
    return u[:, s > cut]


def subspace_gap(a, b):
    """Largest principal-angle sine between two column spans (inf if ranks differ)."""
    qa, qb = orth_span(a), orth_span(b)
    if qa.shape[1] != qb.shape[1]:
        return float("inf")
    if qa.shape[1] == 0:
        return 0.0
    return opnorm(qa - qb @ (dag(qb) @ qa))


def intersect_spans(a, b, tol=TOL):
    """Orthonormal basis of span(a) ∩ span(b)."""
    qa, qb = orth_span(a, tol), orth_span(b, tol)
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        return qa[:, :0]
    s = dag(qa) @ qb
    u, sv, _ = np.linalg.svd(s)
    keep = sv > 1 - 1e-7
    return qa @ u[:, : int(keep.sum())]


def null_space(mat, tol=1e-10):
    """Orthonormal basis of the kernel, cut relative to max(1, largest singular value)."""
    mat = np.asarray(mat)
    if mat.shape[0] == 0:
        return np.eye(mat.shape[1], dtype=mat.dtype)
    _, s, vh = np.linalg.svd(mat, full_matrices=True)
    cut = tol * max(1.0, s[0] if s.size else 1.0)
    rank = int((s > cut).sum())
    return dag(vh[rank:])


def vec(mats):
    """Stack matrices as columns of flattened entries."""
    mats = np.asarray(mats)
    return mats.reshape(mats.shape[0], -1).T


def unvec(cols, n):
    return cols.T.reshape(-1, n, n)


def random_unit(n, rng=None):
    rng = rng or _rng
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------- antilinear maps

@dataclass(frozen=True)
class AntilinearOp:
    """``v -> mat @ conj(v)`` in the fixed standard basis."""

    mat: np.ndarray

    def __call__(self, v):
        return self.mat @ np.conj(v)

    def compose(self, other):
        """self∘other; two antilinear maps give a linear matrix."""
        if isinstance(other, AntilinearOp):
            return self.mat @ np.conj(other.mat)
        return AntilinearOp(self.mat @ np.conj(other))

    def after(self, lin):
        return AntilinearOp(self.mat @ np.conj(lin))

    def before(self, lin):
        return AntilinearOp(lin @ self.mat)

    @property
    def adjoint(self):
        return AntilinearOp(self.mat.T.copy())

    def conj_op(self, x):
        """The linear operator ``self ∘ x ∘ self^{-1}`` for an antiunitary self."""
        return self.mat @ np.conj(x) @ np.conj(np.linalg.inv(self.mat))

    def sandwich(self, x):
        """``self ∘ x ∘ self`` as a linear matrix."""
        return self.mat @ np.conj(x) @ np.conj(self.mat)


def polar_antilinear(g: AntilinearOp):
    """Return (I, D) with G = I∘D^{1/2}, D = G*G."""
    a = np.asarray(g.mat, dtype=complex)
    if np.linalg.matrix_rank(a) < a.shape[0]:
        raise StructureError("polar decomposition needs an injective operator")
    d = hermitize(a.T @ np.conj(a))
    i_mat = a @ np.conj(op_power(d, -0.5))
    return AntilinearOp(i_mat), d


# ---------------------------------------------------------------- algebras

@dataclass
class MultiMatrixAlgebra:
    """A concrete finite-dimensional C*-algebra on ℂ^carrier_dim.

    ``units[k]`` has shape (n_k, n_k, N, N) and holds the matrix units of block k.
    ``mult[k]`` is the multiplicity of block k on the carrier.
    """

    carrier_dim: int
    basis: np.ndarray
    blocks: list
    mult: list
    units: list
    _onb: np.ndarray | None = field(default=None, repr=False)
    _pinv: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self):
        return int(self.basis.shape[0])

    @property
    def rep(self):
        return self.basis

    @property
    def unit(self):
        return sum((u[i, i] for u in self.units for i in range(u.shape[0])),
                   np.zeros((self.carrier_dim,) * 2, complex))

    @property
    def central_projections(self):
        return [sum(u[i, i] for i in range(u.shape[0])) for u in self.units]

    def onb(self):
        """Orthonormal (Hilbert–Schmidt) basis of the algebra, as columns of vec."""
        if self._onb is None:
            self._onb = orth_span(vec(self.basis))
        return self._onb

    def distance(self, x):
        """Hilbert–Schmidt distance of a matrix to the algebra."""
        q = self.onb()
        v = np.asarray(x).reshape(-1)
        return float(np.linalg.norm(v - q @ (dag(q) @ v)))

    def contains(self, x, tol=TOL):
        return self.distance(x) <= tol * max(1.0, np.linalg.norm(x))

    def coords(self, x):
        """Coefficients of x over ``basis`` (least squares)."""
        if self._pinv is None:
            self._pinv = np.linalg.pinv(vec(self.basis))
        return self._pinv @ np.asarray(x).reshape(-1)

    def coords_many(self, xs):
        """Coordinates of a stack of matrices, one column each."""
        self.coords(np.zeros((self.carrier_dim,) * 2))
        return self._pinv @ vec(np.asarray(xs))

    def element(self, coeffs):
        return AlgebraElement(np.asarray(coeffs, complex),
                              np.tensordot(coeffs, self.basis, axes=1))

    def ref_trace(self, x):
        """Sum of block traces: Σ_k Tr(p_k x)/m_k."""
        return sum(np.trace(p @ x) / m for p, m in zip(self.central_projections, self.mult))

    def block_of(self, x):
        """List of block matrices x_k ∈ M_{n_k} for x in the algebra."""
        out = []
        for u in self.units:
            # x = Σ c_ij E_ij with c_ij = Tr(E_ji x)/Tr(E_ii)
            tr = np.real(np.trace(u[0, 0]))
            out.append(np.einsum("jiab,ba->ij", u, x) / tr)
        return out

    def random_element(self, rng=None, hermitian=False):
        rng = rng or _rng
        c = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
        x = np.tensordot(c, self.basis, axes=1)
        return hermitize(x) if hermitian else x


@dataclass
class AlgebraElement:
    coeffs: np.ndarray
    matrix: np.ndarray


def _closure(gens, n, tol=TOL, max_dim=None):
    max_dim = max_dim or n * n
    q = orth_span(vec(gens), tol)
    while True:
        mats = unvec(q, n)
        prods = [a @ g for a in mats for g in gens] + [g @ a for a in mats for g in gens]
        new = orth_span(np.hstack([q, vec(prods)]), tol)
        if new.shape[1] > max_dim:
            raise StructureError("closure exceeds the carrier bound")
        if new.shape[1] == q.shape[1]:
            return new
        q = new


def _minimal_projections(alg_basis, p, n, rng):
    """Spectral projections of a generic self-adjoint element of p·A·p."""
    # complex weights: real ones can leave x + x* degenerate (e.g. u + u* for u³ = 1)
    coeffs = rng.normal(size=len(alg_basis)) + 1j * rng.normal(size=len(alg_basis))
    h = hermitize(p @ np.tensordot(coeffs, alg_basis, axes=1) @ p)
    w, v = np.linalg.eigh(h)
    rank_p = int(round(np.real(np.trace(p))))
    # drop the kernel of p
    pv = np.einsum("ij,jk->ik", p, v)
    inside = np.linalg.norm(pv, axis=0) > 0.5
    w, v = w[inside], v[:, inside]
    groups = []
    start = 0
    scale = max(1.0, abs(w).max() if w.size else 1.0)
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > 1e-6 * scale:
            groups.append(v[:, start:i])
            start = i
    assert sum(g.shape[1] for g in groups) == rank_p
    return [g @ dag(g) for g in groups]


def decompose(basis, n, tol=TOL, rng=None):
    """Wedderburn data (blocks, multiplicities, matrix units) of a *-algebra."""
    rng = rng or np.random.default_rng(7)
    basis = np.asarray(basis, complex)
    q = orth_span(vec(basis), tol)
    mats = unvec(q, n)
    # center: elements of A commuting with A
    rows = [np.einsum("ij,ajk->aik", b, mats) - np.einsum("aij,jk->aik", mats, b)
            for b in mats]
    cmat = np.concatenate([r.reshape(len(mats), -1).T for r in rows], axis=0)
    null = null_space(cmat)
    center = np.tensordot(null.T, mats, axes=1)
    cps = _minimal_projections(center, np.eye(n), n, rng) if len(center) else []
    # keep only projections lying under the unit of A
    unit_a = _unit_of(mats, n)
    cps = [p for p in cps if np.linalg.norm(p @ unit_a - p) < 1e-6]
    blocks, mult, units = [], [], []
    for p in cps:
        pa = np.einsum("ij,ajk,kl->ail", p, mats, p)
        dim_block = orth_span(vec(pa)).shape[1]
        nk = int(round(np.sqrt(dim_block)))
        if nk * nk != dim_block:
            raise StructureError("block dimension is not a square")
        mins = _minimal_projections(pa, p, n, rng)
        if len(mins) != nk:
            raise StructureError("minimal projections do not match block size")
        e = np.zeros((nk, nk, n, n), complex)
        x = np.tensordot(rng.normal(size=len(pa)) + 1j * rng.normal(size=len(pa)), pa, axes=1)
        u1 = [None] * nk
        u1[0] = mins[0]
        for j in range(1, nk):
            y = mins[0] @ x @ mins[j]
            # y = c·partial isometry from mins[j] to mins[0]
            w = np.linalg.svd(y, compute_uv=False)[0]
            u1[j] = y / w
        for i in range(nk):
            for j in range(nk):
                e[i, j] = dag(u1[i]) @ u1[j]
        m_k = int(round(np.real(np.trace(mins[0]))))
        blocks.append(nk)
        mult.append(m_k)
        units.append(e)
    return blocks, mult, units


def _unit_of(mats, n):
    """Unit of a (possibly non-unital) *-subalgebra given by a spanning set."""
    coeffs = np.ones(len(mats))
    h = np.tensordot(coeffs, [dag(m) @ m for m in mats], axes=1)
    w, v = np.linalg.eigh(hermitize(h))
    keep = w > 1e-8 * max(1.0, w.max())
    return v[:, keep] @ dag(v[:, keep])


def build_algebra(generators, carrier_dim, unital=True, tol=TOL):
    """The *-algebra generated by matrices on ℂ^carrier_dim."""
    n = int(carrier_dim)
    gens = [np.asarray(g, complex) for g in generators]
    for g in gens:
        if g.shape != (n, n):
            raise StructureError("generator has the wrong shape")
    gens = gens + [dag(g) for g in gens]
    if unital:
        gens.append(np.eye(n, dtype=complex))
    q = _closure(gens, n, tol)
    basis = unvec(q, n)
    return algebra_from_basis(basis, n, tol)


def algebra_from_basis(basis, n, tol=TOL):
    basis = np.asarray(basis, complex)
    blocks, mult, units = decompose(basis, n, tol)
    # a basis made of matrix units keeps coordinates readable
    ub = np.concatenate([u.reshape(-1, n, n) for u in units], axis=0) if units else basis[:0]
    alg = MultiMatrixAlgebra(n, ub, blocks, mult, units)
    if alg.dim != orth_span(vec(basis)).shape[1]:
        raise StructureError("matrix units do not span the algebra")
    return alg


def algebra_from_units(units, n):
    units = [np.asarray(u, complex) for u in units]
    ub = np.concatenate([u.reshape(-1, n, n) for u in units], axis=0)
    mult = [int(round(np.real(np.trace(u[0, 0])))) for u in units]
    return MultiMatrixAlgebra(n, ub, [u.shape[0] for u in units], mult, units)


def _frame(alg):
    """Unitary adapted to the block structure plus an ONB of the null part."""
    n = alg.carrier_dim
    parts = []
    for u in alg.units:
        nk = u.shape[0]
        f1 = support(u[0, 0])
        part = [u[i, 0] @ f1 for i in range(nk)]
        parts.append(part)
    rest = np.eye(n) - alg.unit
    return parts, support(rest)


def commutant(alg: MultiMatrixAlgebra, within_dim=None):
    """Commutant inside the full matrix algebra of the carrier."""
    n = alg.carrier_dim if within_dim is None else int(within_dim)
    if n != alg.carrier_dim:
        raise StructureError("carrier dimension mismatch")
    parts, rest = _frame(alg)
    units = []
    for part in parts:
        m = part[0].shape[1]
        e = np.zeros((m, m, n, n), complex)
        for r in range(m):
            for s in range(m):
                e[r, s] = sum(np.outer(f[:, r], np.conj(f[:, s])) for f in part)
        units.append(e)
    if rest.shape[1]:
        m = rest.shape[1]
        e = np.zeros((m, m, n, n), complex)
        for r in range(m):
            for s in range(m):
                e[r, s] = np.outer(rest[:, r], np.conj(rest[:, s]))
        units.append(e)
    return algebra_from_units(units, n)


def center(alg: MultiMatrixAlgebra):
    n = alg.carrier_dim
    units = [p.reshape(1, 1, n, n) for p in alg.central_projections]
    return algebra_from_units(units, n)


def commutant_by_solve(mats, n):
    """Brute-force commutant: null space of X ↦ XB − BX over the given matrices."""
    eye = np.eye(n)
    rows = [np.kron(b, eye) - np.kron(eye, b.T) for b in mats]
    null = null_space(np.concatenate(rows, axis=0))
    return unvec(null, n)


def span_gap(mats_a, mats_b):
    return subspace_gap(vec(mats_a), vec(mats_b))


def intersect_algebras(mats_a, mats_b, n):
    q = intersect_spans(vec(mats_a), vec(mats_b))
    return unvec(q, n)


def closure_residual(alg):
    """Distance of products and adjoints of the basis from the algebra."""
    worst = 0.0
    b = alg.basis
    for x in b:
        worst = max(worst, alg.distance(dag(x)))
        for y in b[: min(len(b), 32)]:
            worst = max(worst, alg.distance(x @ y))
    return worst


# ---------------------------------------------------------------- states

@dataclass
class StateOnAlgebra:
    """Positive functional x ↦ Σ_k Tr(ρ_k x_k), ρ given as a carrier matrix in A."""

    algebra: MultiMatrixAlgebra
    density: np.ndarray

    @property
    def faithful(self):
        return bool(_block_min_eig(self.algebra, self.density) > TOL)

    def __call__(self, x):
        return self.algebra.ref_trace(self.density @ x)

    def total(self):
        return self(self.algebra.unit)


def _block_min_eig(alg, x):
    vals = [np.linalg.eigvalsh(hermitize(b)).min() for b in alg.block_of(x)]
    return min(vals) if vals else 1.0


def density_of(alg, functional):
    """Density (relative to the block trace) of a linear functional on the algebra."""
    b = alg.basis
    gram = np.array([[alg.ref_trace(bj @ bi) for bj in b] for bi in b])
    vals = np.array([functional(bi) for bi in b])
    c = np.linalg.solve(gram, vals)
    return np.tensordot(c, b, axes=1)


def vector_state(alg, omega):
    return StateOnAlgebra(alg, density_of(alg, lambda x: inner(x @ omega, omega)))


def connes_cocycle(phi: StateOnAlgebra, psi: StateOnAlgebra, t):
    """[Dφ:Dψ]_t = ρ_φ^{it} ρ_ψ^{-it}."""
    if not (phi.faithful and psi.faithful):
        raise StructureError("cocycle needs faithful weights")
    alg = phi.algebra
    m = _alg_power(alg, phi.density, 1j * t) @ _alg_power(alg, psi.density, -1j * t)
    return AlgebraElement(alg.coords(m), m)


def _alg_power(alg, x, z):
    """Functional calculus of an element of A, computed on the unit of A."""
    p = alg.unit
    y = x + (np.eye(alg.carrier_dim) - p)
    return op_power(y, z) @ p


def modular_group(phi: StateOnAlgebra, t, x):
    alg = phi.algebra
    return _alg_power(alg, phi.density, 1j * t) @ x @ _alg_power(alg, phi.density, -1j * t)


# ---------------------------------------------------------------- GNS

@dataclass
class GnsData:
    """GNS objects; ``lam`` maps basis coordinates to GNS vectors."""

    gns_dim: int
    lam: np.ndarray
    pi_basis: np.ndarray
    Delta: np.ndarray
    J: AntilinearOp
    S_op: AntilinearOp
    basis: np.ndarray

    def lambda_map(self, coeffs):
        return self.lam @ coeffs

    def pi(self, coeffs):
        return np.tensordot(coeffs, self.pi_basis, axes=1)

    def sigma_vec(self, t):
        return op_power(self.Delta, 1j * t)


def _modular_from_vectors(lam, adj):
    """S, Δ, J from Λ(b_j) columns and the coordinate adjoint map."""
    # S Λ(x) = Λ(x*): S·conj(lam) = lam @ adj   (adj acts on conj coords)
    s_mat = lam @ adj @ np.linalg.inv(np.conj(lam))
    s = AntilinearOp(s_mat)
    j, delta = polar_antilinear(s)
    return s, hermitize(delta), j


def _adjoint_coords(basis):
    """Matrix C with coords(b_j*) = C[:, j] ... applied to conj coords."""
    a = vec(basis)
    adj = np.linalg.lstsq(a, vec(dag(basis)), rcond=None)[0]
    return adj


def gns(alg: MultiMatrixAlgebra, phi: StateOnAlgebra):
    """GNS construction of a faithful state, realised on ℂ^{dim A}."""
    if not phi.faithful:
        raise StructureError("GNS of a non-faithful weight is out of scope")
    b = alg.basis
    k = len(b)
    gram = np.array([[phi(dag(bi) @ bj) for bj in b] for bi in b])  # (Λb_j|Λb_i) conj order
    # (Λ(b_j)|Λ(b_i)) = φ(b_i* b_j) = gram[i, j]; want lam^H lam = gram
    lam = psd_sqrt(hermitize(gram))
    lam_inv = np.linalg.inv(lam)
    # left multiplication in coordinates
    mult = np.zeros((k, k, k), complex)
    for i, bi in enumerate(b):
        mult[i] = np.array([alg.coords(bi @ bj) for bj in b]).T
    pi_basis = np.array([lam @ mult[i] @ lam_inv for i in range(k)])
    adj = _adjoint_coords(b)
    s, delta, j = _modular_from_vectors(lam, adj)
    return GnsData(k, lam, pi_basis, delta, j, s, b)


def vector_gns(basis, omega):
    """GNS data of ω_Ω for an algebra acting standardly with cyclic separating Ω."""
    basis = np.asarray(basis, complex)
    lam = np.stack([b @ omega for b in basis], axis=1)
    if np.linalg.matrix_rank(lam) < lam.shape[1] or lam.shape[0] != lam.shape[1]:
        raise StructureError("vector is not cyclic and separating for a standard algebra")
    adj = _adjoint_coords(basis)
    s, delta, j = _modular_from_vectors(lam, adj)
    return GnsData(lam.shape[1], lam, basis, delta, j, s, basis)


# ---------------------------------------------------------------- reports

@dataclass
class Check:
    name: str
    anchor: str
    residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)


@dataclass
class VerificationReport:
    """Named residuals with their tolerance; pass iff residual ≤ tolerance."""

    checks: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def add(self, name, anchor, residual, tol=TOL):
        self.checks.append(Check(name, anchor, float(residual), float(tol)))
        return self

    def extend(self, other, prefix=""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.anchor, c.residual, c.tolerance))
        self.notes.update(other.notes)
        return self

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self):
        bad = self.failures()
        return f"{len(self.checks) - len(bad)}/{len(self.checks)} checks pass"
