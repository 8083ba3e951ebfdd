"""Relative tensor products over a finite-dimensional basis algebra.

The basis N = ⊕ M_{n_k} is realised by block-diagonal m×m matrices.  A
(anti)representation of N on ℂ^n is stored as the array of images of the
m×m matrix units, shape (m, m, n, n), zero outside the diagonal blocks.

H ⊗_ν K is realised inside H⊗K: the Gram form of the relative tensor product
is ((Q(ξ⊗η) | ξ'⊗η')), and ξ⊗_ν η is the vector Q^{1/2}(ξ⊗η).  Operators on
relative tensor products are kept as ambient matrices vanishing off ran Q.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linops import (TOL, AlgebraElement, MultiMatrixAlgebra, StateOnAlgebra,
                     StructureError, algebra_from_basis, algebra_from_units,
                     commutant, dag, hermitize, inner, op_power, opnorm,
                     psd_sqrt, subspace_gap, support, vec)


# ---------------------------------------------------------------- basis algebra

def standard_units(blocks):
    """Matrix units of ⊕ M_{n_k} on ℂ^{Σ n_k}."""
    m = int(sum(blocks))
    units, off = [], 0
    for nk in blocks:
        u = np.zeros((nk, nk, m, m), complex)
        for i in range(nk):
            for j in range(nk):
                u[i, j, off + i, off + j] = 1.0
        units.append(u)
        off += nk
    return units


def standard_algebra(blocks):
    return algebra_from_units(standard_units(blocks), int(sum(blocks)))


def block_mask(blocks):
    m = int(sum(blocks))
    mask = np.zeros((m, m), bool)
    off = 0
    for nk in blocks:
        mask[off:off + nk, off:off + nk] = True
        off += nk
    return mask


@dataclass
class Basis:
    """The basis algebra N with a faithful positive functional ν = Tr(d ·)."""

    blocks: list
    d: np.ndarray

    @property
    def m(self):
        return int(sum(self.blocks))

    @property
    def mask(self):
        return block_mask(self.blocks)

    def algebra(self):
        return standard_algebra(self.blocks)

    def state(self):
        return StateOnAlgebra(self.algebra(), self.d)

    def nu(self, x):
        return np.trace(self.d @ x)

    def opposite(self):
        """N° realised as the transposed block algebra, ν°(x^T) = ν(x)."""
        return Basis(list(self.blocks), self.d.T.copy())

    def unit_indices(self):
        return np.argwhere(self.mask)

    def sigma(self, t, x):
        return op_power(self.d, 1j * t) @ x @ op_power(self.d, -1j * t)

    def units(self):
        m = self.m
        out = np.zeros((m, m, m, m), complex)
        for a, b in self.unit_indices():
            out[a, b, a, b] = 1.0
        return out


def apply_action(act, x):
    return np.einsum("ab,abij->ij", x, act)


def opposite_action(act):
    """Rep of N viewed as an anti-rep of N° = N^T (and vice versa)."""
    return np.ascontiguousarray(np.swapaxes(act, 0, 1))


def action_from_map(f, blocks, n):
    m = int(sum(blocks))
    act = np.zeros((m, m, n, n), complex)
    for a, b in np.argwhere(block_mask(blocks)):
        e = np.zeros((m, m), complex)
        e[a, b] = 1.0
        act[a, b] = f(e)
    return act


def action_defect(act, blocks, anti=False):
    """Residual of the (anti)homomorphism and * properties over matrix units."""
    worst = 0.0
    idx = np.argwhere(block_mask(blocks))
    for a, b in idx:
        worst = max(worst, opnorm(act[a, b] - dag(act[b, a])))
        for c, e in idx:
            if anti:
                prod = act[c, e] @ act[a, b]
            else:
                prod = act[a, b] @ act[c, e]
            want = act[a, e] if b == c else np.zeros_like(prod)
            worst = max(worst, opnorm(prod - want))
    n = act.shape[-1]
    one = sum(act[a, a] for a in range(act.shape[0]))
    return worst, opnorm(one - np.eye(n))


# ---------------------------------------------------------------- modules

@dataclass
class ModuleStructure:
    """N acting on ℂ^n: side 'left' for a representation, 'right' for an anti one."""

    basis: Basis
    act: np.ndarray
    side: str

    @property
    def dim(self):
        return int(self.act.shape[-1])

    def __call__(self, x):
        return apply_action(self.act, x)

    def as_anti(self):
        """(base, anti-representation) pair used for brackets."""
        if self.side == "right":
            return self.basis, self.act
        return self.basis.opposite(), opposite_action(self.act)


def bracket_anti(xi, eta, base, anti):
    """N-valued inner product <ξ,η> for an anti-representation; Λ(<ξ,η>) = R(η)*ξ."""
    m = base.m
    dm = op_power(base.d, -0.5)
    c = np.zeros((m, m), complex)
    for a, b in base.unit_indices():
        # anti(E_ba d^{-1/2}) = Σ_e dm[a, e] anti[b, e]
        op = np.einsum("e,eij->ij", dm[a], anti[b])
        c[a, b] = inner(op @ xi, eta)
    return c @ dm


def bracket(xi, eta, mod: ModuleStructure):
    """<ξ,η> as an element of N (for left modules, of N° written in N)."""
    base, anti = mod.as_anti()
    x = bracket_anti(xi, eta, base, anti)
    return AlgebraElement(x.reshape(-1), x if mod.side == "right" else x.T)


def bounded_operator(xi, mod: ModuleStructure):
    """R(ξ): L²(N) → H in the orthonormal basis Λ(E_ab d^{-1/2})."""
    base, anti = mod.as_anti()
    dm = op_power(base.d, -0.5)
    dp = op_power(base.d, 0.5)
    cols = []
    for a, b in base.unit_indices():
        # R(ξ)Λ(z) = anti(d^{-1/2} z d^{1/2}) ξ with z = E_ab d^{-1/2}
        z = np.zeros((base.m, base.m), complex)
        z[a, b] = 1.0
        z = dm @ z @ dm @ dp
        cols.append(apply_action(anti, z) @ xi)
    return np.stack(cols, axis=1)


@dataclass
class BoundedVectorData:
    xi: np.ndarray
    R_op: np.ndarray


def bounded_vector(xi, mod):
    return BoundedVectorData(np.asarray(xi, complex), bounded_operator(xi, mod))


@dataclass
class RelBasis:
    vectors: list
    R_ops: list


def module_basis(mod: ModuleStructure):
    """A finite (N,ν)-basis: partial isometries R(ξ_i) with Σ R R* = 1."""
    base, anti = mod.as_anti()
    dp = op_power(base.d, 0.5)
    vectors, rops = [], []
    off = 0
    for nk in base.blocks:
        e11 = np.zeros((base.m, base.m), complex)
        e11[off, off] = 1.0
        frame = support(apply_action(anti, e11))
        g = apply_action(anti, e11 @ dp)
        for s in range(frame.shape[1]):
            xi = g @ frame[:, s]
            vectors.append(xi)
            rops.append(_bounded_from(xi, base, anti))
        off += nk
    return RelBasis(vectors, rops)


def _bounded_from(xi, base, anti):
    mod = ModuleStructure(base, anti, "right")
    return bounded_operator(xi, mod)


def basis_defect(mod, rb: RelBasis):
    n = mod.dim
    total = sum(r @ dag(r) for r in rb.R_ops)
    worst = opnorm(total - np.eye(n))
    for i, ri in enumerate(rb.R_ops):
        worst = max(worst, opnorm(ri @ dag(ri) @ ri - ri))
        for j, rj in enumerate(rb.R_ops):
            if i != j:
                worst = max(worst, opnorm(dag(rj) @ ri))
    return worst


# ---------------------------------------------------------------- Gram model

def gram_operator(base: Basis, anti, rep):
    """Q on ℂ^{n1}⊗ℂ^{n2} with (ξ⊗_ν η|ξ'⊗_ν η') = (Q(ξ⊗η)|ξ'⊗η')."""
    dm = op_power(base.d, -0.5)
    x = np.einsum("ac,bcij->abij", dm, anti)
    y = np.einsum("be,aeij->abij", dm, rep)
    n1, n2 = anti.shape[-1], rep.shape[-1]
    q = np.einsum("abij,abkl->ikjl", x, y).reshape(n1 * n2, n1 * n2)
    return hermitize(q)


@dataclass
class RelTensorSpace:
    """H ⊗_ν K realised in H⊗K; ``V`` is an orthonormal basis of ran Q."""

    base: Basis
    anti: np.ndarray
    rep: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    _half: np.ndarray | None = field(default=None, repr=False)
    _triples: dict = field(default_factory=dict, repr=False)

    @property
    def dims(self):
        return self.anti.shape[-1], self.rep.shape[-1]

    @property
    def dim(self):
        return int(self.V.shape[1])

    @property
    def gram(self):
        return self.Q

    @property
    def embed(self):
        return self.V

    @property
    def proj(self):
        return self.V @ dag(self.V)

    @property
    def half(self):
        if self._half is None:
            self._half = psd_sqrt(self.Q)
        return self._half

    def vector(self, xi, eta):
        return self.half @ np.kron(xi, eta)

    def lam(self, xi):
        """λ_ξ: K → H⊗_ν K."""
        n2 = self.dims[1]
        return self.half @ np.kron(np.asarray(xi).reshape(-1, 1), np.eye(n2))

    def rho(self, eta):
        """ρ_η: H → H⊗_ν K."""
        n1 = self.dims[0]
        return self.half @ np.kron(np.eye(n1), np.asarray(eta).reshape(-1, 1))


def rel_tensor(left: ModuleStructure, right: ModuleStructure, tol=TOL):
    """H β⊗_ν α K for an anti-representation β on H and a representation α on K."""
    if left.side != "right" or right.side != "left":
        raise StructureError("left factor needs an anti-representation, right one a representation")
    if left.basis.blocks != right.basis.blocks or opnorm(left.basis.d - right.basis.d) > tol:
        raise StructureError("mismatched basis algebra or weight")
    return make_space(left.basis, left.act, right.act, tol)


def make_space(base, anti, rep, tol=TOL):
    q = gram_operator(base, anti, rep)
    return RelTensorSpace(base, anti, rep, q, support(q, tol))


def flipped(space: RelTensorSpace, tol=TOL):
    """K α⊗_{ν°} β H, the target of the flip σ_ν."""
    return make_space(space.base.opposite(), opposite_action(space.rep),
                      opposite_action(space.anti), tol)


def swap_matrix(n1, n2):
    """ξ⊗η ↦ η⊗ξ from ℂ^{n1}⊗ℂ^{n2} to ℂ^{n2}⊗ℂ^{n1}."""
    p = np.zeros((n2 * n1, n1 * n2))
    for i in range(n1):
        for j in range(n2):
            p[j * n1 + i, i * n2 + j] = 1.0
    return p


def flip_operator(space: RelTensorSpace):
    """σ_ν as an ambient matrix; unitary between the two relative tensor spaces."""
    n1, n2 = space.dims
    return swap_matrix(n1, n2) @ space.proj


def flip_defect(space: RelTensorSpace):
    """How far the plain swap is from carrying ξ⊗_ν η to η⊗_{ν°} ξ."""
    other = flipped(space)
    n1, n2 = space.dims
    s = swap_matrix(n1, n2)
    return opnorm(s @ space.Q @ s.T - other.Q)


def trace_model_embedding(space: RelTensorSpace, sign=-0.5):
    """The map ξ⊗η ↦ e(β(n_o)^{-1/2}ξ ⊗ α(d)^{sign}η) on H⊗K.

    e is the canonical projection Σ_k n_k^{-1} Σ β(E_ji)⊗α(E_ij), Tr the normalised
    trace of K, τ = Tr∘α, d = dν/dτ and (id⊗Tr)(e) = β(n_o).
    Returns (E, e) where E(ξ⊗η) is the image and Gram(E) should equal Q.
    """
    base, anti, rep = space.base, space.anti, space.rep
    n1, n2 = space.dims
    m = base.m
    e = np.zeros((n1 * n2, n1 * n2), complex)
    off = 0
    n_o = np.zeros((m, m), complex)
    tau_w = np.zeros((m, m), complex)
    for nk in base.blocks:
        for i in range(off, off + nk):
            for j in range(off, off + nk):
                e += np.kron(anti[j, i], rep[i, j]) / nk
        mult = np.real(np.trace(rep[off, off]))
        for i in range(off, off + nk):
            n_o[i, i] = mult / (nk * n2)
            tau_w[i, i] = mult / n2
        off += nk
    # τ(x) = Σ_k (m_k/n2) Tr(x_k); d = dν/dτ
    d = np.linalg.solve(tau_w, base.d) if np.allclose(base.d, np.diag(np.diag(base.d))) else \
        _density_rel(base, tau_w)
    b = apply_action(anti, op_power(n_o, -0.5))
    a = apply_action(rep, op_power(d, sign))
    return e @ np.kron(b, a), e, n_o, d


def _density_rel(base, tau_w):
    # tau_w is central (scalar per block), so it commutes with d
    return np.linalg.inv(tau_w) @ base.d


# ---------------------------------------------------------------- fiber products and slices

def fiber_product(m1: MultiMatrixAlgebra, m2: MultiMatrixAlgebra, space: RelTensorSpace,
                  check=True):
    """M1 ⋆ M2 on H⊗_ν K, as ambient matrices supported on ran Q.

    Computed as the commutant, inside the relative tensor space, of the compression
    of M1'⊗M2'.  Returns (algebra in V-coordinates, ambient basis, residual against
    the compression of M1⊗M2).
    """
    v = space.V
    c1, c2 = commutant(m1), commutant(m2)
    comp = [dag(v) @ np.kron(a, b) @ v for a in c1.basis for b in c2.basis]
    comp_alg = algebra_from_basis(np.array(comp), v.shape[1])
    fib = commutant(comp_alg)
    ambient = np.array([v @ x @ dag(v) for x in fib.basis])
    resid = 0.0
    if check:
        red = [dag(v) @ np.kron(a, b) @ v for a in m1.basis for b in m2.basis]
        resid = subspace_gap(vec(np.array(red)), vec(fib.basis))
    return fib, ambient, resid


def inclusion_defect(sub_mats, alg: MultiMatrixAlgebra):
    return max((alg.distance(x) for x in sub_mats), default=0.0)


def lambda_op(space, xi):
    return space.lam(xi)


def rho_op(space, eta):
    return space.rho(eta)


def slice_left(space, xi1, xi2, a, target=None):
    """(ω_{ξ1,ξ2} ⋆ id)(A) = λ*_{ξ2} A λ_{ξ1}."""
    tgt = target or space
    return dag(tgt.lam(xi2)) @ a @ space.lam(xi1)


def slice_right(space, a, eta1, eta2, target=None):
    """(id ⋆ ω_{η1,η2})(A) = ρ*_{η2} A ρ_{η1}."""
    tgt = target or space
    return dag(tgt.rho(eta2)) @ a @ space.rho(eta1)


def fubini_defect(space, a, xi1, xi2, eta1, eta2):
    left = inner(slice_left(space, xi1, xi2, a) @ eta1, eta2)
    right = inner(slice_right(space, a, eta1, eta2) @ xi1, xi2)
    return abs(left - right)


def weight_vectors(alg: MultiMatrixAlgebra, density):
    """Vectors η_i with Σ ω_{η_i} = Tr_ref(density ·) on the algebra."""
    n = alg.carrier_dim
    w_carrier = np.zeros((n, n), complex)
    for p, mk in zip(alg.central_projections, alg.mult):
        w_carrier += p @ density @ p / mk
    w, u = np.linalg.eigh(hermitize(w_carrier))
    if w.min() < -1e-9:
        raise StructureError("weight density is not positive")
    keep = w > 1e-14
    return [np.sqrt(w[i]) * u[:, i] for i in np.nonzero(keep)[0]]


def ovw_slice(space, weight_vecs, a, side="right"):
    """(id ⋆ φ)(A) (side='right') or (φ ⋆ id)(A) (side='left') for φ = Σ ω_{η_i}."""
    if side == "right":
        return sum(dag(space.rho(e)) @ a @ space.rho(e) for e in weight_vecs)
    return sum(dag(space.lam(e)) @ a @ space.lam(e) for e in weight_vecs)


# ---------------------------------------------------------------- three legs

def apply_legs(op, legs, x, n):
    """Apply an operator on ℂ^n⊗ℂ^n to two legs of x with shape (n, n, n, r)."""
    o = np.asarray(op).reshape(n, n, n, n)
    if legs == (0, 1):
        return np.einsum("abcd,cdzr->abzr", o, x, optimize=True)
    if legs == (1, 2):
        return np.einsum("abcd,xcdr->xabr", o, x, optimize=True)
    if legs == (0, 2):
        return np.einsum("abcd,cydr->aybr", o, x, optimize=True)
    if legs == (1, 0):
        return np.einsum("abcd,dczr->bazr", o, x, optimize=True)
    if legs == (2, 1):
        return np.einsum("abcd,xdcr->xbar", o, x, optimize=True)
    if legs == (2, 0):
        return np.einsum("abcd,dycr->bayr", o, x, optimize=True)
    raise ValueError(legs)


def apply_leg(op, leg, x):
    if leg == 0:
        return np.einsum("ac,cyzr->ayzr", op, x, optimize=True)
    if leg == 1:
        return np.einsum("ac,xczr->xazr", op, x, optimize=True)
    return np.einsum("ac,xycr->xyar", op, x, optimize=True)


def _lift(vb, legs, n):
    r = vb.shape[1]
    v = vb.reshape(n, n, r)
    eye = np.eye(n)
    if legs == (1, 2):
        c = np.einsum("xs,yzr->xyzsr", eye, v)
    elif legs == (0, 1):
        c = np.einsum("xyr,zs->xyzrs", v, eye)
    elif legs == (0, 2):
        c = np.einsum("xzr,ys->xyzrs", v, eye)
    else:
        raise ValueError(legs)
    return c.reshape(n, n, n, -1)


def triple_support(space_a, legs_a, space_b, legs_b, n):
    """Orthonormal basis, shape (n, n, n, r), of the three-leg relative tensor space."""
    key = (id(space_b), legs_a, legs_b)
    if key in space_a._triples:
        return space_a._triples[key][1]
    out = _triple_support(space_a, legs_a, space_b, legs_b, n)
    # keep space_b alive so its id stays unique
    space_a._triples[key] = (space_b, out)
    return out


def _triple_support(space_a, legs_a, space_b, legs_b, n):
    c = _lift(space_b.V, legs_b, n)
    pc = apply_legs(space_a.proj, legs_a, c, n)
    flat_c = c.reshape(n ** 3, -1)
    mx = hermitize(dag(flat_c) @ pc.reshape(n ** 3, -1))
    w, u = np.linalg.eigh(mx)
    keep = w > 0.5
    return (flat_c @ u[:, keep]).reshape(n, n, n, -1)


def associativity_defect(space_a, space_b):
    """‖[Q_a⊗1, 1⊗Q_b]‖ for consecutive spaces; zero iff the bracketings agree."""
    n1, n2 = space_a.dims
    n2b, n3 = space_b.dims
    if n2 != n2b:
        raise StructureError("middle legs differ")
    qa = np.kron(space_a.Q, np.eye(n3))
    qb = np.kron(np.eye(n1), space_b.Q)
    return opnorm(qa @ qb - qb @ qa)
