"""Constructors for example structures and the operations combining them."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linops import (MultiMatrixAlgebra, StructureError, algebra_from_basis, dag, opnorm,
                     vec)
from .hopf import HopfBimodule, WeakHopfAlgebra
from .reltensor import Basis


# ---------------------------------------------------------------- finite groupoids

@dataclass
class FiniteGroupoid:
    """Arrows 0..|G|-1 with range/source objects; comp[g, h] = gh or -1."""

    objects: list
    source: np.ndarray
    range: np.ndarray
    comp: np.ndarray
    inverse: np.ndarray
    mu: np.ndarray
    labels: list = field(default_factory=list)

    @property
    def size(self):
        return len(self.source)

    def units(self):
        """Index of the identity arrow at each object."""
        out = []
        for u in range(len(self.objects)):
            for g in range(self.size):
                if self.source[g] == u and self.range[g] == u and self.comp[g, g] == g:
                    out.append(g)
                    break
        return out

    def check(self):
        """Residual count of violated groupoid axioms (0 when valid)."""
        bad = 0
        n = self.size
        units = self.units()
        if len(units) != len(self.objects):
            return 1
        for g in range(n):
            gi = self.inverse[g]
            bad += self.range[gi] != self.source[g]
            bad += self.comp[g, gi] != units[self.range[g]]
            bad += self.comp[gi, g] != units[self.source[g]]
            bad += self.comp[units[self.range[g]], g] != g
            bad += self.comp[g, units[self.source[g]]] != g
            for h in range(n):
                defined = self.source[g] == self.range[h]
                bad += (self.comp[g, h] >= 0) != defined
                if not defined:
                    continue
                gh = self.comp[g, h]
                bad += self.range[gh] != self.range[g] or self.source[gh] != self.source[h]
                for k in range(n):
                    if self.source[h] == self.range[k]:
                        bad += self.comp[gh, k] != self.comp[g, self.comp[h, k]]
        return int(bad) + int(np.any(np.asarray(self.mu) <= 0))

    def nu(self):
        """ν(g) = μ(r(g)) with counting measures on the range fibres."""
        return np.array([self.mu[self.range[g]] for g in range(self.size)], float)


def group_groupoid(table, labels=None):
    """A finite group from its multiplication table, identity at index 0."""
    table = np.asarray(table, int)
    n = len(table)
    inv = np.array([int(np.nonzero(table[g] == 0)[0][0]) for g in range(n)])
    zeros = np.zeros(n, int)
    return FiniteGroupoid([0], zeros, zeros.copy(), table.copy(), inv, np.ones(1),
                          labels or [str(g) for g in range(n)])


def cyclic_group(n):
    return group_groupoid([[(a + b) % n for b in range(n)] for a in range(n)],
                          [f"{a}" for a in range(n)])


def symmetric_group(k=3):
    perms = list(itertools.permutations(range(k)))
    idx = {p: i for i, p in enumerate(perms)}
    # (pq)(x) = p(q(x))
    table = [[idx[tuple(p[q[x]] for x in range(k))] for q in perms] for p in perms]
    return group_groupoid(table, ["".join(map(str, p)) for p in perms])


def pair_groupoid(npts, mu=None):
    """X×X with (x, y)(y, z) = (x, z); r(x, y) = x, s(x, y) = y."""
    arrows = [(x, y) for x in range(npts) for y in range(npts)]
    idx = {a: i for i, a in enumerate(arrows)}
    n = len(arrows)
    comp = -np.ones((n, n), int)
    for (x, y), g in idx.items():
        for (y2, z), h in idx.items():
            if y == y2:
                comp[g, h] = idx[(x, z)]
    src = np.array([y for x, y in arrows])
    rng = np.array([x for x, y in arrows])
    inv = np.array([idx[(y, x)] for x, y in arrows])
    mu = np.ones(npts) if mu is None else np.asarray(mu, float)
    return FiniteGroupoid(list(range(npts)), src, rng, comp, inv, mu,
                          [f"{x}{y}" for x, y in arrows])


def space_groupoid(npts, mu=None):
    """Only identity arrows."""
    n = npts
    comp = -np.ones((n, n), int)
    for g in range(n):
        comp[g, g] = g
    ar = np.arange(n)
    mu = np.ones(n) if mu is None else np.asarray(mu, float)
    return FiniteGroupoid(list(range(n)), ar.copy(), ar.copy(), comp, ar.copy(), mu,
                          [str(g) for g in range(n)])


# ---------------------------------------------------------------- weak Hopf algebras

def _linear_extension(alg: MultiMatrixAlgebra, domain, images):
    """Images of alg.basis under the linear map sending domain[i] to images[i]."""
    dom = vec(np.asarray(domain))
    coef = np.linalg.lstsq(dom, vec(alg.basis), rcond=None)[0]   # basis_j = Σ coef[i, j] dom_i
    if np.linalg.norm(dom @ coef - vec(alg.basis)) > 1e-8:
        raise StructureError("the given elements do not span the algebra")
    imgs = np.asarray(images)
    return np.tensordot(coef.T, imgs, axes=1)


def function_wha(G: FiniteGroupoid):
    """C(G): Γ(δ_g) = Σ_{ab=g} δ_a⊗δ_b, κ(f) = f∘inverse, ε(f) = Σ_units f."""
    n = G.size
    deltas = np.zeros((n, n, n), complex)
    for g in range(n):
        deltas[g, g, g] = 1
    M = algebra_from_basis(deltas, n)
    gam = np.zeros((n, n * n, n * n), complex)
    for a in range(n):
        for b in range(n):
            g = G.comp[a, b]
            if g >= 0:
                gam[g] += np.kron(deltas[a], deltas[b])
    kap = np.array([deltas[G.inverse[g]] for g in range(n)])
    units = set(G.units())
    eps = np.array([1.0 if g in units else 0.0 for g in range(n)])
    gam_b = _linear_extension(M, deltas, gam)
    kap_b = _linear_extension(M, deltas, kap)
    eps_b = np.real_if_close(_linear_extension(M, deltas, eps.reshape(n, 1, 1))[:, 0, 0])
    return WeakHopfAlgebra(M, gam_b, kap_b, eps_b)


def regular_operators(G: FiniteGroupoid):
    """λ_g δ_h = δ_{gh} on ℓ²(G) (zero if not composable)."""
    n = G.size
    lam = np.zeros((n, n, n), complex)
    for g in range(n):
        for h in range(n):
            gh = G.comp[g, h]
            if gh >= 0:
                lam[g, gh, h] = 1
    return lam


def convolution_wha(G: FiniteGroupoid):
    """ℂG: Γ(λ_g) = λ_g⊗λ_g, κ(λ_g) = λ_{g⁻¹}, ε(λ_g) = 1."""
    n = G.size
    lam = regular_operators(G)
    M = algebra_from_basis(lam, n)
    gam = np.array([np.kron(l, l) for l in lam])
    kap = np.array([lam[G.inverse[g]] for g in range(n)])
    gam_b = _linear_extension(M, lam, gam)
    kap_b = _linear_extension(M, lam, kap)
    eps_b = _linear_extension(M, lam, np.ones((n, 1, 1)))[:, 0, 0]
    return WeakHopfAlgebra(M, gam_b, kap_b, eps_b)


# ---------------------------------------------------------------- measured quantum groupoids

def _structure(base, M, alpha, beta, gamma_images, omega, r_images, tau_gen, name, meta=None):
    from .mqg import MqgStructure
    hb = HopfBimodule(base, M, alpha, beta, gamma_images)
    p = hb.space.proj
    hb.Gamma = np.array([p @ g @ p for g in gamma_images])
    return MqgStructure(hb, omega, np.asarray(r_images), np.asarray(tau_gen), name, dict(meta or {}))


def trivial():
    """N = M = ℂ acting on ℂ."""
    one = np.ones((1, 1), complex)
    base = Basis([1], one.copy())
    M = algebra_from_basis(one[None], 1)
    act = one.reshape(1, 1, 1, 1)
    return _structure(base, M, act, act.copy(), one[None], np.ones(1, complex), one[None], one,
                      "trivial")


def from_finite_groupoid(G: FiniteGroupoid, name=None):
    """ℓ^∞(G) on ℓ²(G): α(f) = f∘r, β(f) = f∘s, Γ(f)(s, t) = f(st), R(f) = f∘inverse."""
    if G.check():
        raise StructureError("groupoid axioms violated")
    n, m = G.size, len(G.objects)
    deltas = np.zeros((n, n, n), complex)
    for g in range(n):
        deltas[g, g, g] = 1
    M = algebra_from_basis(deltas, n)
    base = Basis([1] * m, np.diag(np.asarray(G.mu, float)).astype(complex))
    alpha = np.zeros((m, m, n, n), complex)
    beta = np.zeros((m, m, n, n), complex)
    for u in range(m):
        alpha[u, u] = np.diag((G.range == u).astype(float))
        beta[u, u] = np.diag((G.source == u).astype(float))
    gam = np.zeros((n, n * n, n * n), complex)
    for a in range(n):
        for b in range(n):
            if G.comp[a, b] >= 0:
                gam[G.comp[a, b]] += np.kron(deltas[a], deltas[b])
    r_imgs = np.array([deltas[G.inverse[g]] for g in range(n)])
    omega = np.sqrt(G.nu()).astype(complex)
    return _structure(base, M, alpha, beta, _linear_extension(M, deltas, gam), omega,
                      _linear_extension(M, deltas, r_imgs), np.eye(n, dtype=complex),
                      name or "groupoid", {"objects": m, "arrows": n})


# ---- standard form of a multi-matrix basis

@dataclass
class StandardForm:
    """L²(N, ν) = ⊕ M_{n_k} with ξ ↦ ξ* as J and Λ_ν(x) = x d^{1/2}."""

    base: Basis
    index: list           # (row, col) global positions of the HS basis vectors
    left: np.ndarray      # left[a, b] = left multiplication by E_ab
    right: np.ndarray     # right[a, b] = right multiplication by E_ab
    J: np.ndarray         # J v = J @ conj(v)
    omega: np.ndarray

    @property
    def dim(self):
        return len(self.index)


def standard_form(base: Basis):
    from .linops import psd_sqrt
    index = []
    off = 0
    for nk in base.blocks:
        index += [(off + i, off + j) for i in range(nk) for j in range(nk)]
        off += nk
    pos = {ij: k for k, ij in enumerate(index)}
    D, m = len(index), base.m
    left = np.zeros((m, m, D, D), complex)
    right = np.zeros((m, m, D, D), complex)
    for a, b in base.unit_indices():
        for (i, j), k in pos.items():
            if b == i:
                left[a, b, pos[(a, j)], k] = 1
            if j == a:
                right[a, b, pos[(i, b)], k] = 1
    jm = np.zeros((D, D), complex)
    for (i, j), k in pos.items():
        jm[pos[(j, i)], k] = 1
    root = psd_sqrt(base.d)
    omega = np.array([root[i, j] for i, j in index], complex)
    return StandardForm(base, index, left, right, jm, omega)


def pairs_qg(base: Basis, name=None):
    """N'⊗N on L²(N)⊗L²(N): α(m) = 1⊗m, β(m) = j(m)⊗1, Γ(n'⊗m) = (1⊗m)⊗(n'⊗1)."""
    from .hopf import AdaptedData
    from .mqg import from_adapted
    sf = standard_form(base)
    D = sf.dim
    eye = np.eye(D)
    units = base.unit_indices()
    alpha = np.zeros((base.m, base.m, D * D, D * D), complex)
    beta = np.zeros_like(alpha)
    for a, b in units:
        alpha[a, b] = np.kron(eye, sf.left[a, b])
        beta[a, b] = np.kron(sf.right[a, b], eye)
    gens, gams = [], []
    for a, b in units:
        for c, d in units:
            r_, l_ = sf.right[a, b], sf.left[c, d]
            gens.append(np.kron(r_, l_))
            gams.append(np.kron(np.kron(eye, l_), np.kron(r_, eye)))
    M = algebra_from_basis(np.array(gens), D * D)
    gam = _linear_extension(M, gens, gams)
    hb = HopfBimodule(base, M, alpha, beta, gam)
    p = hb.space.proj
    hb.Gamma = np.array([p @ g @ p for g in gam])
    omega = np.kron(sf.omega, sf.omega)
    from .linops import density_of
    psi = density_of(M, lambda x: np.vdot(omega, x @ omega))
    s = from_adapted(AdaptedData(hb, omega, psi, name or "pairs"))
    s.extras["standard_form"] = sf
    return s


def quantum_space_qg(base: Basis, name=None):
    """N'⊗_{Z(N)}N, realised as the direct sum of the pairs structures of the blocks."""
    parts = []
    off = 0
    for nk in base.blocks:
        sl = slice(off, off + nk)
        parts.append(pairs_qg(Basis([nk], base.d[sl, sl]), "pairs-block"))
        off += nk
    s = parts[0] if len(parts) == 1 else direct_sum(parts)
    s.name = name or "quantum-space"
    s.meta["blocks"] = list(base.blocks)
    return s


# ---------------------------------------------------------------- operations

def _embed(mats, iso_rows, iso_cols):
    return np.asarray([iso_rows @ x @ dag(iso_cols) for x in mats])


def direct_sum(parts, name=None):
    """Blockwise structure over N = ⊕N_i acting on ⊕H_i."""
    dims = [s.n for s in parts]
    ms = [s.base.m for s in parts]
    n, m = sum(dims), sum(ms)
    isos, offs = [], []
    off = 0
    for d_ in dims:
        e = np.zeros((n, d_))
        e[off:off + d_] = np.eye(d_)
        isos.append(e)
        offs.append(off)
        off += d_
    blocks = [b for s in parts for b in s.base.blocks]
    dd = np.zeros((m, m), complex)
    alpha = np.zeros((m, m, n, n), complex)
    beta = np.zeros_like(alpha)
    moff = 0
    gens, gams, rs = [], [], []
    omega = np.zeros(n, complex)
    tgen = np.zeros((n, n), complex)
    for s, e in zip(parts, isos):
        k = s.base.m
        dd[moff:moff + k, moff:moff + k] = s.base.d
        for a, b in s.base.unit_indices():
            alpha[moff + a, moff + b] = e @ s.hb.alpha[a, b] @ e.T
            beta[moff + a, moff + b] = e @ s.hb.beta[a, b] @ e.T
        ee = np.kron(e, e)
        for x, g in zip(s.M.basis, s.hb.Gamma):
            gens.append(e @ x @ e.T)
            gams.append(ee @ g @ ee.T)
            rs.append(e @ s.R(x) @ e.T)
        omega += e @ s.omega
        tgen += e @ s.tau_gen @ e.T
        moff += k
    M = algebra_from_basis(np.array(gens), n)
    base = Basis(blocks, dd)
    out = _structure(base, M, alpha, beta, _linear_extension(M, gens, gams), omega,
                     _linear_extension(M, gens, rs), tgen,
                     name or "+".join(s.name for s in parts))
    out.extras["summand_isometries"] = isos
    return out


def _product_order(b1: Basis, b2: Basis):
    """Reordering of N1⊗N2 matrix-unit indices making the product blocks contiguous."""
    def ranges(blocks):
        out, off = [], 0
        for nk in blocks:
            out.append(range(off, off + nk))
            off += nk
        return out
    order, blocks = [], []
    for r1 in ranges(b1.blocks):
        for r2 in ranges(b2.blocks):
            blocks.append(len(r1) * len(r2))
            order += [a * b2.m + c for a in r1 for c in r2]
    return np.array(order), blocks


def leg_swap_middle(n1, n2):
    """(H1⊗H1)⊗(H2⊗H2) → (H1⊗H2)⊗(H1⊗H2)."""
    dim = (n1 * n2) ** 2
    p = np.zeros((dim, dim))
    for a in range(n1):
        for b in range(n1):
            for c in range(n2):
                for d in range(n2):
                    src = ((a * n1 + b) * n2 + c) * n2 + d
                    dst = ((a * n2 + c) * n1 + b) * n2 + d
                    p[dst, src] = 1
    return p


def tensor_product(s1, s2, name=None):
    """All maps tensorial over N1⊗N2; Γ(x⊗y) = L(Γ1(x)⊗Γ2(y))L*."""
    order, blocks = _product_order(s1.base, s2.base)
    dfull = np.kron(s1.base.d, s2.base.d)
    base = Basis(blocks, dfull[np.ix_(order, order)])
    m1, m2 = s1.base.m, s2.base.m
    n = s1.n * s2.n
    m = m1 * m2
    alpha = np.zeros((m, m, n, n), complex)
    beta = np.zeros_like(alpha)
    for A, ia in enumerate(order):
        for B, ib in enumerate(order):
            a1, a2 = divmod(ia, m2)
            b1, b2 = divmod(ib, m2)
            alpha[A, B] = np.kron(s1.hb.alpha[a1, b1], s2.hb.alpha[a2, b2])
            beta[A, B] = np.kron(s1.hb.beta[a1, b1], s2.hb.beta[a2, b2])
    # keep only the block-diagonal matrix units
    mask = base.mask
    alpha[~mask] = 0
    beta[~mask] = 0
    lm = leg_swap_middle(s1.n, s2.n)
    gens, gams, rs = [], [], []
    for x, gx in zip(s1.M.basis, s1.hb.Gamma):
        for y, gy in zip(s2.M.basis, s2.hb.Gamma):
            gens.append(np.kron(x, y))
            gams.append(lm @ np.kron(gx, gy) @ lm.T)
            rs.append(np.kron(s1.R(x), s2.R(y)))
    M = algebra_from_basis(np.array(gens), n)
    return _structure(base, M, alpha, beta, _linear_extension(M, gens, gams),
                      np.kron(s1.omega, s2.omega), _linear_extension(M, gens, rs),
                      np.kron(s1.tau_gen, s2.tau_gen), name or f"{s1.name}*{s2.name}")


def opposite(s, name=None):
    """(N°, M, β, α, ςΓ) with R, τ_{-t} and the weight Φ∘R."""
    from .reltensor import opposite_action
    base = s.base.opposite()
    alpha = opposite_action(s.hb.beta)
    beta = opposite_action(s.hb.alpha)
    n = s.n
    sw = swap_matrix_nn(n)
    gam = np.array([sw @ g @ sw.T for g in s.hb.Gamma])
    return _structure(base, s.M, alpha, beta, gam, s.omega_psi, s.R_images,
                      np.linalg.inv(s.tau_gen), name or f"op({s.name})")


def swap_matrix_nn(n):
    from .reltensor import swap_matrix
    return swap_matrix(n, n)


def transport(s, u, name=None):
    """Image under the spatial isomorphism x ↦ u x u*."""
    u = np.asarray(u, complex)
    uu = np.kron(u, u)
    conj = lambda x: u @ x @ dag(u)
    M = algebra_from_basis(np.array([conj(x) for x in s.M.basis]), s.n)
    gens = [conj(x) for x in s.M.basis]
    alpha = np.einsum("ij,abjk,lk->abil", u, s.hb.alpha, np.conj(u))
    beta = np.einsum("ij,abjk,lk->abil", u, s.hb.beta, np.conj(u))
    gams = [uu @ g @ dag(uu) for g in s.hb.Gamma]
    rs = [conj(s.R(x)) for x in s.M.basis]
    out = _structure(s.base, M, alpha, beta, _linear_extension(M, gens, gams), u @ s.omega,
                     _linear_extension(M, gens, rs), conj(s.tau_gen), name or f"transport({s.name})")
    out.extras["implementing"] = u
    return out


def anti_transport(s, k, name=None):
    """Image under x ↦ K x* K for an antiunitary K (matrix k, Kv = k conj(v), K² = 1).

    The result lives over N° with α₂ = π∘α, β₂ = π∘β, R₂ = πRπ^{-1}, τ₂_t = πτ_{-t}π^{-1}.
    """
    from .reltensor import opposite_action
    k = np.asarray(k, complex)
    if opnorm(k @ np.conj(k) - np.eye(s.n)) > 1e-9:
        raise StructureError("the antiunitary must be an involution")
    pi = lambda x: k @ np.conj(dag(x)) @ dag(k)
    kk = np.kron(k, k)
    pi2 = lambda x: kk @ np.conj(dag(x)) @ dag(kk)
    gens = [pi(x) for x in s.M.basis]
    M = algebra_from_basis(np.array(gens), s.n)
    a_img = np.array([[pi(s.hb.alpha[a, b]) for b in range(s.base.m)] for a in range(s.base.m)])
    b_img = np.array([[pi(s.hb.beta[a, b]) for b in range(s.base.m)] for a in range(s.base.m)])
    # π∘α is an anti-representation of N, a representation of N° after the index swap
    alpha = opposite_action(a_img)
    beta = opposite_action(b_img)
    gams = [pi2(g) for g in s.hb.Gamma]
    rs = [pi(s.R(pi(x))) for x in gens]
    tgen = k @ np.conj(s.tau_gen) @ dag(k)
    out = _structure(s.base.opposite(), M, alpha, beta, _linear_extension(M, gens, gams),
                     k @ np.conj(s.omega), _linear_extension(M, gens, rs), tgen,
                     name or f"antitransport({s.name})")
    out.extras["implementing"] = k
    return out


def commutant_structure(s, name=None):
    """Image by j(x) = J_Φ x* J_Φ: (N°, M', β̂, ϱ = j∘β, (j⋆j)Γj)."""
    out = anti_transport(s, s.gns.J.mat, name or f"commutant({s.name})")
    return out


def structure_gap(a, b):
    """Residuals between two structures on the same Hilbert space, entry by entry."""
    if a.n != b.n or a.base.m != b.base.m or a.M.dim != b.M.dim:
        return {"shape": float("inf")}
    from .linops import span_gap
    return {"base": float(np.abs(a.base.d - b.base.d).max()),
            "algebra": float(span_gap(a.M.basis, b.M.basis)),
            "alpha": float(np.abs(a.hb.alpha - b.hb.alpha).max()),
            "beta": float(np.abs(a.hb.beta - b.hb.beta).max()),
            "coproduct": max(opnorm(a.hb.gamma(x) - b.hb.gamma(x)) for x in a.M.basis),
            "left_ovw": max(opnorm(a.T_L(x) - b.T_L(x)) for x in a.M.basis),
            "co_involution": max(opnorm(a.R(x) - b.R(x)) for x in a.M.basis)}
