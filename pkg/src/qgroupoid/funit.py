"""Fundamental unitaries of a Hopf bimodule with invariant weights.

Everything is ambient: W is an n²×n² matrix vanishing off its source relative
tensor space, and leg numbering is realised by einsum on ℂ^n⊗ℂ^n⊗ℂ^n.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import (TOL, T_GRID, AntilinearOp, StructureError, VerificationReport,
                     dag, op_power, opnorm, orth_span, pinv_sqrt, subspace_gap, vec,
                     vector_gns)
from .reltensor import (Basis, RelTensorSpace, apply_legs, make_space, opposite_action,
                        swap_matrix, triple_support)


@dataclass
class FundamentalUnitary:
    """W from ``source`` onto ``target``; both are relative tensor spaces on ℂ^n⊗ℂ^n."""

    W: np.ndarray
    source: RelTensorSpace
    target: RelTensorSpace
    side: str
    legs: tuple
    isometry_defect: float = 0.0

    @property
    def n(self):
        return self.source.dims[0]

    def unitarity(self):
        w = self.W
        return max(opnorm(dag(w) @ w - self.source.proj), opnorm(w @ dag(w) - self.target.proj))


def conjugate_action(jop: AntilinearOp, act):
    """n ↦ J x(n*) J for a (anti)representation x given on matrix units."""
    jm = jop.mat
    out = np.zeros_like(act)
    m = act.shape[0]
    for a in range(m):
        for b in range(m):
            # E_ab* = E_ba
            out[a, b] = jm @ np.conj(act[b, a]) @ np.conj(jm)
    return out


def _opposite_base(base: Basis):
    return base.opposite()


def _vector_map(hb, omega, gam_half, side):
    """Y(v⊗w) = Γ(a)(v ⊗ Ω) (left) or Y(w⊗v) = Γ(a)(Ω ⊗ v) (right), with aΩ = w."""
    n = hb.n
    basis = hb.M.basis
    bmat = np.stack([b @ omega for b in basis], axis=1)
    if bmat.shape[1] != n or np.linalg.matrix_rank(bmat) < n:
        raise StructureError("vector is not cyclic and separating")
    binv = np.linalg.inv(bmat)
    eye = np.eye(n)
    if side == "left":
        col = np.kron(eye, omega.reshape(-1, 1))
    else:
        col = np.kron(omega.reshape(-1, 1), eye)
    z = np.array([g @ gam_half @ col for g in hb.Gamma])           # (k, n², n)
    y = np.einsum("jxv,jw->xvw", z, binv, optimize=True)
    if side == "right":
        y = y.transpose(0, 2, 1)
    return y.reshape(n * n, n * n)


def beta_hat(hb, omega):
    g = vector_gns(hb.M.basis, omega)
    return conjugate_action(g.J, hb.alpha, ), g


def build_left_unitary(hb, omega, tol=TOL):
    """W = U*, where U(v ⊗ Λ(a)) = Γ(a)(v ⊗ Ω) from the (α, β̂) to the (β, α) space."""
    bhat, g = beta_hat(hb, omega)
    src_u = make_space(_opposite_base(hb.base), opposite_action(hb.alpha), opposite_action(bhat))
    tgt_u = hb.space
    y = _vector_map(hb, omega, tgt_u.half, "left")
    defect = opnorm(dag(y) @ y - src_u.Q)
    if defect > 1e-6:
        raise StructureError(f"fundamental isometry defect {defect:.2e}: left invariance fails")
    u = y @ pinv_sqrt(src_u.Q)
    return FundamentalUnitary(dag(u), tgt_u, src_u, "left", ("beta", "alpha", "beta_hat"), defect)


def build_right_unitary(hb, omega_psi, tol=TOL):
    """W' with W'(Λ_Ψ(a) ⊗ v) = Γ(a)(Ω_Ψ ⊗ v), from the (α̂, β) to the (β, α) space."""
    g = vector_gns(hb.M.basis, omega_psi)
    ahat = conjugate_action(g.J, hb.beta)
    src = make_space(_opposite_base(hb.base), opposite_action(ahat), opposite_action(hb.beta))
    tgt = hb.space
    y = _vector_map(hb, omega_psi, tgt.half, "right")
    defect = opnorm(dag(y) @ y - src.Q)
    if defect > 1e-6:
        raise StructureError(f"right fundamental isometry defect {defect:.2e}: right invariance fails")
    u = y @ pinv_sqrt(src.Q)
    return FundamentalUnitary(u, src, tgt, "right", ("alpha_hat", "beta", "alpha"), defect)


# ---------------------------------------------------------------- identities

def implementation_defect(W: FundamentalUnitary, hb):
    """max ‖Γ(m) − W*(1⊗m)W‖ over the basis of M."""
    n = hb.n
    eye = np.eye(n)
    return max(opnorm(g - dag(W.W) @ np.kron(eye, m) @ W.W) for m, g in zip(hb.M.basis, hb.Gamma))


def pentagon_residual(W: FundamentalUnitary, full_limit=8, probes=16, rng=None):
    """‖W₁₂W₁₃W₂₃ − W₂₃W₁₂‖ on the triple relative tensor space of the source."""
    rng = rng or np.random.default_rng(13)
    n = W.n
    sp = W.source
    x = triple_support(sp, (0, 1), sp, (1, 2), n)
    if x.shape[-1] == 0:
        return 0.0
    if n > full_limit:
        r = x.shape[-1]
        mix = rng.normal(size=(r, probes)) + 1j * rng.normal(size=(r, probes))
        mix /= np.linalg.norm(mix, axis=0)
        x = np.tensordot(x, mix, axes=([3], [0]))
    w = W.W
    lhs = apply_legs(w, (0, 1), apply_legs(w, (0, 2), apply_legs(w, (1, 2), x, n), n), n)
    rhs = apply_legs(w, (1, 2), apply_legs(w, (0, 1), x, n), n)
    r = x.shape[-1]
    diff = (lhs - rhs).reshape(n ** 3, r)
    if n > full_limit:
        return float(np.linalg.norm(diff, axis=0).max())
    return opnorm(diff)


def left_slice(W: FundamentalUnitary, v, w):
    """(ω_{v,w} ⋆ id)(W) = λ_w* W λ_v."""
    return dag(W.target.lam(w)) @ W.W @ W.source.lam(v)


def right_slice(W: FundamentalUnitary, v, w, adjoint=False):
    """(id ⋆ ω_{v,w})(W), or of W* when ``adjoint``."""
    if adjoint:
        return dag(W.source.rho(w)) @ dag(W.W) @ W.target.rho(v)
    return dag(W.target.rho(w)) @ W.W @ W.source.rho(v)


def slice(W: FundamentalUnitary, side, v, w, adjoint=False):
    if side == "left":
        if adjoint:
            return dag(W.source.lam(w)) @ dag(W.W) @ W.target.lam(v)
        return left_slice(W, v, w)
    return right_slice(W, v, w, adjoint)


def slice_span(W, side, vectors, adjoint=False):
    mats = [slice(W, side, v, w, adjoint) for v in vectors for w in vectors]
    return orth_span(vec(np.array(mats)), 1e-8)


def key_relation_defect(W: FundamentalUnitary, hb, omega, rng=None, samples=4):
    """(id⋆ω_{JΛ(e),η})Γ(x) = (id*ω_{Λ(x),Je*Jη})(U) with U = W*."""
    rng = rng or np.random.default_rng(17)
    g = vector_gns(hb.M.basis, omega)
    jm = g.J.mat
    sp = hb.space
    worst = 0.0
    for _ in range(samples):
        e = hb.M.random_element(rng)
        x = hb.M.random_element(rng)
        eta = rng.normal(size=hb.n) + 1j * rng.normal(size=hb.n)
        je = jm @ np.conj(e @ omega)
        lhs = dag(sp.rho(eta)) @ hb.gamma(x) @ sp.rho(je)
        jej = jm @ np.conj(dag(e)) @ np.conj(jm)
        u = dag(W.W)
        rhs = dag(sp.rho(jej @ eta)) @ u @ W.target.rho(x @ omega)
        worst = max(worst, opnorm(lhs - rhs) / max(1.0, np.linalg.norm(e) * np.linalg.norm(x)))
    return worst


def commutation_defects(W: FundamentalUnitary, hb, omega):
    """The intertwining relations of U = W* with α, β, β̂ and with M'."""
    from .linops import commutant
    bhat, g = beta_hat(hb, omega)
    u = dag(W.W)
    n = hb.n
    eye = np.eye(n)
    out = {}
    worst = [0.0, 0.0, 0.0]
    for a, b in hb.base.unit_indices():
        al, be, bh = hb.alpha[a, b], hb.beta[a, b], bhat[a, b]
        worst[0] = max(worst[0], opnorm(u @ np.kron(eye, al) - np.kron(al, eye) @ u))
        worst[1] = max(worst[1], opnorm(u @ np.kron(eye, be) - np.kron(eye, be) @ u))
        worst[2] = max(worst[2], opnorm(u @ np.kron(be, eye) - np.kron(eye, bh) @ u))
    out["alpha"], out["beta"], out["beta_hat"] = worst
    cm = commutant(hb.M)
    out["commutant"] = max((opnorm(u @ np.kron(x, eye) - np.kron(x, eye) @ u) for x in cm.basis),
                           default=0.0)
    return out


def hat_unitary(W: FundamentalUnitary):
    """Ŵ = σW*σ from the flipped target onto the flipped source."""
    from .reltensor import flipped
    n = W.n
    s = swap_matrix(n, n)
    return FundamentalUnitary(s @ dag(W.W) @ s, flipped(W.target), flipped(W.source),
                              "hat", ("beta_hat", "alpha", "beta"))


def manageability_check(W: FundamentalUnitary, P, Delta, J: AntilinearOp, I: AntilinearOp = None,
                        tol=TOL, rng=None, samples=6):
    rng = rng or np.random.default_rng(19)
    rep = VerificationReport()
    w = W.W
    worst_pp, worst_pd = 0.0, 0.0
    for t in T_GRID:
        pt = op_power(P, 1j * t)
        dt = op_power(Delta, 1j * t)
        pp = np.kron(pt, pt)
        worst_pp = max(worst_pp, opnorm(w @ pp - pp @ w))
        pd = np.kron(pt, dt)
        u = dag(w)
        worst_pd = max(worst_pd, opnorm(pd @ u - u @ pd))
    rep.add("manageability_P_P", "manageability", worst_pp, tol)
    rep.add("manageability_P_Delta", "manageability", worst_pd, tol)
    if I is not None:
        k = np.kron(I.mat, J.mat)
        u = dag(w)
        rep.add("antiunitary_intertwining", "manageability",
                opnorm(k @ np.conj(dag(u)) - u @ k), tol)
    # the antilinear pairing identity
    hat = hat_unitary(W)
    n = W.n
    s = swap_matrix(n, n)
    wflip = s @ w @ s
    pm, pp_ = op_power(P, -0.5), op_power(P, 0.5)
    jm = J.mat
    worst = 0.0
    for _ in range(samples):
        p, q, v, x = (rng.normal(size=n) + 1j * rng.normal(size=n) for _ in range(4))
        lhs = np.vdot(hat.target.vector(p, x), hat.W @ hat.source.vector(q, v))
        jp, jq = jm @ np.conj(p), jm @ np.conj(q)
        rhs = np.vdot(hat.source.vector(jq, pp_ @ x), wflip @ hat.target.vector(jp, pm @ v))
        worst = max(worst, abs(lhs - rhs))
    rep.add("manageability_pairing", "manageability", worst, tol * 10)
    return rep


def weak_regularity_check(W: FundamentalUnitary, hb, tol=TOL):
    """span{λ_v* Ŵ ρ_w} = α(N)' as subspaces of operators on H."""
    from .linops import algebra_from_basis, commutant
    hat = hat_unitary(W)
    n = hb.n
    eye = np.eye(n)
    mats = []
    for i in range(n):
        for j in range(n):
            v, w = eye[i], eye[j]
            mats.append(dag(hat.target.lam(v)) @ hat.W @ hat.source.rho(w))
    span = orth_span(vec(np.array(mats)), 1e-8)
    alpha_alg = algebra_from_basis(hb.alpha.reshape(-1, n, n)[
        [i for i in range(hb.alpha.shape[0] ** 2) if opnorm(hb.alpha.reshape(-1, n, n)[i]) > 0.5]], n)
    target = orth_span(vec(commutant(alpha_alg).basis))
    rep = VerificationReport()
    rep.add("weak_regularity", "weak regularity", subspace_gap(span, target), tol)
    rep.notes["slice_dim"] = span.shape[1]
    rep.notes["commutant_dim"] = target.shape[1]
    return rep
