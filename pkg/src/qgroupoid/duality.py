"""The dual structure read off the left slices of W, and the bidual round trip."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import (TOL, T_GRID, AntilinearOp, StructureError, VerificationReport,
                     algebra_from_basis, closure_residual, commutant, dag, density_of,
                     intersect_algebras, op_power, opnorm, orth_span, span_gap, vec)
from .hopf import HopfBimodule
from .reltensor import ModuleStructure, bracket, swap_matrix
from .funit import hat_unitary, left_slice
from .mqg import MqgStructure, verify_mqg


@dataclass
class DualData:
    Mhat: object
    slices: np.ndarray          # left slices of W for the matrix-unit functionals
    xi: np.ndarray              # ξ(ω_{e_i, e_j}) in the same order
    Lambda_hat: np.ndarray      # Λ̂ as a matrix on the coordinates of Mhat
    omega_hat: np.ndarray
    span_is_algebra: float
    lambda_consistency: float


def _functional_vector(s: MqgStructure, v, w):
    """ξ with ω_{v,w}(x*) = (ξ | Λ_Φ(x)) for x ∈ M."""
    basis = s.M.basis
    c = np.stack([x @ s.omega for x in basis], axis=1)
    cw = np.stack([x @ w for x in basis], axis=1)
    rhs = dag(cw) @ v
    xi, *_ = np.linalg.lstsq(dag(c), rhs, rcond=None)
    return xi


def _gamma_hat(W, x, n):
    """Γ̂(x) = σ W (x ⊗ 1) W* σ on the (β̂, α) space."""
    sw = swap_matrix(n, n)
    p = W.source.proj
    inner = p @ np.kron(x, np.eye(n)) @ p
    return sw @ W.W @ inner @ dag(W.W) @ sw.T


def dual_data(s: MqgStructure) -> DualData:
    n = s.n
    W = s.W
    eye = np.eye(n)
    sl, xis = [], []
    for i in range(n):
        for j in range(n):
            sl.append(left_slice(W, eye[i], eye[j]))
            xis.append(_functional_vector(s, eye[i], eye[j]))
    sl = np.array(sl)
    xis = np.stack(xis, axis=1)
    span_dim = orth_span(vec(sl), 1e-8).shape[1]
    mhat = algebra_from_basis(sl, n)
    span_res = 0.0 if span_dim == mhat.dim else float(mhat.dim - span_dim)
    coords = mhat.coords_many(sl)
    lam_hat = xis @ np.linalg.pinv(coords)
    cons = float(np.linalg.norm(lam_hat @ coords - xis) / max(1.0, np.linalg.norm(xis)))
    omega_hat = lam_hat @ mhat.coords(np.eye(n))
    return DualData(mhat, sl, xis, lam_hat, omega_hat, span_res, cons)


def dualize(s: MqgStructure, name=None) -> MqgStructure:
    """(N, M̂, α, β̂, Γ̂, R̂ = J_Φ·*J_Φ, τ̂ = Ad P^{it}) with the weight of Λ̂."""
    dd = dual_data(s)
    if dd.lambda_consistency > 1e-7:
        raise StructureError("the map π̂(ω) ↦ ξ(ω) is not well defined")
    n = s.n
    W = s.W
    mhat = dd.Mhat
    gam = np.array([_gamma_hat(W, x, n) for x in mhat.basis])
    hb = HopfBimodule(s.base, mhat, s.hb.alpha, s.beta_hat, gam)
    J = s.gns.J
    r_imgs = np.array([J.sandwich(dag(x)) for x in mhat.basis])
    out = MqgStructure(hb, dd.omega_hat, r_imgs, s.P, name or f"dual({s.name})")
    out.extras["dual_data"] = dd
    out.extras["predual"] = s
    out.meta["span_is_algebra"] = dd.span_is_algebra
    return out


# ---------------------------------------------------------------- checks on the dual


def _jconj(J: AntilinearOp, x):
    """J x J for a linear x."""
    return J.sandwich(x)


def dual_report(s: MqgStructure, d: MqgStructure, tol=TOL, rng=None):
    """Identities tying the dual to the input."""
    rng = rng or np.random.default_rng(41)
    rep = VerificationReport()
    dd: DualData = d.extras["dual_data"]
    n = s.n
    rep.add("slice_span_closed", "dual algebra M̂", dd.span_is_algebra, tol)
    rep.add("Lambda_hat_well_defined", "dual GNS map Λ̂", dd.lambda_consistency, tol)
    gns_res = max(np.linalg.norm(dd.Lambda_hat @ d.M.coords(x) - x @ d.omega)
                  for x in d.M.basis)
    rep.add("Lambda_hat_is_vector_gns", "dual GNS map Λ̂", gns_res, tol)
    rep.add("M_hat_closed", "dual algebra M̂", closure_residual(d.M), tol)
    # Ŵ
    wh = hat_unitary(s.W)
    rep.add("W_hat", "dual unitary Ŵ", opnorm(d.W.W - wh.W), tol)
    # λ̂, δ̂
    rep.add("lambda_hat", "dual scaling operator λ̂", opnorm(d.lam - np.linalg.inv(s.lam)), tol)
    J = s.gns.J
    worst = 0.0
    for t in T_GRID:
        lhs = op_power(d.delta, 1j * t)
        rhs = (op_power(s.P, -1j * t) @ _jconj(J, op_power(s.delta, -1j * t))
               @ op_power(s.delta, -1j * t) @ op_power(s.gns.Delta, -1j * t))
        worst = max(worst, opnorm(lhs - rhs))
    rep.add("delta_hat", "dual modulus δ̂", worst, tol)
    # Δ_Φ̂ candidates
    dh = d.gns.Delta
    cand_plus = s.P @ _jconj(J, s.delta)
    cand_minus = s.P @ _jconj(J, np.linalg.inv(s.delta))
    r_plus, r_minus = opnorm(dh - cand_plus), opnorm(dh - cand_minus)
    rep.notes["modular_operator_candidates"] = {"P J delta J": r_plus, "P J delta^-1 J": r_minus}
    rep.add("dual_modular_operator", "dual modular operator", min(r_plus, r_minus), tol)
    # σ̂ implemented by P^{it} J δ^{it} J
    worst = 0.0
    for t in T_GRID:
        u = op_power(dh, 1j * t)
        v = op_power(s.P, 1j * t) @ _jconj(J, op_power(s.delta, 1j * t))
        for x in d.M.basis:
            worst = max(worst, opnorm(u @ x @ dag(u) - v @ x @ dag(v)))
    rep.add("dual_modular_group", "dual modular group", worst, tol)
    # J_Φ̂ Λ_Φ(x δ^{1/2}) = Λ_Φ(R(x*))
    jh = d.gns.J
    half = op_power(s.delta, 0.5)
    worst = max(np.linalg.norm(jh(x @ half @ s.omega) - s.R(dag(x)) @ s.omega) for x in s.M.basis)
    rep.add("dual_J", "dual conjugation J_Φ̂", worst, tol)
    # Φ̂ two ways: vector state of Ω̂ and inner products of Λ̂
    lam_cols = np.stack([dd.Lambda_hat @ d.M.coords(x) for x in d.M.basis], axis=1)
    gram = dag(lam_cols) @ lam_cols       # (Λ̂ b_j | Λ̂ b_i) at [i, j] conj
    dens_b = density_of(d.M, lambda x: np.vdot(d.omega, x @ d.omega))
    worst = 0.0
    for i, bi in enumerate(d.M.basis):
        for j, bj in enumerate(d.M.basis):
            worst = max(worst, abs(d.M.ref_trace(dens_b @ dag(bi) @ bj) - gram[i, j]))
    rep.add("dual_weight_two_ways", "dual GNS map Λ̂", worst, tol)
    # T̂_L(x*x) = α(<Λ̂x, Λ̂x>_{β,ν°})
    mod = ModuleStructure(s.base, s.hb.beta, "right")
    worst = 0.0
    for _ in range(4):
        x = d.M.random_element(rng)
        lx = dd.Lambda_hat @ d.M.coords(x)
        br = bracket(lx, lx, mod)
        worst = max(worst, opnorm(d.T_L(dag(x) @ x) - s.hb.alpha_of(br.matrix)))
    rep.add("dual_left_ovw", "dual left ovw T̂_L", worst, tol)
    # π̂ multiplicative
    worst_m, worst_x = 0.0, 0.0
    fvals = np.array([[b[j, i] for i in range(n) for j in range(n)] for b in s.M.basis])
    sp = s.hb.space
    for _ in range(3):
        v, v2, w, w2 = (rng.normal(size=n) + 1j * rng.normal(size=n) for _ in range(4))
        prod_vals = []
        for g in s.hb.Gamma:
            sl = dag(sp.lam(v2)) @ g @ sp.lam(v)
            prod_vals.append(np.vdot(w2, sl @ w))
        prod_vals = np.array(prod_vals)
        c, *_ = np.linalg.lstsq(fvals, prod_vals, rcond=None)
        pi_prod = np.tensordot(c, dd.slices, axes=1)
        pv, pw = left_slice(s.W, v, v2), left_slice(s.W, w, w2)
        worst_m = max(worst_m, opnorm(pi_prod - pv @ pw) / max(1.0, opnorm(pv @ pw)))
        xi_prod = dd.xi @ c
        xi_w = _functional_vector(s, w, w2)
        worst_x = max(worst_x, np.linalg.norm(xi_prod - pv @ xi_w) / max(1.0, np.linalg.norm(xi_prod)))
    rep.add("pi_hat_multiplicative", "π̂ multiplicative", worst_m, tol)
    rep.add("xi_left_module", "ξ left module map", worst_x, tol)
    # δ̂ pairing identities
    worst_s, worst_g = 0.0, 0.0
    p = d.hb.space.proj
    for t in T_GRID:
        dit = op_power(d.delta, 1j * t)
        worst_g = max(worst_g, opnorm(d.hb.gamma(dit) - p @ np.kron(dit, dit) @ p))
        for s_ in T_GRID:
            u = op_power(d.gns.Delta, 1j * s_)
            lhs = u @ dit @ dag(u)
            rhs = op_power(d.lam, 1j * s_ * t) @ dit
            worst_s = max(worst_s, opnorm(lhs - rhs))
    rep.add("delta_hat_modular", "δ̂ identities", worst_s, tol)
    rep.add("delta_hat_group_like", "δ̂ identities", worst_g, tol)
    return rep


def dual_relations_check(s: MqgStructure, d: MqgStructure, tol=TOL):
    rep = VerificationReport()
    dh = d.gns.Delta
    jp, jh = s.gns.J, d.gns.J
    worst = 0.0
    for t in T_GRID:
        u = op_power(dh, 1j * t)
        worst = max(worst, max(opnorm(s.tau(t, m) - u @ m @ dag(u)) for m in s.M.basis))
    rep.add("tau_from_dual_modular", "dual relations", worst, tol)
    worst = max(opnorm(s.R(m) - jh.sandwich(dag(m))) for m in s.M.basis)
    rep.add("R_from_dual_J", "dual relations", worst, tol)
    worst = 0.0
    for t in T_GRID:
        for s_ in T_GRID:
            a = op_power(dh, 1j * t)
            b = op_power(s.gns.Delta, 1j * s_)
            worst = max(worst, opnorm(a @ b - op_power(s.lam, 1j * s_ * t) @ b @ a))
    rep.add("modular_operators_commute", "dual relations", worst, tol)
    # J_Φ̂ J_Φ = λ^{i/4} J_Φ J_Φ̂ (composites of two antilinear maps are linear)
    lhs = jh.mat @ np.conj(jp.mat)
    rhs = op_power(s.lam, 0.25j) @ jp.mat @ np.conj(jh.mat)
    rep.add("modular_conjugations", "dual relations", opnorm(lhs - rhs), tol)
    rep.add("J_P_J", "J P J = P⁻¹", opnorm(jp.sandwich(s.P) - np.linalg.inv(s.P)), tol)
    rep.add("J_hat_delta", "dual relations",
            opnorm(jh.sandwich(s.delta) - np.linalg.inv(s.delta)), tol)
    rep.add("P_hat_equals_P", "P̂ = P", opnorm(d.P - s.P), tol)
    return rep


def heisenberg_check(s: MqgStructure, d: MqgStructure, tol=TOL):
    """The four intersections and the commutation of W with M'⊗M̂'."""
    rep = VerificationReport()
    n = s.n
    M, Mh = s.M, d.M
    Mc, Mhc = commutant(M), commutant(Mh)
    base = s.base
    idx = base.unit_indices()
    alpha = np.array([s.hb.alpha[a, b] for a, b in idx])
    beta = np.array([s.hb.beta[a, b] for a, b in idx])
    bhat = np.array([s.beta_hat[a, b] for a, b in idx])
    jbj = np.array([s.gns.J.sandwich(x) for x in beta])
    cases = [("M_cap_Mhat", M, Mh, alpha), ("Mcomm_cap_Mhat", Mc, Mh, bhat),
             ("M_cap_Mhatcomm", M, Mhc, beta), ("Mcomm_cap_Mhatcomm", Mc, Mhc, jbj)]
    dims = {}
    for nm, a, b, want in cases:
        inter = intersect_algebras(a.basis, b.basis, n)
        gap = span_gap(inter, want) if len(inter) else (0.0 if len(want) == 0 else np.inf)
        dims[nm] = len(inter)
        rep.add(nm, "Heisenberg intersections", gap, tol)
    rep.notes["dimensions"] = dims
    W = s.W
    ps, pt = W.source.proj, W.target.proj
    worst = 0.0
    for x in Mc.basis:
        for y in Mhc.basis:
            k = np.kron(x, y)
            worst = max(worst, opnorm(W.W @ ps @ k @ ps - pt @ k @ pt @ W.W))
    rep.add("W_commutes_with_commutants", "Heisenberg intersections", worst, tol)
    return rep


def bidual_check(s: MqgStructure, tol=TOL, d1=None):
    """dualize∘dualize against the input, as concrete matrices on the same Hilbert space."""
    rep = VerificationReport()
    d1 = d1 or dualize(s)
    d2 = dualize(d1)
    rep.add("algebra", "bidual", span_gap(d2.M.basis, s.M.basis), tol)
    rep.add("alpha", "bidual", float(np.abs(d2.hb.alpha - s.hb.alpha).max()), tol)
    rep.add("beta", "bidual", float(np.abs(d2.hb.beta - s.hb.beta).max()), tol)
    rep.add("basis_weight", "bidual", float(np.abs(d2.base.d - s.base.d).max()), tol)
    g = max(opnorm(d2.hb.gamma(x) - s.hb.gamma(x)) for x in s.M.basis)
    rep.add("coproduct", "bidual", g, tol)
    rep.add("left_ovw", "bidual",
            max(opnorm(d2.T_L(x) - s.T_L(x)) for x in s.M.basis), tol)
    rep.add("co_involution", "bidual",
            max(opnorm(d2.R(x) - s.R(x)) for x in s.M.basis), tol)
    rep.add("scaling_group", "bidual",
            max(opnorm(d2.tau(t, x) - s.tau(t, x)) for t in T_GRID for x in s.M.basis), tol)
    rep.add("modulus", "bidual", opnorm(d2.delta - s.delta), tol)
    rep.add("scaling_operator", "bidual", opnorm(d2.lam - s.lam), tol)
    rep.add("Lambda_hat_hat", "Λ̂̂ = Λ_Φ", float(np.linalg.norm(d2.omega - s.omega)), tol)
    rep.notes["bidual"] = d2
    return rep


def verify_dual(s: MqgStructure, tol=TOL, pentagon=True):
    """verify_mqg on the dual together with the duality identities."""
    d = dualize(s)
    rep = VerificationReport()
    rep.extend(verify_mqg(d, tol, pentagon=pentagon), "dual.")
    rep.extend(dual_report(s, d, tol), "duality.")
    rep.extend(dual_relations_check(s, d, tol), "relations.")
    rep.extend(heisenberg_check(s, d, tol), "heisenberg.")
    return d, rep
