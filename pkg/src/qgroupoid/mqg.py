"""The measured quantum groupoid record with its antipode and modular invariants.

A structure is stored as (Hopf bimodule, Ω, R on the basis of M, T) where
Φ = ω_Ω, R is the co-involution and τ_t(x) = T^{it} x T^{-it}.  Everything else
(Ψ = Φ∘R, T_L, T_R, δ, λ, P, W, W') is derived and cached.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .linops import (TOL, T_GRID, AntilinearOp, StateOnAlgebra, StructureError,
                     VerificationReport, _alg_power, commutant, dag, density_of, hermitize,
                     herm_fun, op_exp, op_power, opnorm, polar_antilinear, vector_gns)
from .hopf import (AdaptedData, HopfBimodule, InvariantOvw, verify_hopf_bimodule)
from .funit import (FundamentalUnitary, beta_hat, build_left_unitary, build_right_unitary,
                    implementation_defect, pentagon_residual)
from .reltensor import ModuleStructure, bracket, ovw_slice, weight_vectors

COCYCLE_GRID = (0.25, 0.5, 1.0, 2.0)


@dataclass
class MqgStructure:
    hb: HopfBimodule
    omega: np.ndarray
    R_images: np.ndarray
    tau_gen: np.ndarray
    name: str = ""
    meta: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict, repr=False)
    _c: dict = field(default_factory=dict, repr=False)

    # ---- basic maps
    @property
    def M(self):
        return self.hb.M

    @property
    def n(self):
        return self.hb.n

    @property
    def base(self):
        return self.hb.base

    def R(self, x):
        return np.tensordot(self.M.coords(x), self.R_images, axes=1)

    def tau(self, t, x):
        u = self._cached(("Tpow", t), lambda: op_power(self.tau_gen, 1j * t))
        return u @ x @ dag(u)

    def tau_complex(self, z, x):
        return op_power(self.tau_gen, 1j * z) @ x @ op_power(self.tau_gen, -1j * z)

    def S(self, x):
        """S = R∘τ_{-i/2}."""
        return self.R(self.tau_complex(-0.5j, x))

    def _cached(self, key, fn):
        if key not in self._c:
            self._c[key] = fn()
        return self._c[key]

    # ---- weights
    @property
    def gns(self):
        return self._cached("gns", lambda: vector_gns(self.M.basis, self.omega))

    @property
    def phi(self):
        return self._cached("phi", lambda: StateOnAlgebra(
            self.M, density_of(self.M, lambda x: np.vdot(self.omega, x @ self.omega))))

    @property
    def psi(self):
        return self._cached("psi", lambda: StateOnAlgebra(
            self.M, density_of(self.M, lambda x: self.phi(self.R(x)))))

    @property
    def omega_psi(self):
        def make():
            y = _alg_power(self.M, self.psi.density, 0.5) @ _alg_power(self.M, self.phi.density, -0.5)
            return y @ self.omega
        return self._cached("omega_psi", make)

    @property
    def gns_psi(self):
        return self._cached("gns_psi", lambda: vector_gns(self.M.basis, self.omega_psi))

    # ---- invariant weights
    @property
    def T_L(self):
        return self._cached("T_L", lambda: left_ovw(self.hb, self.phi))

    @property
    def T_R(self):
        return self._cached("T_R", lambda: right_ovw(self.hb, self.psi))

    # ---- unitaries
    @property
    def W(self) -> FundamentalUnitary:
        return self._cached("W", lambda: build_left_unitary(self.hb, self.omega))

    @property
    def Wr(self) -> FundamentalUnitary:
        return self._cached("Wr", lambda: build_right_unitary(self.hb, self.omega_psi))

    @property
    def beta_hat(self):
        return self._cached("beta_hat", lambda: beta_hat(self.hb, self.omega)[0])

    # ---- modular invariants
    @property
    def modulus(self):
        return self._cached("modulus", lambda: modulus_and_scaling(self.phi, self.psi))

    @property
    def delta(self):
        return self.modulus[0]

    @property
    def lam(self):
        return self.modulus[1]

    @property
    def P(self):
        return self._cached("P", lambda: manageable_P(self))

    def gamma_t(self, t, x):
        """γ_t(x) = β^{-1}(σ^Φ_t(β(x)))."""
        u = op_power(self.gns.Delta, 1j * t)
        y = u @ self.hb.beta_of(x) @ dag(u)
        return beta_inverse(self.hb, y)


# ---------------------------------------------------------------- helpers

def _units_of_base(base):
    m = base.m
    out = []
    for a, b in base.unit_indices():
        e = np.zeros((m, m), complex)
        e[a, b] = 1
        out.append(((a, b), e))
    return out


def _action_inverse(act, base, y):
    idx = base.unit_indices()
    mats = np.array([act[a, b] for a, b in idx])
    c, *_ = np.linalg.lstsq(mats.reshape(len(idx), -1).T, y.reshape(-1), rcond=None)
    x = np.zeros((base.m, base.m), complex)
    for (a, b), v in zip(idx, c):
        x[a, b] = v
    resid = np.linalg.norm(np.tensordot(c, mats, axes=1) - y)
    return x, resid


def beta_inverse(hb, y):
    return _action_inverse(hb.beta, hb.base, y)[0]


def alpha_inverse(hb, y):
    return _action_inverse(hb.alpha, hb.base, y)[0]


def left_ovw(hb: HopfBimodule, phi: StateOnAlgebra):
    """T_L(x) = α(d^{-1}Z), Z[b, a] = Φ(x α(E_ab)), so that Φ = ν∘α^{-1}∘T_L."""
    d_inv = np.linalg.inv(hb.base.d)
    imgs = []
    for x in hb.M.basis:
        z = np.zeros((hb.base.m,) * 2, complex)
        for a, b in hb.base.unit_indices():
            z[b, a] = phi(x @ hb.alpha[a, b])
        imgs.append(hb.alpha_of(d_inv @ z))
    return InvariantOvw(hb.M, np.array(imgs), hb.alpha, "left")


def right_ovw(hb: HopfBimodule, psi: StateOnAlgebra):
    """T_R(x) = β(Z d^{-1}), Z[b, a] = Ψ(x β(E_ab)), so that Ψ = ν∘β^{-1}∘T_R."""
    d_inv = np.linalg.inv(hb.base.d)
    imgs = []
    for x in hb.M.basis:
        z = np.zeros((hb.base.m,) * 2, complex)
        for a, b in hb.base.unit_indices():
            z[b, a] = psi(x @ hb.beta[a, b])
        imgs.append(hb.beta_of(z @ d_inv))
    return InvariantOvw(hb.M, np.array(imgs), hb.beta, "right")


def _alg_log(alg, x):
    p = alg.unit
    y = hermitize(x + (np.eye(alg.carrier_dim) - p))
    return herm_fun(y, np.log) @ p


def central_angle(v, tol=1e-8):
    """θ with v = exp(iθ) for a unitary v whose real and imaginary parts commute."""
    re = hermitize((v + dag(v)) / 2)
    im = hermitize((v - dag(v)) / 2j)
    w, u = np.linalg.eigh(re + 0.618 * im)
    lam_re = np.real(np.einsum("ia,ij,ja->a", np.conj(u), re, u))
    lam_im = np.real(np.einsum("ia,ij,ja->a", np.conj(u), im, u))
    theta = np.arctan2(lam_im, lam_re)
    return u @ np.diag(theta) @ dag(u)


def modulus_and_scaling(phi: StateOnAlgebra, psi: StateOnAlgebra):
    """(δ, λ) with [DΨ:DΦ]_t = λ^{it²/2} δ^{it}."""
    if not (phi.faithful and psi.faithful):
        raise StructureError("modulus needs faithful weights")
    alg = phi.algebra
    log_delta = hermitize(_alg_log(alg, psi.density) - _alg_log(alg, phi.density))
    delta = op_exp(log_delta)
    u1 = _alg_power(alg, psi.density, 1j) @ _alg_power(alg, phi.density, -1j)
    v = u1 @ op_power(delta, -1j)
    theta = central_angle(v)
    if opnorm(theta) >= np.pi:
        raise StructureError("scaling operator outside the principal branch")
    lam = op_exp(2 * theta)
    return delta, hermitize(lam)


def cocycle_defect(s: MqgStructure, grid=COCYCLE_GRID):
    alg = s.M
    worst = 0.0
    for t in grid:
        u = _alg_power(alg, s.psi.density, 1j * t) @ _alg_power(alg, s.phi.density, -1j * t)
        want = op_power(s.lam, 1j * t * t / 2) @ op_power(s.delta, 1j * t)
        worst = max(worst, opnorm(u - want))
    return worst


def manageable_P(s: MqgStructure):
    """P = exp(log T − y' − (i/2) log λ) with y' ∈ M', y'Ω = (log T)Ω."""
    log_t = herm_fun(hermitize(s.tau_gen), np.log)
    cm = commutant(s.M)
    cols = np.stack([b @ s.omega for b in cm.basis], axis=1)
    c, *_ = np.linalg.lstsq(cols, log_t @ s.omega, rcond=None)
    y = np.tensordot(c, cm.basis, axes=1)
    k = log_t - y - 0.5j * herm_fun(hermitize(s.lam), np.log)
    return op_exp(hermitize(k))


def P_defect(s: MqgStructure):
    """max ‖P^{it}Λ(x) − λ^{t/2}Λ(τ_t(x))‖."""
    worst = 0.0
    for t in T_GRID:
        pt = op_power(s.P, 1j * t)
        lt = op_power(s.lam, t / 2)
        for x in s.M.basis:
            worst = max(worst, np.linalg.norm(pt @ x @ s.omega - lt @ s.tau(t, x) @ s.omega))
    return worst


# ---------------------------------------------------------------- antipode

@dataclass
class AntipodeData:
    G: AntilinearOp
    I: AntilinearOp
    D: np.ndarray
    residual: float
    involution_defect: float


def build_antipode_G(hb, omega, omega_psi, samples=None, rng=None, tol=1e-8):
    """Fit the antilinear G with G v(a,b,c,d) = v(c,d,a,b).

    v(a,b,c,d) = λ*_{Λ_Ψ(σ^Ψ_{-i}(b*))} U(Λ_Ψ(a) ⊗ Λ_Φ((cd)*)) with U the left isometry.
    """
    rng = rng or np.random.default_rng(23)
    M, n = hb.M, hb.n
    W = build_left_unitary(hb, omega)
    u = dag(W.W)
    src = W.target
    sp = hb.space
    psi_vec = omega_psi
    # ρ_Ψ from the vector state of Ω_Ψ
    rho_psi = density_of(M, lambda x: np.vdot(psi_vec, x @ psi_vec))
    rp = _alg_power(M, rho_psi, 1.0)
    rpi = _alg_power(M, rho_psi, -1.0)
    count = samples or 3 * n + 4

    def v(a, b, c, d):
        xi = rp @ dag(b) @ rpi @ psi_vec
        vec = src.vector(a @ psi_vec, dag(c @ d) @ omega)
        return dag(sp.lam(xi)) @ (u @ vec)

    v1, v2 = [], []
    for _ in range(count):
        a, b, c, d = (M.random_element(rng) for _ in range(4))
        v1.append(v(a, b, c, d))
        v2.append(v(c, d, a, b))
    v1 = np.stack(v1, axis=1)
    v2 = np.stack(v2, axis=1)
    if np.linalg.matrix_rank(v1, tol=1e-8 * np.linalg.norm(v1)) < n:
        raise StructureError("spanning vectors of G do not span the Hilbert space")
    amat = v2 @ np.linalg.pinv(np.conj(v1))
    resid = np.linalg.norm(amat @ np.conj(v1) - v2) / max(1.0, np.linalg.norm(v2))
    if resid > 1e-6:
        raise StructureError(f"defining relations of G are inconsistent ({resid:.2e}): not adapted")
    g = AntilinearOp(amat)
    inv = opnorm(amat @ np.conj(amat) - np.eye(n))
    i_op, d = polar_antilinear(g)
    return AntipodeData(g, i_op, d, float(resid), float(inv))


def unitary_antipode(i_op: AntilinearOp, basis):
    """R(m) = I m* I on the basis."""
    return np.array([i_op.sandwich(dag(b)) for b in basis])


def scaling_group(D):
    """Generator T with τ_t(x) = D^{-it} x D^{it} = T^{it} x T^{-it}."""
    return np.linalg.inv(hermitize(D))


def antipode(R, tau_gen):
    """S = R∘τ_{-i/2} as a callable."""
    half = op_power(tau_gen, 0.5)
    half_inv = op_power(tau_gen, -0.5)
    return lambda x: R(half @ x @ half_inv)


def antipode_map(s: MqgStructure):
    return s.S


def from_adapted(data: AdaptedData, name=None):
    hb = data.hb
    psi_vec = _psi_vector(hb.M, data.omega, data.psi_density)
    ad = build_antipode_G(hb, data.omega, psi_vec)
    r_imgs = unitary_antipode(ad.I, hb.M.basis)
    s = MqgStructure(hb, data.omega, r_imgs, scaling_group(ad.D), name or data.name,
                     dict(data.notes))
    s.meta["antipode_fit_residual"] = ad.residual
    s.meta["G_involution_defect"] = ad.involution_defect
    s.extras["psi_expected"] = data.psi_density
    if data.pi_images is not None:
        s.extras["pi_images"] = data.pi_images
    s._c["antipode"] = ad
    return s


def _psi_vector(M, omega, psi_density):
    phi_d = density_of(M, lambda x: np.vdot(omega, x @ omega))
    y = _alg_power(M, psi_density, 0.5) @ _alg_power(M, phi_d, -0.5)
    return y @ omega


# ---------------------------------------------------------------- verification

def _expand(s, X):
    """Coefficients of X ∈ M⊗M over the orthonormal basis of M (and the basis list)."""
    from .linops import unvec
    n = s.n
    onb = s._cached("onb", lambda: unvec(s.M.onb(), n))
    c = np.einsum("iac,jbd,abcd->ij", np.conj(onb), np.conj(onb), X.reshape(n, n, n, n),
                  optimize=True)
    return c, onb


def _tensor_from(c, left, right):
    n = left.shape[1]
    return np.einsum("ij,iac,jbd->abcd", c, left, right, optimize=True).reshape(n * n, n * n)


def coinvolution_defect(s):
    worst = 0.0
    for x in s.M.basis:
        c, onb = _expand(s, s.hb.gamma(x))
        r_onb = np.array([s.R(o) for o in onb])
        lhs = _tensor_from(c.T, r_onb, r_onb)
        worst = max(worst, opnorm(lhs - s.hb.gamma(s.R(x))))
    return worst


def _rho_slice(s, x_mat, eta):
    sp = s.hb.space
    r = sp.rho(eta)
    return dag(r) @ x_mat @ r


def definition_defects(s, pairs=None):
    """The two identities defining a measured quantum groupoid."""
    M = s.M
    jm = s.gns.J.mat
    J = lambda v: jm @ np.conj(v)
    basis = list(M.basis)
    if pairs is None:
        if len(basis) <= 9:
            pairs = [(a, b) for a in basis for b in basis]
        else:
            rng = np.random.default_rng(29)
            pairs = [(M.random_element(rng), M.random_element(rng)) for _ in range(12)]
    worst_r, worst_t = 0.0, 0.0
    for a, b in pairs:
        bb, aa = dag(b) @ b, dag(a) @ a
        lhs = s.R(_rho_slice(s, s.hb.gamma(bb), J(a @ s.omega)))
        rhs = _rho_slice(s, s.hb.gamma(aa), J(b @ s.omega))
        worst_r = max(worst_r, opnorm(lhs - rhs))
        for t in T_GRID:
            u = op_power(s.gns.Delta, 1j * t)
            sa = u @ a @ dag(u)
            sbb = u @ bb @ dag(u)
            lhs = s.tau(t, _rho_slice(s, s.hb.gamma(bb), J(a @ s.omega)))
            rhs = _rho_slice(s, s.hb.gamma(sbb), J(sa @ s.omega))
            worst_t = max(worst_t, opnorm(lhs - rhs))
    return worst_r, worst_t


def _spatial_gamma_defect(s, u1, u2, left_map):
    """max ‖Γ(f(x)) − (u1⊗u2)Γ(x)(u1⊗u2)*‖ for the implemented automorphism f."""
    worst = 0.0
    uu = np.kron(u1, u2)
    for x in s.M.basis:
        worst = max(worst, opnorm(s.hb.gamma(left_map(x)) - uu @ s.hb.gamma(x) @ dag(uu)))
    return worst


def invariance_defects(s):
    """Left: (id⋆Φ)Γ = T_L; right: (Ψ⋆id)Γ = T_R."""
    sp = s.hb.space
    rl = sp.rho(s.omega)
    lr = sp.lam(s.omega_psi)
    wl, wr = 0.0, 0.0
    for x, g in zip(s.M.basis, s.hb.Gamma):
        wl = max(wl, opnorm(dag(rl) @ g @ rl - s.T_L(x)))
        wr = max(wr, opnorm(dag(lr) @ g @ lr - s.T_R(x)))
    return wl, wr


def verify_mqg(s: MqgStructure, tol=TOL, hopf=True, pentagon=True):
    rep = VerificationReport()
    hb = s.hb
    if hopf:
        rep.extend(verify_hopf_bimodule(hb, tol), "hopf.")
    if not (s.phi.faithful and s.psi.faithful):
        rep.add("weights_faithful", "faithful weights", np.inf, tol)
        return rep
    rep.add("weights_faithful", "faithful weights", 0.0, tol)
    try:
        _verify_body(s, rep, tol, pentagon)
    except StructureError as exc:
        # a derived object (W, δ, the antipode...) could not be built
        rep.add("derived_structure", "structure identities", np.inf, tol)
        rep.notes["derived_structure"] = str(exc)
    return rep


def _verify_body(s, rep, tol, pentagon):
    hb, M = s.hb, s.M
    # co-involution
    rr = max(opnorm(s.R(s.R(x)) - x) for x in M.basis)
    rep.add("R_involutive", "co-involution R", rr, tol)
    rng = np.random.default_rng(31)
    anti = 0.0
    for _ in range(4):
        x, y = M.random_element(rng), M.random_element(rng)
        anti = max(anti, opnorm(s.R(x @ y) - s.R(y) @ s.R(x)) / (np.linalg.norm(x) * np.linalg.norm(y)))
        anti = max(anti, opnorm(s.R(dag(x)) - dag(s.R(x))) / np.linalg.norm(x))
    rep.add("R_antiautomorphism", "co-involution R", anti, tol)
    ra = max(opnorm(s.R(hb.alpha[a, b]) - hb.beta[a, b]) for a, b in hb.base.unit_indices())
    rep.add("R_alpha_is_beta", "co-involution R", ra, tol)
    rep.add("R_coproduct", "co-involution R", coinvolution_defect(s), tol)
    # τ is a group of automorphisms of M
    ta = 0.0
    for t in T_GRID:
        for x in M.basis:
            ta = max(ta, M.distance(s.tau(t, x)))
    rep.add("tau_preserves_M", "scaling group τ", ta, tol)
    dr, dt = definition_defects(s)
    rep.add("definition_R_identity", "structure identities", dr, tol)
    rep.add("definition_tau_identity", "structure identities", dt, tol)
    # γ and ν
    gam_well, nu_inv, tb = 0.0, 0.0, 0.0
    for t in T_GRID:
        u = op_power(s.gns.Delta, 1j * t)
        for (a, b), e in _units_of_base(hb.base):
            y = u @ hb.beta[a, b] @ dag(u)
            x, res = _action_inverse(hb.beta, hb.base, y)
            gam_well = max(gam_well, res)
            nu_inv = max(nu_inv, abs(hb.base.nu(x) - hb.base.nu(e)))
            tb = max(tb, opnorm(s.tau(t, hb.beta[a, b]) - hb.beta_of(hb.base.sigma(t, e))))
    rep.add("gamma_defined", "adaptedness γ", gam_well, tol)
    rep.add("nu_gamma_invariant", "adaptedness γ", nu_inv, tol)
    rep.add("tau_on_beta", "adaptedness γ", tb, tol)
    # invariance of the weights
    wl, wr = invariance_defects(s)
    rep.add("left_invariance", "left invariance", wl, tol)
    rep.add("right_invariance", "right invariance", wr, tol)
    rep.add("T_L_positive", "operator-valued weights", max(0.0, -s.T_L.positivity()), tol)
    rep.add("T_L_bimodule", "operator-valued weights", s.T_L.bimodule_defect(), tol)
    rep.add("T_R_positive", "operator-valued weights", max(0.0, -s.T_R.positivity()), tol)
    rep.add("T_R_bimodule", "operator-valued weights", s.T_R.bimodule_defect(), tol)
    # weight-decomposition independence of the slice map
    wv = weight_vectors(M, s.phi.density)
    sl = max(opnorm(ovw_slice(hb.space, wv, g) - s.T_L(x)) for x, g in zip(M.basis, hb.Gamma))
    rep.add("slice_independent_of_vectors", "invariance slices", sl, tol)
    # Γ intertwinings with one-parameter groups
    dphi, dpsi = s.gns.Delta, s.gns_psi.Delta
    w_ts, w_tt, w_sf = 0.0, 0.0, 0.0
    for t in T_GRID:
        tt = op_power(s.tau_gen, 1j * t)
        sf = op_power(dphi, 1j * t)
        sp_ = op_power(dpsi, -1j * t)
        w_ts = max(w_ts, _spatial_gamma_defect(s, tt, sf, lambda x: sf @ x @ dag(sf)))
        w_tt = max(w_tt, _spatial_gamma_defect(s, tt, tt, lambda x: tt @ x @ dag(tt)))
        w_sf = max(w_sf, _spatial_gamma_defect(s, sf, sp_, lambda x: tt @ x @ dag(tt)))
    rep.add("gamma_tau_sigma", "Γ and σ^Φ", w_ts, tol)
    rep.add("gamma_tau_tau", "Γ and τ", w_tt, tol)
    rep.add("gamma_tau_modular", "Γ and τ", w_sf, tol)
    # modulus and scaling operator
    delta, lam = s.delta, s.lam
    rep.add("cocycle", "modulus δ", cocycle_defect(s), tol)
    p = hb.space.proj
    rep.add("delta_group_like", "δ group-like",
            opnorm(hb.gamma(delta) - p @ np.kron(delta, delta) @ p), tol)
    rep.add("delta_in_M", "modulus δ", M.distance(delta), tol)
    rep.add("R_delta_inverse", "modulus δ",
            opnorm(s.R(delta) - np.linalg.inv(delta)), tol)
    rep.add("tau_delta", "modulus δ",
            max(opnorm(s.tau(t, delta) - delta) for t in T_GRID), tol)
    rep.add("R_lambda", "scaling operator λ", opnorm(s.R(lam) - lam), tol)
    cent = max(opnorm(lam @ x - x @ lam) for x in M.basis)
    rep.add("lambda_central", "scaling operator λ", cent, tol)
    rep.add("lambda_in_alpha_beta", "scaling operator λ",
            max(_action_inverse(hb.alpha, hb.base, lam)[1], _action_inverse(hb.beta, hb.base, lam)[1]),
            tol)
    # δ^{it} compatibility with Γ
    wd = 0.0
    for t in T_GRID:
        dt_ = op_power(delta, 1j * t)
        wd = max(wd, _spatial_gamma_defect(s, dt_, dt_, lambda x: dt_ @ x @ dag(dt_)))
    rep.add("delta_coproduct_compatible", "δ and Γ", wd, tol)
    # one-parameter groups commute
    wc1, wc2 = 0.0, 0.0
    for t in T_GRID:
        a = op_power(dphi, 1j * t)
        b = op_power(dpsi, 1j * t)
        c = op_power(s.tau_gen, 1j * t)
        for x in M.basis:
            wc1 = max(wc1, opnorm(a @ b @ x @ dag(b) @ dag(a) - b @ a @ x @ dag(a) @ dag(b)))
            wc2 = max(wc2, opnorm(a @ c @ x @ dag(c) @ dag(a) - c @ a @ x @ dag(a) @ dag(c)))
    rep.add("modular_groups_commute", "modular commutation", wc1, tol)
    rep.add("modular_tau_commute", "modular commutation", wc2, tol)
    # antipode
    s_inv = 0.0
    s_sq = 0.0
    for x in M.basis:
        s_inv = max(s_inv, opnorm(dag(s.S(dag(s.S(x)))) - x))
        s_sq = max(s_sq, opnorm(s.S(s.S(x)) - s.tau_complex(-1j, x)))
    rep.add("antipode_involutive", "antipode S", s_inv, tol * 10)
    rep.add("antipode_square", "antipode S", s_sq, tol * 10)
    # manageable operator
    rep.add("manageable_operator", "manageable operator P", P_defect(s), tol)
    # fundamental unitary
    W = s.W
    rep.add("W_unitary", "fundamental unitary W", W.unitarity(), tol)
    rep.add("W_implements_coproduct", "fundamental unitary W", implementation_defect(W, hb), tol)
    if pentagon:
        rep.add("W_pentagon", "pentagon", pentagon_residual(W), tol)
    return rep


# ---------------------------------------------------------------- classification

def _brackets(s, xi):
    base = s.base
    eye = np.eye(base.m)
    mods = [ModuleStructure(base, s.beta_hat, "right"),
            ModuleStructure(base, s.hb.alpha, "left"),
            ModuleStructure(base, s.hb.beta, "right")]
    return [bracket(xi, xi, m).matrix - eye for m in mods]


def fixed_vectors(W: FundamentalUnitary, side):
    """Subspace of ξ with W(ξ⊗η) = ξ⊗η (side 'fixed') or W(η⊗ξ) = η⊗ξ ('cofixed') for all η."""
    from .linops import null_space
    n = W.n
    a = W.W @ W.source.half - W.target.half
    a3 = a.reshape(n * n, n, n)
    if side == "fixed":
        lin = a3.transpose(0, 2, 1).reshape(-1, n)
    else:
        lin = a3.reshape(-1, n)
    return null_space(lin, 1e-9)


def binormalized_vector(s, side, starts=6):
    """Least-squares search for a bi-normalized vector in the fixed subspace."""
    z = fixed_vectors(s.W, side)
    if z.shape[1] == 0:
        return None, np.inf
    p = z.shape[1]
    rng = np.random.default_rng(37)

    def resid(r):
        c = r[:p] + 1j * r[p:]
        xi = z @ c
        out = np.concatenate([m.reshape(-1) for m in _brackets(s, xi)])
        return np.concatenate([out.real, out.imag])

    best, best_x = np.inf, None
    init = [np.concatenate([np.real(dag(z) @ s.omega), np.imag(dag(z) @ s.omega)])]
    init += [rng.normal(size=2 * p) for _ in range(starts)]
    for x0 in init:
        res = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        val = float(np.linalg.norm(resid(res.x)))
        if val < best:
            best, best_x = val, z @ (res.x[:p] + 1j * res.x[p:])
        if best < 1e-12:
            break
    return best_x, best


def adaptedness_defects(s: MqgStructure):
    """σ^Φ_t(β(n)) = β(σ^ν_{-t}(n)) and σ^Ψ_t(α(n)) = α(σ^ν_t(n)), as in the definition."""
    base = s.base
    wb, wa = 0.0, 0.0
    for t in T_GRID:
        uf = op_power(s.gns.Delta, 1j * t)
        up = op_power(s.gns_psi.Delta, 1j * t)
        for (a, b), e in _units_of_base(base):
            wb = max(wb, opnorm(uf @ s.hb.beta[a, b] @ dag(uf) - s.hb.beta_of(base.sigma(-t, e))))
            wa = max(wa, opnorm(up @ s.hb.alpha[a, b] @ dag(up) - s.hb.alpha_of(base.sigma(t, e))))
    return wb, wa


def classify(s: MqgStructure, tol=1e-8):
    """Flags; γ is read on N°, where β is a representation and ν° = Tr(d^T ·)."""
    base = s.base
    opp = base.opposite()
    g_plus, g_minus = 0.0, 0.0
    for t in T_GRID:
        for _, e in _units_of_base(base):
            g = s.gamma_t(t, e)
            # n ↦ n^T identifies N with N°
            g_plus = max(g_plus, opnorm(g.T - opp.sigma(t, e.T)))
            g_minus = max(g_minus, opnorm(g.T - opp.sigma(-t, e.T)))
    wb, wa = adaptedness_defects(s)
    _, fixed_res = binormalized_vector(s, "fixed")
    _, cofixed_res = binormalized_vector(s, "cofixed")
    return {
        "adapted": bool(g_plus <= tol),
        "adapted_by_definition": bool(max(wb, wa) <= tol),
        "dual_of_adapted": bool(g_minus <= tol),
        "quantum_group": base.m == 1,
        "compact_type": bool(fixed_res <= tol),
        "discrete_type": bool(cofixed_res <= tol),
        "residuals": {"gamma_vs_sigma": g_plus, "gamma_vs_sigma_minus": g_minus,
                      "beta_adapted": wb, "alpha_adapted": wa,
                      "fixed": fixed_res, "cofixed": cofixed_res},
    }


def uniqueness_probe(s: MqgStructure, T_prime: InvariantOvw, tol=1e-8):
    """Central positive h with [DT'_L:DT_L]_t = β(h^{it}); reports failure otherwise."""
    hb, M = s.hb, s.M
    base = hb.base
    rep = VerificationReport()

    def phi_prime(x):
        y = alpha_inverse(hb, T_prime(x))
        return base.nu(y)

    rho = density_of(M, phi_prime)
    st = StateOnAlgebra(M, rho)
    # left invariance of T'
    inv = 0.0
    if st.faithful:
        wv = weight_vectors(M, rho)
        inv = max(opnorm(ovw_slice(hb.space, wv, g) - T_prime(x)) for x, g in zip(M.basis, hb.Gamma))
    else:
        inv = np.inf
    rep.add("left_invariance", "left invariance", inv, tol)
    if not np.isfinite(inv) or inv > tol:
        rep.notes["h"] = None
        return None, rep
    c = rho @ np.linalg.inv(s.phi.density + (np.eye(s.n) - M.unit))
    h, res = _action_inverse(hb.beta, base, c)
    rep.add("cocycle_in_beta", "uniqueness", res, tol)
    zc = max(opnorm(h @ e - e @ h) for _, e in _units_of_base(base))
    rep.add("h_central", "uniqueness", zc, tol)
    w = np.linalg.eigvalsh(hermitize(h))
    rep.add("h_positive", "uniqueness", max(0.0, -w.min()) + opnorm(h - dag(h)), tol)
    cd = 0.0
    for t in T_GRID:
        u = _alg_power(M, rho, 1j * t) @ _alg_power(M, s.phi.density, -1j * t)
        cd = max(cd, opnorm(u - hb.beta_of(op_power(hermitize(h), 1j * t))))
    rep.add("cocycle_form", "uniqueness", cd, tol)
    rep.notes["h"] = h
    return h, rep


def antipode_slice_defect(s: MqgStructure, samples=4, rng=None):
    """max ‖S((id⋆ω_{v,w})(W)) − (id⋆ω_{v,w})(W*)‖ over random v, w."""
    from .funit import right_slice
    rng = rng or np.random.default_rng(43)
    worst = 0.0
    n = s.n
    for _ in range(samples):
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        w = rng.normal(size=n) + 1j * rng.normal(size=n)
        x = right_slice(s.W, v, w)
        y = right_slice(s.W, v, w, adjoint=True)
        worst = max(worst, opnorm(s.S(x) - y) / max(1.0, opnorm(y)))
    return worst


def antipode_consistency(s: MqgStructure, tol=TOL):
    """Stored R and τ against the ones rebuilt from G (adapted structures only)."""
    rep = VerificationReport()
    ad = build_antipode_G(s.hb, s.omega, s.omega_psi)
    rep.add("G_fit", "antipode S", ad.residual, tol)
    rep.add("G_involutive", "antipode S", ad.involution_defect, tol)
    d = ad.D
    i_op = ad.I
    rep.add("I_selfadjoint", "antipode S",
            opnorm(i_op.mat @ np.conj(i_op.mat) - np.eye(s.n)), tol)
    rep.add("IDI_inverse", "antipode S",
            opnorm(i_op.sandwich(d) - np.linalg.inv(d)), tol)
    r2 = unitary_antipode(i_op, s.M.basis)
    rep.add("R_matches", "antipode S",
            max(opnorm(s.R(x) - r) for x, r in zip(s.M.basis, r2)), tol)
    t2 = scaling_group(d)
    worst = 0.0
    for t in T_GRID:
        u = op_power(t2, 1j * t)
        worst = max(worst, max(opnorm(s.tau(t, x) - u @ x @ dag(u)) for x in s.M.basis))
    rep.add("tau_matches", "antipode S", worst, tol)
    rep.add("antipode_on_slices", "antipode S", antipode_slice_defect(s), tol)
    rep.notes["antipode"] = ad
    return rep
