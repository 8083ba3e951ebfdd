"""Reference computations written directly with numpy, independent of the package internals."""
import numpy as np


def orthobasis(mats, tol=1e-9):
    """Orthonormal basis (columns) of the span of a list of matrices."""
    mats = np.asarray(mats, complex)
    if len(mats) == 0:
        return np.zeros((0, 0))
    a = mats.reshape(len(mats), -1).T
    u, sv, _ = np.linalg.svd(a, full_matrices=False)
    if sv.size == 0 or sv[0] == 0:
        return u[:, :0]
    return u[:, sv > tol * max(1.0, sv[0])]


def span_distance(a, b):
    """0 iff span(a) = span(b); otherwise at least one principal sine or a dimension gap."""
    qa, qb = orthobasis(a), orthobasis(b)
    if qa.shape[1] != qb.shape[1]:
        return float("inf")
    if qa.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(qa - qb @ (qb.conj().T @ qa), 2))


def commutant(mats, n):
    """Brute-force commutant: null space of X ↦ [b, X] over the given generators."""
    eye = np.eye(n)
    rows = [np.kron(b, eye) - np.kron(eye, b.T) for b in mats]
    big = np.concatenate(rows, axis=0)
    _, sv, vh = np.linalg.svd(big)
    rank = int((sv > 1e-9 * max(1.0, sv[0])).sum())
    null = vh[rank:].conj().T
    return np.array([null[:, i].reshape(n, n) for i in range(null.shape[1])])


def intersection(a, b):
    """Basis of span(a) ∩ span(b) via principal angles."""
    qa, qb = orthobasis(a), orthobasis(b)
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        return np.zeros((0,) + np.shape(a)[1:])
    u, sv, vh = np.linalg.svd(qa.conj().T @ qb)
    keep = sv > 1 - 1e-8
    vecs = qa @ u[:, keep]
    n = int(round(np.sqrt(qa.shape[0])))
    return np.array([vecs[:, i].reshape(n, n) for i in range(vecs.shape[1])])


def hermitian_power(h, z):
    h = (h + h.conj().T) / 2
    w, v = np.linalg.eigh(h)
    return (v * np.power(w.astype(complex), z)) @ v.conj().T


def trace_density(basis, functional):
    """ρ in span(basis) with Tr(ρ x) = f(x) on the basis."""
    k = len(basis)
    gram = np.array([[np.trace(basis[j] @ basis[i]) for j in range(k)] for i in range(k)])
    rhs = np.array([functional(x) for x in basis])
    c = np.linalg.solve(gram, rhs)
    return np.tensordot(c, basis, axes=1)


def expand(x, basis):
    """Coefficients of x over a list of matrices (least squares, with residual)."""
    a = np.asarray(basis).reshape(len(basis), -1).T
    c, *_ = np.linalg.lstsq(a, np.asarray(x).reshape(-1), rcond=None)
    return c, float(np.linalg.norm(a @ c - np.asarray(x).reshape(-1)))


def right_regular(G):
    """ρ_g δ_h = δ_{hg⁻¹}."""
    n = G.size
    out = np.zeros((n, n, n), complex)
    for g in range(n):
        gi = G.inverse[g]
        for h in range(n):
            k = G.comp[h, gi]
            if k >= 0:
                out[g, k, h] = 1
    return out


def left_regular(G):
    """λ_g δ_h = δ_{gh}."""
    n = G.size
    out = np.zeros((n, n, n), complex)
    for g in range(n):
        for h in range(n):
            k = G.comp[g, h]
            if k >= 0:
                out[g, k, h] = 1
    return out


def haar_from_tables(G, kind):
    """Normalized Haar functional on C(G) or ℂG from the composition table alone.

    Unknowns h_g = h(e_g) on the natural basis (δ_g or λ_g). Conditions: h∘κ = h,
    (id⊗h)Γ(e_g) lies in the target subalgebra, and (id⊗h)Γ(1) = 1.
    Returns (h, nullity of the solution set, residual).
    """
    n = G.size
    units = G.units()
    rows, rhs = [], []
    # κ-invariance
    for g in range(n):
        r = np.zeros(n)
        r[g] += 1
        r[G.inverse[g]] -= 1
        rows.append(r)
        rhs.append(0.0)
    if kind == "fun":
        # (id⊗h)Γ(δ_g) = Σ_{a: r(a)=r(g)} h(a⁻¹g) δ_a must depend on r(a) only
        for g in range(n):
            fibre = [a for a in range(n) if G.range[a] == G.range[g]]
            for a, b in zip(fibre, fibre[1:]):
                r = np.zeros(n)
                r[G.comp[G.inverse[a], g]] += 1
                r[G.comp[G.inverse[b], g]] -= 1
                rows.append(r)
                rhs.append(0.0)
        # (id⊗h)Γ(1) = Σ_a δ_a Σ_{r(b)=s(a)} h(b) = 1
        for u in range(len(G.objects)):
            r = np.array([1.0 if G.range[b] == u else 0.0 for b in range(n)])
            rows.append(r)
            rhs.append(1.0)
    else:
        # (id⊗h)Γ(λ_g) = h_g λ_g lies in span{λ_u}: h vanishes off the units
        for g in range(n):
            if g not in units:
                r = np.zeros(n)
                r[g] = 1
                rows.append(r)
                rhs.append(0.0)
        # (id⊗h)Γ(1) = Σ_u h(λ_u) λ_u = 1
        for u in units:
            r = np.zeros(n)
            r[u] = 1
            rows.append(r)
            rhs.append(1.0)
    a, b = np.array(rows), np.array(rhs)
    h, *_ = np.linalg.lstsq(a, b, rcond=None)
    sv = np.linalg.svd(a, compute_uv=False)
    nullity = n - int((sv > 1e-10).sum())
    return h, nullity, float(np.linalg.norm(a @ h - b))
