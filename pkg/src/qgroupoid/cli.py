"""Reading and writing structure files, plus the command line on top of them.

Exit codes: 0 when every check passes, 1 when a verification check fails, 2 on
unreadable or inconsistent input.
"""
from __future__ import annotations

import json
import os
import sys
from fractions import Fraction

import click
import numpy as np

from . import factory
from .duality import bidual_check
from .funit import manageability_check, weak_regularity_check
from .hopf import (HopfBimodule, WeakHopfAlgebra, haar_state, verify_wha, wha_to_amqg)
from .linops import TOL, MultiMatrixAlgebra, StructureError, VerificationReport
from .mqg import MqgStructure, classify, from_adapted, verify_mqg
from .reltensor import Basis

FORMAT_VERSION = 1
# dense relative tensor products grow like n^6 in memory; 16 fits on a laptop
MAX_CARRIER = int(os.environ.get("MQG_MAX_CARRIER", "16"))


class InputError(Exception):
    """Raised for unreadable or inconsistent structure files."""


def _check_size(n, what="structure"):
    if n > MAX_CARRIER:
        raise InputError(f"{what} acts on a carrier of dimension {n}, above the limit "
                         f"{MAX_CARRIER} (raise it with MQG_MAX_CARRIER)")


# ---------------------------------------------------------------- canonical encoding

def _num(x):
    x = float(x)
    if not np.isfinite(x):
        raise InputError("non-finite number in output")
    return 0.0 if x == 0 else x


def enc_complex(z):
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def enc_array(a):
    """Nested row-major lists with complex leaves as [re, im]."""
    a = np.asarray(a)
    if a.ndim == 0:
        return enc_complex(a)
    return [enc_array(x) for x in a]


def dec_array(obj, ndim=None):
    arr = np.asarray(obj, dtype=float)
    if arr.shape and arr.shape[-1] != 2:
        raise InputError("complex entries must be [re, im] pairs")
    out = arr[..., 0] + 1j * arr[..., 1]
    if ndim is not None and out.ndim != ndim:
        raise InputError(f"expected a {ndim}-dimensional array, got shape {out.shape}")
    return out


def dumps(doc):
    """Deterministic text: fixed key order from the writers, shortest float repr."""
    return json.dumps(doc, indent=1, ensure_ascii=False, allow_nan=False) + "\n"


def write_doc(doc, path):
    text = dumps(doc)
    if path in (None, "-"):
        click.echo(text, nl=False)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def read_doc(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InputError("a structure file is a JSON object with a 'kind' field")
    return doc


def _require(doc, *keys):
    missing = [k for k in keys if k not in doc]
    if missing:
        raise InputError(f"missing fields for kind {doc.get('kind')!r}: {', '.join(missing)}")


# ---------------------------------------------------------------- pieces

def enc_algebra(alg: MultiMatrixAlgebra):
    return {"carrier_dim": alg.carrier_dim, "blocks": [int(b) for b in alg.blocks],
            "multiplicities": [int(m) for m in alg.mult],
            "units": [enc_array(u) for u in alg.units]}


def dec_algebra(obj):
    _require(obj, "carrier_dim", "blocks", "multiplicities", "units")
    n = int(obj["carrier_dim"])
    _check_size(n)
    units = [dec_array(u, 4) for u in obj["units"]]
    blocks = [int(b) for b in obj["blocks"]]
    if len(units) != len(blocks) or any(u.shape != (b, b, n, n) for u, b in zip(units, blocks)):
        raise InputError("algebra units do not match the declared blocks")
    basis = np.concatenate([u.reshape(-1, n, n) for u in units], axis=0)
    return MultiMatrixAlgebra(n, basis, blocks, [int(m) for m in obj["multiplicities"]], units)


def enc_base(base: Basis):
    return {"blocks": [int(b) for b in base.blocks], "d": enc_array(base.d)}


def dec_base(obj):
    _require(obj, "blocks", "d")
    d = dec_array(obj["d"], 2)
    blocks = [int(b) for b in obj["blocks"]]
    if d.shape != (sum(blocks),) * 2:
        raise InputError("basis density has the wrong shape")
    w = np.linalg.eigvalsh((d + d.conj().T) / 2)
    if w.min() <= 0 or np.abs(d - d.conj().T).max() > 1e-12:
        raise InputError("basis density must be positive definite")
    return Basis(blocks, d)


def coproduct_coefficients(M: MultiMatrixAlgebra, gam):
    """c[j, a, b] with Γ(b_j) = Σ c[j, a, b] b_a ⊗ b_b (exact for Γ(b_j) ∈ M⊗M)."""
    n = M.carrier_dim
    b = M.basis
    norms = np.real(np.einsum("aij,aij->a", np.conj(b), b))
    g4 = np.asarray(gam).reshape(-1, n, n, n, n)
    c = np.einsum("aik,bjl,xijkl->xab", np.conj(b), np.conj(b), g4, optimize=True)
    c = c / np.outer(norms, norms)[None]
    rebuilt = np.einsum("xab,aik,bjl->xijkl", c, b, b, optimize=True).reshape(np.shape(gam))
    if np.abs(rebuilt - gam).max() > 1e-9:
        raise StructureError("coproduct does not lie in the algebraic tensor square")
    return c


def coproduct_from_coefficients(M, c):
    n = M.carrier_dim
    b = M.basis
    return np.einsum("xab,aik,bjl->xijkl", c, b, b, optimize=True).reshape(len(c), n * n, n * n)


def _enc_action(act, base):
    return [{"unit": [int(a), int(b)], "matrix": enc_array(act[a, b])}
            for a, b in base.unit_indices()]


def _dec_action(obj, base, n):
    act = np.zeros((base.m, base.m, n, n), complex)
    for item in obj:
        a, b = item["unit"]
        act[a, b] = dec_array(item["matrix"], 2)
    return act


# ---------------------------------------------------------------- documents

def groupoid_doc(G: factory.FiniteGroupoid):
    n = G.size
    table = []
    for s in range(n):
        for t in range(n):
            st = int(G.comp[s, t])
            table.append([s, t, st if st >= 0 else None])
    return {"kind": "groupoid", "format": FORMAT_VERSION,
            "objects": len(G.objects), "labels": list(G.labels),
            "source": [int(x) for x in G.source], "range": [int(x) for x in G.range],
            "inverse": [int(x) for x in G.inverse], "mu": [_num(x) for x in G.mu],
            "gamma_table": table}


def groupoid_from_doc(doc):
    _require(doc, "objects", "source", "range", "inverse", "mu", "gamma_table")
    n = len(doc["source"])
    _check_size(n, "groupoid")
    comp = -np.ones((n, n), int)
    for entry in doc["gamma_table"]:
        s, t, st = entry
        comp[s, t] = -1 if st is None else st
    G = factory.FiniteGroupoid(list(range(int(doc["objects"]))), np.array(doc["source"]),
                               np.array(doc["range"]), comp, np.array(doc["inverse"]),
                               np.array(doc["mu"], float), list(doc.get("labels", [])))
    return G


def wha_doc(w: WeakHopfAlgebra):
    return {"kind": "wha", "format": FORMAT_VERSION, "algebra": enc_algebra(w.M),
            "coproduct": enc_array(coproduct_coefficients(w.M, w.Gamma)),
            "antipode": enc_array(w.kappa), "counit": enc_array(w.eps)}


def wha_from_doc(doc):
    _require(doc, "algebra", "coproduct", "antipode", "counit")
    M = dec_algebra(doc["algebra"])
    c = dec_array(doc["coproduct"], 3)
    if c.shape != (M.dim,) * 3:
        raise InputError("coproduct coefficients have the wrong shape")
    return WeakHopfAlgebra(M, coproduct_from_coefficients(M, c), dec_array(doc["antipode"], 3),
                           dec_array(doc["counit"], 1))


def mqg_doc(s: MqgStructure):
    c = s.extras.get("coproduct_coefficients")
    if c is None:
        c = coproduct_coefficients(s.M, s.hb.Gamma)
    return {"kind": "mqg", "format": FORMAT_VERSION, "name": s.name,
            "base": enc_base(s.base), "algebra": enc_algebra(s.M),
            "alpha": _enc_action(s.hb.alpha, s.base), "beta": _enc_action(s.hb.beta, s.base),
            "coproduct": enc_array(c), "omega": enc_array(s.omega),
            "co_involution": enc_array(s.R_images), "tau_generator": enc_array(s.tau_gen)}


def mqg_from_doc(doc):
    _require(doc, "base", "algebra", "alpha", "beta", "coproduct", "omega", "co_involution",
             "tau_generator")
    base = dec_base(doc["base"])
    M = dec_algebra(doc["algebra"])
    n = M.carrier_dim
    c = dec_array(doc["coproduct"], 3)
    if c.shape != (M.dim,) * 3:
        raise InputError("coproduct coefficients have the wrong shape")
    omega = dec_array(doc["omega"], 1)
    r_imgs = dec_array(doc["co_involution"], 3)
    tgen = dec_array(doc["tau_generator"], 2)
    if omega.shape != (n,) or r_imgs.shape != (M.dim, n, n) or tgen.shape != (n, n):
        raise InputError("declared dimensions are inconsistent")
    if np.linalg.eigvalsh((tgen + tgen.conj().T) / 2).min() <= 0:
        raise InputError("the scaling-group generator must be positive definite")
    hb = HopfBimodule(base, M, _dec_action(doc["alpha"], base, n),
                      _dec_action(doc["beta"], base, n), coproduct_from_coefficients(M, c))
    s = MqgStructure(hb, omega, r_imgs, tgen, doc.get("name", ""))
    s.extras["coproduct_coefficients"] = c
    if not (s.phi.faithful):
        raise InputError("the vector state of omega is not faithful")
    return s


COMPOSE_OPS = {"sum": lambda xs: _sized(factory.direct_sum, xs, sum(x.n for x in xs)),
               "tensor": lambda xs: _sized(lambda ys: _fold(factory.tensor_product, ys), xs,
                                           int(np.prod([x.n for x in xs]))),
               "op": lambda xs: _single(factory.opposite, xs),
               "commutant": lambda xs: _single(factory.commutant_structure, xs),
               "dual": lambda xs: _single(_dual, xs)}


def _dual(s):
    from .duality import dualize
    return dualize(s)


def _sized(f, xs, n):
    _check_size(n, "result")
    return f(xs)


def _fold(f, xs):
    out = xs[0]
    for x in xs[1:]:
        out = f(out, x)
    return out


def _single(f, xs):
    if len(xs) != 1:
        raise InputError("this operation takes exactly one input")
    return f(xs[0])


def _recipe(node, named, base_dir):
    if isinstance(node, str):
        if node not in named:
            raise InputError(f"unknown input name {node!r}")
        return named[node]
    if not isinstance(node, dict) or "op" not in node:
        raise InputError("a recipe node is a name or an object with 'op' and 'args'")
    op = node["op"]
    if op not in COMPOSE_OPS:
        raise InputError(f"unknown composition {op!r}")
    args = [_recipe(a, named, base_dir) for a in node.get("args", [])]
    if not args:
        raise InputError("composition without inputs")
    return COMPOSE_OPS[op](args)


def structure_from_doc(doc, base_dir="."):
    """Any structure file as a measured quantum groupoid."""
    kind = doc.get("kind")
    if kind == "mqg":
        return mqg_from_doc(doc)
    if kind == "groupoid":
        G = groupoid_from_doc(doc)
        if G.check():
            raise InputError("groupoid axioms are violated")
        return factory.from_finite_groupoid(G)
    if kind == "wha":
        return from_adapted(wha_to_amqg(wha_from_doc(doc)))
    if kind == "composite":
        _require(doc, "inputs", "recipe")
        named = {}
        for name, sub in doc["inputs"].items():
            if isinstance(sub, dict) and set(sub) == {"file"}:
                path = sub["file"]
                path = path if os.path.isabs(path) else os.path.join(base_dir, path)
                sub = read_doc(path)
            named[name] = structure_from_doc(sub, base_dir)
        return _recipe(doc["recipe"], named, base_dir)
    raise InputError(f"unknown kind {kind!r}")


def load_structure(path):
    doc = read_doc(path)
    try:
        return doc, structure_from_doc(doc, os.path.dirname(os.path.abspath(path)))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"malformed {doc.get('kind')} file: {exc}") from exc
    except np.linalg.LinAlgError as exc:
        raise InputError(f"inconsistent {doc.get('kind')} file: {exc}") from exc


# ---------------------------------------------------------------- reports

def _jsonable(v):
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    if isinstance(v, float):
        return _num(v) if np.isfinite(v) else str(v)
    if isinstance(v, dict):
        out = {}
        for k, x in v.items():
            y = _jsonable(x)
            if y is not _SKIP:
                out[str(k)] = y
        return out
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return _jsonable(v.item())
    return _SKIP


_SKIP = object()


def report_doc(rep: VerificationReport, tol, dims=None, extra=None):
    checks = []
    for c in rep.checks:
        res = c.residual
        checks.append({"name": c.name, "anchor": c.anchor,
                       "residual": _num(res) if np.isfinite(res) else "inf",
                       "tolerance": _num(c.tolerance), "pass": c.passed})
    doc = {"summary": {"passed": rep.passed, "checks": len(checks),
                       "failures": [c.name for c in rep.failures()]},
           "checks": checks,
           "environment": {"tolerance": _num(tol), "tolerance_policy":
                           "absolute residual per check; some checks scale the base tolerance",
                           "dimensions": dims or {}}}
    notes = _jsonable(rep.notes)
    if notes:
        doc["notes"] = notes
    if extra:
        doc.update(extra)
    return doc


def _dims(s: MqgStructure):
    return {"hilbert": s.n, "algebra": s.M.dim, "basis": s.base.m,
            "relative_tensor": s.hb.space.dim}


def full_verification(s: MqgStructure, tol):
    rep = VerificationReport()
    rep.extend(verify_mqg(s, tol))
    if not rep.passed:
        return rep
    man = manageability_check(s.W, s.P, s.gns.Delta, s.gns.J, tol=tol)
    rep.extend(man, "manageability.")
    rep.extend(weak_regularity_check(s.W, s.hb, tol), "regularity.")
    return rep


def _emit(doc, report_path, echo=True):
    text = dumps(doc)
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    if echo:
        click.echo(text, nl=False)


def _default_tol():
    env = os.environ.get("MQG_TOL")
    if env is None:
        return TOL
    try:
        return float(env)
    except ValueError:
        raise click.BadParameter(f"MQG_TOL={env!r} is not a number")


def _tol(value):
    return _default_tol() if value is None else value


class _Guard:
    """Map input problems to exit status 2."""

    def __enter__(self):
        return self

    def __exit__(self, et, ev, tb):
        if et is None:
            return False
        if issubclass(et, (InputError, StructureError)):
            click.echo(f"input error: {ev}", err=True)
            sys.exit(2)
        return False


# ---------------------------------------------------------------- construct

def _parse_numbers(text):
    if text is None:
        return None
    try:
        return [float(Fraction(x.strip())) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse number list {text!r}")


def _groupoid(family, args, mu):
    def arg(i, default=None):
        if len(args) > i:
            try:
                return int(args[i])
            except ValueError:
                raise InputError(f"expected an integer, got {args[i]!r}")
        if default is None:
            raise InputError(f"{family} needs a size argument")
        return default
    if family == "trivial":
        G = factory.space_groupoid(1)
    elif family == "cyclic":
        G = factory.cyclic_group(arg(0))
    elif family == "symmetric":
        G = factory.symmetric_group(arg(0, 3))
    elif family == "pair":
        G = factory.pair_groupoid(arg(0), mu)
    elif family == "space":
        G = factory.space_groupoid(arg(0), mu)
    else:
        raise InputError(f"unknown groupoid family {family!r}")
    if mu is not None and family in ("trivial", "cyclic", "symmetric"):
        if len(mu) != 1:
            raise InputError("a group has one object")
        G.mu = np.array(mu, float)
    if len(G.mu) != len(G.objects) or np.any(np.asarray(G.mu) <= 0):
        raise InputError("mu must give one positive weight per object")
    _check_size(G.size, "groupoid")
    return G


def _base_from(blocks_text, density_text):
    blocks = [int(b) for b in blocks_text.split(",")]
    m = sum(blocks)
    dens = _parse_numbers(density_text)
    if dens is None:
        dens = [1.0 / m] * m
    if len(dens) != m or min(dens) <= 0:
        raise InputError("density needs one positive entry per diagonal position")
    return Basis(blocks, np.diag(dens).astype(complex))


def construct_doc(kind, params, mu, density):
    params = list(params)
    if kind == "groupoid":
        if not params:
            raise InputError("construct groupoid FAMILY [SIZE]")
        return groupoid_doc(_groupoid(params[0], params[1:], mu))
    if kind == "wha":
        if len(params) < 2 or params[0] not in ("function", "convolution"):
            raise InputError("construct wha {function|convolution} FAMILY [SIZE]")
        G = _groupoid(params[1], params[2:], mu)
        w = factory.function_wha(G) if params[0] == "function" else factory.convolution_wha(G)
        return wha_doc(w)
    if kind == "mqg":
        if not params:
            raise InputError("construct mqg {trivial|groupoid|wha|pairs|quantum-space} ...")
        head, rest = params[0], params[1:]
        if head == "trivial":
            s = factory.trivial()
        elif head == "groupoid":
            if not rest:
                raise InputError("construct mqg groupoid FAMILY [SIZE]")
            s = factory.from_finite_groupoid(_groupoid(rest[0], rest[1:], mu))
        elif head == "wha":
            doc = construct_doc("wha", rest, mu, density)
            s = from_adapted(wha_to_amqg(wha_from_doc(doc)))
        elif head in ("pairs", "quantum-space"):
            if not rest:
                raise InputError(f"construct mqg {head} BLOCKS (e.g. 2 or 1,1)")
            base = _base_from(rest[0], density)
            n = sum(b * b for b in base.blocks) ** 2 if head == "pairs" else sum(b ** 4 for b in base.blocks)
            _check_size(n, head)
            s = factory.pairs_qg(base) if head == "pairs" else factory.quantum_space_qg(base)
        else:
            raise InputError(f"unknown mqg family {head!r}")
        return mqg_doc(s)
    raise InputError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------- commands

TOL_OPTION = click.option("--tol", type=float, default=None,
                          help="Tolerance per check (default: MQG_TOL or 1e-9).")
REPORT_OPTION = click.option("--report", "report_path", type=click.Path(dir_okay=False),
                             default=None, help="Also write the JSON report here.")


@click.group()
def main():
    """Finite-dimensional measured quantum groupoids: build, verify, dualize."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@TOL_OPTION
@REPORT_OPTION
def verify(file, tol, report_path):
    """Run every verifier that applies to the kind declared in FILE."""
    tol = _tol(tol)
    rep = VerificationReport()
    with _Guard():
        doc = read_doc(file)
        kind = doc["kind"]
        try:
            if kind == "groupoid":
                bad = groupoid_from_doc(doc).check()
                rep.add("groupoid_axioms", "groupoid axioms", float(bad), tol)
            elif kind == "wha":
                w = wha_from_doc(doc)
                rep.extend(verify_wha(w, tol), "wha.")
                try:
                    h = haar_state(w)
                    rep.add("haar_unique", "Haar state", float(h.affine_nullity), tol)
                    rep.add("haar_invariance", "Haar state", h.residual, tol)
                except StructureError as exc:
                    rep.add("haar_unique", "Haar state", float("inf"), tol)
                    rep.notes["haar"] = str(exc)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise InputError(f"malformed {kind} file: {exc}") from exc
        if not rep.passed:
            _emit(report_doc(rep, tol, {}, {"kind": kind}), report_path)
            sys.exit(1)
        _, s = load_structure(file)
        rep.extend(full_verification(s, tol))
    _emit(report_doc(rep, tol, _dims(s), {"kind": kind}), report_path)
    sys.exit(0 if rep.passed else 1)


@main.command()
@click.argument("kind", type=click.Choice(["groupoid", "wha", "mqg"]))
@click.argument("params", nargs=-1)
@click.option("--mu", default=None, help="Comma-separated positive weights on objects.")
@click.option("--density", default=None, help="Diagonal of the basis density, e.g. 2/3,1/3.")
@click.option("-o", "output", default=None, help="Output file (default: stdout).")
def construct(kind, params, mu, density, output):
    """Build an example structure file."""
    with _Guard():
        doc = construct_doc(kind, params, _parse_numbers(mu), density)
    write_doc(doc, output)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "output", default=None, help="Output file (default: stdout).")
def dualize(file, output):
    """Write the dual structure."""
    from .duality import dualize as _dualize
    with _Guard():
        _, s = load_structure(file)
        d = _dualize(s)
        doc = mqg_doc(d)
    write_doc(doc, output)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@TOL_OPTION
@REPORT_OPTION
def bidual(file, tol, report_path):
    """Compare the double dual with the input."""
    tol = _tol(tol)
    with _Guard():
        _, s = load_structure(file)
        rep = bidual_check(s, tol)
        rep.notes.pop("bidual", None)
    _emit(report_doc(rep, tol, _dims(s)), report_path)
    sys.exit(0 if rep.passed else 1)


@main.command()
@click.argument("op", type=click.Choice(sorted(COMPOSE_OPS)))
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "output", default=None, help="Output file (default: stdout).")
def compose(op, files, output):
    """Combine structures: sum, tensor, op, commutant, dual."""
    with _Guard():
        parts = [load_structure(f)[1] for f in files]
        s = COMPOSE_OPS[op](parts)
        doc = mqg_doc(s)
    write_doc(doc, output)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@TOL_OPTION
@REPORT_OPTION
def invariants(file, tol, report_path):
    """Spectra of the modular data together with the classification flags."""
    tol = _tol(tol)
    with _Guard():
        _, s = load_structure(file)
        rep = VerificationReport()
        from .mqg import cocycle_defect, P_defect
        rep.add("cocycle", "modulus δ", cocycle_defect(s), tol)
        rep.add("manageable_operator", "manageable operator P", P_defect(s), tol)
        flags = classify(s, max(tol, 1e-8))
        spectrum = lambda x: [_num(v) for v in np.sort(np.linalg.eigvalsh((x + x.conj().T) / 2))]
        extra = {"invariants": {
            "delta_spectrum": spectrum(s.delta), "lambda_spectrum": spectrum(s.lam),
            "delta_is_one": bool(np.abs(s.delta - np.eye(s.n)).max() <= tol),
            "lambda_is_one": bool(np.abs(s.lam - np.eye(s.n)).max() <= tol),
            "modular_operator_spectrum": spectrum(s.gns.Delta),
            "manageable_operator_spectrum": spectrum(s.P),
            "classification": _jsonable(flags)}}
    _emit(report_doc(rep, tol, _dims(s), extra), report_path)
    sys.exit(0 if rep.passed else 1)


if __name__ == "__main__":
    main()
