"""JSON instance files: parsing into engine objects, running requests, and reports."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import linalg as la
from .algebra import (Algebra, AlgebraError, AlgebraHom, base_field, check_algebra, diagonal_algebra,
                      direct_sum, matrix_algebra, matrix_units, plus, tensor)
from .equivariance import (GAction, M2Space, SemigroupG, check_action, cyclic_group, restrict_action,
                           semilattice, trivial_action, trivial_group)
from .fusion import FLAVORS, ROWS, ApproxUnit, dispatch, fuse_hom_left
from .modules import CornerEmbedding, canonical_matrix_corner, corner_embedding, free_module, iso_corner
from .product import product_khom_ktheory
from .scalar import Scalar, format_scalar
from .sequences import FactoredCorner, L1Element, SplitExactSeq, _pull_action, standard_space, validate_l1
from .words import HomT, InvCornerT, MorphismWord, SplitT, level_one_word, normalize

SCHEMA = "gkfuse-instance/1"
REPORT_SCHEMA = "gkfuse-report/1"


class InstanceError(ValueError):
    """Parse or reference error in an instance file (exit status 2)."""


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _scalar(v, where):
    try:
        return Scalar.coerce(v)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"{where}: bad scalar {v!r} ({exc})") from None


def _matrix(desc, rows, cols, where):
    """Dense list of rows, or {"entries": [[i, j, value], ...]} on a zero matrix."""
    if isinstance(desc, dict):
        m = la.zeros(rows, cols)
        for ent in desc.get("entries", []):
            if len(ent) != 3:
                raise InstanceError(f"{where}: sparse entries are [row, col, value]")
            i, j, v = ent
            i, j = int(i), int(j)
            if not (0 <= i < rows and 0 <= j < cols):
                raise InstanceError(f"{where}: entry ({i}, {j}) outside {rows}x{cols}")
            m[i][j] = _scalar(v, where)
        return m
    if len(desc) != rows or any(len(r) != cols for r in desc):
        raise InstanceError(f"{where}: expected a {rows}x{cols} matrix")
    return [[_scalar(v, where) for v in r] for r in desc]


# --- the instance ---------------------------------------------------------------------

@dataclass
class Instance:
    raw: dict
    G: SemigroupG
    algebras: dict = field(default_factory=dict)
    actions: dict = field(default_factory=dict)
    homs: dict = field(default_factory=dict)
    modules: dict = field(default_factory=dict)
    corners: dict = field(default_factory=dict)
    sequences: dict = field(default_factory=dict)
    l1: dict = field(default_factory=dict)
    words: dict = field(default_factory=dict)
    requests: list = field(default_factory=list)

    def serialize(self) -> str:
        return dumps(self.raw)

    def _get(self, table: dict, kind: str, name, where: str):
        if name not in table:
            raise InstanceError(f"{where}: unknown {kind} {name!r}")
        return table[name]

    def algebra(self, name, where="reference"):
        return self._get(self.algebras, "algebra", name, where)

    def action(self, name, on: Algebra, where, kind="algebra") -> GAction:
        if name is None:
            return trivial_action(self.G, on.dim, kind)
        act = self._get(self.actions, "action", name, where)
        if act.dim != on.dim:
            raise InstanceError(f"{where}: action {name!r} has dimension {act.dim}, expected {on.dim}")
        return act


def parse(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InstanceError("an instance file is a JSON object")
    schema = doc.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise InstanceError(f"unsupported schema {schema!r}")
    raw = dict(doc)
    raw["schema"] = SCHEMA
    try:
        inst = _build(raw)
    except InstanceError:
        raise
    except (KeyError, TypeError, ValueError, IndexError, AttributeError, ZeroDivisionError) as exc:
        raise InstanceError(f"malformed instance: {type(exc).__name__}: {exc}") from None
    reqs = raw.get("requests", [])
    ids = set()
    for r in reqs:
        rid = r.get("id")
        if rid is None or rid in ids:
            raise InstanceError(f"every request needs a unique id (got {rid!r})")
        ids.add(rid)
        if r.get("op") not in ("validate", "dispatch", "product", "normalize"):
            raise InstanceError(f"request {rid}: unknown op {r.get('op')!r}")
    inst.requests = reqs
    return inst


def _build(raw: dict) -> Instance:
    inst = Instance(raw, _semigroup(raw.get("semigroup")))
    for name, desc in raw.get("algebras", {}).items():
        inst.algebras[name] = _algebra(inst, name, desc)
    for name, desc in raw.get("actions", {}).items():
        inst.actions[name] = _action(inst, name, desc)
    for name, desc in raw.get("homs", {}).items():
        src = inst.algebra(desc.get("source"), f"hom {name}")
        tgt = inst.algebra(desc.get("target"), f"hom {name}")
        inst.homs[name] = AlgebraHom(src, tgt, _matrix(desc["matrix"], tgt.dim, src.dim, f"hom {name}"), name)
    for name, desc in raw.get("modules", {}).items():
        A = inst.algebra(desc.get("algebra"), f"module {name}")
        alpha = inst.action(desc.get("action"), A, f"module {name}")
        inst.modules[name] = free_module(A, alpha, int(desc.get("rank", 1)), label=name)
    for name, desc in raw.get("corners", {}).items():
        inst.corners[name] = _corner(inst, name, desc)
    for name, desc in raw.get("sequences", {}).items():
        where = f"sequence {name}"
        hs = [inst._get(inst.homs, "hom", desc.get(k), where) for k in ("iota", "f", "s")]
        inst.sequences[name] = SplitExactSeq(*hs, label=name)
    for name, desc in raw.get("l1_elements", {}).items():
        inst.l1[name] = _l1(inst, name, desc)
    for name, desc in raw.get("words", {}).items():
        inst.words[name] = _word(inst, name, desc)
    return inst


def _semigroup(desc) -> SemigroupG:
    if desc is None or desc.get("kind") == "trivial":
        return trivial_group()
    kind = desc.get("kind")
    if kind == "cyclic":
        return cyclic_group(int(desc["n"]))
    if kind == "semilattice":
        return semilattice(tuple(desc.get("names", ("1", "e"))))
    if kind == "table":
        G = SemigroupG(desc["elements"], desc["mult"], desc["star"], desc["unit_element"])
        w = G.check()
        if w is not None:
            raise InstanceError(f"semigroup table invalid: {w}")
        return G
    raise InstanceError(f"unknown semigroup kind {kind!r}")


def _algebra(inst: Instance, name, desc) -> Algebra:
    kind = desc.get("kind", "table")
    where = f"algebra {name}"
    if kind == "field":
        return base_field(name)
    if kind == "diagonal":
        return diagonal_algebra(int(desc["n"]), name)
    if kind == "matrix_units":
        return matrix_units(int(desc["n"]), name)
    if kind == "matrix":
        return matrix_algebra(int(desc["n"]), inst.algebra(desc["of"], where), name)
    if kind == "sum":
        a, b = (inst.algebra(x, where) for x in desc["of"])
        return direct_sum(a, b, name)
    if kind == "tensor":
        a, b = (inst.algebra(x, where) for x in desc["of"])
        return tensor(a, b, name)
    if kind == "plus":
        return plus(inst.algebra(desc["of"], where), name)
    if kind == "table":
        dim = int(desc["dim"])
        consts = {}
        for ent in desc.get("struct_consts", []):
            if len(ent) != 4:
                raise InstanceError(f"{where}: structure constants are [i, j, k, value]")
            i, j, k = (int(x) for x in ent[:3])
            if not all(0 <= x < dim for x in (i, j, k)):
                raise InstanceError(f"{where}: index outside dimension {dim}")
            consts[(i, j, k)] = _scalar(ent[3], where)
        unit = desc.get("unit")
        unit = [_scalar(v, where) for v in unit] if unit is not None else None
        return Algebra(name, dim, consts, unit)
    raise InstanceError(f"{where}: unknown kind {kind!r}")


def _action(inst: Instance, name, desc) -> GAction:
    where = f"action {name}"
    if "on" in desc:
        dim = inst.algebra(desc["on"], where).dim
    else:
        dim = int(desc["dim"])
    maps = desc.get("maps", {})
    out = []
    for g in inst.G.elements:
        m = maps.get(str(g))
        out.append(la.identity(dim) if m is None else _matrix(m, dim, dim, f"{where} at {g}"))
    return GAction(inst.G, dim, out, desc.get("kind", "algebra"))


def _corner(inst: Instance, name, desc) -> CornerEmbedding:
    where = f"corner {name}"
    kind = desc.get("kind", "canonical")
    if kind == "canonical":
        A = inst.algebra(desc["algebra"], where)
        alpha = inst.action(desc.get("action"), A, where)
        n = int(desc["n"])
        sigma = W = None
        if "sigma" in desc:
            sigma = inst._get(inst.actions, "action", desc["sigma"], where)
        if "W" in desc:
            W = {}
            for g in inst.G.elements:
                rows = desc["W"].get(str(g))
                if rows is None:
                    raise InstanceError(f"{where}: W needs an entry for every element ({g})")
                W[g] = [[[_scalar(v, where) for v in ent] for ent in row] for row in rows]
            W = [W[g] for g in inst.G.elements]
        return canonical_matrix_corner(A, alpha, n, sigma=sigma, W=W, pos=desc.get("pos"), label=name)
    if kind == "factored":
        h = inst._get(inst.homs, "hom", desc["hom"], where)
        phi = inst._get(inst.homs, "hom", desc["phi"], where)
        f = inst._get(inst.corners, "corner", desc["f"], where)
        alpha = inst.action(desc.get("action"), h.source, where)
        delta = inst.action(desc.get("target_action"), h.target, where)
        return CornerEmbedding(h, alpha, delta, "generalized", n=f.n, factorization=(phi, f))
    if kind == "iso":
        h = inst._get(inst.homs, "hom", desc["hom"], where)
        alpha = inst.action(desc.get("action"), h.source, where)
        delta = inst.action(desc.get("target_action"), h.target, where)
        return iso_corner(h.source, alpha, h.target, h, delta)
    if kind == "module":
        m = inst._get(inst.modules, "module", desc["module"], where)
        return corner_embedding(m.algebra, m.alpha, m)
    raise InstanceError(f"{where}: unknown kind {kind!r}")


def _l1(inst: Instance, name, desc) -> L1Element:
    where = f"element {name}"
    X = inst.algebra(desc.get("X"), where)
    J = inst.algebra(desc.get("J"), where)
    A = inst.algebra(desc.get("A"), where)
    iota = AlgebraHom(J, X, _matrix(desc["iota"], X.dim, J.dim, where), "iota")
    sm = AlgebraHom(A, X, _matrix(desc["s_minus"], X.dim, A.dim, where), "s_-")
    sp = AlgebraHom(A, X, _matrix(desc["s_plus"], X.dim, A.dim, where), "s_+")
    alpha = inst.action(desc.get("alpha"), A, where)
    sp_spec = desc.get("space", {})
    if "rep" in sp_spec:
        V = int(sp_spec["dim"])
        rep = [_matrix(m, V, V, where) for m in sp_spec["rep"]]
        S = _module_action(inst, sp_spec.get("S"), V, where)
        T = _module_action(inst, sp_spec.get("T"), V, where)
        space = M2Space(X, V, rep, S, T)
    else:
        gamma = inst.action(sp_spec["gamma"], X, where) if "gamma" in sp_spec else None
        space = standard_space(X, gamma, G=inst.G)
    factored = None
    if "corner" in desc:
        e = inst._get(inst.corners, "corner", desc["corner"], where)
    elif "factored" in desc:
        fs = desc["factored"]
        factored = FactoredCorner(inst._get(inst.homs, "hom", fs["phi"], where),
                                  inst._get(inst.corners, "corner", fs["f"], where))
        e = None
    else:
        B = inst.algebra(desc.get("B"), where)
        h = AlgebraHom(B, J, _matrix(desc["e"], J.dim, B.dim, where), "e")
        try:
            delta = restrict_action(space.gamma_minus, [iota.column(k) for k in range(J.dim)], "J")
            beta = inst.action(desc["beta"], B, where) if "beta" in desc else _pull_action(h, delta)
            e = iso_corner(B, beta, J, h, delta)
        except (AlgebraError, ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"{where}: corner without a name must be an invertible matrix ({exc})") from None
    return L1Element(e, iota, sm, sp, space, alpha, name, factored)


def _module_action(inst, name, V, where) -> GAction:
    if name is None:
        return trivial_action(inst.G, V, "module")
    act = inst._get(inst.actions, "action", name, where)
    if act.dim != V:
        raise InstanceError(f"{where}: module action {name!r} has dimension {act.dim}, expected {V}")
    return GAction(act.G, act.dim, act.maps, "module")


def _word(inst: Instance, name, desc) -> MorphismWord:
    where = f"word {name}"
    terms = desc.get("terms") or [{"coef": "1", "tokens": desc.get("tokens", [])}]
    out = None
    for term in terms:
        toks = []
        for t in term["tokens"]:
            if "hom" in t:
                toks.append(HomT(inst._get(inst.homs, "hom", t["hom"], where), name=t["hom"]))
            elif "split" in t:
                toks.append(SplitT(inst._get(inst.sequences, "sequence", t["split"], where), name=f"D[{t['split']}]"))
            elif "inv_corner" in t:
                toks.append(InvCornerT(inst._get(inst.corners, "corner", t["inv_corner"], where),
                                       name=f"{t['inv_corner']}^-1"))
            elif "level_one" in t:
                w = level_one_word(inst._get(inst.l1, "element", t["level_one"], where))
                (_, lt), = w.terms
                toks.extend(lt)
            else:
                raise InstanceError(f"{where}: unknown token {t!r}")
        if not toks:
            raise InstanceError(f"{where}: empty term")
        coef = _scalar(term.get("coef", "1"), where)
        if coef.im or coef.re.denominator != 1:
            raise InstanceError(f"{where}: word coefficients are integers")
        try:
            w = MorphismWord.of(*toks, coef=int(coef.re))
        except AlgebraError as exc:
            raise InstanceError(f"{where}: {exc}") from None
        out = w if out is None else out + w
    return out


# --- running requests ----------------------------------------------------------------

def _failure(exc) -> dict:
    return {"status": "failed", "error": str(exc)}


def _validate_all(inst: Instance) -> list:
    out = []
    for name, a in inst.algebras.items():
        rep = check_algebra(a)
        entry = {"kind": "algebra", "name": name, "ok": rep.ok, "dim": a.dim,
                 "associative": rep.associative, "quadratik": rep.quadratik}
        if not rep.associative:
            entry["witness"] = list(rep.assoc_witness)
            entry["error"] = f"algebra {name} is not associative at basis triple {list(rep.assoc_witness)}"
        elif not rep.quadratik:
            entry["error"] = (f"algebra {name} is not quadratik: products span "
                              f"{a.dim - rep.quadratik_deficit} of {a.dim} dimensions")
        elif rep.unit_witness is not None:
            entry["error"] = f"algebra {name}: declared unit fails on basis element {rep.unit_witness}"
        out.append(entry)
    for name, act in inst.actions.items():
        target = inst.raw["actions"][name].get("on")
        alg = inst.algebras[target] if target is not None and act.kind == "algebra" else None
        rep = check_action(act, alg)
        out.append({"kind": "action", "name": name, "ok": rep.ok,
                    **({} if rep.ok else {"witness": [str(x) for x in rep.failure]})})
    for name, z in inst.l1.items():
        out.append(_validate_entry(name, z))
    return out


def _validate_entry(name, z: L1Element) -> dict:
    try:
        cert = validate_l1(z)
    except AlgebraError as exc:
        return {"kind": "l1", "name": name, "ok": False, "error": str(exc)}
    entry = {"kind": "l1", "name": name, "ok": cert.ok}
    if cert.ok:
        entry["speciality"] = z.speciality().kind
        entry["word"] = level_one_word(z).render()
    else:
        entry["failures"] = [[str(x) for x in f] for f in cert.failures]
    return entry


def run_request(inst: Instance, req: dict, trace: bool = False) -> dict:
    op = req["op"]
    rid = req["id"]
    out = {"id": rid, "op": op}
    where = f"request {rid}"
    expect = req.get("expect", "ok")
    try:
        if op == "validate":
            z = inst._get(inst.l1, "element", req.get("element"), where)
            res = _validate_entry(req["element"], z)
            out.update(res)
            ok = res["ok"]
        elif op == "dispatch":
            row, flavor = req.get("row"), req.get("flavor")
            if row not in ROWS or flavor not in FLAVORS:
                raise InstanceError(f"{where}: unknown row/flavor {row!r}/{flavor!r}")
            x = _generator(inst, row, req.get("x"), where)
            wit = inst._get(inst.l1, "element", req["witness"], where) if "witness" in req else None
            if row == "D_s.z" and "z" not in req and wit is not None:
                z = fuse_hom_left(x.iota, wit)[0]  # z = iota . v
            else:
                z = inst._get(inst.l1, "element", req.get("z"), where)
            res = dispatch(row, flavor, z, x, witness=wit)
            out.update(res.to_json())
            ok = res.ok and (res.certificate is None or res.certificate.ok)
        elif op == "product":
            t = inst._get(inst.l1, "element", req.get("t"), where)
            s = inst._get(inst.l1, "element", req.get("s"), where)
            unit = None
            if "unit" in req:
                unit = ApproxUnit(t.J, [[_scalar(v, where) for v in p] for p in req["unit"]])
            phi = None
            if "phi_data" in req:
                V = s.space.space_dim
                phi = [_matrix(m, V, V, where) for m in req["phi_data"]]
            x, tr = product_khom_ktheory(t, s, phi_data=phi, unit=unit)
            out["element"] = {"label": x.label, "A": x.A.label, "B": x.B.label, "X": x.X.label,
                              "speciality": x.speciality().kind,
                              "s_plus": _mat_json(x.s_plus.matrix), "s_minus": _mat_json(x.s_minus.matrix)}
            out["trace"] = tr.to_json() if trace else {k: v for k, v in tr.to_json().items()
                                                       if k in ("certificates", "closed_form", "ok",
                                                                "stabilization_index")}
            ok = tr.ok
        else:
            w = inst._get(inst.words, "word", req.get("word"), where)
            steps = []
            nf = normalize(w, trace=steps)
            out["input"] = w.render()
            out["normal_form"] = nf.render()
            out["is_zero"] = nf.is_zero()
            if trace:
                out["steps"] = [s.to_json() for s in steps]
            if "expect_normal_form" in req:
                out["matches_expected"] = nf.render() == req["expect_normal_form"]
                ok = out["matches_expected"]
            else:
                ok = True
    except InstanceError:
        raise
    except AlgebraError as exc:
        out.update(_failure(exc))
        out["status"] = "failed"
        return out
    refused = out.get("refused", False)
    if refused:
        out["status"] = "refused-as-expected" if expect == "refusal" else "refused"
    else:
        out["status"] = "ok" if ok and expect == "ok" else ("unexpected-success" if ok else "failed")
    return out


def _mat_json(m):
    return [[format_scalar(x) for x in row] for row in m]


def _generator(inst: Instance, row, name, where):
    if row in ("phi.z", "z.phi"):
        return inst._get(inst.homs, "hom", name, where)
    if row in ("e^-1.z", "z.e^-1"):
        return inst._get(inst.corners, "corner", name, where)
    if row in ("kappa.z", "z.kappa"):
        return inst._get(inst.l1, "element", name, where)
    if row == "D_s.z":
        return inst._get(inst.sequences, "sequence", name, where)
    return None


COMMAND_OPS = {"validate": ("validate",), "fuse": ("dispatch",), "product": ("product",),
               "normalize": ("normalize",)}


def run(inst: Instance, command: str, request_id=None, trace: bool = False) -> dict:
    """Report for one command over the matching requests (or the single named one)."""
    ops = COMMAND_OPS[command]
    report = {"schema": REPORT_SCHEMA, "command": command, "results": []}
    if command == "validate" and request_id is None:
        report["objects"] = _validate_all(inst)
    for req in inst.requests:
        if request_id is not None and req["id"] != request_id:
            continue
        if req["op"] not in ops:
            if request_id is not None:
                raise InstanceError(f"request {request_id} is a {req['op']} request, not {command}")
            continue
        report["results"].append(run_request(inst, req, trace))
    if request_id is not None and not report["results"]:
        raise InstanceError(f"no request with id {request_id!r}")
    report["ok"] = report_ok(report)
    return report


def report_ok(report: dict) -> bool:
    good = ("ok", "refused-as-expected")
    return (all(r["status"] in good for r in report["results"])
            and all(o["ok"] for o in report.get("objects", [])))
