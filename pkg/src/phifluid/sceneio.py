"""Scene files: a tiny expression grammar plus JSON load/serialize.

The grammar is deliberately total on its domain and executes no user code:
numbers, coordinate names, + - * / ^, unary minus, and the functions
sin, cos, exp, log, sqrt. Compiled expressions call the dispatching math
of :mod:`phifluid.jets`, so they differentiate like hand-written closures.
"""

import json

from . import jets
from .errors import ParseError, SchemaMismatch
from .scene import Chart, MapSpec, ScalarField, Scene

FUNCTIONS = {"sin": jets.sin, "cos": jets.cos, "exp": jets.exp,
             "log": jets.log, "sqrt": jets.sqrt}

SCHEMA_VERSION = 1


# ---- tokenizer / recursive-descent parser -----------------------------------------


def _tokenize(text):
    tokens = []
    line, col, i = 1, 1, 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] in ".eE"
                                     or (text[j] in "+-"
                                         and text[j - 1] in "eE")):
                j += 1
            lit = text[i:j]
            try:
                val = float(lit)
            except ValueError:
                raise ParseError(f"bad number {lit!r} at line {line}, "
                                 f"column {col}")
            tokens.append(("num", val, line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r} at line {line}, "
                         f"column {col}")
    tokens.append(("end", None, line, col))
    return tokens


class _Parser:
    def __init__(self, text, names):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.names = {nm: k for k, nm in enumerate(names)}

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, msg, tok):
        raise ParseError(f"{msg} at line {tok[2]}, column {tok[3]}")

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            self.fail(f"expected {kind!r}, found {tok[1]!r}", tok)
        return tok

    @staticmethod
    def _binop(op, a, b):
        if op == "+":
            return lambda x: a(x) + b(x)
        if op == "-":
            return lambda x: a(x) - b(x)
        if op == "*":
            return lambda x: a(x) * b(x)
        return lambda x: a(x) / b(x)

    # expr := term (("+"|"-") term)*
    def expr(self):
        node = self.term()
        while self.peek()[0] in "+-":
            node = self._binop(self.next()[0], node, self.term())
        return node

    # term := unary (("*"|"/") unary)*
    def term(self):
        node = self.unary()
        while self.peek()[0] in "*/":
            node = self._binop(self.next()[0], node, self.unary())
        return node

    # unary := ("+"|"-") unary | power
    def unary(self):
        if self.peek()[0] in "+-":
            op = self.next()[0]
            inner = self.unary()
            if op == "-":
                return lambda x: -inner(x)
            return inner
        return self.power()

    # power := atom ("^" unary)?   (right-associative, integer exponents
    # evaluated by repeated squaring to stay jet-closed)
    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            tok = self.next()
            exponent = self.unary()
            try:
                dim = max(len(self.names), 1)
                probe = exponent([0.25] * dim)
                if exponent([0.75] * dim) != probe:
                    probe = None
            except Exception:
                probe = None
            if not isinstance(probe, float) or probe != int(probe):
                self.fail("exponent must be a constant integer", tok)
            n = int(probe)

            def powered(x, base=base, n=n):
                out = base(x)
                acc = 1.0
                for _ in range(abs(n)):
                    acc = acc * out
                return 1.0 / acc if n < 0 else acc

            return powered
        return base

    def atom(self):
        tok = self.next()
        kind, val = tok[0], tok[1]
        if kind == "num":
            return lambda x, v=val: v
        if kind == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return lambda x, f=FUNCTIONS[val], g=inner: f(g(x))
            if val in self.names:
                idx = self.names[val]
                # adding 0.0 * x0 keeps constants batch-shaped
                return lambda x, k=idx: x[k]
            self.fail(f"unknown name {val!r}", tok)
        self.fail(f"unexpected token {val!r}", tok)

    def run(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail(f"trailing input {tok[1]!r}", tok)
        return node


def compile_expression(text, names):
    """Compile an expression string into a closure over the coordinates."""
    fn = _Parser(text, names).run()

    def wrapped(x):
        # keep the batch shape even for pure constants
        return fn(x) + 0.0 * x[0]

    return wrapped


# ---- scene files ------------------------------------------------------------------


def _chart_from(spec):
    return Chart(tuple(spec["names"]),
                 tuple((float(lo), float(hi)) for lo, hi in spec["box"]))


def _matrix_from(rows, names):
    compiled = [[compile_expression(e, names) for e in row] for row in rows]

    def matrix(x):
        return [[fn(x) for fn in row] for row in compiled]

    return matrix


def load_scene(source):
    """Build a Scene from a scene-file dict, JSON string, or file path."""
    if isinstance(source, str):
        if source.lstrip().startswith("{"):
            spec = json.loads(source)
        else:
            with open(source) as fh:
                spec = json.load(fh)
    else:
        spec = source
    if spec.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise SchemaMismatch(f"scene schema {spec.get('schema')!r} is not "
                             f"{SCHEMA_VERSION}")
    chart = _chart_from(spec["chart"])
    names = chart.names
    kwargs = {}
    if "map" in spec:
        mp = spec["map"]
        tchart = _chart_from(mp["target_chart"])
        comp = [compile_expression(e, names) for e in mp["components"]]
        kwargs["mapspec"] = MapSpec(
            components=lambda x: [c(x) for c in comp],
            target_metric=_matrix_from(mp["target_metric"], tchart.names),
            target_chart=tchart,
        )
        if "potential" in spec:
            kwargs["potential"] = ScalarField(
                compile_expression(spec["potential"], tchart.names), name="U")
    for key, attr in (("u", "u"), ("f", "f"), ("mu", "mu"), ("p", "p"),
                      ("lambda", "lam")):
        if key in spec:
            kwargs[attr] = ScalarField(
                compile_expression(spec[key], names), name=key)
    fields = {nm: ScalarField(compile_expression(e, names), name=nm)
              for nm, e in spec.get("fields", {}).items()}
    return Scene(
        name=spec.get("name", "scene"),
        chart=chart,
        metric=_matrix_from(spec["metric"], names),
        alpha=float(spec.get("alpha", 1.0)),
        eta=float(spec.get("eta", 0.0)),
        fields=fields,
        params=dict(spec.get("params", {})),
        **kwargs,
    )


def _diag_exprs(entries, m):
    return [[entries[i] if i == j else "0" for j in range(m)]
            for i in range(m)]


def _sphere_diag_exprs(names, start, k, prefactor):
    out = []
    fac = prefactor
    for i in range(k):
        out.append(fac)
        fac = f"{fac}*sin({names[start + i]})^2"
    return out


def _sphere_chart(names, azimuth_last=True):
    box = [[5e-4, 3.1410926535897933] for _ in names]
    if azimuth_last:
        box[-1] = [0.0, 6.283185307179586]
    return {"names": list(names), "box": box}


def scene_file(name, **params):
    """Scene-file dicts equivalent to the built-in catalog fixtures."""
    if name == "flat":
        m = params.get("m", 3)
        names = [f"x{i+1}" for i in range(m)]
        return {"schema": SCHEMA_VERSION, "name": "flat",
                "chart": {"names": names,
                          "box": [[-1.0, 1.0]] * m},
                "metric": _diag_exprs(["1"] * m, m),
                "alpha": 1.0, "u": "1", "mu": "0", "p": "0"}
    if name == "flat-torus":
        m = params.get("m", 3)
        names = [f"x{i+1}" for i in range(m)]
        return {"schema": SCHEMA_VERSION, "name": "flat-torus",
                "chart": {"names": names,
                          "box": [[0.0, 6.283185307179586]] * m},
                "metric": _diag_exprs(["1"] * m, m),
                "alpha": 1.0, "u": "1.5 + 0.5*sin(x1)*cos(x2)",
                "params": {"closed": "torus"}}
    if name == "round-sphere":
        m = params.get("m", 3)
        shift = params.get("shift", 1.5)
        names = ["r"] + [f"t{i+1}" for i in range(m - 1)]
        return {"schema": SCHEMA_VERSION, "name": "round-sphere",
                "chart": _sphere_chart(names),
                "metric": _diag_exprs(
                    _sphere_diag_exprs(names, 0, m, "1"), m),
                "alpha": 1.0, "u": f"{shift} + cos(r)",
                "lambda": str((m - 1) * shift),
                "params": {"closed": "sphere"}}
    if name == "hemisphere-SPFST":
        m = params.get("m", 3)
        mu = 0.5 * m * (m - 1)
        names = ["r"] + [f"t{i+1}" for i in range(m - 1)]
        chart = _sphere_chart(names)
        chart["box"][0] = [0.05, 1.5707963267948966]
        return {"schema": SCHEMA_VERSION, "name": "hemisphere-SPFST",
                "chart": chart,
                "metric": _diag_exprs(
                    _sphere_diag_exprs(names, 0, m, "1"), m),
                "alpha": 1.0, "eta": 1.0, "u": "cos(r)",
                "mu": str(mu), "p": str(-mu), "lambda": str(float(m))}
    if name == "costa-product":
        n = params.get("n", 2)
        q = params.get("q", 2)
        rho = params.get("rho", 1.0)
        m = n + q + 1
        names = (["r"] + [f"t{i+1}" for i in range(n)]
                 + [f"s{i+1}" for i in range(q)])
        ynames = [f"y{i+1}" for i in range(q)]
        first = ["1"] + _sphere_diag_exprs(names, 1, n, "sin(r)^2")
        second = _sphere_diag_exprs(names, 1 + n, q, str(rho))
        tbox = {"names": ynames, "box": [[0.15, 2.991592653589793]] * q}
        mu = 0.5 * (m - 1) * (n + 1)
        return {"schema": SCHEMA_VERSION, "name": "costa-product",
                "chart": {"names": names,
                          "box": ([[0.05, 1.5707963267948966]]
                                  + [[0.15, 2.991592653589793]] * (n + q))},
                "metric": _diag_exprs(first + second, m),
                "map": {"components": names[1 + n:],
                        "target_metric": _diag_exprs(
                            _sphere_diag_exprs(ynames, 0, q, str(rho)), q),
                        "target_chart": tbox},
                "alpha": (q - 1) / rho - (n + 1), "eta": 1.0,
                "u": "cos(r)", "mu": str(mu), "p": str(-mu),
                "lambda": str(float(n + 1)),
                "fields": {"w": str(-1.0 / (n + 1))},
                "params": {"n": n, "q": q, "rho": rho}}
    if name == "gaussian-soliton":
        lam = params.get("lam", 0.7)
        m = params.get("m", 3)
        names = [f"x{i+1}" for i in range(m)]
        quad = " + ".join(f"{nm}^2" for nm in names)
        return {"schema": SCHEMA_VERSION, "name": "gaussian-soliton",
                "chart": {"names": names, "box": [[-1.0, 1.0]] * m},
                "metric": _diag_exprs(["1"] * m, m),
                "alpha": 1.0, "eta": 0.0,
                "f": f"{0.5 * lam}*({quad})", "lambda": str(lam)}
    if name == "warped-profile":
        m = params.get("m", 3)
        names = ["r"] + [f"t{i+1}" for i in range(m - 1)]
        return {"schema": SCHEMA_VERSION, "name": "warped-profile",
                "chart": {"names": names,
                          "box": ([[0.05, 1.5207963267948965]]
                                  + [[0.15, 2.991592653589793]] * (m - 1))},
                "metric": _diag_exprs(
                    ["1"] + _sphere_diag_exprs(names, 1, m - 1,
                                               "sin(r)^2"), m),
                "alpha": 1.0, "eta": 1.0, "f": "-log(cos(r))"}
    if name == "codazzi-sphere":
        base = scene_file("round-sphere", **params)
        base["name"] = "codazzi-sphere"
        base["fields"] = {"w": "cos(2*r)"}
        return base
    raise KeyError(f"no scene file for {name!r}")
