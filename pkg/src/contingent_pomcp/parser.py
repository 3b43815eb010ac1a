"""Reader for a small PDDL-like contingent planning format.

Domain files declare typed predicates and action schemas. An action has an
``:effect`` (actuation), an ``:observe`` list (sensing), or both. Problem
files list objects, the initial formula and the goal. Initial formulas admit
literals, ``or``, ``oneof`` and ``probabilistic`` clauses; effects admit
``when`` and ``probabilistic``.

Schemas are grounded over the typed objects. Ground atoms that no action can
change, no action observes and the initial formula fixes are replaced by
their initial value.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .logic import (
    FALSE,
    TRUE,
    And,
    Formula,
    Literal,
    Not,
    OneOf,
    Or,
    conj,
    disj,
    iter_bits,
    literal_conjunction,
    negate,
    oneof,
    simplify_known,
)
from .model import (
    PROB_TOLERANCE,
    ActuationAction,
    Effect,
    ModelError,
    Problem,
    SensingAction,
    StochasticFormula,
)

KEYWORDS = (
    "define", "domain", "problem", ":requirements", ":types", ":constants",
    ":predicates", ":action", ":parameters", ":precondition", ":effect",
    ":observe", ":init", ":goal", "and", "or", "not", "when", "oneof",
    "probabilistic",
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


# --- s-expressions ------------------------------------------------------------

class Sym(str):
    line: int
    col: int

    def __new__(cls, text, line=0, col=0):
        obj = super().__new__(cls, text)
        obj.line = line
        obj.col = col
        return obj


class SList(list):
    def __init__(self, items=(), line=0, col=0):
        super().__init__(items)
        self.line = line
        self.col = col


_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")


def read_sexprs(text: str) -> list:
    stack: list[SList] = [SList()]
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        tok = m.group(0)
        if tok == "(":
            stack.append(SList(line=line, col=col))
        elif tok == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].append(done)
        elif not tok[0].isspace() and tok[0] != ";":
            stack[-1].append(Sym(tok.lower(), line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    if len(stack) != 1:
        open_ = stack[-1]
        raise ParseError("unclosed '('", open_.line, open_.col)
    return stack[0]


def _loc(x) -> tuple[int, int]:
    return getattr(x, "line", 0), getattr(x, "col", 0)


def _err(msg, x) -> ParseError:
    return ParseError(msg, *_loc(x))


def _expect_list(x, what):
    if not isinstance(x, SList):
        raise _err(f"expected {what}", x)
    return x


def _head(x) -> str | None:
    if isinstance(x, SList) and x and isinstance(x[0], Sym):
        return str(x[0])
    return None


# --- structures -----------------------------------------------------------------

@dataclass
class Schema:
    name: str
    params: list[tuple[str, str]]
    pre: object
    effect: object
    observe: list
    node: SList


@dataclass
class DomainDef:
    name: str
    types: dict[str, str | None] = field(default_factory=dict)  # type -> parent
    constants: list[tuple[str, str]] = field(default_factory=list)
    predicates: dict[str, tuple[list[str], SList]] = field(default_factory=dict)
    actions: list[Schema] = field(default_factory=list)


@dataclass
class ProblemDef:
    name: str
    domain: str | None
    objects: list[tuple[str, str]]
    init: SList
    goal: object


def _typed_list(items, where) -> list[tuple[str, str]]:
    """Parse ``a b - t c`` into [(a, t), (b, t), (c, object)]."""
    out = []
    pending = []
    i = 0
    while i < len(items):
        it = items[i]
        if not isinstance(it, Sym):
            raise _err(f"unexpected list in {where}", it)
        if it == "-":
            if i + 1 >= len(items) or not isinstance(items[i + 1], Sym):
                raise _err(f"missing type after '-' in {where}", it)
            t = str(items[i + 1])
            out.extend((p, t) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(str(it))
        i += 1
    out.extend((p, "object") for p in pending)
    return out


def parse_domain(text: str) -> DomainDef:
    exprs = read_sexprs(text)
    if len(exprs) != 1 or _head(exprs[0]) != "define":
        raise ParseError("domain text must be a single (define ...) form", 1, 1)
    top = exprs[0]
    if len(top) < 2 or _head(top[1]) != "domain" or len(top[1]) != 2:
        raise _err("expected (domain NAME)", top)
    d = DomainDef(name=str(top[1][1]))
    d.types["object"] = None
    for sec in top[2:]:
        h = _head(sec)
        if h == ":requirements":
            continue
        if h == ":types":
            for t, parent in _typed_list(sec[1:], ":types"):
                d.types[t] = parent if t != "object" else None
                d.types.setdefault(parent, None if parent == "object" else "object")
                if parent == "object":
                    d.types["object"] = None
        elif h == ":constants":
            d.constants.extend(_typed_list(sec[1:], ":constants"))
        elif h == ":predicates":
            for p in sec[1:]:
                p = _expect_list(p, "predicate declaration")
                if not p or not isinstance(p[0], Sym):
                    raise _err("bad predicate declaration", p)
                params = _typed_list(p[1:], f"predicate {p[0]}")
                if str(p[0]) in d.predicates:
                    raise _err(f"predicate {p[0]} declared twice", p)
                d.predicates[str(p[0])] = ([t for _, t in params], p)
        elif h == ":action":
            d.actions.append(_parse_action(sec))
        else:
            raise _err(f"unknown domain section {h or sec!r}", sec)
    for t, parent in list(d.types.items()):
        if parent is not None and parent not in d.types:
            d.types[parent] = "object"
    return d


def _parse_action(sec: SList) -> Schema:
    if len(sec) < 2 or not isinstance(sec[1], Sym):
        raise _err("action needs a name", sec)
    name = str(sec[1])
    params: list[tuple[str, str]] = []
    pre = None
    eff = None
    obs = None
    i = 2
    while i < len(sec):
        key = sec[i]
        if i + 1 >= len(sec):
            raise _err(f"missing value for {key}", key)
        val = sec[i + 1]
        if key == ":parameters":
            params = _typed_list(_expect_list(val, "parameter list"), f"parameters of {name}")
        elif key == ":precondition":
            pre = val
        elif key == ":effect":
            eff = val
        elif key == ":observe":
            obs = list(_expect_list(val, "observation list"))
            # accept both (:observe (p ?x)) and (:observe (and (p ?x) (q)))
            if obs and obs[0] == "and":
                obs = obs[1:]
            elif obs and isinstance(obs[0], Sym):
                obs = [val]
        else:
            raise _err(f"unknown action field {key}", key)
        i += 2
    if eff is None and obs is None:
        raise _err(f"action {name} has neither :effect nor :observe", sec)
    for v, _ in params:
        if not v.startswith("?"):
            raise _err(f"parameter {v} must start with '?'", sec)
    return Schema(name, params, pre, eff, obs or [], sec)


def parse_problem_def(text: str) -> ProblemDef:
    exprs = read_sexprs(text)
    if len(exprs) != 1 or _head(exprs[0]) != "define":
        raise ParseError("problem text must be a single (define ...) form", 1, 1)
    top = exprs[0]
    if len(top) < 2 or _head(top[1]) != "problem" or len(top[1]) != 2:
        raise _err("expected (problem NAME)", top)
    name = str(top[1][1])
    domain = None
    objects: list[tuple[str, str]] = []
    init = None
    goal = None
    for sec in top[2:]:
        h = _head(sec)
        if h == ":domain":
            domain = str(sec[1])
        elif h == ":objects":
            objects.extend(_typed_list(sec[1:], ":objects"))
        elif h == ":requirements":
            continue
        elif h == ":init":
            init = sec
        elif h == ":goal":
            if len(sec) != 2:
                raise _err(":goal takes one formula", sec)
            goal = sec[1]
        else:
            raise _err(f"unknown problem section {h or sec!r}", sec)
    if init is None or len(init) == 1:
        raise _err("missing or empty :init section", init if init is not None else top)
    if goal is None:
        raise _err("missing :goal section", top)
    return ProblemDef(name, domain, objects, init, goal)


# --- grounding ------------------------------------------------------------------

def _parse_prob(tok) -> float:
    if not isinstance(tok, Sym):
        raise _err("expected a probability", tok)
    try:
        v = float(Fraction(str(tok)))
    except (ValueError, ZeroDivisionError):
        raise _err(f"bad probability {tok!r}", tok) from None
    if v <= 0:
        raise _err(f"probability {tok} must be positive", tok)
    if v > 1:
        raise _err(f"probability {tok} exceeds 1", tok)
    return v


Atom = tuple  # (predicate, arg, ...)


class _Grounder:
    def __init__(self, d: DomainDef, p: ProblemDef):
        self.d = d
        self.p = p
        self.objects: list[tuple[str, str]] = []
        seen = set()
        for o, t in d.constants + p.objects:
            if o in seen:
                raise ParseError(f"object {o} declared twice")
            if t not in d.types:
                raise ParseError(f"object {o} has undeclared type {t}")
            seen.add(o)
            self.objects.append((o, t))
        self.obj_index = {o: i for i, (o, _) in enumerate(self.objects)}
        self.by_type: dict[str, list[str]] = {}
        for t in d.types:
            self.by_type[t] = [o for o, ot in self.objects if self._subtype(ot, t)]
        self.pred_order = {name: i for i, name in enumerate(d.predicates)}
        self.origin: dict[str, tuple[int, int]] = {}

    def _subtype(self, t, sup):
        seen = set()
        while t is not None and t not in seen:
            if t == sup:
                return True
            seen.add(t)
            t = self.d.types.get(t)
        return sup == "object"

    # atoms and formulas over atoms, before fact ids exist

    def atom(self, x, binding) -> Atom:
        x = _expect_list(x, "atom")
        if not x or not isinstance(x[0], Sym):
            raise _err("bad atom", x)
        name = str(x[0])
        if name in KEYWORDS:
            raise _err(f"{name} is not a predicate", x)
        if name not in self.d.predicates:
            raise _err(f"undeclared predicate {name}", x)
        types = self.d.predicates[name][0]
        if len(x) - 1 != len(types):
            raise _err(f"predicate {name} expects {len(types)} arguments, got {len(x) - 1}", x)
        args = []
        for a, t in zip(x[1:], types):
            if not isinstance(a, Sym):
                raise _err("nested term in atom", a)
            a = str(a)
            if a.startswith("?"):
                if a not in binding:
                    raise _err(f"unbound variable {a}", x)
                a = binding[a]
            elif a not in self.obj_index:
                raise _err(f"unknown object {a}", x)
            if not self._subtype(dict(self.objects)[a], t):
                raise _err(f"object {a} is not of type {t}", x)
            args.append(a)
        return (name, *args)

    def literal(self, x, binding):
        """(atom, positive)"""
        if _head(x) == "not":
            if len(x) != 2:
                raise _err("not takes one argument", x)
            a, pos = self.literal(x[1], binding)
            return a, not pos
        return self.atom(x, binding), True


def _atom_name(atom: Atom) -> str:
    return "_".join(atom)


@dataclass
class _GroundAction:
    name: str
    pre: list  # raw formula trees with atoms substituted
    effects: list  # list of (cond lits, options [(lits, p)])
    observe: list[Atom]
    origin: tuple[int, int]


def parse(domain_text: str, problem_text: str) -> Problem:
    """Parse and ground a domain/problem pair into a :class:`Problem`."""
    d = parse_domain(domain_text)
    p = parse_problem_def(problem_text)
    if p.domain is not None and p.domain != d.name:
        raise ParseError(f"problem refers to domain {p.domain}, not {d.name}")
    return _ground(d, p)


# Formula trees over atoms use tuples: ("lit", atom, pos), ("and", [...]),
# ("or", [...]), ("oneof", [...]), ("not", x), ("const", bool).

def _formula_tree(g: _Grounder, x, binding):
    h = _head(x)
    if h == "and":
        return ("and", [_formula_tree(g, y, binding) for y in x[1:]])
    if h == "or":
        return ("or", [_formula_tree(g, y, binding) for y in x[1:]])
    if h == "not":
        if len(x) != 2:
            raise _err("not takes one argument", x)
        return ("not", _formula_tree(g, x[1], binding))
    if h == "oneof":
        items = []
        for y in x[1:]:
            hy = _head(y)
            if hy in ("and", "or", "oneof", "probabilistic", "when") or not isinstance(y, SList):
                raise _err("oneof admits only literals", y)
            atom, pos = g.literal(y, binding)
            items.append(("lit", atom, pos))
        if len(items) < 2:
            raise _err("oneof needs at least two literals", x)
        return ("oneof", items)
    if h in ("probabilistic", "when"):
        raise _err(f"{h} is not allowed here", x)
    if isinstance(x, SList) and len(x) == 0:
        return ("const", True)
    atom, pos = g.literal(x, binding)
    return ("lit", atom, pos)


def _tree_atoms(t, out: set):
    k = t[0]
    if k == "lit":
        out.add(t[1])
    elif k in ("and", "or", "oneof"):
        for y in t[1]:
            _tree_atoms(y, out)
    elif k == "not":
        _tree_atoms(t[1], out)


def _lits_of(g: _Grounder, x, binding, what) -> list:
    """A conjunction of literals as [(atom, pos)]."""
    if isinstance(x, SList) and len(x) == 0:
        return []
    if _head(x) == "and":
        out = []
        for y in x[1:]:
            out.extend(_lits_of(g, y, binding, what))
        return out
    if _head(x) in ("or", "oneof", "when", "probabilistic"):
        raise _err(f"{what} must be a conjunction of literals", x)
    return [g.literal(x, binding)]


def _effects_of(g: _Grounder, x, binding, cond=()) -> list:
    """List of (condition literals, [(option literals, probability)])."""
    h = _head(x)
    if isinstance(x, SList) and len(x) == 0:
        return []
    if h == "and":
        plain = []
        out = []
        for y in x[1:]:
            hy = _head(y)
            if hy in ("when", "probabilistic", "and"):
                out.extend(_effects_of(g, y, binding, cond))
            else:
                plain.append(g.literal(y, binding))
        if plain:
            out.insert(0, (list(cond), [(plain, 1.0)]))
        return out
    if h == "when":
        if cond:
            raise _err("nested when", x)
        if len(x) != 3:
            raise _err("when takes a condition and an effect", x)
        c = _lits_of(g, x[1], binding, "effect condition")
        return _effects_of(g, x[2], binding, tuple(c))
    if h == "probabilistic":
        items = x[1:]
        if len(items) % 2 or not items:
            raise _err("probabilistic expects probability/effect pairs", x)
        opts = []
        total = 0.0
        for i in range(0, len(items), 2):
            pr = _parse_prob(items[i])
            lits = _lits_of(g, items[i + 1], binding, "probabilistic option")
            if not lits:
                raise _err("empty probabilistic option", items[i + 1])
            total += pr
            opts.append((lits, pr))
        if abs(total - 1.0) > PROB_TOLERANCE:
            raise _err(f"probabilities sum to {total:g}, not 1", x)
        return [(list(cond), opts)]
    return [(list(cond), [([g.literal(x, binding)], 1.0)])]


def _ground(d: DomainDef, p: ProblemDef) -> Problem:
    g = _Grounder(d, p)
    # predicates touched by some effect or observation
    dynamic_preds: set[str] = set()

    def scan_effect_preds(x):
        if isinstance(x, SList):
            h = _head(x)
            if h in ("and", "probabilistic", "not"):
                for y in x[1:]:
                    scan_effect_preds(y)
            elif h == "when":
                if len(x) == 3:
                    scan_effect_preds(x[2])
            elif h is not None:
                dynamic_preds.add(h)

    for s in d.actions:
        if s.effect is not None:
            scan_effect_preds(s.effect)
        for o in s.observe:
            if _head(o) is not None:
                dynamic_preds.add(_head(o))

    # initial formula
    init_known: list[tuple[Atom, bool]] = []
    init_cons: list = []
    init_probs: list[list[tuple[list, float]]] = []
    uncertain: set[Atom] = set()
    items = list(p.init[1:])
    while items:
        x = items.pop(0)
        h = _head(x)
        if h == "and":
            items[:0] = list(x[1:])
            continue
        if h in ("or", "oneof"):
            t = _formula_tree(g, x, {})
            _tree_atoms(t, uncertain)
            init_cons.append(t)
        elif h == "probabilistic":
            eff = _effects_of(g, x, {})
            opts = eff[0][1]
            init_probs.append(opts)
            for lits, _ in opts:
                uncertain.update(a for a, _ in lits)
        else:
            atom, pos = g.literal(x, {})
            init_known.append((atom, pos))
    init_true = {a for a, pos in init_known if pos}
    for a, pos in init_known:
        if not pos and a in init_true:
            raise ParseError(f"initial state asserts {a} and its negation")

    goal_tree = _formula_tree(g, p.goal, {})
    goal_atoms: set[Atom] = set()
    _tree_atoms(goal_tree, goal_atoms)

    static_preds = {
        name for name in d.predicates
        if name not in dynamic_preds and not any(a[0] == name for a in uncertain)
    }

    def static_value(atom):
        return atom in init_true

    # ground the schemas, pruning on static preconditions
    ground: list[_GroundAction] = []
    for s in d.actions:
        domains_ = []
        for v, t in s.params:
            if t not in d.types:
                raise _err(f"parameter {v} has undeclared type {t}", s.node)
            domains_.append(g.by_type[t])
        names = [v for v, _ in s.params]
        for combo in itertools.product(*domains_):
            binding = dict(zip(names, combo))
            pre = _lits_of(g, s.pre, binding, f"precondition of {s.name}") if s.pre is not None else []
            if any(a[0] in static_preds and static_value(a) != pos for a, pos in pre):
                continue
            effs = _effects_of(g, s.effect, binding) if s.effect is not None else []
            obs = [g.atom(o, binding) for o in s.observe]
            gname = "_".join((s.name, *combo))
            ground.append(_GroundAction(gname, pre, effs, obs, _loc(s.node)))

    # ground atoms that can change or are uncertain stay as facts
    changing: set[Atom] = set(uncertain)
    for ga in ground:
        for _, opts in ga.effects:
            for lits, _ in opts:
                changing.update(a for a, _ in lits)
        changing.update(ga.observe)
    keep = set(changing) | goal_atoms
    # anything else is a constant: substitute its initial value
    used: set[Atom] = set(keep)
    for ga in ground:
        used.update(a for a, _ in ga.pre)
        for c, _ in ga.effects:
            used.update(a for a, _ in c)
    facts_atoms = sorted(
        keep,
        key=lambda a: (g.pred_order[a[0]], tuple(g.obj_index[x] for x in a[1:])),
    )
    fact_id = {a: i for i, a in enumerate(facts_atoms)}
    names = [_atom_name(a) for a in facts_atoms]
    if len(set(names)) != len(names):
        raise ParseError("two ground atoms map to the same fact name")

    def lit_or_const(atom, pos) -> Formula:
        i = fact_id.get(atom)
        if i is None:
            return TRUE if static_value(atom) == pos else FALSE
        return Literal(i, pos)

    def tree_formula(t) -> Formula:
        k = t[0]
        if k == "lit":
            return lit_or_const(t[1], t[2])
        if k == "const":
            return TRUE if t[1] else FALSE
        if k == "and":
            return conj(*[tree_formula(y) for y in t[1]])
        if k == "or":
            return disj(*[tree_formula(y) for y in t[1]])
        if k == "not":
            return negate(tree_formula(t[1]))
        if k == "oneof":
            lits = [tree_formula(y) for y in t[1]]
            # every oneof atom is uncertain, so never a constant
            return oneof(*lits)
        raise AssertionError(k)

    actuations = []
    sensings = []
    origin: dict[str, tuple[int, int]] = {}
    for ga in ground:
        pre_parts = [lit_or_const(a, pos) for a, pos in ga.pre]
        if any(x is FALSE for x in pre_parts):
            continue  # a constant atom rules the action out
        pre = conj(*pre_parts)
        if ga.effects or not ga.observe:
            effects = []
            for cond, opts in ga.effects:
                c = conj(*[lit_or_const(a, pos) for a, pos in cond])
                if c is FALSE:
                    continue
                options = tuple(
                    (tuple(Literal(fact_id[a], pos) for a, pos in lits), pr) for lits, pr in opts
                )
                try:
                    sf = StochasticFormula(options)
                except ModelError as e:
                    raise ParseError(f"{ga.name}: {e}", *ga.origin) from None
                effects.append(Effect(c, sf))
            obs = tuple(fact_id[a] for a in ga.observe)
            try:
                act = ActuationAction(ga.name, pre, tuple(effects), obs)
            except ModelError as e:
                raise ParseError(str(e), *ga.origin) from None
            actuations.append(act)
        else:
            sensings.append(SensingAction(ga.name, pre, tuple(fact_id[a] for a in ga.observe)))
        origin[ga.name] = ga.origin

    init_parts: list[Formula] = [lit_or_const(a, pos) for a, pos in init_known if a in fact_id]
    init_parts += [tree_formula(t) for t in init_cons]
    init = conj(*init_parts)
    if init is FALSE:
        raise ParseError("initial formula is contradictory")
    probs = []
    for opts in init_probs:
        options = tuple(
            (tuple(Literal(fact_id[a], pos) for a, pos in lits), pr) for lits, pr in opts
        )
        try:
            probs.append(StochasticFormula(options))
        except ModelError as e:
            raise ParseError(str(e)) from None
    goal = tree_formula(goal_tree)
    prob = Problem(names, actuations, sensings, init, probs, goal, name=p.name)
    prob.origin = origin
    prob.domain_name = d.name
    return prob


def parse_files(domain_path, problem_path) -> Problem:
    with open(domain_path, encoding="utf-8") as f:
        dt = f.read()
    with open(problem_path, encoding="utf-8") as f:
        pt = f.read()
    return parse(dt, pt)


# --- validation -----------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    code: str
    message: str


def _relaxed_reach(problem: Problem) -> tuple[int, set[int]]:
    """Relaxed masks reachable from every possible initial fact; also reached actions."""
    from .heuristics import build_planning_graph, relaxed_task

    task = relaxed_task(problem)
    hidden = problem.hidden_mask
    r = task.relax(problem.init_known_true) | hidden | (hidden << task.n)
    graph = build_planning_graph(problem, r, relaxed=True)
    top = graph.fact_layers[-1]
    reached = set()
    for a in problem.actions:
        if a.unsatisfiable:
            continue
        need = a.pre_pos | (a.pre_neg << task.n)
        if (need & top) == need:
            reached.add(a.index)
    return top, reached


def validate(problem: Problem) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    if not problem.entailment.consistent():
        out.append(Diagnostic("error", "unsatisfiable-init", "initial formula has no model"))
        return out
    for a in problem.actions:
        if a.unsatisfiable:
            out.append(Diagnostic("warning", "unsatisfiable-precondition",
                                  f"{a.name}: precondition can never hold"))
    used = problem.goal.mask | problem.init.mask
    for sf in problem.init_probs:
        used |= sf.mentioned()
    for a in problem.actions:
        if a.unsatisfiable:
            continue
        used |= a.pre_pos | a.pre_neg | a.obs_mask
        if not a.is_sensing:
            used |= a.modified_mask
            for e in a.effects:
                used |= e.condition.mask
    for f in problem.facts:
        if not (used >> f.id) & 1:
            out.append(Diagnostic("warning", "dead-fact", f"{f.name} is never used"))
    top = None
    try:
        top, reached = _relaxed_reach(problem)
    except ModelError:
        reached = None
    if reached is not None:
        for a in problem.actions:
            if not a.unsatisfiable and a.index not in reached:
                out.append(Diagnostic("warning", "unreachable-action",
                                      f"{a.name}: precondition is never reachable"))
    if problem.entailment(problem.goal):
        out.append(Diagnostic("warning", "goal-trivial", "goal holds in every initial state"))
    elif top is not None and problem.goal_lits is not None:
        n = problem.num_facts
        need = problem.goal_pos | (problem.goal_neg << n)
        if (need & top) != need:
            out.append(Diagnostic("error", "goal-unreachable", "goal is not reachable even ignoring deletes"))
    return out


# --- printing -------------------------------------------------------------------

def _fmt_prob(p: float) -> str:
    return repr(float(p))


def _fmt(f: Formula, names) -> str:
    if f is TRUE:
        return "(and)"
    if f is FALSE:
        return "(or)"
    t = type(f)
    if t is Literal:
        a = f"({names[f.fact]})"
        return a if f.positive else f"(not {a})"
    if t is Not:
        return f"(not {_fmt(f.item, names)})"
    tag = {And: "and", Or: "or", OneOf: "oneof"}[t]
    return f"({tag} " + " ".join(_fmt(x, names) for x in f.items) + ")"


def _fmt_lits(lits, names) -> str:
    if len(lits) == 1:
        return _fmt(lits[0], names)
    return "(and " + " ".join(_fmt(l, names) for l in lits) + ")"


def _fmt_stoch(sf: StochasticFormula, names) -> str:
    if sf.is_deterministic:
        return _fmt_lits(sf.options[0][0], names)
    parts = " ".join(f"{_fmt_prob(p)} {_fmt_lits(l, names)}" for l, p in sf.options)
    return f"(probabilistic {parts})"


def pretty_print(problem: Problem) -> tuple[str, str]:
    """Render a grounded problem as (domain text, problem text) with nullary predicates."""
    names = [f.name for f in problem.facts]
    dom = [f"(define (domain {getattr(problem, 'domain_name', problem.name + '-domain')})",
           "  (:requirements :strips)",
           "  (:predicates " + " ".join(f"({n})" for n in names) + ")"]
    for a in problem.actions:
        lines = [f"  (:action {a.name}", "    :parameters ()"]
        if a.pre is not TRUE:
            lines.append(f"    :precondition {_fmt(a.pre, names)}")
        if not a.is_sensing:
            effs = []
            for e in a.effects:
                body = _fmt_stoch(e.outcome, names)
                if e.condition is TRUE:
                    effs.append(body)
                else:
                    effs.append(f"(when {_fmt(e.condition, names)} {body})")
            lines.append("    :effect (and " + " ".join(effs) + ")")
        if a.observe:
            lines.append("    :observe (" + " ".join(f"({names[f]})" for f in a.observe) + ")")
        lines[-1] += ")"
        dom.extend(lines)
    dom.append(")")
    parts = problem.init.items if type(problem.init) is And else (problem.init,)
    init_items = [_fmt(x, names) for x in parts if x is not TRUE]
    for sf in problem.init_probs:
        init_items.append(
            "(probabilistic " + " ".join(f"{_fmt_prob(p)} {_fmt_lits(l, names)}" for l, p in sf.options) + ")"
        )
    prob = [f"(define (problem {problem.name})",
            f"  (:domain {getattr(problem, 'domain_name', problem.name + '-domain')})",
            "  (:init " + "\n    ".join(init_items) + ")",
            f"  (:goal {_fmt(problem.goal, names)})",
            ")"]
    return "\n".join(dom) + "\n", "\n".join(prob) + "\n"
