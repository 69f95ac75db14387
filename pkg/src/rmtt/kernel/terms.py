"""Term and type syntax for the framework kernel.

Variables are de Bruijn indices (0 = innermost binder).  Types are
either applications of declared sort constants to term spines, or
dependent products whose domain must be an application of a
representable sort.  Terms are variables, fully applied constants,
framework application and framework lambda.

Matching supports first-order patterns with binders: a pattern variable
occurring under k binders matches a subject that can be unshifted by k
(no capture), and repeated pattern variables require syntactic equality
of the matched subjects.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Const:
    head: str
    args: tuple = ()


@dataclass(frozen=True)
class App:
    fun: object
    arg: object


@dataclass(frozen=True)
class Lam:
    dom: object  # TypeExpr
    body: object


@dataclass(frozen=True)
class SortApp:
    head: str
    args: tuple = ()


@dataclass(frozen=True)
class PiType:
    dom: object
    cod: object


def is_term(x) -> bool:
    return isinstance(x, (Var, Const, App, Lam))


def shift(t, d, cutoff=0):
    """Add d to every free variable index at or above cutoff."""
    if isinstance(t, Var):
        return Var(t.index + d) if t.index >= cutoff else t
    if isinstance(t, Const):
        return Const(t.head, tuple(shift(a, d, cutoff) for a in t.args))
    if isinstance(t, App):
        return App(shift(t.fun, d, cutoff), shift(t.arg, d, cutoff))
    if isinstance(t, Lam):
        return Lam(shift(t.dom, d, cutoff), shift(t.body, d, cutoff + 1))
    if isinstance(t, SortApp):
        return SortApp(t.head, tuple(shift(a, d, cutoff) for a in t.args))
    if isinstance(t, PiType):
        return PiType(shift(t.dom, d, cutoff), shift(t.cod, d, cutoff + 1))
    raise TypeError(f"not an expression: {t!r}")


def subst(t, j, s):
    """Substitute s for Var(j), lowering the indices above j."""
    if isinstance(t, Var):
        if t.index == j:
            return s
        return Var(t.index - 1) if t.index > j else t
    if isinstance(t, Const):
        return Const(t.head, tuple(subst(a, j, s) for a in t.args))
    if isinstance(t, App):
        return App(subst(t.fun, j, s), subst(t.arg, j, s))
    if isinstance(t, Lam):
        return Lam(subst(t.dom, j, s), subst(t.body, j + 1, shift(s, 1)))
    if isinstance(t, SortApp):
        return SortApp(t.head, tuple(subst(a, j, s) for a in t.args))
    if isinstance(t, PiType):
        return PiType(subst(t.dom, j, s), subst(t.cod, j + 1, shift(s, 1)))
    raise TypeError(f"not an expression: {t!r}")


def instantiate_many(t, args):
    """Like instantiate but substituting simultaneously: Var(n-1-k) := args[k]
    for an expression under n = len(args) binders."""
    n = len(args)

    def go(t, depth):
        if isinstance(t, Var):
            i = t.index
            if i < depth:
                return t
            if i < depth + n:
                return shift(args[n - 1 - (i - depth)], depth)
            return Var(i - n)
        if isinstance(t, Const):
            return Const(t.head, tuple(go(a, depth) for a in t.args))
        if isinstance(t, App):
            return App(go(t.fun, depth), go(t.arg, depth))
        if isinstance(t, Lam):
            return Lam(go(t.dom, depth), go(t.body, depth + 1))
        if isinstance(t, SortApp):
            return SortApp(t.head, tuple(go(a, depth) for a in t.args))
        if isinstance(t, PiType):
            return PiType(go(t.dom, depth), go(t.cod, depth + 1))
        raise TypeError(f"not an expression: {t!r}")

    return go(t, 0)


def free_vars(t, depth=0, acc=None):
    if acc is None:
        acc = set()
    if isinstance(t, Var):
        if t.index >= depth:
            acc.add(t.index - depth)
    elif isinstance(t, (Const, SortApp)):
        for a in t.args:
            free_vars(a, depth, acc)
    elif isinstance(t, App):
        free_vars(t.fun, depth, acc)
        free_vars(t.arg, depth, acc)
    elif isinstance(t, Lam):
        free_vars(t.dom, depth, acc)
        free_vars(t.body, depth + 1, acc)
    elif isinstance(t, PiType):
        free_vars(t.dom, depth, acc)
        free_vars(t.cod, depth + 1, acc)
    return acc


def term_size(t) -> int:
    """Node count; lambda domains are forced annotations and do not count."""
    if isinstance(t, Var):
        return 1
    if isinstance(t, (Const, SortApp)):
        return 1 + sum(term_size(a) for a in t.args)
    if isinstance(t, App):
        return term_size(t.fun) + term_size(t.arg)
    if isinstance(t, Lam):
        return 1 + term_size(t.body)
    if isinstance(t, PiType):
        return 1 + term_size(t.dom) + term_size(t.cod)
    raise TypeError(f"not an expression: {t!r}")


def match(pattern, subject, bindings, depth=0):
    """First-order matching with binders.

    Pattern variables are de Bruijn indices into the rule context,
    appearing as Var(i) with i >= depth at binder depth `depth`.  A
    match binds rule variable i - depth to the subject unshifted by
    depth; subjects with free variables below depth fail (no capture).
    Repeated variables must match syntactically equal subjects."""
    if isinstance(pattern, Var):
        if pattern.index < depth:
            return isinstance(subject, Var) and subject.index == pattern.index
        v = pattern.index - depth
        if depth:
            if fv_below(subject, depth):
                return False
            subject = shift_down(subject, depth)
        if v in bindings:
            return bindings[v] == subject
        bindings[v] = subject
        return True
    if isinstance(pattern, Const):
        return (
            isinstance(subject, Const)
            and subject.head == pattern.head
            and len(subject.args) == len(pattern.args)
            and all(match(p, s, bindings, depth) for p, s in zip(pattern.args, subject.args))
        )
    if isinstance(pattern, SortApp):
        return (
            isinstance(subject, SortApp)
            and subject.head == pattern.head
            and len(subject.args) == len(pattern.args)
            and all(match(p, s, bindings, depth) for p, s in zip(pattern.args, subject.args))
        )
    if isinstance(pattern, App):
        return (
            isinstance(subject, App)
            and match(pattern.fun, subject.fun, bindings, depth)
            and match(pattern.arg, subject.arg, bindings, depth)
        )
    if isinstance(pattern, Lam):
        return (
            isinstance(subject, Lam)
            and match(pattern.dom, subject.dom, bindings, depth)
            and match(pattern.body, subject.body, bindings, depth + 1)
        )
    if isinstance(pattern, PiType):
        return (
            isinstance(subject, PiType)
            and match(pattern.dom, subject.dom, bindings, depth)
            and match(pattern.cod, subject.cod, bindings, depth + 1)
        )
    raise TypeError(f"not a pattern: {pattern!r}")


def fv_below(t, depth):
    """Free variable indices of t that are below depth."""
    out = []

    def go(t, d):
        if isinstance(t, Var):
            if t.index < depth + d and t.index >= d:
                # free in t, index relative to t's root is t.index - d
                if t.index - d < depth:
                    out.append(t.index - d)
        elif isinstance(t, (Const, SortApp)):
            for a in t.args:
                go(a, d)
        elif isinstance(t, App):
            go(t.fun, d)
            go(t.arg, d)
        elif isinstance(t, Lam):
            go(t.dom, d)
            go(t.body, d + 1)
        elif isinstance(t, PiType):
            go(t.dom, d)
            go(t.cod, d + 1)

    go(t, 0)
    return out


def shift_down(t, d):
    return shift(t, -d)


# -- printing ---------------------------------------------------------------


def pretty(t, names=None) -> str:
    """Readable form with invented variable names; round-trips through the
    parser for closed expressions."""
    names = list(names or [])

    def go(t, names):
        def nm(i):
            if i < len(names):
                return names[len(names) - 1 - i]
            return f"?{i - len(names)}"

        if isinstance(t, Var):
            return nm(t.index)
        if isinstance(t, (Const, SortApp)):
            if not t.args:
                return t.head
            return f"{t.head}({', '.join(go(a, names) for a in t.args)})"
        if isinstance(t, App):
            spine = []
            f = t
            while isinstance(f, App):
                spine.append(f.arg)
                f = f.fun
            spine.reverse()
            head = go(f, names)
            if isinstance(f, Lam):
                head = f"({head})"
            return f"{head}({', '.join(go(a, names) for a in spine)})"
        if isinstance(t, Lam):
            v = f"x{len(names)}"
            return f"\\({v} : {go(t.dom, names)}) => {go(t.body, names + [v])}"
        if isinstance(t, PiType):
            v = f"x{len(names)}"
            return f"({v} : {go(t.dom, names)}) -> {go(t.cod, names + [v])}"
        raise TypeError(f"not an expression: {t!r}")

    return go(t, names)


def expr_to_data(t):
    """JSON-able encoding of an expression; inverse of expr_from_data."""
    if isinstance(t, Var):
        return ["var", t.index]
    if isinstance(t, Const):
        return ["const", t.head, [expr_to_data(a) for a in t.args]]
    if isinstance(t, App):
        return ["app", expr_to_data(t.fun), expr_to_data(t.arg)]
    if isinstance(t, Lam):
        return ["lam", expr_to_data(t.dom), expr_to_data(t.body)]
    if isinstance(t, SortApp):
        return ["sort", t.head, [expr_to_data(a) for a in t.args]]
    if isinstance(t, PiType):
        return ["pi", expr_to_data(t.dom), expr_to_data(t.cod)]
    raise TypeError(f"not an expression: {t!r}")


def expr_from_data(d):
    tag = d[0]
    if tag == "var":
        return Var(d[1])
    if tag == "const":
        return Const(d[1], tuple(expr_from_data(a) for a in d[2]))
    if tag == "app":
        return App(expr_from_data(d[1]), expr_from_data(d[2]))
    if tag == "lam":
        return Lam(expr_from_data(d[1]), expr_from_data(d[2]))
    if tag == "sort":
        return SortApp(d[1], tuple(expr_from_data(a) for a in d[2]))
    if tag == "pi":
        return PiType(expr_from_data(d[1]), expr_from_data(d[2]))
    raise ValueError(f"bad expression encoding: {d!r}")
