"""Symbolic game models: finite guarded automata over symbolic moves.

A well-typed open term is compiled into a tree-shaped automaton whose edges
carry an optional move, a guard (conjunction of linear atoms), and at most
one fresh-symbol binder.  Environment value answers bind fresh *input*
symbols over the answering component's domain; local-variable updates bind
fresh *internal* symbols constrained by an equality guard, so every play
condition is a self-contained linear integer formula.

Loops and undefined functions are the two cycle sources, and each is cut by
its own bound: a loop may complete ``while_depth`` iterations before a grey
edge truncates the play at the next guard-true, and an undefined function
may call its arguments at most ``fn_call_bound - 1`` times before answering.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .constraints import Atom, Constraint, LinExpr
from .errors import InternalInvariantError, ResourceLimitError
from .lang import (
    Apply, Arith, Assign, BaseType, BoolLit, BoolOp, Cmp, Context, Deref,
    FunType, If, IntLit, NewInt, Not, Seq, Skip, Term, TypedTerm, Var,
    VarIntType, While, DEFAULT_INT_DOMAIN,
)

QUESTION = "question"
ANSWER = "answer"


@dataclass(frozen=True)
class Bounds:
    """Exploration bounds, reported alongside every analysis result."""

    while_depth: int = 3
    fn_call_bound: int = 5
    fn_overrides: Mapping[str, int] = field(default_factory=dict)
    while_overrides: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.while_depth < 0:
            raise ValueError("while_depth must be >= 0")
        if self.fn_call_bound < 1:
            raise ValueError("fn_call_bound must be >= 1")
        for v in self.fn_overrides.values():
            if v < 1:
                raise ValueError("per-function bounds must be >= 1")
        for v in self.while_overrides.values():
            if v < 0:
                raise ValueError("per-loop depths must be >= 0")

    def fn_bound(self, name: str) -> int:
        return self.fn_overrides.get(name, self.fn_call_bound)

    def loop_depth(self, loop_index: int) -> int:
        return self.while_overrides.get(loop_index, self.while_depth)


@dataclass(frozen=True)
class FreshSymbol:
    name: str
    size: int
    source: str  # identifier the instantiation belongs to
    kind: str  # "input" | "internal"


@dataclass(frozen=True)
class FnEvent:
    """Marker on edges tracking undefined-function interactions along a play."""

    kind: str  # "open" | "choice" | "close"
    name: str
    n_args: int = 0
    bound: int = 0
    arg_index: int = -1  # for "choice": which argument was called (0-based)


@dataclass(frozen=True)
class Move:
    polarity: str  # QUESTION | ANSWER
    payload: str  # "run" | "done" | "q" | "read" | "ok" | "write" | "val"
    tag: tuple[str, ...] = ()
    value: LinExpr | None = None
    sort: str = "com"  # rendering hint for value answers: "com" | "int" | "bool"


@dataclass(frozen=True)
class GuardedEdge:
    src: int
    dst: int
    guard: tuple[Atom, ...] = ()
    move: Move | None = None
    fresh: FreshSymbol | None = None
    grey: bool = False
    event: FnEvent | None = None


def render_move(move: Move, fresh: FreshSymbol | None = None) -> str:
    if move.payload == "val":
        assert move.value is not None
        if fresh is not None:
            body = f"?{fresh.name}"
        elif move.sort == "bool" and move.value.is_constant:
            body = "tt" if move.value.const else "ff"
        else:
            body = str(move.value)
    elif move.payload == "write":
        body = f"write({move.value})"
    else:
        body = move.payload
    if move.tag:
        return f"{body}^{','.join(move.tag)}"
    return body


@dataclass
class SymbolicModel:
    """Tree-shaped guarded automaton; maximal paths are the symbolic plays."""

    initial: int
    states: list[int]
    edges: list[GuardedEdge]
    accepting: frozenset[int]
    failure: frozenset[int]
    grey_states: frozenset[int]

    def out_edges(self, state: int) -> list[GuardedEdge]:
        return self._out.get(state, [])

    def finalize(self) -> "SymbolicModel":
        out: dict[int, list[GuardedEdge]] = {}
        for e in self.edges:
            out.setdefault(e.src, []).append(e)
        self._out = out
        return self

    def is_acyclic(self) -> bool:
        seen: set[int] = set()
        stack: set[int] = set()

        def visit(s: int) -> bool:
            if s in stack:
                return False
            if s in seen:
                return True
            seen.add(s)
            stack.add(s)
            ok = all(visit(e.dst) for e in self.out_edges(s))
            stack.remove(s)
            return ok

        return visit(self.initial)

    def fresh_symbols(self) -> list[FreshSymbol]:
        return [e.fresh for e in self.edges if e.fresh is not None]

    def dump(self) -> str:
        lines = []
        for e in self.edges:
            guard = " && ".join(str(a) for a in e.guard) or "true"
            if e.grey:
                move = "<grey>"
            elif e.move is None:
                move = "-"
            else:
                move = render_move(e.move, e.fresh)
            fresh = f" | ?{e.fresh.name}:{e.fresh.size}" if e.fresh else ""
            lines.append(f"s{e.src} -[{guard} | {move}{fresh}]-> s{e.dst}")
        return "\n".join(lines)


_Store = dict[str, tuple[str, int]]  # local variable -> (chain symbol, domain)
_Path = tuple[int, _Store]
_Valued = tuple[int, _Store, LinExpr | None]


DEFAULT_STATE_CAP = 5_000_000


class _Builder:
    def __init__(self, ctx: Context, bounds: Bounds, local_domain: int,
                 max_states: int = DEFAULT_STATE_CAP):
        self.ctx = ctx
        self.bounds = bounds
        self.local_domain = local_domain
        self.max_states = max_states
        self.states: list[int] = [0]
        self.edges: list[GuardedEdge] = []
        self.counters: dict[str, int] = {}
        self.grey_states: set[int] = set()
        self.loop_ids: dict[int, int] = {}

    def number_loops(self, term: Term) -> None:
        order = itertools.count()

        def walk(t: Term) -> None:
            if isinstance(t, While):
                self.loop_ids[id(t)] = next(order)
                walk(t.cond)
                walk(t.body)
            elif isinstance(t, (Seq,)):
                walk(t.first)
                walk(t.second)
            elif isinstance(t, If):
                walk(t.cond)
                walk(t.then)
                walk(t.els)
            elif isinstance(t, NewInt):
                walk(t.init)
                walk(t.body)
            elif isinstance(t, (Arith, Cmp, BoolOp)):
                walk(t.left)
                walk(t.right)
            elif isinstance(t, Not):
                walk(t.expr)
            elif isinstance(t, Assign):
                walk(t.expr)
            elif isinstance(t, Apply):
                for a in t.args:
                    walk(a)

        walk(term)

    def new_state(self) -> int:
        s = len(self.states)
        if s >= self.max_states:
            raise ResourceLimitError(
                f"model construction exceeded {self.max_states} states; "
                "lower the exploration bounds")
        self.states.append(s)
        return s

    def edge(self, src: int, guard: Sequence[Atom] = (), move: Move | None = None,
             fresh: FreshSymbol | None = None, grey: bool = False,
             event: FnEvent | None = None) -> int:
        dst = self.new_state()
        self.edges.append(GuardedEdge(src, dst, tuple(guard), move, fresh,
                                      grey, event))
        if grey:
            self.grey_states.add(dst)
        return dst

    def fresh(self, source: str, size: int, kind: str) -> FreshSymbol:
        base = source.upper()
        n = self.counters.get(base, 0) + 1
        self.counters[base] = n
        return FreshSymbol(f"{base}{n}", size, source, kind)

    # -- expression/command evaluation ---------------------------------------

    def eval_any(self, term: Term, sort: str, st: int, store: _Store) -> list[_Valued]:
        if isinstance(term, Seq):
            out: list[_Valued] = []
            for st1, store1, _ in self.eval_any(term.first, "com", st, store):
                out.extend(self.eval_any(term.second, sort, st1, store1))
            return out
        if isinstance(term, NewInt):
            out = []
            for st1, store1, value in self.eval_any(term.init, "int", st, store):
                sym = self.fresh(term.name, self.local_domain, "internal")
                st2 = self.edge(
                    st1,
                    guard=[Atom(LinExpr.symbol(sym.name), "=", value)],
                    fresh=sym)
                inner = dict(store1)
                inner[term.name] = (sym.name, self.local_domain)
                for st3, store3, v in self.eval_any(term.body, sort, st2, inner):
                    popped = dict(store3)
                    popped.pop(term.name, None)
                    out.append((st3, popped, v))
            return out
        if isinstance(term, If):
            true_paths, false_paths = self.eval_bool_branch(term.cond, st, store)
            out = []
            for st1, store1 in true_paths:
                out.extend(self.eval_any(term.then, sort, st1, store1))
            for st1, store1 in false_paths:
                out.extend(self.eval_any(term.els, sort, st1, store1))
            return out

        if sort == "com":
            return self._eval_com(term, st, store)
        if sort == "int":
            return self._eval_int(term, st, store)
        return self._eval_bool_value(term, st, store)

    def _eval_com(self, term: Term, st: int, store: _Store) -> list[_Valued]:
        if isinstance(term, Skip):
            return [(st, store, None)]
        if isinstance(term, Var):
            tag = (term.name,)
            st1 = self.edge(st, move=Move(QUESTION, "run", tag))
            st2 = self.edge(st1, move=Move(ANSWER, "done", tag))
            return [(st2, store, None)]
        if isinstance(term, Assign):
            return [
                (st2, store2, None)
                for st2, store2 in self._assign(term.name, term.expr, st, store)
            ]
        if isinstance(term, While):
            return self._eval_while(term, st, store)
        if isinstance(term, Apply):
            return self._apply(term, st, store)
        raise InternalInvariantError(f"ill-typed command node {term!r}")

    def _eval_int(self, term: Term, st: int, store: _Store) -> list[_Valued]:
        if isinstance(term, IntLit):
            return [(st, store, LinExpr.constant(term.value))]
        if isinstance(term, Deref):
            if term.name in store:
                sym, _ = store[term.name]
                return [(st, store, LinExpr.symbol(sym))]
            return [self._read_cell(term.name, st, store)]
        if isinstance(term, Var):
            ty = self.ctx.lookup(term.name)
            assert isinstance(ty, BaseType) and ty.kind == "expint"
            tag = (term.name,)
            st1 = self.edge(st, move=Move(QUESTION, "q", tag))
            sym = self.fresh(term.name, ty.k or DEFAULT_INT_DOMAIN, "input")
            st2 = self.edge(st1,
                            move=Move(ANSWER, "val", tag,
                                      value=LinExpr.symbol(sym.name), sort="int"),
                            fresh=sym)
            return [(st2, store, LinExpr.symbol(sym.name))]
        if isinstance(term, Arith):
            out: list[_Valued] = []
            for st1, store1, left in self.eval_any(term.left, "int", st, store):
                for st2, store2, right in self.eval_any(term.right, "int", st1, store1):
                    assert left is not None and right is not None
                    if term.op == "+":
                        value = left + right
                    elif term.op == "-":
                        value = left - right
                    else:
                        value = left.multiply(right)
                    out.append((st2, store2, value))
            return out
        if isinstance(term, Apply):
            return self._apply(term, st, store)
        raise InternalInvariantError(f"ill-typed integer node {term!r}")

    def _eval_bool_value(self, term: Term, st: int, store: _Store) -> list[_Valued]:
        if isinstance(term, Var):
            return [self._read_bool_ident(term.name, st, store)]
        if isinstance(term, Apply):
            return self._apply(term, st, store)
        true_paths, false_paths = self.eval_bool_branch(term, st, store)
        return (
            [(s, d, LinExpr.constant(1)) for s, d in true_paths]
            + [(s, d, LinExpr.constant(0)) for s, d in false_paths]
        )

    def eval_bool_branch(self, term: Term, st: int,
                         store: _Store) -> tuple[list[_Path], list[_Path]]:
        """Evaluate a boolean term, splitting into guarded true/false paths.

        The alternatives returned are pairwise disjoint: at each comparison
        both the atom and its negation are emitted as silent guarded edges.
        Both operands of && and || are always evaluated (no short-circuit).
        """
        if isinstance(term, BoolLit):
            return ([(st, store)], []) if term.value else ([], [(st, store)])
        if isinstance(term, Cmp):
            true_paths: list[_Path] = []
            false_paths: list[_Path] = []
            for st1, store1, left in self.eval_any(term.left, "int", st, store):
                for st2, store2, right in self.eval_any(term.right, "int",
                                                        st1, store1):
                    assert left is not None and right is not None
                    atom = Atom(left, term.op, right)
                    st_t = self.edge(st2, guard=[atom])
                    st_f = self.edge(st2, guard=[atom.negated()])
                    true_paths.append((st_t, store2))
                    false_paths.append((st_f, store2))
            return true_paths, false_paths
        if isinstance(term, Not):
            t, f = self.eval_bool_branch(term.expr, st, store)
            return f, t
        if isinstance(term, BoolOp):
            lt, lf = self.eval_bool_branch(term.left, st, store)
            true_paths, false_paths = [], []
            for st1, store1 in lt:
                rt, rf = self.eval_bool_branch(term.right, st1, store1)
                if term.op == "&&":
                    true_paths.extend(rt)
                    false_paths.extend(rf)
                else:
                    true_paths.extend(rt)
                    true_paths.extend(rf)
            for st1, store1 in lf:
                rt, rf = self.eval_bool_branch(term.right, st1, store1)
                if term.op == "&&":
                    false_paths.extend(rt)
                    false_paths.extend(rf)
                else:
                    true_paths.extend(rt)
                    false_paths.extend(rf)
            return true_paths, false_paths
        # Remaining boolean terms (reads, applications, if/seq/new wrappers)
        # produce a value first and then branch on it.
        true_paths, false_paths = [], []
        for st1, store1, value in self.eval_any(term, "bool", st, store):
            assert value is not None
            if value.is_constant:
                (true_paths if value.const else false_paths).append((st1, store1))
            else:
                st_t = self.edge(st1, guard=[Atom(value, "=", LinExpr.constant(1))])
                st_f = self.edge(st1, guard=[Atom(value, "=", LinExpr.constant(0))])
                true_paths.append((st_t, store1))
                false_paths.append((st_f, store1))
        return true_paths, false_paths

    # -- cells ----------------------------------------------------------------

    def _assign(self, name: str, expr: Term, st: int,
                store: _Store) -> list[_Path]:
        out: list[_Path] = []
        for st1, store1, value in self.eval_any(expr, "int", st, store):
            assert value is not None
            if name in store1:
                _, size = store1[name]
                sym = self.fresh(name, size, "internal")
                st2 = self.edge(st1,
                                guard=[Atom(LinExpr.symbol(sym.name), "=", value)],
                                fresh=sym)
                updated = dict(store1)
                updated[name] = (sym.name, size)
                out.append((st2, updated))
            else:
                # Free variable cell: the write is an observable interaction.
                tag = (name,)
                st2 = self.edge(st1, move=Move(QUESTION, "write", tag,
                                               value=value, sort="int"))
                st3 = self.edge(st2, move=Move(ANSWER, "ok", tag))
                out.append((st3, store1))
        return out

    def _read_cell(self, name: str, st: int, store: _Store) -> _Valued:
        ty = self.ctx.lookup(name)
        assert isinstance(ty, VarIntType)
        tag = (name,)
        st1 = self.edge(st, move=Move(QUESTION, "read", tag))
        sym = self.fresh(name, ty.k, "input")
        st2 = self.edge(st1,
                        move=Move(ANSWER, "val", tag,
                                  value=LinExpr.symbol(sym.name), sort="int"),
                        fresh=sym)
        return st2, store, LinExpr.symbol(sym.name)

    def _read_bool_ident(self, name: str, st: int, store: _Store) -> _Valued:
        tag = (name,)
        st1 = self.edge(st, move=Move(QUESTION, "q", tag))
        sym = self.fresh(name, 2, "input")
        st2 = self.edge(st1,
                        move=Move(ANSWER, "val", tag,
                                  value=LinExpr.symbol(sym.name), sort="bool"),
                        fresh=sym)
        return st2, store, LinExpr.symbol(sym.name)

    # -- bounded while ----------------------------------------------------------

    def _eval_while(self, term: While, st: int, store: _Store) -> list[_Valued]:
        depth = self.bounds.loop_depth(self.loop_ids.get(id(term), 0))
        exits: list[_Valued] = []

        def attempt(st_a: int, store_a: _Store, completed: int) -> None:
            true_paths, false_paths = self.eval_bool_branch(term.cond, st_a, store_a)
            for st_f, store_f in false_paths:
                exits.append((st_f, store_f, None))
            for st_t, store_t in true_paths:
                if completed == depth:
                    self.edge(st_t, grey=True)
                else:
                    for st_b, store_b, _ in self.eval_any(term.body, "com",
                                                          st_t, store_t):
                        attempt(st_b, store_b, completed + 1)

        attempt(st, store, 0)
        return exits

    # -- undefined functions -----------------------------------------------------

    def _apply(self, term: Apply, st: int, store: _Store) -> list[_Valued]:
        ty = self.ctx.lookup(term.name)
        assert isinstance(ty, FunType)

        def eval_arg(i: int, st_a: int, store_a: _Store) -> list[_Valued]:
            sort = {"com": "com", "expint": "int", "expbool": "bool"}[ty.args[i].kind]
            return self.eval_any(term.args[i], sort, st_a, store_a)

        return self.fn_choice_tree(term.name, ty, st, store, eval_arg)

    def fn_choice_tree(
        self, fname: str, sig: FunType, st: int, store: _Store,
        eval_arg: Callable[[int, int, _Store], list[_Valued]],
    ) -> list[_Valued]:
        """Question to the function, then every interleaving of at most
        ``bound - 1`` argument calls, then the result answer."""
        bound = self.bounds.fn_bound(fname)
        tag = (fname,)
        result_kind = sig.result.kind
        open_payload = "run" if result_kind == "com" else "q"
        st1 = self.edge(st, move=Move(QUESTION, open_payload, tag),
                        event=FnEvent("open", fname, len(sig.args), bound))
        results: list[_Valued] = []

        def choice(st_c: int, store_c: _Store, calls: int) -> None:
            if result_kind == "com":
                st_r = self.edge(st_c, move=Move(ANSWER, "done", tag),
                                 event=FnEvent("close", fname))
                results.append((st_r, store_c, None))
            else:
                size = 2 if result_kind == "expbool" else (sig.result.k or 0)
                sym = self.fresh(fname, size, "input")
                sort = "bool" if result_kind == "expbool" else "int"
                st_r = self.edge(
                    st_c,
                    move=Move(ANSWER, "val", tag,
                              value=LinExpr.symbol(sym.name), sort=sort),
                    fresh=sym, event=FnEvent("close", fname))
                results.append((st_r, store_c, LinExpr.symbol(sym.name)))
            if calls >= bound - 1:
                return
            for i, arg_ty in enumerate(sig.args):
                arg_tag = (fname, str(i + 1))
                payload = "run" if arg_ty.kind == "com" else "q"
                st_o = self.edge(st_c, move=Move(QUESTION, payload, arg_tag),
                                 event=FnEvent("choice", fname, arg_index=i))
                for st_v, store_v, value in eval_arg(i, st_o, store_c):
                    if arg_ty.kind == "com":
                        close = Move(ANSWER, "done", arg_tag)
                    else:
                        sort = "bool" if arg_ty.kind == "expbool" else "int"
                        close = Move(ANSWER, "val", arg_tag, value=value, sort=sort)
                    st_d = self.edge(st_v, move=close)
                    choice(st_d, store_v, calls + 1)

        choice(st1, store, 0)
        return results


def _final_flags(model: SymbolicModel) -> tuple[frozenset[int], frozenset[int]]:
    """Split final states into accepting and post-abort (failure) ones."""
    accepting: set[int] = set()
    failure: set[int] = set()

    def visit(state: int, abort_seen: bool) -> None:
        outs = model.out_edges(state)
        if not outs:
            if state in model.grey_states:
                return
            (failure if abort_seen else accepting).add(state)
            return
        for e in outs:
            fired = abort_seen or (e.move is not None and "abort" in e.move.tag)
            visit(e.dst, fired)

    visit(model.initial, False)
    return frozenset(accepting), frozenset(failure)


def build_model(typed: TypedTerm, bounds: Bounds = Bounds(),
                local_domain: int = DEFAULT_INT_DOMAIN) -> SymbolicModel:
    """Compile a typed open term into its bounded symbolic game model."""
    builder = _Builder(typed.context, bounds, local_domain)
    builder.number_loops(typed.term)
    start = 0
    finals: list[int] = []
    if typed.type.kind == "com":
        st1 = builder.edge(start, move=Move(QUESTION, "run"))
        for st_e, _, _ in builder.eval_any(typed.term, "com", st1, {}):
            finals.append(builder.edge(st_e, move=Move(ANSWER, "done")))
    else:
        sort = "int" if typed.type.kind == "expint" else "bool"
        st1 = builder.edge(start, move=Move(QUESTION, "q"))
        for st_e, _, value in builder.eval_any(typed.term, sort, st1, {}):
            finals.append(builder.edge(
                st_e, move=Move(ANSWER, "val", value=value, sort=sort)))

    model = SymbolicModel(
        initial=start,
        states=builder.states,
        edges=builder.edges,
        accepting=frozenset(),
        failure=frozenset(),
        grey_states=frozenset(builder.grey_states),
    ).finalize()
    accepting, failure = _final_flags(model)
    model.accepting = accepting
    model.failure = failure
    return model


def undefined_function_strategy(sig: FunType, fn_call_bound: int,
                                name: str = "f") -> SymbolicModel:
    """Standalone model of a bare undefined function under a call bound.

    The function's arguments are answered by the outer context: calling
    argument ``i`` asks the environment (tag ``i``) and binds a fresh symbol,
    which is then passed back to the function.  With ``n`` arguments and
    bound ``d`` the model has exactly ``sum(n**k for k in range(d))`` maximal
    plays.
    """
    bounds = Bounds(fn_call_bound=fn_call_bound)
    builder = _Builder(Context.of((name, sig)), bounds, DEFAULT_INT_DOMAIN)

    def outer_arg(i: int, st: int, store: _Store) -> list[_Valued]:
        arg_ty = sig.args[i]
        tag = (str(i + 1),)
        if arg_ty.kind == "com":
            st1 = builder.edge(st, move=Move(QUESTION, "run", tag))
            st2 = builder.edge(st1, move=Move(ANSWER, "done", tag))
            return [(st2, store, None)]
        st1 = builder.edge(st, move=Move(QUESTION, "q", tag))
        size = 2 if arg_ty.kind == "expbool" else (arg_ty.k or 0)
        sym = builder.fresh("z", size, "input")
        sort = "bool" if arg_ty.kind == "expbool" else "int"
        st2 = builder.edge(st1,
                           move=Move(ANSWER, "val", tag,
                                     value=LinExpr.symbol(sym.name), sort=sort),
                           fresh=sym)
        return [(st2, store, LinExpr.symbol(sym.name))]

    start = 0
    finals: list[int] = []
    if sig.result.kind == "com":
        st1 = builder.edge(start, move=Move(QUESTION, "run"))
        for st_e, _, _ in builder.fn_choice_tree(name, sig, st1, {}, outer_arg):
            finals.append(builder.edge(st_e, move=Move(ANSWER, "done")))
    else:
        sort = "int" if sig.result.kind == "expint" else "bool"
        st1 = builder.edge(start, move=Move(QUESTION, "q"))
        for st_e, _, value in builder.fn_choice_tree(name, sig, st1, {}, outer_arg):
            finals.append(builder.edge(
                st_e, move=Move(ANSWER, "val", value=value, sort=sort)))

    model = SymbolicModel(
        initial=start,
        states=builder.states,
        edges=builder.edges,
        accepting=frozenset(),
        failure=frozenset(),
        grey_states=frozenset(builder.grey_states),
    ).finalize()
    accepting, failure = _final_flags(model)
    model.accepting = accepting
    model.failure = failure
    return model


def bounded_while_strategy(guard: Term, body: Term, while_depth: int,
                           ctx: Context = Context(),
                           local_domain: int = DEFAULT_INT_DOMAIN) -> SymbolicModel:
    """Standalone model of ``while guard do body`` under an iteration bound.

    The loop may complete ``while_depth`` iterations; a grey edge truncates
    any play whose guard comes up true once more after that.
    """
    from .lang import typecheck

    term = While(guard, body)
    typed = typecheck(term, ctx, local_domain=local_domain)
    return build_model(typed, Bounds(while_depth=while_depth),
                       local_domain=local_domain)
