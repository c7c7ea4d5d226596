"""Linear integer arithmetic play conditions and their normal form.

A play condition is a conjunction of atoms ``lhs <op> rhs`` where both sides
are integer-affine expressions over symbols.  For counting, a condition is
normalized into a disjunction of closed systems ``A x <= B`` over the box
``0 <= x_i < k_i`` given by each symbol's domain: order flips turn ``>=``/``>``
into ``<=`` rows, strict ``<`` decrements the constant, equalities become row
pairs, and each ``!=`` splits the system in two disjoint halves.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import UnsupportedConstraintError

CMP_OPS = ("<", "<=", ">", ">=", "=", "!=")

_NEGATED = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "=": "!=", "!=": "="}

_SYM_KEY = re.compile(r"^(.*?)(\d*)$")


def _symbol_sort_key(name: str) -> tuple[str, int]:
    m = _SYM_KEY.match(name)
    assert m is not None
    return m.group(1), int(m.group(2) or 0)


@dataclass(frozen=True)
class LinExpr:
    """Integer-affine expression: sum of coefficient*symbol terms plus a constant."""

    terms: tuple[tuple[str, int], ...]
    const: int = 0

    @staticmethod
    def constant(value: int) -> "LinExpr":
        return LinExpr((), value)

    @staticmethod
    def symbol(name: str) -> "LinExpr":
        return LinExpr(((name, 1),), 0)

    @staticmethod
    def of(terms: Mapping[str, int], const: int = 0) -> "LinExpr":
        items = tuple(sorted(((s, c) for s, c in terms.items() if c != 0),
                             key=lambda t: _symbol_sort_key(t[0])))
        return LinExpr(items, const)

    def coeffs(self) -> dict[str, int]:
        return dict(self.terms)

    @property
    def is_constant(self) -> bool:
        return not self.terms

    def __add__(self, other: "LinExpr") -> "LinExpr":
        merged = self.coeffs()
        for s, c in other.terms:
            merged[s] = merged.get(s, 0) + c
        return LinExpr.of(merged, self.const + other.const)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + other.scale(-1)

    def scale(self, factor: int) -> "LinExpr":
        return LinExpr.of({s: c * factor for s, c in self.terms}, self.const * factor)

    def multiply(self, other: "LinExpr") -> "LinExpr":
        if self.is_constant:
            return other.scale(self.const)
        if other.is_constant:
            return self.scale(other.const)
        raise UnsupportedConstraintError(
            f"non-linear product of symbolic expressions: ({self}) * ({other})")

    def substitute(self, name: str, value: "LinExpr") -> "LinExpr":
        coeff = dict(self.terms).get(name)
        if coeff is None:
            return self
        rest = LinExpr.of({s: c for s, c in self.terms if s != name}, self.const)
        return rest + value.scale(coeff)

    def evaluate(self, assignment: Mapping[str, int]) -> int:
        return self.const + sum(c * assignment[s] for s, c in self.terms)

    def symbols(self) -> set[str]:
        return {s for s, _ in self.terms}

    def __str__(self) -> str:
        if not self.terms:
            return str(self.const)
        parts: list[str] = []
        for s, c in self.terms:
            if not parts:
                if c == 1:
                    parts.append(s)
                elif c == -1:
                    parts.append(f"-{s}")
                else:
                    parts.append(f"{c}*{s}")
            else:
                sign = "+" if c > 0 else "-"
                mag = abs(c)
                parts.append(f" {sign} {s}" if mag == 1 else f" {sign} {mag}*{s}")
        if self.const > 0:
            parts.append(f" + {self.const}")
        elif self.const < 0:
            parts.append(f" - {-self.const}")
        return "".join(parts)


@dataclass(frozen=True)
class Atom:
    """A single comparison between two affine expressions."""

    lhs: LinExpr
    op: str
    rhs: LinExpr

    def __post_init__(self) -> None:
        if self.op not in CMP_OPS:
            raise ValueError(f"unknown comparison operator {self.op!r}")

    def negated(self) -> "Atom":
        return Atom(self.lhs, _NEGATED[self.op], self.rhs)

    def difference(self) -> LinExpr:
        """lhs - rhs, so the atom reads ``difference() <op> 0``."""
        return self.lhs - self.rhs

    def holds(self, assignment: Mapping[str, int]) -> bool:
        l = self.lhs.evaluate(assignment)
        r = self.rhs.evaluate(assignment)
        return {
            "<": l < r, "<=": l <= r, ">": l > r,
            ">=": l >= r, "=": l == r, "!=": l != r,
        }[self.op]

    def symbols(self) -> set[str]:
        return self.lhs.symbols() | self.rhs.symbols()

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class Constraint:
    """Conjunction of atoms; ``unsat`` marks the syntactically false constraint."""

    atoms: tuple[Atom, ...] = ()
    unsat: bool = False

    @staticmethod
    def true() -> "Constraint":
        return Constraint(())

    @staticmethod
    def false() -> "Constraint":
        return Constraint((), unsat=True)

    @staticmethod
    def of(atoms: Iterable[Atom]) -> "Constraint":
        return Constraint(tuple(atoms))

    def conjoin(self, atoms: Iterable[Atom]) -> "Constraint":
        if self.unsat:
            return self
        return Constraint(self.atoms + tuple(atoms))

    def holds(self, assignment: Mapping[str, int]) -> bool:
        return not self.unsat and all(a.holds(assignment) for a in self.atoms)

    def symbols(self) -> set[str]:
        out: set[str] = set()
        for a in self.atoms:
            out |= a.symbols()
        return out

    def __str__(self) -> str:
        if self.unsat:
            return "false"
        if not self.atoms:
            return "true"
        return " && ".join(str(a) for a in self.atoms)


@dataclass(frozen=True)
class LinearSystem:
    """Closed system ``rows . x <= bounds`` over an ordered symbol list.

    Rows always start with the two box rows per variable (``x <= k-1`` and
    ``-x <= 0``), followed by the rows derived from the condition's atoms.
    Equalities are stored as row pairs.
    """

    vars: tuple[str, ...]
    sizes: tuple[int, ...]
    rows: tuple[tuple[tuple[int, ...], int], ...]

    def admits(self, point: Sequence[int]) -> bool:
        return all(
            sum(c * v for c, v in zip(coeffs, point)) <= bound
            for coeffs, bound in self.rows
        )


def _atom_rows(atom: Atom, index: Mapping[str, int], nvars: int,
               op_override: str | None = None) -> list[tuple[tuple[int, ...], int]] | None:
    """Rows for one non-disequality atom; None when the atom is constant-false."""
    op = op_override or atom.op
    diff = atom.difference()
    coeffs = [0] * nvars
    for s, c in diff.terms:
        coeffs[index[s]] += c
    rows: list[tuple[tuple[int, ...], int]] = []

    def emit(cs: list[int], b: int) -> bool:
        if any(cs):
            rows.append((tuple(cs), b))
            return True
        return 0 <= b  # constant row: drop if trivially true, reject system if false

    neg = [-c for c in coeffs]
    if op == "<=":
        ok = emit(coeffs, -diff.const)
    elif op == "<":
        ok = emit(coeffs, -diff.const - 1)
    elif op == ">=":
        ok = emit(neg, diff.const)
    elif op == ">":
        ok = emit(neg, diff.const - 1)
    elif op == "=":
        ok = emit(coeffs, -diff.const) and emit(neg, diff.const)
    else:
        raise AssertionError(f"unexpected operator {op}")
    return rows if ok else None


def normalize(condition: Constraint, domains: Mapping[str, int],
              var_order: Sequence[str] | None = None) -> list[LinearSystem]:
    """Convert a condition into disjoint closed systems over the domain box.

    Every symbol of the condition must have a domain entry.  Each ``!=`` atom
    doubles the number of systems (``lhs <= rhs-1`` vs ``lhs >= rhs+1``), so
    the result is a disjoint cover of the condition's solutions within the box.
    """
    if var_order is None:
        var_order = sorted(domains, key=_symbol_sort_key)
    missing = condition.symbols() - set(var_order)
    if missing:
        raise UnsupportedConstraintError(
            f"symbols without a declared domain: {', '.join(sorted(missing))}")
    if condition.unsat:
        return []

    vars_ = tuple(var_order)
    sizes = tuple(domains[v] for v in vars_)
    index = {v: i for i, v in enumerate(vars_)}
    nvars = len(vars_)

    box: list[tuple[tuple[int, ...], int]] = []
    for i, k in enumerate(sizes):
        unit = tuple(1 if j == i else 0 for j in range(nvars))
        nunit = tuple(-1 if j == i else 0 for j in range(nvars))
        box.append((unit, k - 1))
        box.append((nunit, 0))

    alternatives: list[list[tuple[tuple[int, ...], int]] | None] = [list(box)]
    for atom in condition.atoms:
        if atom.op == "!=":
            split: list[list[tuple[tuple[int, ...], int]] | None] = []
            for alt in alternatives:
                for op in ("<", ">"):
                    rows = _atom_rows(atom, index, nvars, op_override=op)
                    split.append(None if (alt is None or rows is None) else alt + rows)
            alternatives = split
        else:
            rows = _atom_rows(atom, index, nvars)
            alternatives = [
                None if (alt is None or rows is None) else alt + rows
                for alt in alternatives
            ]

    return [
        LinearSystem(vars_, sizes, tuple(alt))
        for alt in alternatives
        if alt is not None
    ]


def substitute_and_simplify(condition: Constraint) -> Constraint:
    """Propagate ``symbol = constant`` facts through the conjunction.

    Keeps the defining equalities in place so the symbol set is unchanged;
    atoms that become constant-true are dropped, and a constant-false atom
    collapses the whole condition to false.  Solution sets are preserved
    exactly.
    """
    if condition.unsat:
        return condition
    atoms = list(condition.atoms)
    known: dict[str, int] = {}
    changed = True
    while changed:
        changed = False
        for atom in atoms:
            if atom.op != "=":
                continue
            diff = atom.difference()
            live = [(s, c) for s, c in diff.terms if s not in known]
            fixed = diff.const + sum(c * known[s] for s, c in diff.terms if s in known)
            if len(live) == 1 and abs(live[0][1]) == 1:
                name, coeff = live[0]
                value = -fixed * coeff  # coeff in {1,-1}: name = -fixed/coeff
                if name not in known:
                    known[name] = value
                    changed = True

    if not known:
        return condition

    # Canonical ``X = c`` definition per forced symbol, then every other atom
    # rewritten under those values; rewritten atoms that become constant are
    # dropped (if true) or sink the whole condition (if false).
    simplified: list[Atom] = [
        Atom(LinExpr.symbol(name), "=", LinExpr.constant(known[name]))
        for name in sorted(known, key=_symbol_sort_key)
    ]
    for atom in atoms:
        rewritten_lhs = atom.lhs
        rewritten_rhs = atom.rhs
        for name, value in known.items():
            rewritten_lhs = rewritten_lhs.substitute(name, LinExpr.constant(value))
            rewritten_rhs = rewritten_rhs.substitute(name, LinExpr.constant(value))
        new_atom = Atom(rewritten_lhs, atom.op, rewritten_rhs)
        if new_atom.difference().is_constant:
            if new_atom.holds({}):
                continue
            return Constraint.false()
        simplified.append(new_atom)
    return Constraint.of(simplified)
