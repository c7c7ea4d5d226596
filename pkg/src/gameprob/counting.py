"""Exact lattice-point counting for normalized systems over bounded boxes.

The counter is dimension-recursive: determined variables (unit-coefficient
equalities, e.g. assignment-chain symbols) are eliminated by substitution
first, then one variable at a time is enumerated over the interval obtained
by propagating all rows against the other variables' current intervals.
Small boxes fall back to plain enumeration.  An independent brute-force
counter over the full box is provided for verification.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .constraints import Constraint, LinearSystem, _symbol_sort_key, normalize
from .errors import ResourceLimitError

BRUTE_FORCE_CAP = 10**7
_ENUMERATION_CUTOFF = 4096

Row = tuple[tuple[int, ...], int]


@dataclass(frozen=True)
class HMatrix:
    """H-representation of ``A x <= B``: header ``m n+1``, rows ``b -a_1 .. -a_n``."""

    m: int
    n: int
    rows: tuple[tuple[int, ...], ...]  # each row: (b, -a_1, ..., -a_n)

    def render(self) -> str:
        lines = [f"{self.m} {self.n + 1}"]
        lines.extend(" ".join(str(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CountResult:
    count: int
    systems_counted: int
    method: str  # "enumeration" | "projection"


def to_hmatrix(system: LinearSystem) -> HMatrix:
    rows = tuple(
        (bound,) + tuple(-c for c in coeffs)
        for coeffs, bound in system.rows
    )
    return HMatrix(m=len(rows), n=len(system.vars), rows=rows)


def export_latte(system: LinearSystem) -> str:
    """Render a normalized system in LattE's H-representation input format."""
    return to_hmatrix(system).render()


def count(condition: Constraint, domains: Mapping[str, int],
          var_order: Sequence[str] | None = None) -> CountResult:
    """Number of integer points in the domain box satisfying the condition."""
    systems = normalize(condition, domains, var_order)
    total = 0
    used_projection = False
    for system in systems:
        n, projected = _count_system(system)
        total += n
        used_projection = used_projection or projected
    return CountResult(
        count=total,
        systems_counted=len(systems),
        method="projection" if used_projection else "enumeration",
    )


def count_system(system: LinearSystem) -> int:
    return _count_system(system)[0]


def count_bruteforce(condition: Constraint, domains: Mapping[str, int],
                     cap: int = BRUTE_FORCE_CAP) -> int:
    """Count by exhaustive enumeration of the whole box (testing oracle)."""
    if condition.unsat:
        return 0
    names = sorted(domains, key=_symbol_sort_key)
    missing = condition.symbols() - set(names)
    if missing:
        raise ValueError(f"no domain for symbols: {', '.join(sorted(missing))}")
    space = math.prod(domains[v] for v in names)
    if space > cap:
        raise ResourceLimitError(
            f"brute-force space {space} exceeds cap {cap}")
    total = 0
    for point in itertools.product(*(range(domains[v]) for v in names)):
        assignment = dict(zip(names, point))
        if condition.holds(assignment):
            total += 1
    return total


def _count_system(system: LinearSystem) -> tuple[int, bool]:
    sizes = list(system.sizes)
    rows = [(list(coeffs), bound) for coeffs, bound in system.rows]
    if math.prod(sizes, start=1) <= _ENUMERATION_CUTOFF:
        return _enumerate(sizes, rows), False

    reduced = _eliminate_equalities(sizes, rows)
    if reduced is None:
        return 0, True
    sizes, rows = reduced
    intervals = [(0, k - 1) for k in sizes]
    return _recurse(rows, intervals), True


def _enumerate(sizes: list[int], rows: list[tuple[list[int], int]]) -> int:
    total = 0
    for point in itertools.product(*(range(k) for k in sizes)):
        if all(sum(c * v for c, v in zip(coeffs, point)) <= bound
               for coeffs, bound in rows):
            total += 1
    return total


def _eliminate_equalities(
    sizes: list[int], rows: list[tuple[list[int], int]]
) -> tuple[list[int], list[tuple[list[int], int]]] | None:
    """Substitute away variables determined by unit-coefficient equalities.

    An equality shows up as the row pair (a, b) and (-a, -b).  Eliminating a
    variable re-expresses it as an affine function of the rest, folds that
    into every other row, and re-adds the variable's box as rows over the
    substitution expression.  Returns None when a constant row is violated.
    """
    while True:
        pair = _find_equality_pair(rows)
        if pair is None:
            return sizes, rows
        i, j = pair
        eq_coeffs, eq_bound = rows[i]
        target = next(
            (t for t, c in enumerate(eq_coeffs) if abs(c) == 1), None)
        if target is None:
            # No unit coefficient: leave this equality to the recursion.
            return sizes, rows
        a_t = eq_coeffs[target]
        # x_t = a_t * (eq_bound - sum_{s != t} eq_coeffs[s] * x_s)
        sub_coeffs = [-a_t * c for s, c in enumerate(eq_coeffs) if s != target]
        sub_const = a_t * eq_bound

        remaining = [r for idx, r in enumerate(rows) if idx not in (i, j)]
        new_rows: list[tuple[list[int], int]] = []
        for coeffs, bound in remaining:
            c_t = coeffs[target]
            rest = [c for s, c in enumerate(coeffs) if s != target]
            folded = [r + c_t * s for r, s in zip(rest, sub_coeffs)]
            new_rows.append((folded, bound - c_t * sub_const))
        # Box of the eliminated variable: 0 <= sub <= k-1.
        k = sizes[target]
        new_rows.append(([-c for c in sub_coeffs], sub_const))
        new_rows.append((list(sub_coeffs), k - 1 - sub_const))

        checked: list[tuple[list[int], int]] = []
        for coeffs, bound in new_rows:
            if any(coeffs):
                checked.append((coeffs, bound))
            elif bound < 0:
                return None
        sizes = [k for s, k in enumerate(sizes) if s != target]
        rows = checked
        if not sizes:
            return sizes, rows


def _find_equality_pair(rows: list[tuple[list[int], int]]) -> tuple[int, int] | None:
    seen: dict[tuple[tuple[int, ...], int], int] = {}
    for idx, (coeffs, bound) in enumerate(rows):
        key = (tuple(coeffs), bound)
        neg = (tuple(-c for c in coeffs), -bound)
        if neg in seen:
            return seen[neg], idx
        if key not in seen:
            seen[key] = idx
    return None


def _propagate(rows: list[tuple[list[int], int]],
               intervals: list[tuple[int, int]]) -> list[tuple[int, int]] | None:
    """Tighten per-variable intervals against all rows until stable."""
    intervals = list(intervals)
    n = len(intervals)
    for _ in range(n + 1):
        changed = False
        for coeffs, bound in rows:
            for t in range(n):
                a_t = coeffs[t]
                if a_t == 0:
                    continue
                others_min = 0
                for s in range(n):
                    if s == t or coeffs[s] == 0:
                        continue
                    lo, hi = intervals[s]
                    others_min += coeffs[s] * (lo if coeffs[s] > 0 else hi)
                slack = bound - others_min
                lo, hi = intervals[t]
                if a_t > 0:
                    new_hi = min(hi, slack // a_t)
                    if new_hi < lo:
                        return None
                    if new_hi != hi:
                        intervals[t] = (lo, new_hi)
                        changed = True
                else:
                    new_lo = max(lo, -(slack // (-a_t)))
                    if new_lo > hi:
                        return None
                    if new_lo != lo:
                        intervals[t] = (new_lo, hi)
                        changed = True
        if not changed:
            break
    return intervals


def _recurse(rows: list[tuple[list[int], int]],
             intervals: list[tuple[int, int]]) -> int:
    tightened = _propagate(rows, intervals)
    if tightened is None:
        return 0
    intervals = tightened
    if not rows:
        return math.prod(hi - lo + 1 for lo, hi in intervals)
    if not intervals:
        return 1 if all(b >= 0 for _, b in rows) else 0

    # Most-constrained variable first.
    target = min(range(len(intervals)),
                 key=lambda t: intervals[t][1] - intervals[t][0])
    lo, hi = intervals[target]
    rest_intervals = [iv for t, iv in enumerate(intervals) if t != target]
    total = 0
    for value in range(lo, hi + 1):
        sub_rows: list[tuple[list[int], int]] = []
        feasible = True
        for coeffs, bound in rows:
            rest = [c for t, c in enumerate(coeffs) if t != target]
            new_bound = bound - coeffs[target] * value
            if any(rest):
                sub_rows.append((rest, new_bound))
            elif new_bound < 0:
                feasible = False
                break
        if feasible:
            total += _recurse(sub_rows, rest_intervals)
    return total
