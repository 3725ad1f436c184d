"""Closed-form bounds on expected and minimal dispersion.

Natural logarithms unless a name says ``log2``. Quantities that can
overflow a double (digital-net and sparse-grid sizes, for instance) are
computed as base-10 logarithms and only exponentiated when representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

E = math.e
# exponentiate a log10 value only below this magnitude
LOG10_LIMIT = 300.0


def thm1_bounds(n: int, d: int) -> tuple[float, float]:
    """Lower and upper bound on E disp(X_1..X_n) for n > d uniform points."""
    if d < 1 or n <= d:
        raise ValueError(f"requires n > d >= 1, got n={n}, d={d}")
    lower = max(math.log(n) / (9 * n), d / (2 * E * n))
    upper = (9 * d / n) * math.log(E * n / d)
    return lower, upper


def cor1_bounds(eps: float, d: int) -> tuple[float, int]:
    """Bounds on N(eps, d), the fewest uniform points with E disp <= eps."""
    if not (0.0 < eps < 1 / (9 * E)):
        raise ValueError(f"requires 0 < eps < 1/(9e) ~ {1 / (9 * E):.6f}, got {eps}")
    if d < 1:
        raise ValueError("d must be positive")
    x = 1 / (9 * eps)
    lower = max(x * math.log(x), d / (2 * E * eps))
    upper = math.ceil(9 * (1 + 1 / E) * (d / eps) * math.log(9 * (E + 1) / eps))
    return lower, upper


def harmonic(l: int) -> float:
    if l < 1:
        raise ValueError("l must be positive")
    return math.fsum(1.0 / j for j in range(1, l + 1))


def cover_cardinality_bound(delta: float, d: int, periodic: bool = False) -> float:
    """Natural log of a known delta-cover size for (periodic) boxes.

    Plain boxes: ``(6e/delta)^(2d)``; periodic boxes: ``(4d/delta)^(2d)``.
    """
    if not (0.0 < delta <= 1.0):
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if d < 1:
        raise ValueError("d must be positive")
    if periodic:
        return 2 * d * math.log(4 * d / delta)
    return 2 * d * math.log(6 * E / delta)


def expected_disp_cover_bound(n: int, log_cover_size: float, delta: float) -> float:
    """``delta + log|cover|/n + 1/(n+1)``, valid once n >= log|cover|."""
    if n < log_cover_size:
        raise ValueError(f"requires n >= log|cover| = {log_cover_size:.4f}, got n={n}")
    if not (0.0 < delta <= 1.0):
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    return delta + log_cover_size / n + 1 / (n + 1)


def cover_chain_upper(n: int, d: int) -> float:
    """The cover bound at ``delta = 6d/n`` with the plain cover size."""
    delta = 6 * d / n
    return expected_disp_cover_bound(n, cover_cardinality_bound(delta, d), delta)


def periodic_expected_bound(n: int, d: int) -> float:
    """``(5d/n) log(2n)``, from the periodic cover at ``delta = 2d/n``."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    return (5 * d / n) * math.log(2 * n)


def periodic_bound_valid(n: int, d: int) -> bool:
    """Whether the cover bound precondition holds at ``delta = 2d/n``."""
    delta = 2 * d / n
    if delta > 1.0:
        return False
    return n >= cover_cardinality_bound(delta, d, periodic=True)


def reduction_factor(n: int, l: int) -> float:
    """Factor relating E disp of n points to E disp of l points (pigeonhole)."""
    if n < 1 or l < 1:
        raise ValueError("n and l must be positive")
    return (l + 1) / (n + l + 1)


def anchored_lower_bound(l: int, d: int) -> float:
    """``exp(-l/d)`` lower bound on E disp of l uniform points in d dimensions."""
    if l < 1 or d < 1:
        raise ValueError("l and d must be positive")
    return math.exp(-l / d)


def anchored_intermediate(l: int, d: int) -> float:
    """``(d/(d+1))^l``: product of the mean largest coordinates, before ``1+x <= e^x``."""
    if l < 1 or d < 1:
        raise ValueError("l and d must be positive")
    return (d / (d + 1)) ** l


def split_lower_bound(n: int) -> float:
    """Dimension-free lower bound ``log(n)/(9n)``, stated for n >= 3."""
    if n < 3:
        raise ValueError("requires n >= 3")
    return math.log(n) / (9 * n)


def split_cells(n: int) -> int:
    """Number of equal slabs used by the coupon-collector argument."""
    return math.ceil((1 + E) * n / math.log(n))


@dataclass(frozen=True)
class BoundEntry:
    """One evaluated bound.

    ``value`` is None when the bound is unavailable (precondition failed) or
    too large for a double; ``log10`` is kept whenever the value is positive.
    """

    name: str
    value: float | None
    log10: float | None
    valid: bool = True
    kind: str = "upper"
    note: str = ""

    @property
    def log_space(self) -> bool:
        return self.value is None and self.log10 is not None

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind,
            "value": self.value,
            "log10": self.log10,
            "log_space": self.log_space,
            "valid": self.valid,
            "note": self.note,
        }


def _entry(name: str, value: float, **kw: Any) -> BoundEntry:
    return BoundEntry(name, value, math.log10(value) if value > 0 else None, **kw)


def _entry_log10(name: str, log10: float, **kw: Any) -> BoundEntry:
    value = 10.0 ** log10 if log10 <= LOG10_LIMIT else None
    return BoundEntry(name, value, log10, **kw)


def _missing(name: str, kind: str, note: str) -> BoundEntry:
    return BoundEntry(name, None, None, valid=False, kind=kind, note=note)


@dataclass
class BoundsTable:
    inputs: dict[str, Any]
    entries: dict[str, BoundEntry] = field(default_factory=dict)

    def add(self, entry: BoundEntry) -> None:
        self.entries[entry.name] = entry

    def __getitem__(self, name: str) -> BoundEntry:
        return self.entries[name]

    def to_dict(self) -> dict[str, Any]:
        return {"inputs": dict(self.inputs), "entries": [e.to_dict() for e in self.entries.values()]}


def expected_dispersion_bounds(n: int, d: int) -> BoundsTable:
    """Every bound on E disp(X_1..X_n) the theory provides, with validity flags."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    table = BoundsTable({"n": n, "d": d})
    thm_ok = n > d
    if thm_ok:
        lo, up = thm1_bounds(n, d)
        table.add(_entry("expected_lower", lo, kind="lower"))
        table.add(_entry("expected_upper", up, kind="upper",
                         note="vacuous (> 1)" if up > 1 else ""))
    else:
        table.add(_missing("expected_lower", "lower", "requires n > d"))
        table.add(_missing("expected_upper", "upper", "requires n > d"))
    if n >= 3:
        table.add(_entry("split_lower", split_lower_bound(n), kind="lower",
                         note=f"slabs l={split_cells(n)}"))
    else:
        table.add(_missing("split_lower", "lower", "requires n >= 3"))
    chain = reduction_factor(n, d) * anchored_lower_bound(d, d)
    table.add(_entry("reduction_anchored_lower", chain, kind="lower",
                     note="(d+1)/(e(n+d+1)), holds for all n"))
    table.add(_entry("dimension_lower", d / (2 * E * n), kind="lower", valid=thm_ok,
                     note="" if thm_ok else "requires n > d"))
    delta = 6 * d / n
    if delta <= 1.0:
        log_cover = cover_cardinality_bound(delta, d)
        ok = n >= log_cover
        value = delta + log_cover / n + 1 / (n + 1)
        table.add(_entry("cover_chain_upper", value, kind="upper", valid=ok,
                         note=f"delta=6d/n, log|cover|={log_cover:.6g}" + ("" if ok else "; requires n >= log|cover|")))
    else:
        table.add(_missing("cover_chain_upper", "upper", "requires 6d/n <= 1"))
    per = periodic_expected_bound(n, d)
    per_ok = periodic_bound_valid(n, d)
    notes = []
    if not per_ok:
        notes.append("cover bound precondition fails at delta=2d/n")
    if per > 1:
        notes.append("vacuous (> 1)")
    table.add(_entry("periodic_upper", per, kind="upper", valid=per_ok, note="; ".join(notes)))
    return table


def minimal_dispersion_bounds(eps: float, d: int) -> BoundsTable:
    """Bounds on n(eps, d) (minimal dispersion) and N(eps, d) (expected dispersion)."""
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if d < 1:
        raise ValueError("d must be positive")
    table = BoundsTable({"eps": eps, "d": d})
    inv = 1 / eps
    log2inv = math.log2(inv)
    minimal_ok = eps < 1 / 8
    minimal_note = "" if minimal_ok else "requires eps < 1/8"

    table.add(_entry("minimal_lower", 2.0 ** -3 * inv * math.log2(d), kind="lower", valid=minimal_ok,
                     note=(minimal_note or ("degenerate: log2(1) = 0" if d == 1 else ""))))
    minimal_upper_log10 = (7 * d + 1) * math.log10(2) + math.log10(inv)
    table.add(_entry_log10("minimal_upper", minimal_upper_log10, valid=minimal_ok, kind="upper", note=minimal_note))

    # known constructions, each an upper bound on n(eps, d)
    net_note = "ceil(2^(7d+1)/eps), digital nets"
    if minimal_upper_log10 <= 15:
        table.add(_entry("digital_net", float(math.ceil(2.0 ** (7 * d + 1) * inv)), kind="upper", note=net_note))
    else:
        table.add(_entry_log10("digital_net", minimal_upper_log10, kind="upper", note=net_note))

    k1 = math.ceil(log2inv - 1)
    k2 = math.ceil(log2inv)
    grid_a = k1 * math.log10(2 * d)
    grid_b = math.log10(inv) + (d - 1) * math.log10(k2)
    if min(grid_a, grid_b) <= 15:
        table.add(_entry("sparse_grid", min(float((2 * d) ** k1), inv * k2 ** (d - 1)), kind="upper", note="sparse grids"))
    else:
        table.add(_entry_log10("sparse_grid", min(grid_a, grid_b), kind="upper", note="sparse grids"))

    table.add(_entry("random_existence", 8 * d * inv * math.log(33 * inv), kind="upper", note="existence"))

    c = math.ceil(inv)
    opt_note = "inner log taken as natural (base not stated)"
    if d == 1:
        table.add(_entry("dimension_optimal", 0.0, kind="upper", note="degenerate: log2(1) = 0; " + opt_note))
    else:
        opt_log10 = (math.log10(math.log2(d)) + (c * c + 2) * math.log10(c)
                     + math.log10(4 * math.log(c) + 1))
        table.add(_entry_log10("dimension_optimal", opt_log10, kind="upper", note=opt_note))

    logd = 2 ** 7 * math.log2(d) * inv ** 2 * (1 + log2inv) ** 2
    table.add(_entry("log_dimension", logd, kind="upper",
                     note="degenerate: log2(1) = 0" if d == 1 else "existence"))

    if eps < 1 / (9 * E):
        lo, up = cor1_bounds(eps, d)
        table.add(_entry("inverse_lower", lo, kind="lower", note="bound on N(eps,d)"))
        table.add(_entry("inverse_upper", float(up), kind="upper", note="bound on N(eps,d)"))
    else:
        table.add(_missing("inverse_lower", "lower", "requires eps < 1/(9e)"))
        table.add(_missing("inverse_upper", "upper", "requires eps < 1/(9e)"))
    return table
