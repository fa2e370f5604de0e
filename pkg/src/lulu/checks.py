"""Invariant suite run by ``lulu verify`` on a single image."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .connectivity import Connectivity, GridImage
from .dpt import dpt_decompose, verify_structure
from .operators import apply_Ln, apply_Un
from .tv import tv_split, verify_dpt_tv

Operator = Callable[[GridImage, int, Connectivity], GridImage]

# row o column, rows/columns ordered L, U, UL, LU
ORDER = ("L", "U", "UL", "LU")
SEMIGROUP_TABLE = {
    "L": ("L", "LU", "UL", "LU"),
    "U": ("UL", "U", "UL", "LU"),
    "UL": ("UL", "LU", "UL", "LU"),
    "LU": ("UL", "LU", "UL", "LU"),
}


@dataclass
class SuiteResult:
    check: str
    n: Optional[int]
    passed: bool
    detail: str = ""


def _first_diff(a: GridImage, b: GridImage) -> str:
    diff = np.argwhere(a.values != b.values)
    if len(diff):
        r, c = (int(v) for v in diff[0])
        return f"differs at {(r, c)}: {a.values[r, c]} vs {b.values[r, c]}"
    if a.padding != b.padding:
        return f"padding {a.padding} vs {b.padding}"
    return ""


def _first_gt(a: GridImage, b: GridImage) -> str:
    bad = np.argwhere(a.values > b.values)
    if len(bad):
        r, c = (int(v) for v in bad[0])
        return f"{a.values[r, c]} > {b.values[r, c]} at {(r, c)}"
    return ""


class _Ops:
    def __init__(self, conn: Connectivity, n: int, ln: Operator, un: Operator):
        self.conn, self.n, self.ln, self.un = conn, n, ln, un

    def L(self, f):
        return self.ln(f, self.n, self.conn)

    def U(self, f):
        return self.un(f, self.n, self.conn)

    def compose(self, names, f):
        """Apply named operators right to left."""
        for name in reversed(names):
            for letter in reversed(name):
                f = self.L(f) if letter == "L" else self.U(f)
        return f


def run_suite(f: GridImage, conn: Optional[Connectivity] = None, ns=(1, 2, 3),
              ln: Operator = apply_Ln, un: Operator = apply_Un, dpt: bool = True) -> list[SuiteResult]:
    """Order chain, separator identities, semi-group table, TV preservation and DPT structure.

    ``ln``/``un`` can be swapped for deliberately broken operators in tests.
    """
    conn = conn or Connectivity.four()
    results = []

    def record(check, n, detail):
        results.append(SuiteResult(check, n, not detail, detail))

    for n in ns:
        ops = _Ops(conn, n, ln, un)
        lf, uf = ops.L(f), ops.U(f)
        ul, lu = ops.U(lf), ops.L(uf)
        chain = [("L", lf), ("id", f), ("U", uf)]
        detail = ""
        for (na, a), (nb, b) in zip(chain, chain[1:]):
            if not detail and _first_gt(a, b):
                detail = f"{na} <= {nb} fails: {_first_gt(a, b)}"
        record("order L<=id<=U", n, detail)

        detail = ""
        full = [("L", lf), ("UL", ul), ("LU", lu), ("U", uf)]
        for (na, a), (nb, b) in zip(full, full[1:]):
            if not detail and _first_gt(a, b):
                detail = f"{na} <= {nb} fails: {_first_gt(a, b)}"
        record("order L<=UL<=LU<=U", n, detail)

        detail = ""
        for name, op, once in (("L", ops.L, lf), ("U", ops.U, uf)):
            d = _first_diff(op(once), once)
            if d and not detail:
                detail = f"{name}{name} != {name}: {d}"
        for name, once in (("UL", ul), ("LU", lu)):
            d = _first_diff(ops.compose([name], once), once)
            if d and not detail:
                detail = f"{name}{name} != {name}: {d}"
        record("idempotence", n, detail)

        detail = ""
        for name, op, once in (("L", ops.L, lf), ("U", ops.U, uf)):
            rest = f - once
            d = _first_diff(op(rest), GridImage(np.zeros_like(f.values), 0))
            if d and not detail:
                detail = f"{name}(f - {name}f) != 0: {d}"
        record("co-idempotence", n, detail)

        detail = ""
        images = {"L": lf, "U": uf, "UL": ul, "LU": lu}
        for row in ORDER:
            for col, expect in zip(ORDER, SEMIGROUP_TABLE[row]):
                got = ops.compose([row], images[col])
                d = _first_diff(got, images[expect])
                if d and not detail:
                    detail = f"{row}o{col} != {expect}: {d}"
        record("semi-group table", n, detail)

        detail = ""
        for name, img in images.items():
            rep = tv_split(f, img, name)
            if not rep.preserved and not detail:
                detail = str(rep)
        record("TV preservation", n, detail)

    if dpt:
        d = dpt_decompose(f, conn)
        rep = verify_structure(d, f)
        failed = [c for c in rep.checks if not c.passed]
        record("DPT structure", None, "; ".join(f"{c.name}: {c.detail}" for c in failed))
        tv = verify_dpt_tv(d, f)
        record("DPT TV additivity", None, "" if tv.preserved else str(tv))
    return results


def format_matrix(results: list[SuiteResult]) -> str:
    ns = sorted({r.n for r in results if r.n is not None})
    checks = list(dict.fromkeys(r.check for r in results))
    width = max(len(c) for c in checks) + 2
    lines = [" " * width + "".join(f"n={n:<6}" for n in ns) + ("all" if any(r.n is None for r in results) else "")]
    by_key = {(r.check, r.n): r for r in results}
    for check in checks:
        cells = []
        for n in ns:
            r = by_key.get((check, n))
            cells.append(f"{'-' if r is None else ('pass' if r.passed else 'FAIL'):<8}")
        r = by_key.get((check, None))
        if r is not None:
            cells.append("pass" if r.passed else "FAIL")
        lines.append(f"{check:<{width}}" + "".join(cells))
    for r in results:
        if not r.passed:
            where = "" if r.n is None else f" (n={r.n})"
            lines.append(f"  {r.check}{where}: {r.detail}")
    return "\n".join(lines)
