#!/usr/bin/env python3
"""Solve an LP-format mixed-binary model with scipy's HiGHS backend.

Reads the LP subset emitted by `flexslice export-lp` (Maximize / Subject To /
Binary / End sections, pure binary variables) and writes `name value` lines
for every variable, which `import_solution` understands.

Usage: solve_lp.py MODEL.lp OUTPUT.sol

Exit codes: 0 solved, 2 infeasible or parse failure, 3 scipy unavailable.
"""

import sys

try:
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
except ImportError:
    sys.exit(3)


def parse_terms(tokens, var_ids, order):
    """Parse `[+|-] [coef] name` sequences into {var_index: coef}."""
    coefs = {}
    sign = 1.0
    pending = None
    for tok in tokens:
        if tok == "+":
            sign = 1.0
        elif tok == "-":
            sign = -1.0
        else:
            try:
                pending = float(tok)
                continue
            except ValueError:
                pass
            if tok not in var_ids:
                var_ids[tok] = len(order)
                order.append(tok)
            idx = var_ids[tok]
            coefs[idx] = coefs.get(idx, 0.0) + sign * (1.0 if pending is None else pending)
            sign = 1.0
            pending = None
    return coefs


def main():
    if len(sys.argv) != 3:
        print("usage: solve_lp.py MODEL.lp OUTPUT.sol", file=sys.stderr)
        return 2
    model_path, out_path = sys.argv[1], sys.argv[2]

    section = None
    objective_tokens = []
    rows = []  # (coefs, sense, rhs)
    binaries = set()
    var_ids = {}
    order = []

    with open(model_path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("\\"):
                continue
            lowered = line.lower()
            if lowered == "maximize":
                section = "obj"
                continue
            if lowered == "subject to":
                section = "rows"
                continue
            if lowered == "binary":
                section = "bin"
                continue
            if lowered == "end":
                break
            if section == "obj":
                body = line.split(":", 1)[1] if ":" in line else line
                objective_tokens.extend(body.split())
            elif section == "rows":
                name, body = line.split(":", 1)
                del name
                tokens = body.split()
                sense_at = next(i for i, t in enumerate(tokens) if t in ("<=", ">=", "="))
                coefs = parse_terms(tokens[:sense_at], var_ids, order)
                rows.append((coefs, tokens[sense_at], float(tokens[sense_at + 1])))
            elif section == "bin":
                if line not in var_ids:
                    var_ids[line] = len(order)
                    order.append(line)
                binaries.add(line)

    n = len(order)
    c = np.zeros(n)
    for idx, coef in parse_terms(objective_tokens, var_ids, order).items():
        c[idx] = -coef  # milp minimizes

    if len(order) != n:
        # Objective introduced a variable missing from Binary; still fine,
        # but every model we emit declares all of them.
        n = len(order)
        c = np.resize(c, n)

    a = np.zeros((len(rows), n))
    lb = np.full(len(rows), -np.inf)
    ub = np.full(len(rows), np.inf)
    for r, (coefs, sense, rhs) in enumerate(rows):
        for idx, coef in coefs.items():
            a[r, idx] = coef
        if sense == "<=":
            ub[r] = rhs
        elif sense == ">=":
            lb[r] = rhs
        else:
            lb[r] = rhs
            ub[r] = rhs

    constraints = [LinearConstraint(a, lb, ub)] if rows else []
    result = milp(
        c,
        constraints=constraints,
        integrality=np.ones(n),
        bounds=Bounds(np.zeros(n), np.ones(n)),
    )
    if not result.success:
        print(f"solver failed: {result.message}", file=sys.stderr)
        return 2

    with open(out_path, "w") as fh:
        fh.write(f"# objective {-result.fun!r}\n")
        for name, value in zip(order, result.x):
            fh.write(f"{name} {round(float(value))}\n")
    print(f"objective {-result.fun!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
