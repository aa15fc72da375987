#!/usr/bin/env python3
"""Standalone oracle for the classifying-stack duality fixtures.

Every module is written out by hand as a list of basis elements with explicit operator
tables, the dual complexes are assembled as dense Fraction matrices, and cohomology is read
off by Gaussian elimination. Nothing here is shared with the C++ engine.

The t = 1 specialization is computed as the colimit of cohomology along t (rank of t^s on
cohomology far up the weight axis), which is a different route from the engine's direct
substitution.

Usage: bg_oracle.py <output directory>
"""

import sys
from fractions import Fraction
from pathlib import Path

# ----------------------------------------------------------------------------- linear algebra


def rank(rows):
    """Rank of a list of equal-length Fraction rows."""
    m = [list(r) for r in rows if any(r)]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def kernel(cols_as_vectors, n_rows, n_cols):
    """Null space of the matrix whose j-th column is cols_as_vectors[j] (length n_rows)."""
    a = [[cols_as_vectors[j][i] for j in range(n_cols)] for i in range(n_rows)]
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(n_rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [u - f * v for u, v in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    basis = []
    for f in range(n_cols):
        if f in pivots:
            continue
        v = [Fraction(0)] * n_cols
        v[f] = Fraction(1)
        for row, c in enumerate(pivots):
            v[c] = -a[row][f]
        basis.append(v)
    return basis


# ----------------------------------------------------------------------------- modules
#
# A module is (elements, ops): elements maps a name to (deg, wt); ops maps an operator name
# ("d", "x", "delta", "y", "t", "h") to {source: [(target, coefficient), ...]}.


def x_tower(top, with_delta):
    el, ops = {}, {"d": {}, "x": {}, "delta": {}, "y": {}}
    for j in range(top + 1):
        el[("p", j)] = (0, j)
        if with_delta:
            el[("q", j)] = (-1, j - 1)
    for j in range(1, top + 1):
        ops["x"][("p", j)] = [(("p", j - 1), 1)]
        if with_delta:
            ops["x"][("q", j)] = [(("q", j - 1), 1)]
    if with_delta:
        for j in range(top + 1):
            ops["delta"][("p", j)] = [(("q", j), 1)]
    return el, ops


def point():
    return {("pt",): (0, 0)}, {"d": {}, "x": {}, "delta": {}, "y": {}}


def skyscraper_resolution(n, depth):
    # x^i e0 at (0, -i), x^i e1 at (-1, -1-i); d e1 = x e0; delta e0 = n e1
    el, ops = {}, {"d": {}, "x": {}, "delta": {}, "y": {}}
    for i in range(depth + 1):
        el[("e0", i)] = (0, -i)
        el[("e1", i)] = (-1, -1 - i)
    for i in range(depth + 1):
        if i < depth:
            ops["x"][("e0", i)] = [(("e0", i + 1), 1)]
            ops["x"][("e1", i)] = [(("e1", i + 1), 1)]
            ops["d"][("e1", i)] = [(("e0", i + 1), 1)]
        if n:
            ops["delta"][("e0", i)] = [(("e1", i), n)]
    return el, ops


def free_dual(n, depth, additive=False):
    # t^k e at (0, k), t^k f at (-1, k+1); h e = f; d f = n t e
    el, ops = {}, {"d": {}, "t": {}, "h": {}, "y": {}}
    for k in range(depth + 1):
        el[("e", k)] = (0, k)
        el[("f", k)] = (-1, k + 1)
    for k in range(depth + 1):
        if k < depth:
            ops["t"][("e", k)] = [(("e", k + 1), 1)]
            ops["t"][("f", k)] = [(("f", k + 1), 1)]
            if n and not additive:
                ops["d"][("f", k)] = [(("e", k + 1), n)]
        ops["h"][("e", k)] = [(("f", k), 1)]
    return el, ops


def tower(depth):
    el, ops = {}, {"d": {}, "t": {}, "h": {}, "y": {}}
    for k in range(depth + 1):
        el[("e", k)] = (0, k)
        if k < depth:
            ops["t"][("e", k)] = [(("e", k + 1), 1)]
    return el, ops


# ----------------------------------------------------------------------------- dual complexes


def alpha_image(ops, group, n, src):
    if group == "m":
        return [(src, n)] if n else []
    return ops["y"].get(src, [])


def kappa(module, group, n, wt_max):
    """Basis and differential of kappa(M) (Tate-sheared), grades (D, W)."""
    el, ops = module
    basis = {}
    for m, (d, w) in el.items():
        for e in (0, 1):
            for k in range(0, wt_max - w - e + 1):
                g = (d - 2 * w - e, w + k + e)
                basis.setdefault(g, []).append((m, k, e))

    def diff(b):
        m, k, e = b
        out = []
        if e == 0:
            out += [((t, k, 0), c) for t, c in ops["d"].get(m, [])]
            out += [((t, k + 1, 0), c) for t, c in ops["delta"].get(m, [])]
            out += [((t, k, 1), c) for t, c in ops["x"].get(m, [])]
        else:
            out += [((t, k + 1, 0), -c) for t, c in alpha_image(ops, group, n, m)]
            out += [((t, k, 1), -c) for t, c in ops["d"].get(m, [])]
            out += [((t, k + 1, 1), -c) for t, c in ops["delta"].get(m, [])]
        return out

    def tmap(b):
        m, k, e = b
        return [((m, k + 1, e), 1)]

    return basis, diff, tmap


def kappa_inverse(module, group, n, wt_max):
    el, ops = module
    basis = {}
    for v, (d, w) in el.items():
        for e in (0, 1):
            for j in range(0, wt_max - w - e + 1):
                basis.setdefault((d + 2 * w + e, w + j + e), []).append((v, j, e))

    def diff(b):
        v, j, e = b
        out = []
        if e == 0:
            out += [((t, j, 0), c) for t, c in ops["d"].get(v, [])]
            if j > 0:
                out += [((t, j - 1, 0), c) for t, c in ops["h"].get(v, [])]
                out += [((t, j - 1, 1), c) for t, c in alpha_image(ops, group, n, v)]
        else:
            out += [((t, j, 0), -c) for t, c in ops["t"].get(v, [])]
            out += [((t, j, 1), -c) for t, c in ops["d"].get(v, [])]
            if j > 0:
                out += [((t, j - 1, 1), -c) for t, c in ops["h"].get(v, [])]
        return out

    return basis, diff, None


def matrix(basis, diff, g, h):
    src = basis.get(g, [])
    tgt = basis.get(h, [])
    idx = {b: i for i, b in enumerate(tgt)}
    cols = []
    for b in src:
        col = [Fraction(0)] * len(tgt)
        for key, c in diff(b):
            if key in idx:
                col[idx[key]] += Fraction(c)
        cols.append(col)
    return cols  # list of columns


def cohomology(basis, diff, window):
    dmin, dmax, wmin, wmax = window
    out = {}
    for D in range(dmin + 1, dmax):
        for W in range(wmin, wmax + 1):
            dim = len(basis.get((D, W), []))
            if not dim:
                continue
            r_out = rank(matrix(basis, diff, (D, W), (D + 1, W)))
            r_in = rank(matrix(basis, diff, (D - 1, W), (D, W)))
            h = dim - r_out - r_in
            if h:
                out[(D, W)] = h
    return out


def colimit_along_t(basis, diff, tmap, D, W, s):
    """Rank of t^s : H_(D,W) -> H_(D,W+s)."""
    dim = len(basis.get((D, W), []))
    if not dim:
        return 0
    dcols = matrix(basis, diff, (D, W), (D + 1, W))
    z = kernel(dcols, len(basis.get((D + 1, W), [])), dim) if dcols and dcols[0] else [
        [Fraction(int(i == j)) for i in range(dim)] for j in range(dim)]
    tgt = basis.get((D, W + s), [])
    idx = {b: i for i, b in enumerate(tgt)}
    images = []
    for vec in z:
        cur = {b: c for b, c in zip(basis[(D, W)], vec) if c}
        for _ in range(s):
            nxt = {}
            for b, c in cur.items():
                for key, tc in tmap(b):
                    nxt[key] = nxt.get(key, 0) + c * tc
            cur = nxt
        row = [Fraction(0)] * len(tgt)
        for b, c in cur.items():
            if b in idx:
                row[idx[b]] += c
        images.append(row)
    bnd = matrix(basis, diff, (D - 1, W + s), (D, W + s))
    rb = rank(bnd)
    return rank(bnd + images) - rb


# ----------------------------------------------------------------------------- fixtures

KAPPA_WINDOW = (-9, 3, -2, 6)
INVERSE_WINDOW = (-3, 3, -2, 6)


def mixed_rows():
    rows = []
    for n in (1, 2, 3):
        rows.append(("bgm.character", n, 0, point(), "m"))
    rows.append(("bgm.skyscraper", 2, 0, skyscraper_resolution(2, 30), "m"))
    for m in (0, 1, 2):
        rows.append(("bgm.infinitesimal", 0, m, x_tower(m, False), "m"))
        rows.append(("bgm.infinitesimal_loop", 0, m, x_tower(m, True), "m"))
    rows.append(("bgm.omega_formal", 0, 0, x_tower(40, False), "m"))
    rows.append(("bgm.omega_loop", 0, 0, x_tower(40, True), "m"))
    rows.append(("bga.skyscraper", 0, 0, point(), "a"))
    rows.append(("bga.omega", 0, 0, x_tower(40, False), "a"))
    return rows


def dual_rows():
    rows = []
    for n in (1, 2, 3):
        rows.append(("bgm.free_dual", n, 0, free_dual(n, 40), "m"))
    rows.append(("bgm.tower", 0, 0, tower(40), "m"))
    rows.append(("bga.free_dual", 0, 0, free_dual(0, 40, additive=True), "a"))
    rows.append(("bga.tower", 0, 0, tower(40), "a"))
    return rows


def window_text(w):
    return f"d={w[0]}..{w[1]},w={w[2]}..{w[3]},a=0"


def fixture_name(name, n, m):
    return f"{name}_n{n}_m{m}.txt"


def write(path, header, entry, direction, window, profile, extra):
    lines = [f"# {h}" for h in header]
    lines.append(f"entry {entry}")
    lines.append(f"direction {direction}")
    lines.append(f"window {window_text(window)}")
    for (D, W), v in sorted(profile.items()):
        lines.append(f"piece d={D} w={W} a=0 dim={v}")
    lines += extra
    path.write_text("\n".join(lines) + "\n")


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
    out.mkdir(parents=True, exist_ok=True)
    provenance = [
        "Generated by tools/oracle/bg_oracle.py: hand-written operator tables, dense Fraction",
        "matrices, Gaussian elimination. Pieces list certified nonzero cohomology only.",
    ]
    for name, n, m, module, group in mixed_rows():
        wmax = KAPPA_WINDOW[3]
        basis, diff, tmap = kappa(module, group, n, wmax)
        prof = cohomology(basis, diff, KAPPA_WINDOW)
        # colimit along t far up the weight axis gives the t = 1 specialization
        far, s = 14, 3
        big_basis, big_diff, big_t = kappa(module, group, n, far + s + 1)
        un = {}
        for D in range(KAPPA_WINDOW[0] + 1, KAPPA_WINDOW[1]):
            r = colimit_along_t(big_basis, big_diff, big_t, D, far, s)
            if r:
                un[D] = r
        extra = [f"un d={D} dim={v}" for D, v in sorted(un.items())]
        write(out / fixture_name(name, n, m), provenance, f"{name} n={n} m={m}", "kappa", KAPPA_WINDOW, prof,
              extra)
    for name, n, m, module, group in dual_rows():
        basis, diff, _ = kappa_inverse(module, group, n, INVERSE_WINDOW[3])
        prof = cohomology(basis, diff, INVERSE_WINDOW)
        write(out / fixture_name(name, n, m), provenance, f"{name} n={n} m={m}", "kappa_inverse", INVERSE_WINDOW,
              prof, [])


if __name__ == "__main__":
    main()
