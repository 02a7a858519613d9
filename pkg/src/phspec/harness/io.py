"""Deterministic CSV emitters (shortest round-trip floats, '.' decimals)."""

from __future__ import annotations

import os

import numpy as np


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def write_csv(path, header: list[str], rows) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_hist1d_csv(path, hist) -> None:
    write_csv(path, ["x_center", "density"],
              zip(hist.centers, hist.density))


def write_hist2d_csv(path, hist) -> None:
    xc = 0.5 * (hist.x_edges[:-1] + hist.x_edges[1:])
    yc = 0.5 * (hist.y_edges[:-1] + hist.y_edges[1:])
    dens = hist.density
    rows = []
    for i, x in enumerate(xc):
        for j, y in enumerate(yc):
            rows.append((x, y, dens[i, j]))
    write_csv(path, ["x_center", "y_center", "density"], rows)


def write_theory_curve_csv(path, xs, rho) -> None:
    write_csv(path, ["x", "rho1"], zip(xs, rho))


def write_boundary_csv(path, thetas, r_minus, r_plus) -> None:
    write_csv(path, ["theta", "r_minus", "r_plus"], zip(thetas, r_minus, r_plus))


def write_scatter_csv(path, re, im, is_real) -> None:
    write_csv(path, ["re", "im", "is_real"],
              zip(re, im, (int(v) for v in is_real)))


def write_gap_grid_csv(path, solutions) -> None:
    rows = []
    for sol in solutions:
        rows.append((
            sol.w.real, sol.w.imag, sol.phase, sol.alpha2,
            sol.b.real, sol.b.imag, sol.green.real, sol.green.imag,
            sol.residual,
        ))
    write_csv(path, ["x", "y", "phase", "alpha2", "re_b", "im_b", "re_G", "im_G", "residual"], rows)


def write_fraction_csv(path, rows) -> None:
    write_csv(path, ["lambda", "fraction", "err", "theory"], rows)
