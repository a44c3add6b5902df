#!/usr/bin/env python3
"""Plot wetperc CSV outputs and realization dumps (dev tooling).

Usage:
  plot_curves.py curve.csv          spanning-probability curve with the
                                    closed-form reference lines
  plot_curves.py sweep.csv          sweep table on log axes
  plot_curves.py realization.txt    scatter of one dumped realization
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    return rows


def plot_curve(path, out):
    rows = read_csv(path)
    lf = [float(r["lambda_f_per_m2"]) for r in rows]
    th = [float(r["theta"]) for r in rows]
    se = [float(r["stderr"]) for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.errorbar(lf, th, yerr=se, marker="o", lw=1.5, capsize=3, label="simulated")
    for col, style in (("lambda_f_lower_per_m2", "--"), ("lambda_f_upper_per_m2", "--"),
                       ("lambda_f_gd_per_m2", ":"), ("lambda_f_star_per_m2", "-.")):
        val = rows[0].get(col, "")
        if val:
            ax.axvline(float(val), ls=style, lw=1, label=col.replace("_per_m2", ""))
    ax.set_xlabel("station density (per m$^2$)")
    ax.set_ylabel("spanning probability")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def plot_sweep(path, out):
    rows = read_csv(path)
    lr_varies = len({r["lambda_r_per_m2"] for r in rows}) > 1
    xcol = "lambda_r_per_m2" if lr_varies else "r_f_m"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    xs = [float(r[xcol]) for r in rows]
    for col in ("sim_mean_per_m2", "lambda_f_lower_per_m2", "lambda_f_upper_per_m2",
                "lambda_f_ic_per_m2", "lambda_f_gd_per_m2", "lambda_f_star_per_m2"):
        pts = [(x, float(r[col])) for x, r in zip(xs, rows) if r[col]]
        if pts:
            ax.plot(*zip(*pts), marker="o", ms=3, lw=1.2,
                    label=col.replace("_per_m2", ""))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(xcol)
    ax.set_ylabel("critical station density (per m$^2$)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def plot_dump(path, out):
    dev, sta, edges = [], [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "D":
                dev.append((float(parts[2]), float(parts[3]), int(parts[4])))
            elif parts[0] == "S":
                sta.append((float(parts[2]), float(parts[3])))
            elif parts[0] == "E":
                edges.append((int(parts[1]), int(parts[2])))
    fig, ax = plt.subplots(figsize=(7, 7))
    for a, b in edges:
        ax.plot([dev[a][0], dev[b][0]], [dev[a][1], dev[b][1]],
                lw=0.3, color="0.6", zorder=1)
    on = [(x, y) for x, y, a in dev if a]
    off = [(x, y) for x, y, a in dev if not a]
    if off:
        ax.scatter(*zip(*off), s=2, color="0.8", label="unpowered", zorder=2)
    if on:
        ax.scatter(*zip(*on), s=2, color="tab:red", label="powered", zorder=3)
    if sta:
        ax.scatter(*zip(*sta), s=14, marker="^", color="tab:blue",
                   label="stations", zorder=4)
    ax.set_aspect("equal")
    ax.legend(fontsize=8, markerscale=2)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        return 1
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else path.rsplit(".", 1)[0] + ".png"
    with open(path) as fh:
        head = fh.readline()
    if "simulate" in head:
        plot_curve(path, out)
    elif "sweep" in head:
        plot_sweep(path, out)
    elif "realization" in head:
        plot_dump(path, out)
    else:
        print(f"unrecognized file schema: {head.strip()}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
