"""Generic log-log plot of one study CSV.

    python scripts/plot_results.py results/qmc.csv --x N --y rmse --group quantity
    python scripts/plot_results.py results/truncation.csv --x s --y strong_error weak_error

Metadata lines ('# key=value') are shown in the title. Needs matplotlib,
which is not a dependency of the package itself.
"""
import argparse
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from semilinear_uq.experiments import read_csv  # noqa: E402


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("--x", required=True)
    ap.add_argument("--y", required=True, nargs="+")
    ap.add_argument("--group", help="column whose values split the data into separate curves")
    ap.add_argument("--linear", action="store_true", help="linear instead of log-log axes")
    ap.add_argument("-o", "--output", help="image path (default: CSV path with .png)")
    args = ap.parse_args(argv)

    table = read_csv(args.csv)
    curves = defaultdict(lambda: ([], []))
    xi = table.columns.index(args.x)
    gi = table.columns.index(args.group) if args.group else None
    for ycol in args.y:
        yi = table.columns.index(ycol)
        for row in table.rows:
            label = ycol if gi is None else f"{ycol} [{row[gi]}]"
            curves[label][0].append(row[xi])
            curves[label][1].append(abs(row[yi]))

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, (xs, ys) in curves.items():
        ax.plot(xs, ys, "o-", label=label)
    if not args.linear:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel(args.x)
    ax.legend()
    keys = ("study", "h", "s_max", "eta", "p", "theta_dec", "seed", "config_hash")
    ax.set_title(", ".join(f"{k}={table.meta[k]}" for k in keys if k in table.meta), fontsize=8)
    fig.tight_layout()
    out = args.output or args.csv.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=120)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
