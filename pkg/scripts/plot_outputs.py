"""Render CSVs written by ``fbwaves`` (profile, limits or simulation directories).

Needs matplotlib, which is not a dependency of the package itself.
"""

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from fbwaves.output import read_csv  # noqa: E402


def load(path):
    header, rows = read_csv(path)
    cols = list(zip(*rows))
    return {h: np.array(c, dtype=float if h != "mode" else object) for h, c in zip(header, cols)}


def plot_dir(d: Path, out: Path):
    fig, ax = plt.subplots(figsize=(7, 4))
    if (d / "profile.csv").exists():
        data = load(d / "profile.csv")
        ax.plot(data["X"], data["U"], label="U")
        ax.plot(data["X"], data["V"], label="V")
        ax.set_xlabel("X")
    elif (d / "trajectory.csv").exists():
        data = load(d / "trajectory.csv")
        ax.plot(data["t"], data["xi_minus"], color="0.2", label="xi-")
        ax.plot(data["t"], data["xi_plus"], color="0.6", label="xi+")
        ax.set_xlabel("t")
        fig2, ax2 = plt.subplots(figsize=(7, 4))
        for snap in sorted(d.glob("snapshot_[0-9]*.csv")):
            s = load(snap)
            ax2.plot(s["x"], s["u"], lw=0.8)
        ax2.set_xlabel("x")
        ax2.set_ylabel("u")
        fig2.savefig(out.with_name(out.stem + "_snapshots.png"), dpi=150)
    elif (d / "width.csv").exists():
        data = load(d / "width.csv")
        ax.semilogx(data["param"], data["ratio"], "o-")
        ax.axhline(1.0, color="0.5", lw=0.5)
        ax.set_xlabel("parameter")
        ax.set_ylabel("exact / limit")
    else:
        raise SystemExit(f"nothing to plot in {d}")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best")
    fig.savefig(out, dpi=150)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("directory")
    ap.add_argument("--out", default="plot.png")
    args = ap.parse_args(argv)
    plot_dir(Path(args.directory), Path(args.out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
