#!/usr/bin/env python3
# Copyright 2026 The ASPIRE Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Static plots from the CSV files the CLI writes.

    scripts/plot.py out/quadratic_demo        # every CSV found in the dir
    scripts/plot.py runlog.csv sweep.csv -o figs
"""

import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def plot_runlog(df, ax):
    ax.semilogy(df["t"], df["gap"])
    ax.set_xlabel("master iteration")
    ax.set_ylabel("stationarity gap")


def plot_sweep(df, ax):
    ax.plot(df["gamma"], df["loss_worst"], "o-", label="worst")
    ax.plot(df["gamma"], df["loss_mean"], "s--", label="mean")
    ax.set_xlabel("budget")
    ax.set_ylabel("training loss")
    ax.legend()


def plot_bench(df, ax):
    for kind, g in df.groupby("kind"):
        ax.loglog(g["N"], g["median_ns"] * 1e-6, "o-", label=kind)
    ax.set_xlabel("N")
    ax.set_ylabel("median solve time (ms)")
    ax.legend()


def plot_compare(df, ax):
    df = df.dropna(subset=["time_to_eps"])
    labels = df["mode"] + " " + df["quorum"]
    ax.bar(labels, df["time_to_eps"])
    ax.set_ylabel("simulated time to eps")
    ax.tick_params(axis="x", rotation=30)


def plot_baseline(df, ax):
    cols = [c for c in ("loss_worst", "attack_rate") if df[c].notna().any()]
    df.set_index("mode")[cols].plot.bar(ax=ax)
    ax.tick_params(axis="x", rotation=0)


PLOTTERS = {
    "runlog": plot_runlog,
    "sweep": plot_sweep,
    "bench": plot_bench,
    "compare": plot_compare,
    "baseline": plot_baseline,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("paths", nargs="+", type=pathlib.Path)
    ap.add_argument("-o", "--out", type=pathlib.Path, default=None)
    args = ap.parse_args()

    files = []
    for p in args.paths:
        files += sorted(p.glob("*.csv")) if p.is_dir() else [p]
    for f in files:
        plotter = PLOTTERS.get(f.stem)
        if plotter is None:
            print(f"skipping {f}: unknown CSV")
            continue
        fig, ax = plt.subplots(figsize=(5, 3.5))
        plotter(pd.read_csv(f), ax)
        ax.set_title(f.stem)
        fig.tight_layout()
        dest = (args.out or f.parent) / (f.stem + ".png")
        dest.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(dest, dpi=120)
        plt.close(fig)
        print(f"wrote {dest}")


if __name__ == "__main__":
    main()
