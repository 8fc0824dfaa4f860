#!/usr/bin/env python3
"""Plot the CSV artifacts written by betalab into PNG files next to them."""

import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def plot_parry(path, out):
    df = pd.read_csv(path)
    fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))
    ax[0].plot(df["x"], df["density"])
    ax[0].set(xlabel="x", ylabel="normalized density")
    ax[1].plot(df["x"], df["cdf"])
    ax[1].set(xlabel="x", ylabel="cdf")
    fig.tight_layout()
    fig.savefig(out)


def plot_decay(path, out):
    df = pd.read_csv(path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(df["m"], df["D"], "o-", ms=3)
    ax.set(xlabel="m", ylabel="D(m)")
    fig.tight_layout()
    fig.savefig(out)


def plot_selfsim(path, out):
    df = pd.read_csv(path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogx(df["xi"], df["abs_fourier"], lw=0.6)
    ax.set(xlabel="xi", ylabel="|mu^(xi)|")
    fig.tight_layout()
    fig.savefig(out)


def plot_orbit(path, out):
    df = pd.read_csv(path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.hist((df["lo"] + df["hi"]) / 2, bins=60, density=True)
    ax.set(xlabel="x", ylabel="empirical density of the orbit")
    fig.tight_layout()
    fig.savefig(out)


PLOTTERS = {
    "parry_density.csv": plot_parry,
    "decay.csv": plot_decay,
    "selfsim.csv": plot_selfsim,
    "orbit.csv": plot_orbit,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("directory", type=pathlib.Path, help="betalab --out directory")
    args = parser.parse_args()
    for name, fn in PLOTTERS.items():
        path = args.directory / name
        if path.exists():
            out = path.with_suffix(".png")
            fn(path, out)
            print(out)


if __name__ == "__main__":
    main()
