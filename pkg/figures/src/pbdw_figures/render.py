"""Render experiment figures from the driver's CSV files.

Three figure kinds, one per study CSV:

* ``placement`` - inf-sup constant of greedy vs random sensors over m
* ``mconv``     - relative errors over the sensor count, per generator
* ``xi``        - holdout MSE and true error across the regularization grid

Input files are never modified; rendering the same CSV twice produces
byte-identical images (PNG metadata is suppressed). A CSV whose header does
not match the declared kind raises :class:`SchemaError` naming the missing
column.

Invoked as a script with positional arguments: kind, CSV path, output path.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

KINDS = ("placement", "mconv", "xi")

REQUIRED_COLUMNS = {
    "placement": ["m", "beta_greedy", "beta_random_median", "beta_random_q25", "beta_random_q75"],
    "mconv": ["generator", "M", "snr", "err_l2", "err_h1", "beta", "lebesgue"],
    "xi": ["bias", "snr", "xi", "mse_hat", "true_err"],
}

DEFAULT_SCALES = {
    "placement": ("linear", "log"),
    "mconv": ("log", "log"),
    "xi": ("log", "log"),
}


class SchemaError(ValueError):
    """CSV header does not match the declared figure kind."""


@dataclass(frozen=True)
class FigureSpec:
    csv_path: str | Path
    kind: str
    output_path: str | Path
    x_scale: str = ""
    y_scale: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}, expected one of {KINDS}")
        default_x, default_y = DEFAULT_SCALES[self.kind]
        object.__setattr__(self, "x_scale", self.x_scale or default_x)
        object.__setattr__(self, "y_scale", self.y_scale or default_y)


def read_table(path: str | Path, kind: str) -> list[dict[str, str]]:
    """Parse the CSV, skipping comment lines, and validate the schema."""
    lines = [
        line for line in Path(path).read_text().splitlines() if not line.startswith("#")
    ]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    rows = list(csv.DictReader(lines))
    header = lines[0].split(",")
    missing = [c for c in REQUIRED_COLUMNS[kind] if c not in header]
    if missing:
        raise SchemaError(
            f"{path}: not a {kind!r} CSV, missing column(s) {', '.join(repr(c) for c in missing)}"
        )
    return rows


def _floats(rows: list[dict[str, str]], col: str) -> list[float]:
    return [float(r[col]) for r in rows]


def _render_placement(rows, ax):
    m = _floats(rows, "m")
    ax.fill_between(
        m,
        _floats(rows, "beta_random_q25"),
        _floats(rows, "beta_random_q75"),
        alpha=0.25,
        color="tab:gray",
        label="random (quartiles)",
    )
    ax.plot(m, _floats(rows, "beta_random_median"), "s--", color="tab:gray", label="random (median)")
    ax.plot(m, _floats(rows, "beta_greedy"), "o-", color="tab:blue", label="greedy")
    ax.set_xlabel("number of sensors m")
    ax.set_ylabel("inf-sup constant")
    ax.legend()


_GEN_STYLES = {}


def _gen_style(name):
    palette = ["tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple"]
    if name not in _GEN_STYLES:
        _GEN_STYLES[name] = palette[len(_GEN_STYLES) % len(palette)]
    return _GEN_STYLES[name]


def _render_mconv(rows, ax):
    groups: dict[tuple[str, str], list[dict]] = {}
    for r in rows:
        groups.setdefault((r["generator"], r["snr"]), []).append(r)
    for (gen, snr), grp in sorted(groups.items()):
        grp = sorted(grp, key=lambda r: float(r["M"]))
        label = gen if float(snr) == 0.0 else f"{gen} (snr={snr})"
        color = _gen_style(gen)
        ax.plot(_floats(grp, "M"), _floats(grp, "err_l2"), "o-", color=color, label=f"{label} L2")
        ax.plot(_floats(grp, "M"), _floats(grp, "err_h1"), "^--", color=color, alpha=0.6, label=f"{label} H1")
    ax.set_xlabel("number of sensors M")
    ax.set_ylabel("relative error")
    ax.legend(fontsize=7)


def _render_xi(rows, fig):
    combos = sorted({(float(r["bias"]), float(r["snr"])) for r in rows})
    biases = sorted({b for b, _ in combos})
    snrs = sorted({s for _, s in combos})
    axes = fig.subplots(len(biases), len(snrs), squeeze=False, sharex=True)
    for i, bias in enumerate(biases):
        for j, snr in enumerate(snrs):
            ax = axes[i][j]
            grp = [
                r for r in rows if float(r["bias"]) == bias and float(r["snr"]) == snr
            ]
            grp = sorted(grp, key=lambda r: float(r["xi"]))
            ax.plot(_floats(grp, "xi"), _floats(grp, "mse_hat"), "o-", label="holdout MSE")
            ax.plot(_floats(grp, "xi"), _floats(grp, "true_err"), "s--", label="true error + var")
            ax.set_xscale("log")
            ax.set_title(f"bias={bias:g}, snr={snr:g}", fontsize=8)
            if i == len(biases) - 1:
                ax.set_xlabel("xi")
    axes[0][0].legend(fontsize=7)


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the output path."""
    rows = read_table(spec.csv_path, spec.kind)
    out = Path(spec.output_path)
    if spec.kind == "xi":
        fig = plt.figure(figsize=(9, 5.5), dpi=110)
        _render_xi(rows, fig)
    else:
        fig = plt.figure(figsize=(6, 4.2), dpi=110)
        ax = fig.add_subplot(111)
        if spec.kind == "placement":
            _render_placement(rows, ax)
        else:
            _render_mconv(rows, ax)
        ax.set_xscale(spec.x_scale)
        ax.set_yscale(spec.y_scale)
        ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    out.parent.mkdir(parents=True, exist_ok=True)
    # suppress PNG text metadata so identical inputs give identical bytes
    fig.savefig(out, metadata={"Software": None} if out.suffix == ".png" else None)
    plt.close(fig)
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pbdw-figures", description="render figures from pbdw study CSVs"
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("csv_path")
    parser.add_argument("output_path")
    parser.add_argument("--x-scale", default="", choices=["", "linear", "log"])
    parser.add_argument("--y-scale", default="", choices=["", "linear", "log"])
    args = parser.parse_args(argv)
    try:
        out = render(
            FigureSpec(
                csv_path=args.csv_path,
                kind=args.kind,
                output_path=args.output_path,
                x_scale=args.x_scale,
                y_scale=args.y_scale,
            )
        )
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
