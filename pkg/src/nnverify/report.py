"""Report rendering: JSON files, delimited summaries and matplotlib figures.

Figures are optional byproducts of the CLI report path; matplotlib is
imported lazily so library users never pay for it.
"""

from __future__ import annotations

import csv
import json
import math
import os

import numpy as np


def save_json(obj: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def image_shape(n: int):
    side = math.isqrt(n)
    if side * side == n:
        return side, side
    return 1, n


def conformance_figure(reports: list, path) -> None:
    """Max/mean deviation per format on a log scale, flips annotated."""
    plt = _pyplot()
    labels = [r["format"] for r in reports]
    max_dev = [max(r["summary"]["max_abs_dev"], 1e-18) for r in reports]
    mean_dev = [max(r["summary"]["mean_abs_dev"], 1e-18) for r in reports]
    flips = [r["summary"]["classification_flips"] for r in reports]
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.semilogy(x, max_dev, "o-", label="max |float - fxp|")
    ax.semilogy(x, mean_dev, "s--", label="mean |float - fxp|")
    for xi, (d, f) in enumerate(zip(max_dev, flips)):
        if f:
            ax.annotate(f"{f} flips", (xi, d), textcoords="offset points",
                        xytext=(0, 8), ha="center", fontsize=8)
    ax.set_xticks(x)
    ax.set_xticklabels(labels)
    ax.set_xlabel("fixed-point format")
    ax.set_ylabel("absolute deviation")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def witness_figure(base, witness, path) -> None:
    """Base input and witness side by side with the changed cells marked."""
    plt = _pyplot()
    base = np.asarray(base, dtype=float)
    witness = np.asarray(witness, dtype=float)
    h, w = image_shape(base.size)
    fig, axes = plt.subplots(1, 3, figsize=(7.5, 2.8))
    for ax, img, title in zip(
        axes,
        [base.reshape(h, w), witness.reshape(h, w),
         np.abs(base - witness).reshape(h, w)],
        ["base", "witness", "|difference|"],
    ):
        ax.imshow(img, cmap="gray_r", vmin=0.0, vmax=1.0)
        ax.set_title(title, fontsize=9)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def coverage_figure(report: dict, path) -> None:
    """Covered-neuron counts per layer against layer width."""
    plt = _pyplot()
    neurons = report["covered_neurons"]
    layers = {}
    for layer, _idx in neurons:
        layers[layer] = layers.get(layer, 0) + 1
    max_layer = max((l for l, _ in neurons), default=0)
    x = np.arange(max_layer + 1)
    counts = [layers.get(l, 0) for l in x]
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    ax.bar(x, counts, color="#4878a8")
    ax.axhline(0, color="black", linewidth=0.8)
    ax.set_xlabel("layer")
    ax.set_ylabel("covered neurons")
    ax.set_title(
        f"{report['method']} coverage {report['ratio']:.1%} "
        f"(goal {report['config']['p']:.0%})",
        fontsize=10,
    )
    ax.set_xticks(x)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def intervals_figure(layer_blobs: list, path) -> None:
    """Output bounds per neuron, one panel per layer."""
    plt = _pyplot()
    n = len(layer_blobs)
    fig, axes = plt.subplots(1, n, figsize=(3.0 * n, 3.2), squeeze=False)
    for ax, blob in zip(axes[0], layer_blobs):
        lo = [iv[0] for iv in blob["outputs"]]
        hi = [iv[1] for iv in blob["outputs"]]
        mid = [(a + b) / 2 for a, b in zip(lo, hi)]
        err = [(b - a) / 2 for a, b in zip(lo, hi)]
        x = np.arange(len(lo))
        ax.errorbar(x, mid, yerr=err, fmt="o", capsize=3)
        ax.set_title(f"layer {blob['layer']} outputs", fontsize=9)
        ax.set_xlabel("neuron")
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def conformance_csv(reports: list, path) -> None:
    rows = [
        (
            r["format"],
            r["summary"]["max_abs_dev"],
            r["summary"]["mean_abs_dev"],
            r["summary"]["classification_flips"],
            r["summary"]["inputs"],
        )
        for r in reports
    ]
    write_csv(path, ["format", "max_abs_dev", "mean_abs_dev", "flips", "inputs"], rows)


def coverage_csv(report: dict, path) -> None:
    rows = [(layer, idx) for layer, idx in report["covered_neurons"]]
    write_csv(path, ["layer", "neuron"], rows)


def intervals_csv(layer_blobs: list, path) -> None:
    rows = []
    for blob in layer_blobs:
        for idx, ((plo, phi), (ylo, yhi)) in enumerate(
            zip(blob["potentials"], blob["outputs"])
        ):
            rows.append((blob["layer"], idx, plo, phi, ylo, yhi))
    write_csv(
        path,
        ["layer", "neuron", "potential_lo", "potential_hi", "output_lo", "output_hi"],
        rows,
    )


def verdict_csv(blob: dict, path) -> None:
    stats = blob["statistics"]
    write_csv(
        path,
        ["verdict", "nodes_explored", "nodes_pruned_invariant",
         "nodes_pruned_region", "leaves_evaluated", "k_final", "wall_time_s"],
        [(
            blob["verdict"],
            stats["nodes_explored"],
            stats["nodes_pruned_invariant"],
            stats["nodes_pruned_region"],
            stats["leaves_evaluated"],
            stats["k_final"],
            stats["wall_time_s"],
        )],
    )


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
