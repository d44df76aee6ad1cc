"""Benchmark fixtures: vocalic bitmaps, dataset generation, demo networks.

The 5x5 vowel glyphs are the pattern-recognition benchmark inputs; the
A and O glyphs intentionally differ in exactly six pixels so their
euclidean distance is sqrt(6).  The trained 25-10-4-5 classifier ships
as a repository fixture (training itself is out of scope here).
"""

from __future__ import annotations

import importlib.resources
import random
from dataclasses import dataclass

import numpy as np

from nnverify.nets import (
    ActivationKind,
    Layer,
    Network,
    load_nnet,
)

VOWELS = "AEIOU"

_GLYPH_ROWS = {
    "A": ["01110", "10001", "11111", "10001", "10001"],
    "E": ["11111", "10000", "11110", "10000", "11111"],
    "I": ["11111", "00100", "00100", "00100", "11111"],
    "O": ["01110", "10001", "10001", "10001", "11111"],
    "U": ["10001", "10001", "10001", "10001", "01110"],
}


def glyph(vowel: str) -> np.ndarray:
    """5x5 binary bitmap of a vowel, as a float array of 0/1 pixels."""
    rows = _GLYPH_ROWS[vowel.upper()]
    return np.array([[float(c) for c in row] for row in rows])


def glyph_vector(vowel: str) -> np.ndarray:
    return glyph(vowel).reshape(-1)


@dataclass
class LabeledImage:
    name: str
    pixels: np.ndarray  # flat, 25 entries in [0, 1]
    label: int | None   # vowel index, or None for non-vocalic


def flip_pixels(pixels: np.ndarray, count: int, rng: random.Random) -> np.ndarray:
    out = pixels.copy()
    for idx in rng.sample(range(len(out)), count):
        out[idx] = 1.0 - out[idx]
    return out


def generate_dataset(
    seed: int = 0,
    noisy_per_vowel: int = 20,
    nonvocalic: int = 100,
    noise_flips: int = 2,
) -> list:
    """Seeded benchmark dataset: clean vowels, noisy vowels, random images."""
    rng = random.Random(seed)
    images = []
    for label, vowel in enumerate(VOWELS):
        images.append(LabeledImage(vowel, glyph_vector(vowel), label))
    for label, vowel in enumerate(VOWELS):
        base = glyph_vector(vowel)
        for i in range(noisy_per_vowel):
            flips = rng.randint(1, max(1, noise_flips))
            images.append(
                LabeledImage(f"{vowel}_noisy{i:02d}", flip_pixels(base, flips, rng), label)
            )
    vowel_keys = {tuple(glyph_vector(v)) for v in VOWELS}
    made = 0
    while made < nonvocalic:
        pix = np.array([float(rng.random() < 0.5) for _ in range(25)])
        if tuple(pix) in vowel_keys:
            continue
        images.append(LabeledImage(f"rand{made:03d}", pix, None))
        made += 1
    return images


def load_vocalic_network() -> Network:
    """The trained 25-10-4-5 vowel classifier, sigmoid on every layer."""
    ref = importlib.resources.files("nnverify.data") / "vocalic.nnet"
    with importlib.resources.as_file(ref) as path:
        return load_nnet(
            path,
            hidden_activation=ActivationKind.SIGMOID_LUT,
            output_activation=ActivationKind.SIGMOID_LUT,
        )


def toy_relu_net() -> Network:
    """2-2-1 net with ReLU hidden pair and identity sum output.

    Output is relu(2x - 3y) + relu(x + 4y); small enough to reason about
    by hand yet already sensitive to narrow fixed-point formats.
    """
    hidden = Layer(
        weights=np.array([[2.0, 1.0], [-3.0, 4.0]]),
        biases=np.zeros(2),
        activation=ActivationKind.RELU,
    )
    out = Layer(
        weights=np.array([[1.0], [1.0]]),
        biases=np.zeros(1),
        activation=ActivationKind.IDENTITY,
    )
    return Network([hidden, out], name="toy_relu")


def potential_demo_net() -> Network:
    """3-2-1 pass-through net whose raw potentials drive coverage demos.

    Potentials propagate unactivated layer to layer, so every recorded
    value is the weighted sum itself; that is what the covering methods
    inspect.
    """
    l1 = Layer(
        weights=np.array([[0.4, 0.6, 0.8], [0.5, 0.7, 0.3]]),
        biases=np.array([-0.2, -0.3, -0.4]),
        activation=ActivationKind.IDENTITY,
    )
    l2 = Layer(
        weights=np.array([[0.6, 0.7], [0.2, 0.2], [0.7, 0.8]]),
        biases=np.array([0.7, 0.3]),
        activation=ActivationKind.IDENTITY,
    )
    l3 = Layer(
        weights=np.array([[0.8], [0.5]]),
        biases=np.array([-0.1]),
        activation=ActivationKind.IDENTITY,
    )
    return Network([l1, l2, l3], name="potential_demo")


DEMO_PROBE_INPUTS = [
    (1.0, -3.0),
    (1.0, -1.0),
    (1.0, -1.2),
    (1.0, -7.0),
]

# Expected potentials for the probe inputs, all six neurons per row.
DEMO_PROBE_POTENTIALS = [
    [-1.3, -1.80, -0.50, -0.79, -1.370, -1.417],
    [-0.3, -0.40, 0.10, 0.51, 0.090, 0.353],
    [-0.4, -0.54, 0.04, 0.38, -0.056, 0.176],
    [-3.3, -4.60, -1.70, -3.39, -4.290, -4.957],
]


def recorded_trace_pair() -> tuple:
    """Recorded 5-4-5 activation potentials for a clean and a noisy input.

    Exactly one neuron per layer changes sign between the two columns,
    which makes the pair a compact regression fixture for the covering
    methods (3 of the 14 neurons end up sign-covered).
    """
    clean = [
        np.array([-1.885322, 8.775419, 2.959348, 10.424796, 8.172012]),
        np.array([-3.863095, 5.328067, -3.770385, 0.574238]),
        np.array([-6.707186, -15.815082, -10.060704, -9.688183, -0.555885]),
    ]
    noisy = [
        np.array([4.619613, 9.796190, 5.743809, 4.046428, 14.466885]),
        np.array([-9.308636, 5.263461, -5.705760, -2.029373]),
        np.array([-7.149290, -17.246468, -13.074245, -4.868999, 3.355738]),
    ]
    return clean, noisy
