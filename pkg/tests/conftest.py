"""Shared fixtures: small patterns and a quickly trained model."""

from __future__ import annotations

import numpy as np
import pytest

from iegtrack.core import Pattern
from iegtrack.ieg import AdamState, init_model, ranges_from_samples, train
from iegtrack.synth import SynthConfig, generate_training_set


@pytest.fixture(scope="session")
def checker_pattern() -> Pattern:
    """A 32x32 two-by-two checkerboard: edges along both axes."""
    img = np.ones((32, 32))
    img[4:16, 4:16] = 0.0
    img[16:28, 16:28] = 0.0
    return Pattern.from_array(img)


@pytest.fixture(scope="session")
def bar_pattern() -> Pattern:
    """A single dark bar on a light field."""
    img = np.ones((24, 24))
    img[8:16, 4:20] = 0.0
    return Pattern.from_array(img)


@pytest.fixture(scope="session")
def small_config() -> SynthConfig:
    return SynthConfig(
        delta_bar=0.01,
        sigma=2.0,
        w=4.0,
        t_range=(0.0, 0.02),
        v_range=(-150.0, 150.0),
        omega_range=(-2.0, 2.0),
        background_ratio=0.25,
    )


@pytest.fixture(scope="session")
def bar_pattern_file(bar_pattern, tmp_path_factory) -> str:
    """The bar pattern saved as a PGM image, for CLI paths."""
    from iegtrack.core import save_pgm

    path = tmp_path_factory.mktemp("patterns") / "bar.pgm"
    save_pgm(path, bar_pattern.intensity)
    return str(path)


@pytest.fixture(scope="session")
def small_model_file(trained_small, tmp_path_factory) -> str:
    """The session's small trained model saved to disk, for CLI paths."""
    from iegtrack.ieg import save_model

    path = tmp_path_factory.mktemp("models") / "small.iegm"
    save_model(trained_small[0], path)
    return str(path)


@pytest.fixture(scope="session")
def tiny_events_file(tmp_path_factory) -> str:
    """A handful of hand-rolled events in CSV form, for CLI paths."""
    path = tmp_path_factory.mktemp("events") / "tiny.csv"
    rows = ["t,x,y,polarity"]
    for i in range(60):
        rows.append(f"{i * 1e-4},{10.0 + 0.1 * i},{12.0},{1 if i % 2 else -1}")
    path.write_text("\n".join(rows) + "\n")
    return str(path)


@pytest.fixture(scope="session")
def trained_small(bar_pattern, small_config):
    """A small model fitted on the bar pattern, good enough for smoke tracking.

    Session-scoped because training, although only a few seconds, is the
    most expensive fixture in the suite.
    """
    samples = generate_training_set(bar_pattern, small_config, 20000, seed=9)
    model = init_model(
        [48, 48, 48],
        seed=4,
        input_ranges=ranges_from_samples(samples),
        fourier_octaves=4,
    )
    adam = AdamState.for_model(model, lr=2e-3)
    model, history = train(model, samples, epochs=12, batch_size=128, adam=adam, seed=4)
    return model, history, samples
