import os
from pathlib import Path

import numpy as np
import pytest

from tdcae.model import HTdcAutoencoder, LatentPartition
from tdcae.nn import Activation, DenseLayer, Mlp


def identity_autoencoder(n_features: int) -> HTdcAutoencoder:
    """A model that reconstructs its input exactly: single identity layers
    and an all-statistical latent space."""
    eye = np.eye(n_features)
    encoder = Mlp([DenseLayer(eye.copy(), np.zeros(n_features), Activation.IDENTITY)])
    decoder = Mlp([DenseLayer(eye.copy(), np.zeros(n_features), Activation.IDENTITY)])
    return HTdcAutoencoder(encoder, decoder, LatentPartition(0, n_features))


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


def batadal_paths():
    """(train_csv, test_csv) when the public dataset is available, else None.

    Looked up under $BATADAL_DIR or ./data; training data is the attack-free
    file, the test file must carry the label column.
    """
    root = os.environ.get("BATADAL_DIR")
    candidates = [Path(root)] if root else []
    candidates.append(Path(__file__).resolve().parents[1] / "data")
    for base in candidates:
        train = base / "BATADAL_dataset03.csv"
        test = base / "BATADAL_test_dataset.csv"
        if train.exists() and test.exists():
            return train, test
    return None
