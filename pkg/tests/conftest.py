import sys
from pathlib import Path

import pytest
import torch

sys.path.insert(0, str(Path(__file__).parent))

from haze_restore.cyclegan import DiscriminatorConfig
from haze_restore.data import make_synthetic_dataset
from haze_restore.ffa import FFAConfig


@pytest.fixture(scope="session")
def tiny_ffa_cfg():
    return FFAConfig(num_groups=1, blocks_per_group=2, feature_dim=16, kernel_size=3, ca_reduction=4)


@pytest.fixture(scope="session")
def tiny_disc_cfg():
    return DiscriminatorConfig(base_channels=8, num_layers=2)


@pytest.fixture(scope="session")
def toy_root(tmp_path_factory):
    """Six 48x48 synthetic haze pairs plus unpaired images of both domains."""
    root = tmp_path_factory.mktemp("toy_data")
    return make_synthetic_dataset(root, n_paired=6, n_unpaired=6, size=(48, 48), seed=3)


@pytest.fixture(autouse=True)
def deterministic_torch():
    torch.manual_seed(0)
