import shutil
import tempfile
from fractions import Fraction

import pytest

from sleepcomb import config
from sleepcomb.core import LossFunction, LossRange
from sleepcomb.labels import parse_label


@pytest.fixture(autouse=True)
def default_config(monkeypatch):
    """Every test starts from the default configuration and no env overrides."""
    monkeypatch.delenv(config.ENUM_CAP_ENV, raising=False)
    config.activate(config.SleepcombConfig())
    yield
    config.activate(None)


@pytest.fixture
def temp_workspace():
    """Fixture providing a temporary workspace for tests."""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir)


@pytest.fixture
def make_losses():
    """Factory for exact loss functions: ``make_losses({"1:0": "1/2", "T": 0})``."""

    def build(values, loss_range=LossRange.UNIT):
        return LossFunction(
            {parse_label(k): Fraction(v) for k, v in values.items()}, loss_range
        )

    return build
