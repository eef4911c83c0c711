import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from modclass.sigsynth import ModulationScheme, SignalParams


@pytest.fixture
def params():
    """Standard experiment parameters: 16 kHz / 2 kHz / 100 baud / 14 symbols."""
    return SignalParams()


@pytest.fixture
def scheme():
    def _scheme(name):
        return ModulationScheme.from_name(name)

    return _scheme
