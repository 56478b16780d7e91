from pathlib import Path

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"
DATA = Path(__file__).parent.parent / "src" / "bops" / "data"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def e5645():
    from bops.core import load_spec

    return load_spec(DATA / "e5645.spec")


@pytest.fixture
def d510():
    from bops.core import load_spec

    return load_spec(DATA / "d510.spec")
