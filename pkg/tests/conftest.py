import pytest

from app import create_app
from app.utils.ring import PrimeField
from app.utils.sampling import PointSampler


@pytest.fixture(scope='session')
def field():
    return PrimeField()


@pytest.fixture
def sampler(field):
    """Fixed-seed sampler so modular checks draw the same points every run."""
    return PointSampler(field, seed=0)


@pytest.fixture(scope='session')
def workbench():
    return create_app('testing')


@pytest.fixture
def scenario_file(tmp_path):
    """Write a TOML scenario into tmp_path and return its path."""
    def write(text: str, name: str = 'scenario.toml') -> str:
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return str(path)
    return write
