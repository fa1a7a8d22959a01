import pytest
from loguru import logger

from mm.core.ingest import GeneratorConfig, generate
from tests.oracles import build_system


@pytest.fixture(autouse=True)
def _reset_loguru():
    yield
    # The CLI reconfigures sinks; never let one outlive the test's captured streams.
    logger.remove()


@pytest.fixture
def caplog(caplog):
    """Routes loguru records into pytest's caplog."""
    handler_id = logger.add(caplog.handler, format="{message}", level=0)
    yield caplog
    try:
        logger.remove(handler_id)
    except ValueError:
        pass


@pytest.fixture
def envy_system():
    """Method 1 sits in class 0 but only touches class 1's attributes.

    class 0: attribute 0; m0 -> {a0}, m1 -> {a1, a2}
    class 1: attributes 1, 2; m2 -> {a1, a2}, m3 -> {a1}
    """
    return build_system([
        ([0], {0: ([], [0]), 1: ([], [1, 2])}),
        ([1, 2], {2: ([], [1, 2]), 3: ([], [1])}),
    ])


@pytest.fixture
def coupling_system():
    """Class 0's method 0 is its only user of classes 1 and 2; no attributes anywhere.

    m0 calls m2 (class 1) and m3 (class 2); m2 calls m3.
    """
    return build_system([
        ([], {0: ([2, 3], []), 1: ([], [])}),
        ([], {2: ([3], [])}),
        ([], {3: ([], [])}),
    ])


@pytest.fixture
def cohesive_system():
    """Every method uses every own attribute."""
    return build_system([
        ([0, 1], {0: ([1], [0, 1]), 1: ([], [0, 1])}),
        ([2], {2: ([0], [2]), 3: ([], [2])}),
    ])


@pytest.fixture
def generated_small():
    return generate(GeneratorConfig(n_classes=5, n_methods=30, n_attributes=20,
                                    max_calls_per_method=3, max_accesses_per_method=3, seed=42))
