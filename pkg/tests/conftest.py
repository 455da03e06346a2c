import pytest

from gzsums.brandt import CURVE_11A
from gzsums.gzsum import build_instance
from gzsums.quat import algebra_from_ramification, maximal_order, right_ideal_classes


@pytest.fixture(scope="session")
def classes11():
    return right_ideal_classes(maximal_order(algebra_from_ramification([11])))


@pytest.fixture(scope="session")
def classes2():
    return right_ideal_classes(maximal_order(algebra_from_ramification([2])))


@pytest.fixture(scope="session")
def flagship(classes11):
    """11a, Q(sqrt -67), p = 3, l = 5, levels up to 2."""
    return build_instance(CURVE_11A, -67, 3, 5, 2, classes=classes11)


@pytest.fixture(scope="session")
def flagship7(classes11):
    return build_instance(CURVE_11A, -67, 3, 7, 2, classes=classes11)


@pytest.fixture(scope="session")
def flagship_n3(classes11):
    return build_instance(CURVE_11A, -67, 3, 5, 3, classes=classes11)
