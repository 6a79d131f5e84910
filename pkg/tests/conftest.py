import pytest

from jordanium.algebra import build_hermitian
from jordanium.derivations import derivation_basis


class AlbertContext:
    """Lazy shared handles for the 27-dimensional exceptional algebra.

    The derivation basis is the most expensive object in the suite; computing
    it once and reusing it across files keeps the wall clock sane.  Accessors
    compute on first touch so the cost lands inside whichever test (usually
    the timed acceptance criterion) asks first.
    """

    def __init__(self):
        self._algebra = None
        self._der = None

    @property
    def algebra(self):
        if self._algebra is None:
            self._algebra = build_hermitian(3, 3)
        return self._algebra

    @property
    def der(self):
        if self._der is None:
            self._der = derivation_basis(self.algebra)
        return self._der


@pytest.fixture(scope="session")
def albert_ctx():
    return AlbertContext()
