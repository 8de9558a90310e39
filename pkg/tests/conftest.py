import pytest

from mcreach import MarkovChain, csr_from_triplets


@pytest.fixture
def demo_chain():
    """Four-state chain with one absorbing trap (1) and one absorbing target (3)."""
    entries = [
        (0, 2, 0.5),
        (0, 3, 0.5),
        (1, 1, 1.0),
        (2, 0, 0.4),
        (2, 1, 0.6),
        (3, 3, 1.0),
    ]
    return MarkovChain(n=4, transitions=csr_from_triplets(4, entries), initial=0)
