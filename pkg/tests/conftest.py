"""Shared fixtures for the neuroforge tests."""

##############################################################################
# Python imports.
from typing import Callable, Sequence

##############################################################################
# Pytest imports.
import pytest

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from neuroforge.genome import ConnectionGene, Genome, InnovationRegistry, NodeGene, Role

##############################################################################
GeneSpec = tuple[ int, int, float, bool, int ]
"""A connection gene as `(in, out, weight, enabled, innovation)`."""

GenomeBuilder = Callable[ ..., Genome ]

##############################################################################
def build_genome(
    genes: Sequence[ GeneSpec ],
    inputs: Sequence[ int ] = ( 1, ),
    bias: int = 2,
    output: int = 3,
    hidden: Sequence[ int ] = ()
) -> Genome:
    """Build a genome from a compact description of its genes.

    Args:
        genes: The connection genes.
        inputs: The input node IDs.
        bias: The bias node ID.
        output: The output node ID.
        hidden: The hidden node IDs.

    Returns:
        The validated genome.
    """
    return Genome.build(
        [
            *( NodeGene( node, Role.INPUT ) for node in inputs ),
            NodeGene( bias, Role.BIAS ),
            NodeGene( output, Role.OUTPUT ),
            *( NodeGene( node, Role.HIDDEN ) for node in hidden )
        ],
        [ ConnectionGene( *gene ) for gene in genes ]
    ).validate()

##############################################################################
@pytest.fixture
def make_genome() -> GenomeBuilder:
    """Provide the genome builder."""
    return build_genome

@pytest.fixture
def rng() -> np.random.Generator:
    """A freshly seeded random number generator."""
    return np.random.default_rng( 1234 )

@pytest.fixture
def registry() -> InnovationRegistry:
    """An empty innovation registry."""
    return InnovationRegistry()

### conftest.py ends here
