"""Tests for the decoded value network."""

##############################################################################
# Pytest imports.
import pytest

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from neuroforge.errors    import CycleError, DimensionError, NoOpError
from neuroforge.genome    import Genome, InnovationRegistry, NodeGene, Role, new_minimal_genome
from neuroforge.network   import Network, decode, logistic, topological_order
from neuroforge.variation import mutate_add_link, mutate_add_node

##############################################################################
LINEAR = [ ( 1, 3, 0.7, True, 1 ), ( 2, 3, 0.0, True, 2 ) ]
"""A single input feeding the output, with an unused bias link."""

HIDDEN = [ *LINEAR, ( 1, 4, 0.0, True, 3 ), ( 4, 3, 1.0, True, 4 ) ]
"""The linear network plus one hidden node sitting at its midpoint."""

##############################################################################
def test_topological_order_of_a_chain() -> None:
    assert topological_order( [ ( 1, 2 ), ( 2, 3 ) ] ) == [ 1, 2, 3 ]

def test_topological_order_of_a_diamond() -> None:
    assert topological_order( [ ( 1, 3 ), ( 1, 2 ), ( 2, 4 ), ( 3, 4 ) ] ) == [ 1, 2, 3, 4 ]

def test_topological_order_includes_isolated_nodes() -> None:
    assert topological_order( [ ( 2, 3 ) ], [ 1 ] ) == [ 1, 2, 3 ]

def test_topological_order_rejects_a_cycle() -> None:
    with pytest.raises( CycleError ):
        topological_order( [ ( 1, 2 ), ( 2, 3 ), ( 3, 2 ) ] )

def test_logistic() -> None:
    assert logistic( 0.0 ) == 0.5
    assert logistic( -1000.0 ) == pytest.approx( 0.0 )
    assert logistic( 1000.0 ) == pytest.approx( 1.0 )

##############################################################################
def test_forward_linear( make_genome ) -> None:
    assert decode( make_genome( LINEAR ) ).forward( [ 2.0 ] ) == pytest.approx( 1.4 )

def test_forward_with_a_hidden_node( make_genome ) -> None:
    network = decode( make_genome( HIDDEN, hidden=( 4, ) ) )
    assert network.forward( [ 2.0 ] ) == pytest.approx( 1.9 )

def test_gradient_linear( make_genome ) -> None:
    assert list( decode( make_genome( LINEAR ) ).gradient( [ 2.0 ] ) ) == pytest.approx( [ 2.0, 1.0 ] )

def test_gradient_behind_a_dead_hidden_node( make_genome ) -> None:
    genes = [ *LINEAR, ( 1, 4, 0.3, True, 3 ), ( 4, 3, 0.0, True, 4 ) ]
    gradient = decode( make_genome( genes, hidden=( 4, ) ) ).gradient( [ 2.0 ] )
    assert gradient[ 2 ] == 0.0
    assert gradient[ 3 ] == pytest.approx( logistic( 0.6 ) )

def test_disabled_genes_are_not_expressed( make_genome ) -> None:
    network = decode( make_genome( [ ( 1, 3, 0.7, True, 1 ), ( 2, 3, 0.5, False, 2 ) ] ) )
    assert len( network.weights ) == 1
    assert network.forward( [ 2.0 ] ) == pytest.approx( 1.4 )

def test_weights_can_be_updated_in_place( make_genome ) -> None:
    network = decode( make_genome( LINEAR ) )
    network.weights += 1.0
    assert network.forward( [ 2.0 ] ) == pytest.approx( 4.4 )

def test_copy_is_independent( make_genome ) -> None:
    network = decode( make_genome( LINEAR ) )
    clone = network.copy()
    clone.weights[ 0 ] = 0.0
    assert network.forward( [ 2.0 ] ) == pytest.approx( 1.4 )
    assert clone.forward( [ 2.0 ] ) == 0.0

##############################################################################
def test_wrong_input_size( make_genome ) -> None:
    with pytest.raises( DimensionError ):
        decode( make_genome( LINEAR ) ).forward( [ 1.0, 2.0 ] )

def test_weight_count_must_match_edges() -> None:
    with pytest.raises( DimensionError ):
        Network( [ 1 ], 2, 3, [], [ ( 1, 3 ) ], [ 0.1, 0.2 ] )

def test_decode_needs_one_output() -> None:
    genome = Genome.build( [
        NodeGene( 1, Role.INPUT ), NodeGene( 2, Role.BIAS ), NodeGene( 3, Role.OUTPUT ), NodeGene( 4, Role.OUTPUT )
    ], [] )
    with pytest.raises( DimensionError ):
        decode( genome )

##############################################################################
def _random_genome( registry: InnovationRegistry, rng: np.random.Generator, grow: bool ) -> Genome:
    """Grow a random genome from a minimal one."""
    genome = new_minimal_genome( 2, 1, registry, rng )
    if grow:
        genome = mutate_add_node( genome, registry, rng )
    for _ in range( int( rng.integers( 0, 6 ) ) ):
        if len( genome.connections ) >= 18:
            break
        try:
            genome = mutate_add_node( genome, registry, rng ) if rng.random() < 0.5 else mutate_add_link( genome, registry, rng )
        except NoOpError:
            pass
    return genome

def test_gradient_matches_finite_differences() -> None:
    rng = np.random.default_rng( 99 )
    registry = InnovationRegistry()
    step = 1e-5
    for index in range( 200 ):
        network = decode( _random_genome( registry, rng, grow=index % 2 == 0 ) )
        features = rng.uniform( -1.0, 1.0, 2 ).tolist()
        analytic = network.gradient( features )
        for weight in range( len( network.weights ) ):
            shifted = network.copy()
            shifted.weights[ weight ] += step
            above = shifted.forward( features )
            shifted.weights[ weight ] -= 2 * step
            below = shifted.forward( features )
            assert ( above - below ) / ( 2 * step ) == pytest.approx( analytic[ weight ], rel=1e-4, abs=1e-8 )

### test_network.py ends here
