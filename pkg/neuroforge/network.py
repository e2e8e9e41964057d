"""Provides the feedforward phenotype network decoded from a genome.

The network is a scalar value function V(x). Hidden nodes use the logistic
transfer function, the output node and the input/bias nodes are identity.
The weight vector is indexed by the genome's enabled genes in gene order,
so `Network.weights[ i ]` is the weight of the i-th enabled gene.
"""

##############################################################################
# Python imports.
from heapq  import heapify, heappop, heappush
from math   import exp
from typing import Iterable, Sequence

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from .errors import CycleError, DimensionError
from .genome import Genome, Role

##############################################################################
def topological_order(
    edges: Iterable[ tuple[ int, int ] ], nodes: Iterable[ int ] = ()
) -> list[ int ]:
    """Order nodes so that every edge's source comes before its target.

    Among nodes that are free to go next, the lowest ID goes first, so the
    order is deterministic.

    Args:
        edges: The `(source, target)` pairs.
        nodes: Extra nodes to include even if no edge touches them.

    Returns:
        The node ordering.

    Raises:
        CycleError: If the edges contain a cycle.
    """
    outgoing: dict[ int, list[ int ] ] = {}
    indegree: dict[ int, int ] = { node: 0 for node in nodes }
    for source, target in edges:
        outgoing.setdefault( source, [] ).append( target )
        indegree.setdefault( source, 0 )
        indegree[ target ] = indegree.get( target, 0 ) + 1
    heapify( ready := [ node for node, count in indegree.items() if count == 0 ] )
    order: list[ int ] = []
    while ready:
        order.append( node := heappop( ready ) )
        for target in outgoing.get( node, [] ):
            indegree[ target ] -= 1
            if not indegree[ target ]:
                heappush( ready, target )
    if len( order ) != len( indegree ):
        raise CycleError( "The edges contain a cycle" )
    return order

##############################################################################
def logistic( value: float ) -> float:
    """The standard logistic function, safe against overflow."""
    if value >= 0:
        return 1.0 / ( 1.0 + exp( -value ) )
    return ( scale := exp( value ) ) / ( 1.0 + scale )

##############################################################################
class Network:
    """A decoded feedforward network computing a scalar value."""

    def __init__(
        self,
        inputs: Sequence[ int ],
        bias: int,
        output: int,
        hidden: Sequence[ int ],
        edges: Sequence[ tuple[ int, int ] ],
        weights: Sequence[ float ] | np.ndarray
    ) -> None:
        """Initialise the network.

        Args:
            inputs: The input node IDs, in input order.
            bias: The ID of the bias node.
            output: The ID of the output node.
            hidden: The hidden node IDs.
            edges: The `(source, target)` pairs; edge `i` uses weight `i`.
            weights: The weights.

        Raises:
            CycleError: If the edges contain a cycle.
        """
        self.inputs  = list( inputs )
        self.bias    = bias
        self.output  = output
        self.hidden  = set( hidden )
        self.edges   = list( edges )
        self.weights = np.array( weights, dtype=float )
        if len( self.weights ) != len( self.edges ):
            raise DimensionError( "There must be one weight per edge" )
        self.order = topological_order( self.edges, [ *self.inputs, bias, output, *hidden ] )
        position = { node: index for index, node in enumerate( self.order ) }
        incoming: dict[ int, list[ tuple[ int, int ] ] ] = {}
        for weight_index, ( source, target ) in enumerate( self.edges ):
            incoming.setdefault( target, [] ).append( ( position[ source ], weight_index ) )
        self._input_positions = [ position[ node ] for node in self.inputs ]
        self._bias_position   = position[ bias ]
        self._output_position = position[ output ]
        # Evaluation plan: (position, is hidden, incoming (source position, weight index)).
        self._plan = [
            ( position[ node ], node in self.hidden, incoming.get( node, [] ) )
            for node in self.order
            if node != bias and node not in self.inputs
        ]

    @property
    def input_count( self ) -> int:
        """The number of inputs the network takes (not counting the bias)."""
        return len( self.inputs )

    def _activate( self, features: Sequence[ float ] ) -> list[ float ]:
        if len( features ) != len( self.inputs ):
            raise DimensionError(
                f"Expected {len( self.inputs )} inputs, got {len( features )}"
            )
        weights = self.weights.tolist()
        values = [ 0.0 ] * len( self.order )
        for position, value in zip( self._input_positions, features ):
            values[ position ] = float( value )
        values[ self._bias_position ] = 1.0
        for position, hidden, incoming in self._plan:
            total = 0.0
            for source, weight_index in incoming:
                total += weights[ weight_index ] * values[ source ]
            values[ position ] = logistic( total ) if hidden else total
        return values

    def forward( self, features: Sequence[ float ] ) -> float:
        """Compute the value of the given input.

        Args:
            features: The input vector.

        Returns:
            V(features).

        Raises:
            DimensionError: If the input has the wrong size.
        """
        return self._activate( features )[ self._output_position ]

    def value_and_gradient( self, features: Sequence[ float ] ) -> tuple[ float, np.ndarray ]:
        """Compute the value and its exact gradient with respect to the weights.

        Args:
            features: The input vector.

        Returns:
            V(features) and ∂V/∂w.

        Raises:
            DimensionError: If the input has the wrong size.
        """
        values = self._activate( features )
        weights = self.weights.tolist()
        gradient = [ 0.0 ] * len( weights )
        adjoint = [ 0.0 ] * len( values )
        adjoint[ self._output_position ] = 1.0
        for position, hidden, incoming in reversed( self._plan ):
            if not ( upstream := adjoint[ position ] ):
                continue
            if hidden:
                upstream *= values[ position ] * ( 1.0 - values[ position ] )
            for source, weight_index in incoming:
                gradient[ weight_index ] += upstream * values[ source ]
                adjoint[ source ] += upstream * weights[ weight_index ]
        return values[ self._output_position ], np.array( gradient )

    def gradient( self, features: Sequence[ float ] ) -> np.ndarray:
        """Compute ∂V/∂w for the given input.

        Args:
            features: The input vector.

        Returns:
            The gradient, one component per weight.
        """
        return self.value_and_gradient( features )[ 1 ]

    def copy( self ) -> "Network":
        """Get an independent copy of the network."""
        clone = object.__new__( Network )
        clone.__dict__.update( self.__dict__ )
        clone.weights = self.weights.copy()
        return clone

##############################################################################
def decode( genome: Genome ) -> Network:
    """Decode a genome into its phenotype network.

    Only enabled genes are expressed; weight `i` of the network is the
    weight of the i-th enabled gene of the genome.

    Args:
        genome: The genome to decode.

    Returns:
        The network.

    Raises:
        CycleError: If the enabled connections contain a cycle.
    """
    outputs = genome.nodes_with( Role.OUTPUT )
    if len( outputs ) != 1:
        raise DimensionError( "A value network needs exactly one output node" )
    enabled = genome.enabled
    return Network(
        inputs  = genome.nodes_with( Role.INPUT ),
        bias    = genome.nodes_with( Role.BIAS )[ 0 ],
        output  = outputs[ 0 ],
        hidden  = genome.nodes_with( Role.HIDDEN ),
        edges   = [ gene.link for gene in enabled ],
        weights = [ gene.weight for gene in enabled ]
    )

### network.py ends here
