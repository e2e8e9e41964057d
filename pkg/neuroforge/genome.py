"""Provides the genome representation: node genes, connection genes and the
innovation registry that keeps their historical markers aligned.
"""

##############################################################################
# Python imports.
from dataclasses import dataclass, field, replace
from enum        import Enum
from json        import JSONEncoder, dumps, loads
from pathlib     import Path
from typing      import Any, Iterable, NamedTuple, Sequence

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from .errors import CycleError, GenomeError, GenomeSchemaError

##############################################################################
class Role( Enum ):
    """The functional role of a node."""

    INPUT  = "input"
    BIAS   = "bias"
    OUTPUT = "output"
    HIDDEN = "hidden"

    @property
    def is_source( self ) -> bool:
        """Can a connection start at a node with this role?"""
        return self is not Role.OUTPUT

    @property
    def is_target( self ) -> bool:
        """Can a connection end at a node with this role?"""
        return self in ( Role.OUTPUT, Role.HIDDEN )

##############################################################################
@dataclass( frozen=True )
class NodeGene:
    """A node gene."""

    id: int
    """The globally-unique identifier of the node."""

    role: Role
    """The functional role of the node."""

##############################################################################
@dataclass( frozen=True )
class ConnectionGene:
    """A connection gene."""

    in_node: int
    """The ID of the node the connection comes from."""

    out_node: int
    """The ID of the node the connection goes to."""

    weight: float
    """The weight of the connection."""

    enabled: bool
    """Is the connection expressed in the phenotype?"""

    innovation: int
    """The historical marker for the connection."""

    @property
    def link( self ) -> tuple[ int, int ]:
        """The `(in, out)` pair for the connection."""
        return self.in_node, self.out_node

##############################################################################
@dataclass( frozen=True )
class Genome:
    """A genome: an ordered array of node genes and connection genes.

    Genomes are values; every variation operator returns a new genome.
    """

    nodes: tuple[ NodeGene, ... ]
    """The node genes, in ID order."""

    connections: tuple[ ConnectionGene, ... ]
    """The connection genes, in innovation order."""

    raw_fitness: float | None = None
    """The raw fitness, or `None` if the genome hasn't been evaluated."""

    adjusted_fitness: float = 0.0
    """The shared (adjusted) fitness."""

    @staticmethod
    def build(
        nodes: Iterable[ NodeGene ],
        connections: Iterable[ ConnectionGene ],
        raw_fitness: float | None = None
    ) -> "Genome":
        """Build a genome, putting the genes into their canonical order.

        Args:
            nodes: The node genes.
            connections: The connection genes.
            raw_fitness: The raw fitness, if known.

        Returns:
            The new genome.
        """
        return Genome(
            tuple( sorted( nodes, key=lambda node: node.id ) ),
            tuple( sorted( connections, key=lambda gene: gene.innovation ) ),
            raw_fitness
        )

    @property
    def innovations( self ) -> list[ int ]:
        """The innovation numbers of the genome, in gene order."""
        return [ gene.innovation for gene in self.connections ]

    @property
    def max_innovation( self ) -> int:
        """The largest innovation number in the genome (0 if it has none)."""
        return self.connections[ -1 ].innovation if self.connections else 0

    @property
    def node_roles( self ) -> dict[ int, Role ]:
        """Map of node ID to role."""
        return { node.id: node.role for node in self.nodes }

    def nodes_with( self, *roles: Role ) -> list[ int ]:
        """Get the IDs of the nodes that have any of the given roles.

        Args:
            roles: The roles to look for.

        Returns:
            The matching node IDs, in ID order.
        """
        return [ node.id for node in self.nodes if node.role in roles ]

    @property
    def input_count( self ) -> int:
        """The number of input nodes."""
        return len( self.nodes_with( Role.INPUT ) )

    @property
    def hidden_count( self ) -> int:
        """The number of hidden nodes."""
        return len( self.nodes_with( Role.HIDDEN ) )

    @property
    def enabled( self ) -> list[ ConnectionGene ]:
        """The enabled connection genes, in gene order."""
        return [ gene for gene in self.connections if gene.enabled ]

    @property
    def weights( self ) -> np.ndarray:
        """The weights of the enabled genes, in gene order."""
        return np.array( [ gene.weight for gene in self.enabled ], dtype=float )

    def with_weights( self, weights: Sequence[ float ] | np.ndarray ) -> "Genome":
        """Get a copy of the genome with new enabled-gene weights.

        Args:
            weights: One weight per enabled gene, in gene order.

        Returns:
            A new, unevaluated, genome.
        """
        new_weights = iter( float( weight ) for weight in weights )
        genes = tuple(
            replace( gene, weight=next( new_weights ) ) if gene.enabled else gene
            for gene in self.connections
        )
        return Genome( self.nodes, genes )

    def with_fitness( self, raw: float | None ) -> "Genome":
        """Get a copy of the genome with the given raw fitness."""
        return replace( self, raw_fitness=raw, adjusted_fitness=0.0 )

    def validate( self ) -> "Genome":
        """Check the invariants of the genome.

        Returns:
            The genome itself.

        Raises:
            GenomeError: If any invariant doesn't hold.
            CycleError: If the enabled connections form a cycle.
        """
        roles = self.node_roles
        if len( roles ) != len( self.nodes ):
            raise GenomeError( "Node IDs are not unique" )
        if list( roles.values() ).count( Role.BIAS ) != 1:
            raise GenomeError( "A genome must have exactly one bias node" )
        links: set[ tuple[ int, int ] ] = set()
        previous = 0
        for gene in self.connections:
            if gene.innovation <= previous:
                raise GenomeError( f"Innovation {gene.innovation} is out of order" )
            previous = gene.innovation
            if gene.in_node not in roles or gene.out_node not in roles:
                raise GenomeError( f"Innovation {gene.innovation} references an unknown node" )
            if not roles[ gene.in_node ].is_source:
                raise GenomeError( f"Innovation {gene.innovation} starts at an output node" )
            if not roles[ gene.out_node ].is_target:
                raise GenomeError( f"Innovation {gene.innovation} ends at an input or bias node" )
            if gene.link in links:
                raise GenomeError( f"Connection {gene.link} is duplicated" )
            links.add( gene.link )
        if has_cycle( gene.link for gene in self.enabled ):
            raise CycleError( "The enabled connections contain a cycle" )
        return self

    @property
    def as_dict( self ) -> dict[ str, Any ]:
        """The genome as a JSON-friendly dictionary."""
        return {
            "nodes": [ { "id": node.id, "role": node.role.value } for node in self.nodes ],
            "connections": [ {
                "in":         gene.in_node,
                "out":        gene.out_node,
                "weight":     gene.weight,
                "enabled":    gene.enabled,
                "innovation": gene.innovation
            } for gene in self.connections ],
            "fitness": { "raw": self.raw_fitness }
        }

    @staticmethod
    def from_dict( data: dict[ str, Any ] ) -> "Genome":
        """Create a genome from the given dictionary.

        Args:
            data: The dictionary to load data from.

        Returns:
            The genome.

        Raises:
            GenomeSchemaError: If the data doesn't look like a genome.
        """

        def _get( source: Any, key: str, kind: type | tuple[ type, ... ], path: str ) -> Any:
            if not isinstance( source, dict ) or key not in source:
                raise GenomeSchemaError( path, "missing" )
            value = source[ key ]
            # bool is an int subclass; only accept it where a bool is asked for.
            if not isinstance( value, kind ) or ( isinstance( value, bool ) and kind is not bool ):
                raise GenomeSchemaError( path, f"expected {kind}, got {type( value ).__name__}" )
            return value

        nodes: list[ NodeGene ] = []
        for index, node in enumerate( _get( data, "nodes", list, "nodes" ) ):
            path = f"nodes[{index}]"
            role = _get( node, "role", str, f"{path}.role" )
            try:
                nodes.append( NodeGene( _get( node, "id", int, f"{path}.id" ), Role( role ) ) )
            except ValueError:
                raise GenomeSchemaError( f"{path}.role", f"unknown role {role!r}" ) from None

        connections: list[ ConnectionGene ] = []
        for index, gene in enumerate( _get( data, "connections", list, "connections" ) ):
            path = f"connections[{index}]"
            connections.append( ConnectionGene(
                in_node    = _get( gene, "in", int, f"{path}.in" ),
                out_node   = _get( gene, "out", int, f"{path}.out" ),
                weight     = float( _get( gene, "weight", ( int, float ), f"{path}.weight" ) ),
                enabled    = _get( gene, "enabled", bool, f"{path}.enabled" ),
                innovation = _get( gene, "innovation", int, f"{path}.innovation" )
            ) )

        raw = data.get( "fitness", {} ).get( "raw" ) if isinstance( data.get( "fitness" ), dict ) else None
        genome = Genome.build( nodes, connections, None if raw is None else float( raw ) )
        try:
            return genome.validate()
        except GenomeError as error:
            raise GenomeSchemaError( "connections", str( error ) ) from None

##############################################################################
def has_cycle( links: Iterable[ tuple[ int, int ] ] ) -> bool:
    """Does the given set of directed links contain a cycle?

    Args:
        links: The `(source, target)` pairs.

    Returns:
        `True` if there is a cycle, `False` if not.
    """
    outgoing: dict[ int, list[ int ] ] = {}
    indegree: dict[ int, int ] = {}
    for source, target in links:
        outgoing.setdefault( source, [] ).append( target )
        indegree.setdefault( source, 0 )
        indegree[ target ] = indegree.get( target, 0 ) + 1
    ready = [ node for node, count in indegree.items() if count == 0 ]
    seen = 0
    while ready:
        seen += 1
        for target in outgoing.get( ready.pop(), [] ):
            indegree[ target ] -= 1
            if not indegree[ target ]:
                ready.append( target )
    return seen != len( indegree )

def reaches( links: Iterable[ tuple[ int, int ] ], start: Iterable[ int ], goal: int ) -> bool:
    """Is `goal` reachable from any of the `start` nodes along the links?

    Args:
        links: The `(source, target)` pairs.
        start: The nodes to start from.
        goal: The node to look for.

    Returns:
        `True` if there is a path.
    """
    outgoing: dict[ int, list[ int ] ] = {}
    for source, target in links:
        outgoing.setdefault( source, [] ).append( target )
    stack = list( start )
    seen = set( stack )
    while stack:
        if ( node := stack.pop() ) == goal:
            return True
        for target in outgoing.get( node, [] ):
            if target not in seen:
                seen.add( target )
                stack.append( target )
    return False

##############################################################################
class SplitRecord( NamedTuple ):
    """The innovations handed out for splitting a connection."""

    node: int
    """The ID of the new hidden node."""

    in_innovation: int
    """The innovation of the link into the new node."""

    out_innovation: int
    """The innovation of the link out of the new node."""

##############################################################################
@dataclass
class InnovationRegistry:
    """Hands out innovation numbers and node IDs.

    Identical structural innovations made within one generation receive
    identical numbers; the histories are cleared by `new_generation`.
    """

    next_innovation: int = 1
    """The next innovation number to hand out."""

    next_node_id: int = 1
    """The next node ID to hand out."""

    link_history: dict[ tuple[ int, int ], int ] = field( default_factory=dict )
    """The links registered this generation."""

    split_history: dict[ int, SplitRecord ] = field( default_factory=dict )
    """The splits registered this generation, keyed by split innovation."""

    layouts: dict[ tuple[ int, int ], tuple[ list[ int ], int, list[ int ] ] ] = field(
        default_factory=dict
    )
    """The input, bias and output node IDs of minimal genomes, by shape."""

    def new_generation( self ) -> None:
        """Forget the innovations of the current generation."""
        self.link_history.clear()
        self.split_history.clear()

    def new_node( self ) -> int:
        """Allocate a new node ID."""
        self.next_node_id += 1
        return self.next_node_id - 1

    def _allocate( self ) -> int:
        self.next_innovation += 1
        return self.next_innovation - 1

    def register_link( self, in_node: int, out_node: int ) -> int:
        """Get the innovation number for a link.

        Args:
            in_node: The node the link comes from.
            out_node: The node the link goes to.

        Returns:
            The innovation number for the link.
        """
        if in_node == out_node:
            raise ValueError( "A link can't join a node to itself" )
        if ( link := ( in_node, out_node ) ) not in self.link_history:
            self.link_history[ link ] = self._allocate()
        return self.link_history[ link ]

    def register_split( self, gene: ConnectionGene, taken: set[ int ] ) -> SplitRecord:
        """Get the node and innovations for splitting a connection.

        Args:
            gene: The connection being split.
            taken: The node IDs already present in the genome being mutated.

        Returns:
            The split record.

        Note:
            If the cached node for this split is already present in the
            genome a fresh, uncached, split is handed out.
        """
        if ( cached := self.split_history.get( gene.innovation ) ) is not None and cached.node not in taken:
            return cached
        node = self.new_node()
        record = SplitRecord(
            node,
            self.register_link( gene.in_node, node ),
            self.register_link( node, gene.out_node )
        )
        if cached is None:
            self.split_history[ gene.innovation ] = record
        return record

    def layout( self, n_inputs: int, n_outputs: int ) -> tuple[ list[ int ], int, list[ int ] ]:
        """Get the node IDs shared by every minimal genome of the given shape.

        Args:
            n_inputs: The number of inputs.
            n_outputs: The number of outputs.

        Returns:
            The input IDs, the bias ID and the output IDs.
        """
        if ( shape := ( n_inputs, n_outputs ) ) not in self.layouts:
            inputs = [ self.new_node() for _ in range( n_inputs ) ]
            bias = self.new_node()
            self.layouts[ shape ] = ( inputs, bias, [ self.new_node() for _ in range( n_outputs ) ] )
        return self.layouts[ shape ]

##############################################################################
def new_minimal_genome(
    n_inputs: int, n_outputs: int, registry: InnovationRegistry, rng: np.random.Generator
) -> Genome:
    """Create a genome with no hidden nodes and every input fully connected.

    Args:
        n_inputs: The number of input nodes.
        n_outputs: The number of output nodes.
        registry: The innovation registry.
        rng: The random number generator.

    Returns:
        The new genome.
    """
    if n_inputs < 1 or n_outputs < 1:
        raise ValueError( "A genome needs at least one input and one output" )
    inputs, bias, outputs = registry.layout( n_inputs, n_outputs )
    nodes = [ NodeGene( node, Role.INPUT ) for node in inputs ]
    nodes.append( NodeGene( bias, Role.BIAS ) )
    nodes.extend( NodeGene( node, Role.OUTPUT ) for node in outputs )
    connections = [
        ConnectionGene(
            source, target, float( rng.uniform( -1.0, 1.0 ) ), True,
            registry.register_link( source, target )
        )
        for target in outputs for source in [ *inputs, bias ]
    ]
    return Genome.build( nodes, connections )

##############################################################################
class GenePartition( NamedTuple ):
    """The alignment of the genes of two genomes, by innovation number."""

    matching: set[ int ]
    disjoint_a: set[ int ]
    disjoint_b: set[ int ]
    excess_a: set[ int ]
    excess_b: set[ int ]

def classify_genes( a: Genome, b: Genome ) -> GenePartition:
    """Align the genes of two genomes.

    Args:
        a: The first genome.
        b: The second genome.

    Returns:
        The partition of both genomes' innovations.
    """
    in_a, in_b = set( a.innovations ), set( b.innovations )
    only_a, only_b = in_a - in_b, in_b - in_a
    return GenePartition(
        matching   = in_a & in_b,
        disjoint_a = { innovation for innovation in only_a if innovation <= b.max_innovation },
        disjoint_b = { innovation for innovation in only_b if innovation <= a.max_innovation },
        excess_a   = { innovation for innovation in only_a if innovation > b.max_innovation },
        excess_b   = { innovation for innovation in only_b if innovation > a.max_innovation }
    )

##############################################################################
def save_genome(
    path: Path, genome: Genome, encoder: type[ JSONEncoder ] | None = None, **extra: Any
) -> None:
    """Save a genome as JSON.

    Args:
        path: The file to save to.
        genome: The genome to save.
        encoder: The JSON encoder to use for the extra fields.
        extra: Extra top-level fields to include in the document.
    """
    path.write_text( dumps( genome.as_dict | extra, cls=encoder, indent=4 ) + "\n", encoding="utf-8" )

def load_genome( path: Path ) -> tuple[ Genome, dict[ str, Any ] ]:
    """Load a genome from JSON.

    Args:
        path: The file to load from.

    Returns:
        The genome and the whole document it was loaded from.

    Raises:
        GenomeSchemaError: If the document isn't a valid genome.
    """
    try:
        document = loads( path.read_text( encoding="utf-8" ) )
    except ValueError as error:
        raise GenomeSchemaError( "$", f"not valid JSON ({error})" ) from None
    if not isinstance( document, dict ):
        raise GenomeSchemaError( "$", "expected an object" )
    return Genome.from_dict( document ), document

### genome.py ends here
