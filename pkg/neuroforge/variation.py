"""Provides the mutation and crossover operators, and offspring production."""

##############################################################################
# Python imports.
from dataclasses import replace
from typing      import Iterable, Sequence

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from .annealing import AnnealedRates
from .config    import MacroConfig
from .errors    import NoMatchError, NoOpError
from .genome    import (
    ConnectionGene, Genome, InnovationRegistry, NodeGene, Role,
    classify_genes, has_cycle, reaches
)

##############################################################################
def _pick( rng: np.random.Generator, items: Sequence ) -> object:
    """Pick an item uniformly at random."""
    return items[ int( rng.integers( len( items ) ) ) ]

##############################################################################
def mutate_add_node( genome: Genome, registry: InnovationRegistry, rng: np.random.Generator ) -> Genome:
    """Split an enabled connection with a new hidden node.

    The split connection is disabled; the link into the new node gets a
    weight of 1 and the link out of it gets the old weight.

    Args:
        genome: The genome to mutate.
        registry: The innovation registry.
        rng: The random number generator.

    Returns:
        The mutated genome.

    Raises:
        NoOpError: If the genome has no enabled connections.
    """
    if not ( enabled := genome.enabled ):
        raise NoOpError( "There are no enabled connections to split" )
    split: ConnectionGene = _pick( rng, enabled ) # type: ignore[assignment]
    record = registry.register_split( split, set( genome.node_roles ) )
    return Genome.build(
        [ *genome.nodes, NodeGene( record.node, Role.HIDDEN ) ],
        [
            *( replace( gene, enabled=False ) if gene is split else gene for gene in genome.connections ),
            ConnectionGene( split.in_node, record.node, 1.0, True, record.in_innovation ),
            ConnectionGene( record.node, split.out_node, split.weight, True, record.out_innovation )
        ]
    )

##############################################################################
def mutate_add_link(
    genome: Genome, registry: InnovationRegistry, rng: np.random.Generator, attempts: int = 50
) -> Genome:
    """Join two previously unconnected nodes.

    Args:
        genome: The genome to mutate.
        registry: The innovation registry.
        rng: The random number generator.
        attempts: The number of candidate pairs to try.

    Returns:
        The mutated genome, or the genome itself if no legal pair was found.
    """
    sources = [ node.id for node in genome.nodes if node.role.is_source ]
    targets = [ node.id for node in genome.nodes if node.role.is_target ]
    existing = { gene.link for gene in genome.connections }
    enabled = [ gene.link for gene in genome.enabled ]
    for _ in range( attempts ):
        source, target = _pick( rng, sources ), _pick( rng, targets )
        if source == target or ( source, target ) in existing:
            continue
        # The new link closes a cycle if the target already reaches the source.
        if reaches( enabled, [ target ], source ): # type: ignore[list-item]
            continue
        return Genome.build( genome.nodes, [
            *genome.connections,
            ConnectionGene(
                source, target, float( rng.uniform( -1.0, 1.0 ) ), True, # type: ignore[arg-type]
                registry.register_link( source, target ) # type: ignore[arg-type]
            )
        ] )
    return genome

##############################################################################
def mutate_weights( genome: Genome, config: MacroConfig, rng: np.random.Generator ) -> Genome:
    """Mutate the weight of every connection gene.

    For each gene the severity is drawn first; then the mutation is
    cancelled with probability `c_cold_gauss`; otherwise the weight is
    drawn around its current value with probability `1 - c_gauss`, or
    around zero.

    Args:
        genome: The genome to mutate.
        config: The macroscopic evolution configuration.
        rng: The random number generator.

    Returns:
        The mutated genome.
    """
    genes: list[ ConnectionGene ] = []
    for gene in genome.connections:
        cold, gauss = config.weight_mutation( bool( rng.random() < config.delta_severity ) )
        if rng.random() < cold:
            genes.append( gene )
        elif rng.random() < 1.0 - gauss:
            genes.append( replace( gene, weight=float( rng.normal( gene.weight, config.sigma_w ) ) ) )
        else:
            genes.append( replace( gene, weight=float( rng.normal( 0.0, config.sigma_w ) ) ) )
    return Genome( genome.nodes, tuple( genes ) )

##############################################################################
def output_connected( genome: Genome, links: Iterable[ tuple[ int, int ] ] ) -> bool:
    """Is every output reachable from an input or the bias along the links?"""
    links = list( links )
    sources = genome.nodes_with( Role.INPUT, Role.BIAS )
    return all( reaches( links, sources, output ) for output in genome.nodes_with( Role.OUTPUT ) )

def mutate_toggle( genome: Genome, config: MacroConfig, rng: np.random.Generator ) -> Genome:
    """Maybe flip the enabled flag of one connection gene.

    A flip that would close a cycle, or leave an output unreachable, is
    rejected.

    Args:
        genome: The genome to mutate.
        config: The macroscopic evolution configuration.
        rng: The random number generator.

    Returns:
        The mutated genome, or the genome itself.
    """
    if not genome.connections or rng.random() >= config.c_turn_on_off:
        return genome
    chosen: ConnectionGene = _pick( rng, genome.connections ) # type: ignore[assignment]
    links = [ gene.link for gene in genome.enabled if gene is not chosen ]
    if not chosen.enabled:
        links.append( chosen.link )
        if has_cycle( links ):
            return genome
    elif not output_connected( genome, links ):
        return genome
    return Genome( genome.nodes, tuple(
        replace( gene, enabled=not gene.enabled ) if gene is chosen else gene
        for gene in genome.connections
    ) )

##############################################################################
def mutate(
    genome: Genome,
    rates: AnnealedRates,
    config: MacroConfig,
    registry: InnovationRegistry,
    rng: np.random.Generator
) -> Genome:
    """Apply the full mutation procedure to a genome.

    Args:
        genome: The genome to mutate.
        rates: The annealed structural mutation rates.
        config: The macroscopic evolution configuration.
        registry: The innovation registry.
        rng: The random number generator.

    Returns:
        The mutated genome.
    """
    if rng.random() < rates.pi_add_node:
        try:
            genome = mutate_add_node( genome, registry, rng )
        except NoOpError:
            pass
    if rng.random() < rates.pi_add_link:
        genome = mutate_add_link( genome, registry, rng, config.pi_attempt_mutation )
    if rng.random() < config.pi_mutate_link:
        genome = mutate_weights( genome, config, rng )
    return mutate_toggle( genome, config, rng )

##############################################################################
def assemble( parents: Sequence[ Genome ], genes: Iterable[ ConnectionGene ] ) -> Genome:
    """Build an offspring genome from inherited connection genes.

    Genes are taken in innovation order; a gene that repeats an `(in, out)`
    pair already inherited, or whose enabling would close a cycle, is
    dropped. The node genes are the input, bias and output nodes plus the
    nodes used by the inherited connections.

    Args:
        parents: The parent genomes.
        genes: The inherited connection genes.

    Returns:
        The offspring genome.
    """
    kept: list[ ConnectionGene ] = []
    links: set[ tuple[ int, int ] ] = set()
    enabled: list[ tuple[ int, int ] ] = []
    for gene in sorted( genes, key=lambda gene: gene.innovation ):
        if gene.link in links:
            continue
        if gene.enabled and reaches( enabled, [ gene.out_node ], gene.in_node ):
            continue
        kept.append( gene )
        links.add( gene.link )
        if gene.enabled:
            enabled.append( gene.link )
    roles: dict[ int, Role ] = {}
    for parent in parents:
        roles |= parent.node_roles
    used = { node for gene in kept for node in gene.link }
    return Genome.build(
        [ NodeGene( node, role ) for node, role in roles.items() if role is not Role.HIDDEN or node in used ],
        kept
    )

def _by_innovation( genome: Genome ) -> dict[ int, ConnectionGene ]:
    return { gene.innovation: gene for gene in genome.connections }

def single_point( left: Genome, right: Genome, point: int ) -> Genome:
    """Single-point crossover at a given matching innovation.

    Args:
        left: The parent that supplies the genes before the point.
        right: The parent that supplies the genes after the point.
        point: The matching innovation to cross at.

    Returns:
        The offspring genome.
    """
    left_genes, right_genes = _by_innovation( left ), _by_innovation( right )
    if point not in left_genes or point not in right_genes:
        raise NoMatchError( f"Innovation {point} is not shared by both parents" )
    return assemble( ( left, right ), [
        *( gene for innovation, gene in left_genes.items() if innovation < point ),
        replace(
            left_genes[ point ],
            weight=( left_genes[ point ].weight + right_genes[ point ].weight ) / 2.0
        ),
        *( gene for innovation, gene in right_genes.items() if innovation > point )
    ] )

def crossover_single_point( a: Genome, b: Genome, rng: np.random.Generator ) -> Genome:
    """Single-point crossover at a random matching innovation.

    Args:
        a: The first parent.
        b: The second parent.
        rng: The random number generator.

    Returns:
        The offspring genome.

    Raises:
        NoMatchError: If the parents share no genes.
    """
    if not ( matching := sorted( classify_genes( a, b ).matching ) ):
        raise NoMatchError( "The parents share no genes" )
    point = int( _pick( rng, matching ) ) # type: ignore[call-overload]
    left, right = ( a, b ) if rng.random() < 0.5 else ( b, a )
    return single_point( left, right, point )

def _multipoint(
    a: Genome,
    b: Genome,
    fitness_a: float,
    fitness_b: float,
    rng: np.random.Generator,
    average: bool,
    fitter_only: bool
) -> Genome:
    """The shared body of the two multipoint crossovers."""
    genes_a, genes_b = _by_innovation( a ), _by_innovation( b )
    partition = classify_genes( a, b )
    genes: list[ ConnectionGene ] = []
    for innovation in sorted( partition.matching ):
        gene_a, gene_b = genes_a[ innovation ], genes_b[ innovation ]
        if average:
            genes.append( replace(
                gene_a,
                weight=( gene_a.weight + gene_b.weight ) / 2.0,
                enabled=gene_a.enabled or gene_b.enabled
            ) )
        else:
            genes.append( gene_a if rng.random() < 0.5 else gene_b )
    if fitter_only:
        if fitness_a == fitness_b:
            fitter_a = bool( rng.random() < 0.5 )
        else:
            fitter_a = fitness_a > fitness_b
        donors = [ ( genes_a, partition.disjoint_a | partition.excess_a ) ] if fitter_a else [
            ( genes_b, partition.disjoint_b | partition.excess_b )
        ]
    else:
        donors = [
            ( genes_a, partition.disjoint_a | partition.excess_a ),
            ( genes_b, partition.disjoint_b | partition.excess_b )
        ]
    for source, innovations in donors:
        genes.extend( source[ innovation ] for innovation in sorted( innovations ) )
    return assemble( ( a, b ), genes )

def crossover_multipoint(
    a: Genome,
    b: Genome,
    fitness_a: float,
    fitness_b: float,
    rng: np.random.Generator,
    fitter_only: bool = True
) -> Genome:
    """Multipoint crossover.

    Each matching gene comes whole from either parent with equal
    probability; disjoint and excess genes come from the fitter parent
    (from both when `fitter_only` is off).

    Args:
        a: The first parent.
        b: The second parent.
        fitness_a: The fitness of the first parent.
        fitness_b: The fitness of the second parent.
        rng: The random number generator.
        fitter_only: Only inherit disjoint/excess genes from the fitter parent?

    Returns:
        The offspring genome.
    """
    return _multipoint( a, b, fitness_a, fitness_b, rng, False, fitter_only )

def crossover_multipoint_average(
    a: Genome,
    b: Genome,
    fitness_a: float,
    fitness_b: float,
    rng: np.random.Generator,
    fitter_only: bool = True
) -> Genome:
    """Multipoint-average crossover.

    As `crossover_multipoint`, but matching genes get the mean of the
    parents' weights and are enabled if either parent has them enabled.
    """
    return _multipoint( a, b, fitness_a, fitness_b, rng, True, fitter_only )

##############################################################################
def _fitness( genome: Genome ) -> float:
    return float( "-inf" ) if genome.raw_fitness is None else genome.raw_fitness

def make_offspring(
    pool: Sequence[ Genome ],
    others: Sequence[ Sequence[ Genome ] ],
    rates: AnnealedRates,
    config: MacroConfig,
    registry: InnovationRegistry,
    rng: np.random.Generator
) -> Genome:
    """Produce one offspring.

    Args:
        pool: The parent pool of the offspring's species.
        others: The parent pools of the other species.
        rates: The annealed mutation rates.
        config: The macroscopic evolution configuration.
        registry: The innovation registry.
        rng: The random number generator.

    Returns:
        The new, unevaluated, genome.
    """
    if not pool:
        raise ValueError( "The parent pool is empty" )
    parent_index = int( rng.integers( len( pool ) ) )
    parent = pool[ parent_index ]

    if rng.random() < rates.p_mutate_only:
        return mutate( parent, rates, config, registry, rng ).with_fitness( None ).validate()

    mate: Genome | None = None
    if others and rng.random() < config.c_inter_species:
        mate = _pick( rng, _pick( rng, others ) ) # type: ignore[arg-type, assignment]
    elif len( pool ) > 1:
        mate = pool[ ( parent_index + 1 + int( rng.integers( len( pool ) - 1 ) ) ) % len( pool ) ]
    if mate is None:
        return mutate( parent, rates, config, registry, rng ).with_fitness( None ).validate()

    method = int( rng.choice( 3, p=config.crossover_weights ) )
    if method == 0:
        try:
            child = crossover_single_point( parent, mate, rng )
        except NoMatchError:
            child = parent if _fitness( parent ) >= _fitness( mate ) else mate
    elif method == 1:
        child = crossover_multipoint(
            parent, mate, _fitness( parent ), _fitness( mate ), rng, config.fitter_parent_only
        )
    else:
        child = crossover_multipoint_average(
            parent, mate, _fitness( parent ), _fitness( mate ), rng, config.fitter_parent_only
        )
    if rng.random() >= config.p_mate_only:
        child = mutate( child, rates, config, registry, rng )
    return child.with_fitness( None ).validate()

### variation.py ends here
