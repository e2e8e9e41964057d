"""Provides speciation, fitness sharing and offspring allocation."""

##############################################################################
# Python imports.
from dataclasses import dataclass, field, replace
from math        import ceil, floor, log
from typing      import TYPE_CHECKING, Sequence

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from .annealing import AnnealState
from .config    import MacroConfig
from .genome    import Genome, InnovationRegistry, classify_genes

if TYPE_CHECKING:
    from .cma import CmaState, TraceRow

##############################################################################
@dataclass
class Species:
    """A species: a niche of genomes with compatible topologies."""

    id: int
    """The ID of the species."""

    members: list[ Genome ]
    """The members of the species."""

    representative: Genome
    """The genome new members are compared against."""

    age: int = 0
    """Generations since the species was created."""

    best_raw_fitness_ever: float = float( "-inf" )
    """The best raw fitness any member has had."""

    generations_since_improvement: int = 0
    """Generations since `best_raw_fitness_ever` last improved."""

    cma: "CmaState | None" = None
    """The weight-evolution state of the species, if one is running."""

    @property
    def champion( self ) -> Genome:
        """The member with the best raw fitness (first one wins ties)."""
        return max(
            self.members,
            key=lambda genome: float( "-inf" ) if genome.raw_fitness is None else genome.raw_fitness
        )

    @property
    def adjusted_total( self ) -> float:
        """The sum of the adjusted fitness of the members."""
        return sum( genome.adjusted_fitness for genome in self.members )

    def note_fitness( self ) -> None:
        """Update the improvement bookkeeping from the members' raw fitness."""
        best = self.champion.raw_fitness
        if best is not None and best > self.best_raw_fitness_ever:
            self.best_raw_fitness_ever = best
            self.generations_since_improvement = 0
        else:
            self.generations_since_improvement += 1

##############################################################################
@dataclass
class Population:
    """A speciated population of genomes."""

    species: list[ Species ]
    """The species, in ID order."""

    registry: InnovationRegistry
    """The innovation registry for the population."""

    anneal: AnnealState
    """The state of the mutation-rate annealing."""

    generation: int = 0
    """The current generation."""

    best_raw_fitness_ever: float = float( "-inf" )
    """The best raw fitness seen in the population."""

    generations_since_population_improvement: int = 0
    """Generations since `best_raw_fitness_ever` last improved."""

    stagnation_level: int = 0
    """The stagnation level (o)."""

    next_species_id: int = 1
    """The ID the next new species will get."""

    cma_traces: dict[ int, list[ "TraceRow" ] ] = field( default_factory=dict )
    """The CMA-ES trace rows of each species not yet written out."""

    @property
    def genomes( self ) -> list[ Genome ]:
        """Every genome in the population, species by species."""
        return [ genome for species in self.species for genome in species.members ]

    @property
    def size( self ) -> int:
        """The number of genomes in the population."""
        return sum( len( species.members ) for species in self.species )

    @property
    def champion( self ) -> Genome:
        """The genome with the best raw fitness."""
        return max(
            ( species.champion for species in self.species ),
            key=lambda genome: float( "-inf" ) if genome.raw_fitness is None else genome.raw_fitness
        )

##############################################################################
def compatibility( a: Genome, b: Genome, config: MacroConfig ) -> float:
    """The compatibility distance between two genomes.

    Args:
        a: The first genome.
        b: The second genome.
        config: The macroscopic evolution configuration.

    Returns:
        The distance δ.
    """
    partition = classify_genes( a, b )
    longest = max( len( a.connections ), len( b.connections ) )
    if not longest:
        return 0.0
    excess = len( partition.excess_a ) + len( partition.excess_b )
    disjoint = len( partition.disjoint_a ) + len( partition.disjoint_b )
    weights_a = { gene.innovation: gene.weight for gene in a.connections }
    weights_b = { gene.innovation: gene.weight for gene in b.connections }
    mean_difference = (
        sum( abs( weights_a[ innovation ] - weights_b[ innovation ] ) for innovation in partition.matching )
        / len( partition.matching )
    ) if partition.matching else 0.0
    return (
        config.c1 * excess / longest
        + config.c2 * disjoint / longest
        + config.c3 * mean_difference
    )

##############################################################################
def assign_species(
    genomes: Sequence[ Genome ],
    previous: Sequence[ Species ],
    config: MacroConfig,
    rng: np.random.Generator,
    next_id: int
) -> tuple[ list[ Species ], int ]:
    """Sort genomes into species.

    Each genome joins the first species (in ID order) whose representative
    is closer than the compatibility threshold; otherwise it founds a new
    species. The representative of an existing species is a random member
    of that species from the previous generation.

    Args:
        genomes: The genomes to sort.
        previous: The species of the previous generation.
        config: The macroscopic evolution configuration.
        rng: The random number generator.
        next_id: The ID for the next new species.

    Returns:
        The non-empty species and the next free species ID.
    """
    species = [
        Species(
            id                            = old.id,
            members                       = [],
            representative                = old.members[ int( rng.integers( len( old.members ) ) ) ],
            age                           = old.age,
            best_raw_fitness_ever         = old.best_raw_fitness_ever,
            generations_since_improvement = old.generations_since_improvement,
            cma                           = old.cma
        )
        for old in sorted( previous, key=lambda old: old.id ) if old.members
    ]
    for genome in genomes:
        for candidate in species:
            if compatibility( genome, candidate.representative, config ) < config.delta_c:
                candidate.members.append( genome )
                break
        else:
            species.append( Species( next_id, [ genome ], genome ) )
            next_id += 1
    return [ candidate for candidate in species if candidate.members ], next_id

##############################################################################
def adjust_fitness( raw: float, worst: float, size: int ) -> float:
    """The shared fitness of a genome.

    Args:
        raw: The raw fitness of the genome.
        worst: The worst raw fitness in the population.
        size: The number of members in the genome's species.

    Returns:
        `(raw - worst) / ln(size + 1)`.
    """
    return ( raw - worst ) / log( size + 1 )

def share_fitness( species: Sequence[ Species ] ) -> None:
    """Set the adjusted fitness of every member of every species.

    Args:
        species: The species to update; every member must have a raw fitness.
    """
    worst = min( genome.raw_fitness for group in species for genome in group.members ) # type: ignore[type-var]
    for group in species:
        group.members = [
            replace( genome, adjusted_fitness=adjust_fitness( genome.raw_fitness, worst, len( group.members ) ) ) # type: ignore[arg-type]
            for genome in group.members
        ]

def _scale( group: Species, factor: float ) -> None:
    group.members = [
        replace( genome, adjusted_fitness=genome.adjusted_fitness * factor ) for genome in group.members
    ]

def penalise_stale_species( species: Sequence[ Species ], config: MacroConfig ) -> None:
    """Apply the delta-coding fitness penalty and young-species amplification.

    Species that have not improved for more than `d_drop_off_age`
    generations have their adjusted fitness multiplied by
    `drop_off_penalty`; species no older than `young_species_age` have it
    multiplied by `d_age_significance`.

    Args:
        species: The species to update.
        config: The macroscopic evolution configuration.
    """
    for group in species:
        if group.generations_since_improvement > config.d_drop_off_age:
            _scale( group, config.drop_off_penalty )
        if group.age <= config.young_species_age:
            _scale( group, config.d_age_significance )

def amplify_best( species: Sequence[ Species ], config: MacroConfig ) -> None:
    """Amplify the adjusted fitness of the population champion by `c_best`.

    Args:
        species: The species of the population.
        config: The macroscopic evolution configuration.
    """
    best_group, best_index, best_raw = None, 0, float( "-inf" )
    for group in species:
        for index, genome in enumerate( group.members ):
            if genome.raw_fitness is not None and genome.raw_fitness > best_raw:
                best_group, best_index, best_raw = group, index, genome.raw_fitness
    if best_group is not None:
        genome = best_group.members[ best_index ]
        best_group.members[ best_index ] = replace(
            genome, adjusted_fitness=genome.adjusted_fitness * config.c_best
        )

##############################################################################
def allocate_offspring( species: Sequence[ Species ], total: int ) -> list[ int ]:
    """Work out how many members each species gets in the next generation.

    Each species is due `Σ f / f̄` slots, where `f̄` is the mean adjusted
    fitness of the whole population; the counts are rounded by largest
    remainder so that they sum to `total`, and every species gets at least
    one slot while there are slots to go round.

    Args:
        species: The species.
        total: The number of slots to hand out.

    Returns:
        The slot count for each species, in the same order.
    """
    if not species:
        return []
    count = sum( len( group.members ) for group in species )
    mean = sum( group.adjusted_total for group in species ) / count
    if mean > 0:
        due = [ group.adjusted_total / mean * total / count for group in species ]
    else:
        due = [ total / len( species ) ] * len( species )
    slots = [ floor( share ) for share in due ]
    by_remainder = sorted(
        range( len( species ) ), key=lambda index: ( -( due[ index ] - slots[ index ] ), index )
    )
    for index in by_remainder[ : total - sum( slots ) ]:
        slots[ index ] += 1
    # Every species keeps a slot for its elite, taken from the best-provided.
    for index in sorted( range( len( species ) ), key=lambda index: -due[ index ] ):
        if slots[ index ] == 0:
            donor = max( range( len( species ) ), key=lambda other: ( slots[ other ], -other ) )
            if slots[ donor ] <= 1:
                break
            slots[ donor ] -= 1
            slots[ index ] += 1
    return slots

def delta_coding(
    species: Sequence[ Species ], slots: Sequence[ int ], champion_species: int, config: MacroConfig
) -> list[ int ]:
    """Move offspring from the least-improved species to the champion's.

    Args:
        species: The species.
        slots: The allocation for each species, in the same order.
        champion_species: The ID of the species holding the population champion.
        config: The macroscopic evolution configuration.

    Returns:
        The adjusted allocation.
    """
    slots = list( slots )
    if len( species ) < 2:
        return slots
    stalest = max(
        range( len( species ) ),
        key=lambda index: ( species[ index ].generations_since_improvement, species[ index ].id )
    )
    receiver = next(
        ( index for index, group in enumerate( species ) if group.id == champion_species ), None
    )
    if receiver is None or receiver == stalest:
        return slots
    moved = max( 0, min( config.d_offspring_stolen, slots[ stalest ] - 1 ) )
    slots[ stalest ] -= moved
    slots[ receiver ] += moved
    return slots

##############################################################################
def select_parents( species: Species, config: MacroConfig ) -> list[ Genome ]:
    """Get the members of a species allowed to reproduce.

    Args:
        species: The species.
        config: The macroscopic evolution configuration.

    Returns:
        The top `⌈c_survival · N⌉` members by adjusted fitness (at least one).
    """
    ranked = sorted( species.members, key=lambda genome: -genome.adjusted_fitness )
    # 0.2 * 15 is 3.0000000000000004 in floating point.
    return ranked[ : max( 1, ceil( config.c_survival * len( ranked ) - 1e-9 ) ) ]

### speciation.py ends here
