"""Provides the evolution loop that ties topology and weight evolution together.

Each generation the population is either reproduced macroscopically
(speciation, fitness sharing, crossover and mutation) or, whenever the
population has gone another whole stagnation window without improving,
microscopically: each species samples new weights for its champion's
topology with CMA-ES.
"""

##############################################################################
# Python imports.
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses        import dataclass, field
from pathlib            import Path
from types              import TracebackType
from typing             import Callable, NamedTuple, Sequence

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from .annealing    import AnnealedRates, AnnealState, annealed_rates, current_rates
from .artifacts    import RunArtifacts
from .cma          import CmaBudget, CmaState
from .config       import RunConfig, TDConfig
from .environments import Environment, make_environment
from .genome       import Genome, InnovationRegistry, new_minimal_genome
from .network      import decode
from .speciation   import (
    Population,
    Species,
    allocate_offspring,
    amplify_best,
    assign_species,
    delta_coding,
    penalise_stale_species,
    select_parents,
    share_fitness
)
from .td           import evaluate_fitness
from .variation    import make_offspring

##############################################################################
log = logging.getLogger( __name__ )

MACRO_STREAM = 0
"""Random stream tag for evaluating macroscopic offspring."""

CMA_STREAM = 1
"""Random stream tag for evaluating CMA-ES candidates."""

BREED_STREAM = 2
"""Random stream tag for species bred macroscopically during a micro generation."""

##############################################################################
class GenerationReport( NamedTuple ):
    """The summary of one generation."""

    generation: int
    """The generation number."""

    mode: str
    """How the generation was produced: `macro` or `micro`."""

    best_raw: float
    """The best raw fitness in the generation."""

    mean_raw: float
    """The mean raw fitness of the generation."""

    species: int
    """The number of species."""

    best_nodes: int
    """The node count of the generation's champion."""

    best_edges: int
    """The enabled connection count of the generation's champion."""

    rates: AnnealedRates
    """The annealed mutation rates the generation was produced with."""

    stagnation: int
    """The stagnation level (o) when the generation was produced."""

##############################################################################
class Evaluator:
    """Trains and scores genomes, optionally on a pool of threads.

    Every evaluation gets its own random generator, seeded from the run
    seed, the generation, a stream tag and the evaluation's index, so the
    results don't depend on the order or the thread they run in.
    """

    def __init__( self, environment: Environment, config: TDConfig, seed: int, workers: int = 1 ) -> None:
        """Initialise the evaluator.

        Args:
            environment: The environment to train and score on.
            config: The TD configuration.
            seed: The run seed.
            workers: The number of threads to evaluate with.
        """
        self.environment = environment
        self.config      = config
        self.seed        = seed
        self._executor   = ThreadPoolExecutor( max_workers=workers ) if workers > 1 else None

    def __enter__( self ) -> "Evaluator":
        return self

    def __exit__(
        self,
        kind: type[ BaseException ] | None,
        error: BaseException | None,
        traceback: TracebackType | None
    ) -> None:
        self.close()

    def close( self ) -> None:
        """Shut down the thread pool, if there is one."""
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None

    def score( self, genome: Genome, key: Sequence[ int ] ) -> Genome:
        """Train and score one genome.

        Args:
            genome: The genome to score.
            key: The random stream key of the evaluation.

        Returns:
            The genome with its raw fitness, and its trained weights if
            trained weights are written back.
        """
        network = decode( genome )
        fitness = evaluate_fitness(
            network, self.environment, self.config, np.random.default_rng( [ self.seed, *key ] )
        )
        if self.config.write_back:
            genome = genome.with_weights( network.weights )
        return genome.with_fitness( fitness )

    def evaluate( self, genomes: Sequence[ Genome ], key: Sequence[ int ] ) -> list[ Genome ]:
        """Score genomes that have no raw fitness yet.

        Args:
            genomes: The genomes.
            key: The random stream key prefix; the genome's index is appended.

        Returns:
            The genomes, in the same order, all with a raw fitness.
        """
        pending = [ index for index, genome in enumerate( genomes ) if genome.raw_fitness is None ]
        tasks = [ ( genomes[ index ], [ *key, index ] ) for index in pending ]
        if self._executor is None:
            scored = [ self.score( genome, task_key ) for genome, task_key in tasks ]
        else:
            scored = list( self._executor.map( lambda task: self.score( *task ), tasks ) )
        result = list( genomes )
        for index, genome in zip( pending, scored ):
            result[ index ] = genome
        return result

##############################################################################
def _raw( genome: Genome ) -> float:
    return float( "-inf" ) if genome.raw_fitness is None else genome.raw_fitness

def detect_stagnation( population: Population, window: int ) -> tuple[ bool, int ]:
    """Has the population stopped improving?

    The check fires once for every whole window of generations without
    improvement; the generations in between are bred macroscopically.

    Args:
        population: The population.
        window: The number of generations without improvement that counts as stagnation.

    Returns:
        Whether the check fires this generation, and the stagnation level:
        the number of whole windows since the last improvement.
    """
    since = population.generations_since_population_improvement
    return since >= window and since % window == 0, since // window

def note_generation( population: Population ) -> None:
    """Update the species and population bookkeeping for an evaluated generation."""
    for group in population.species:
        group.age += 1
        group.note_fitness()
    if ( best := _raw( population.champion ) ) > population.best_raw_fitness_ever:
        population.best_raw_fitness_ever = best
        population.generations_since_population_improvement = 0
        population.anneal = population.anneal.improving()
    else:
        population.generations_since_population_improvement += 1

def make_report( population: Population, mode: str, rates: AnnealedRates ) -> GenerationReport:
    """Summarise the current generation of a population."""
    champion = population.champion
    return GenerationReport(
        generation = population.generation,
        mode       = mode,
        best_raw   = _raw( champion ),
        mean_raw   = float( np.mean( [ _raw( genome ) for genome in population.genomes ] ) ),
        species    = len( population.species ),
        best_nodes = len( champion.nodes ),
        best_edges = len( champion.enabled ),
        rates      = rates,
        stagnation = population.stagnation_level
    )

##############################################################################
def initial_population( config: RunConfig, evaluator: Evaluator, rng: np.random.Generator ) -> Population:
    """Create and evaluate the first generation.

    Args:
        config: The run configuration.
        evaluator: The evaluator.
        rng: The driver's random number generator.

    Returns:
        The speciated, evaluated, population.
    """
    registry = InnovationRegistry()
    genomes = [
        new_minimal_genome( evaluator.environment.n_features, 1, registry, rng )
        for _ in range( config.macro.population_size )
    ]
    genomes = evaluator.evaluate( genomes, [ 0, MACRO_STREAM ] )
    species, next_id = assign_species( genomes, [], config.macro, rng, 1 )
    population = Population(
        species         = species,
        registry        = registry,
        anneal          = AnnealState.start( config.macro ),
        next_species_id = next_id
    )
    note_generation( population )
    return population

##############################################################################
def _allocate( population: Population, config: RunConfig ) -> list[ int ]:
    """Share fitness and work out each species' slots for the next generation.

    Shared fitness is adjusted for stale and young species and for the
    best species before the slots are allocated; delta coding may then
    move slots to the species holding the champion.

    Args:
        population: The current population.
        config: The run configuration.

    Returns:
        The number of slots of each species, in species order.
    """
    species = population.species
    share_fitness( species )
    penalise_stale_species( species, config.macro )
    amplify_best( species, config.macro )
    slots = allocate_offspring( species, config.macro.population_size )
    champion = max( species, key=lambda group: _raw( group.champion ) )
    transferred = delta_coding( species, slots, champion.id, config.macro )
    if transferred != slots:
        log.debug( "Moved offspring to species %d: %s -> %s", champion.id, slots, transferred )
    return transferred

def _breed(
    population: Population,
    index: int,
    count: int,
    pools: Sequence[ Sequence[ Genome ] ],
    rates: AnnealedRates,
    config: RunConfig,
    rng: np.random.Generator
) -> list[ Genome ]:
    """The elite of a species plus `count - 1` offspring bred from its parent pool."""
    group = population.species[ index ]
    others = [ pool for other, pool in enumerate( pools ) if other != index ]
    return [ group.champion.with_fitness( group.champion.raw_fitness ) ] + [
        make_offspring( pools[ index ], others, rates, config.macro, population.registry, rng )
        for _ in range( count - 1 )
    ]

def macroscopic_generation(
    population: Population,
    slots: Sequence[ int ],
    rates: AnnealedRates,
    config: RunConfig,
    evaluator: Evaluator,
    rng: np.random.Generator
) -> list[ Species ]:
    """Produce the next generation by speciated crossover and mutation.

    Args:
        population: The current population.
        slots: The slots of each species.
        rates: The annealed mutation rates.
        config: The run configuration.
        evaluator: The evaluator.
        rng: The driver's random number generator.

    Returns:
        The species of the next generation, every member evaluated.
    """
    pools = [ select_parents( group, config.macro ) for group in population.species ]
    genomes = [
        genome
        for index, count in enumerate( slots ) if count
        for genome in _breed( population, index, count, pools, rates, config, rng )
    ]
    genomes = evaluator.evaluate( genomes, [ population.generation + 1, MACRO_STREAM ] )
    species, population.next_species_id = assign_species(
        genomes, population.species, config.macro, rng, population.next_species_id
    )
    known = { group.id for group in population.species }
    for group in species:
        if group.id not in known:
            log.debug( "Species %d appeared with %d members", group.id, len( group.members ) )
    for gone in known - { group.id for group in species }:
        log.debug( "Species %d died out", gone )
    return species

##############################################################################
def _topology( genome: Genome ) -> tuple[ int, ... ]:
    return tuple( gene.innovation for gene in genome.enabled )

def species_cma(
    group: Species, champion: Genome, population: Population, config: RunConfig
) -> CmaState:
    """Get the CMA-ES state a species should sample from this generation.

    The existing state is kept unless it has met its stopping criteria or
    the champion's topology has changed, in which case a new one is started
    from the champion's weights.

    Args:
        group: The species.
        champion: The species champion.
        population: The population.
        config: The run configuration.

    Returns:
        The state to use.
    """
    state = group.cma
    if state is not None and state.topology == _topology( champion ) and not state.should_stop():
        return state
    if state is not None:
        log.debug( "Retiring the CMA-ES run of species %d after %d iterations", group.id, state.iteration )
    log.debug(
        "Starting a CMA-ES run for species %d over %d weights at stagnation level %d",
        group.id, len( champion.enabled ), population.stagnation_level
    )
    return CmaState.start(
        champion.weights,
        population.stagnation_level,
        CmaBudget.from_config( config.cma, population.best_raw_fitness_ever ),
        _topology( champion )
    )

def cma_members(
    group: Species,
    count: int,
    population: Population,
    config: RunConfig,
    evaluator: Evaluator,
    rng: np.random.Generator
) -> list[ Genome ]:
    """Fill a species' slots with its elite and CMA-ES sampled weights.

    Candidates are sampled, written onto the champion's topology, trained
    and scored exactly like macroscopic offspring. Sampling repeats until
    there are enough candidates; a run that meets its stopping criteria on
    the way is replaced by a new one started from the best candidate so far.

    Args:
        group: The species.
        count: The number of slots the species has.
        population: The population.
        config: The run configuration.
        evaluator: The evaluator.
        rng: The driver's random number generator.

    Returns:
        The elite followed by the best `count - 1` candidates.
    """
    champion = group.champion
    state = species_cma( group, champion, population, config )
    candidates: list[ Genome ] = []
    batch = 0
    while len( candidates ) < count - 1:
        if state.should_stop():
            log.debug( "Restarting the CMA-ES run of species %d mid-generation", group.id )
            state = CmaState.start(
                state.best_vector if state.best_vector is not None else state.mean,
                population.stagnation_level,
                state.budget,
                state.topology
            )
        samples = state.ask( rng )
        scored = evaluator.evaluate(
            [ champion.with_weights( sample ) for sample in samples ],
            [ population.generation + 1, CMA_STREAM, group.id, batch ]
        )
        state.tell( samples, [ _raw( genome ) for genome in scored ] )
        population.cma_traces.setdefault( group.id, [] ).append( state.trace[ -1 ] )
        candidates.extend( scored )
        batch += 1
    group.cma = state
    best = sorted( candidates, key=lambda genome: -_raw( genome ) )[ : count - 1 ]
    return [ champion.with_fitness( champion.raw_fitness ) ] + best

def microscopic_generation(
    population: Population,
    slots: Sequence[ int ],
    rates: AnnealedRates,
    config: RunConfig,
    evaluator: Evaluator,
    rng: np.random.Generator
) -> list[ Species ]:
    """Produce the next generation by evolving each species' weights with CMA-ES.

    A species whose champion has no enabled connection has nothing for
    CMA-ES to work on and is bred macroscopically instead.

    Args:
        population: The current population.
        slots: The slots of each species.
        rates: The annealed mutation rates (for the macroscopic fallback).
        config: The run configuration.
        evaluator: The evaluator.
        rng: The driver's random number generator.

    Returns:
        The species of the next generation, every member evaluated.
    """
    pools = [ select_parents( group, config.macro ) for group in population.species ]
    species: list[ Species ] = []
    for index, ( group, count ) in enumerate( zip( population.species, slots ) ):
        if not count:
            log.debug( "Species %d died out", group.id )
            continue
        if group.champion.enabled:
            members = cma_members( group, count, population, config, evaluator, rng )
        else:
            members = evaluator.evaluate(
                _breed( population, index, count, pools, rates, config, rng ),
                [ population.generation + 1, BREED_STREAM, group.id ]
            )
        group.members = members
        species.append( group )
    return species

##############################################################################
def run_generation(
    population: Population, config: RunConfig, evaluator: Evaluator, rng: np.random.Generator
) -> tuple[ Population, GenerationReport ]:
    """Produce, evaluate and account for the next generation.

    Args:
        population: The current, evaluated, population.
        config: The run configuration.
        evaluator: The evaluator.
        rng: The driver's random number generator.

    Returns:
        The population, advanced by one generation, and its report.
    """
    stagnated, level = detect_stagnation( population, config.run.stagnation_window )
    if stagnated:
        log.debug( "Stagnated at level %d; resetting the annealing schedule", level )
        population.anneal = population.anneal.reset( config.macro )
        for group in population.species:
            if group.cma is not None:
                group.cma.inflate( level )
    elif level < population.stagnation_level:
        for group in population.species:
            group.cma = None
    population.stagnation_level = level

    rates, population.anneal = annealed_rates( population.anneal, config.macro )
    population.registry.new_generation()
    slots = _allocate( population, config )
    produce = microscopic_generation if stagnated else macroscopic_generation
    population.species = produce( population, slots, rates, config, evaluator, rng )
    population.generation += 1
    note_generation( population )
    return population, make_report( population, "micro" if stagnated else "macro", rates )

##############################################################################
@dataclass
class EvolutionResult:
    """The outcome of a run."""

    champion: Genome
    """The best genome found."""

    population: Population
    """The final population."""

    reports: list[ GenerationReport ] = field( default_factory=list )
    """The report of every generation."""

    solved: bool = False
    """Did the champion satisfy the environment's success test?"""

    @property
    def trajectory( self ) -> list[ float ]:
        """The best raw fitness of each generation."""
        return [ report.best_raw for report in self.reports ]

##############################################################################
def evolve(
    config: RunConfig,
    output: Path | None = None,
    on_report: Callable[ [ GenerationReport ], None ] | None = None
) -> EvolutionResult:
    """Run evolution.

    Runs for `max_generations` generations, or until the champion solves
    the environment.

    Args:
        config: The run configuration.
        output: The directory to write the run's artifacts to, if any.
        on_report: Called with the report of every generation.

    Returns:
        The result of the run.
    """
    environment = make_environment( config.env )
    rng = np.random.default_rng( config.run.seed )
    artifacts = RunArtifacts.create( output, config ) if output is not None else None
    log.info(
        "Evolving on %s with seed %d for up to %d generations",
        environment.name, config.run.seed, config.run.max_generations
    )

    def solves( genome: Genome ) -> bool:
        return environment.success( decode( genome ), config.td.gamma, config.td.max_steps_per_episode )

    def record( report: GenerationReport ) -> None:
        result.reports.append( report )
        if _raw( population.champion ) > _raw( result.champion ):
            result.champion = population.champion
        log.info(
            "Generation %d (%s): best %.4f mean %.4f species %d o=%d",
            report.generation, report.mode, report.best_raw, report.mean_raw, report.species, report.stagnation
        )
        if artifacts is not None:
            artifacts.record( report )
            artifacts.record_traces( population.cma_traces )
        population.cma_traces.clear()
        if on_report is not None:
            on_report( report )

    with Evaluator( environment, config.td, config.run.seed, config.run.workers ) as evaluator:
        population = initial_population( config, evaluator, rng )
        result = EvolutionResult( population.champion, population )
        record( make_report( population, "macro", current_rates( population.anneal, config.macro ) ) )
        result.solved = solves( result.champion )
        while not result.solved and population.generation < config.run.max_generations:
            population, report = run_generation( population, config, evaluator, rng )
            record( report )
            result.solved = solves( population.champion )

    if result.solved:
        result.champion = population.champion
        log.info( "Solved in generation %d", population.generation )
    if artifacts is not None:
        artifacts.finish( result.champion, result.trajectory )
    return result

### evolution.py ends here
