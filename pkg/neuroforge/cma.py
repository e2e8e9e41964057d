"""Provides the CMA-ES optimiser used to evolve the weights of a fixed topology.

This is the standard (μ/μ_w, λ) CMA-ES with cumulative step-size adaptation,
modified so that the sample size, the iteration budget and the initial step
size inflate with the stagnation level o. Fitness is maximised.
"""

##############################################################################
# Python imports.
import logging
from collections import deque
from dataclasses import dataclass, field
from math        import ceil, exp, log, sqrt
from typing      import NamedTuple, Sequence

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# SciPy imports.
from scipy.special import gammaln

##############################################################################
# Local imports.
from .config import CmaConfig
from .errors import NumericalError

##############################################################################
log_ = logging.getLogger( __name__ )

EIGEN_FLOOR = 1e-12
"""Eigenvalues of the covariance matrix are clamped to at least this."""

##############################################################################
def expected_norm_approximation( n: int ) -> float:
    """The series approximation of E‖N(0, I)‖ in `n` dimensions."""
    return sqrt( n ) * ( 1.0 - 1.0 / ( 4.0 * n ) + 1.0 / ( 21.0 * n * n ) )

def expected_norm( n: int ) -> float:
    """The expected length of an `n`-dimensional standard normal vector.

    The closed gamma-function form is used up to 100 dimensions, the series
    approximation beyond that.
    """
    if n < 1:
        raise ValueError( "The dimension must be at least 1" )
    if n > 100:
        return expected_norm_approximation( n )
    return sqrt( 2.0 ) * exp( gammaln( ( n + 1 ) / 2.0 ) - gammaln( n / 2.0 ) )

##############################################################################
def sample_size( n: int, stagnation: int ) -> int:
    """The number of candidates to sample: `4 + ⌈3 ln(n + o)⌉`."""
    return 4 + ceil( 3.0 * log( n + stagnation ) )

def recombination_weights( mu: int ) -> np.ndarray:
    """The recombination weights for `mu` parents.

    Returns:
        Positive, non-increasing weights that sum to one.
    """
    raw = log( mu + 1 ) - np.log( np.arange( 1, mu + 1 ) )
    return raw / raw.sum()

##############################################################################
@dataclass( frozen=True )
class CmaBudget:
    """The budget and step-size settings for one CMA-ES run."""

    rho: int = 1000
    """The default stopping coefficient."""

    sigma_max: float = 1.0
    """Upper limit of the initial step size."""

    sigma_d: float = 0.5
    """Default initial step size."""

    o_sigma: float = 0.01
    """Scaling of the stagnation effect on the initial step size."""

    f_stop: float = float( "inf" )
    """Stop once the best fitness exceeds this."""

    @staticmethod
    def from_config( config: CmaConfig, f_stop: float = float( "inf" ) ) -> "CmaBudget":
        """Create a budget from the configuration.

        Args:
            config: The CMA configuration.
            f_stop: The fitness to beat.

        Returns:
            The budget.
        """
        return CmaBudget( config.rho, config.sigma_max, config.sigma_d, config.o_sigma, f_stop )

    def tau_stop( self, stagnation: int ) -> int:
        """The iteration cap at the given stagnation level: `ρ(1 + o)`."""
        return self.rho * ( 1 + stagnation )

    def initial_sigma( self, stagnation: int ) -> float:
        """The initial step size at the given stagnation level."""
        return min( self.sigma_max, self.sigma_d + self.o_sigma * log( stagnation + 1 ) )

##############################################################################
class Ranked( NamedTuple ):
    """Candidates sorted best first."""

    candidates: np.ndarray
    """The candidates, one per row, best first."""

    fitness: np.ndarray
    """The fitness of each candidate, best first."""

class TraceRow( NamedTuple ):
    """One row of the per-iteration trace."""

    iteration: int
    sigma: float
    best_fitness: float
    mean_fitness: float
    cond_number: float

TRACE_HEADER = ( "iter", "sigma", "best_fitness", "mean_fitness", "cond_number" )
"""The header of the trace CSV."""

TRACE_LIMIT = 1000
"""The most trace rows a run keeps in memory."""

##############################################################################
@dataclass
class CmaState:
    """The state of one CMA-ES run."""

    mean: np.ndarray
    """The mean of the sampling distribution."""

    sigma: float
    """The step size."""

    budget: CmaBudget
    """The budget of the run."""

    stagnation: int = 0
    """The stagnation level (o) the run was started or inflated at."""

    covariance: np.ndarray = field( init=False )
    path_c: np.ndarray = field( init=False )
    path_sigma: np.ndarray = field( init=False )
    basis: np.ndarray = field( init=False )
    """The eigenvectors of the covariance matrix (B)."""

    scales: np.ndarray = field( init=False )
    """The square roots of the eigenvalues of the covariance matrix (diag E)."""

    iteration: int = 0
    """Completed iterations (t); also the trial count used by the H_σ gate."""

    tau_stop: int = 0
    sample_count: int = 0
    """The number of candidates sampled per iteration (λ)."""

    parent_count: int = 0
    """The number of candidates recombined (μ)."""

    weights: np.ndarray = field( init=False )
    mu_eff: float = 0.0
    c_c: float = 0.0
    c_sigma: float = 0.0
    c_cov: float = 0.0
    mu_cov: float = 0.0
    d_sigma: float = 0.0

    best_vector: np.ndarray | None = None
    """The best candidate seen so far."""

    best_fitness: float = float( "-inf" )
    """The fitness of the best candidate seen so far."""

    h_sigma: float = 1.0
    """The result of the most recent stall gate."""

    trace: deque[ TraceRow ] = field( default_factory=lambda: deque( maxlen=TRACE_LIMIT ) )
    """The most recent rows of the per-iteration trace."""

    topology: tuple[ int, ... ] = ()
    """The enabled innovations of the topology the weights belong to."""

    def __post_init__( self ) -> None:
        self.mean = np.array( self.mean, dtype=float )
        dimension = len( self.mean )
        self.covariance = np.eye( dimension )
        self.path_c = np.zeros( dimension )
        self.path_sigma = np.zeros( dimension )
        self.basis = np.eye( dimension )
        self.scales = np.ones( dimension )
        self._configure()

    @property
    def dimension( self ) -> int:
        """The number of weights being optimised (n)."""
        return len( self.mean )

    def _configure( self ) -> None:
        """Set λ, μ, the weights and the learning rates for the current o."""
        n = self.dimension
        self.sample_count = sample_size( n, self.stagnation )
        self.parent_count = self.sample_count // 2
        self.weights = recombination_weights( self.parent_count )
        self.mu_eff = float( 1.0 / np.sum( self.weights ** 2 ) )
        self.mu_cov = self.mu_eff
        self.c_c = 4.0 / ( n + 4.0 )
        self.c_sigma = ( self.mu_eff + 2.0 ) / ( n + self.mu_eff + 3.0 )
        self.d_sigma = 1.0 + 2.0 * max( 0.0, sqrt( ( self.mu_eff - 1.0 ) / ( n + 1.0 ) ) - 1.0 ) + self.c_sigma
        self.c_cov = (
            ( 1.0 / self.mu_cov ) * 2.0 / ( n + sqrt( 2.0 ) ) ** 2
            + ( 1.0 - 1.0 / self.mu_cov )
            * min( 1.0, ( 2.0 * self.mu_eff - 1.0 ) / ( ( n + 2.0 ) ** 2 + self.mu_eff ) )
        )
        self.tau_stop = self.budget.tau_stop( self.stagnation )

    @staticmethod
    def start(
        x0: Sequence[ float ] | np.ndarray,
        stagnation: int,
        budget: CmaBudget,
        topology: tuple[ int, ... ] = ()
    ) -> "CmaState":
        """Start a CMA-ES run.

        Args:
            x0: The initial mean.
            stagnation: The stagnation level (o).
            budget: The budget of the run.
            topology: The enabled innovations the weights belong to.

        Returns:
            The state of the new run.
        """
        if len( x0 ) < 1:
            raise ValueError( "CMA-ES needs at least one dimension" )
        return CmaState(
            mean       = np.array( x0, dtype=float ),
            sigma      = budget.initial_sigma( stagnation ),
            budget     = budget,
            stagnation = stagnation,
            topology   = topology
        )

    def ask( self, rng: np.random.Generator ) -> np.ndarray:
        """Sample λ candidates from the search distribution.

        Args:
            rng: The random number generator.

        Returns:
            The candidates, one per row.
        """
        normal = rng.standard_normal( ( self.sample_count, self.dimension ) )
        return self.mean + self.sigma * ( normal * self.scales ) @ self.basis.T

    @staticmethod
    def rank( candidates: np.ndarray, fitness: Sequence[ float ] | np.ndarray ) -> Ranked:
        """Sort candidates best first; ties keep their original order.

        Args:
            candidates: The candidates, one per row.
            fitness: The fitness of each candidate.

        Returns:
            The ranked candidates.
        """
        fitness = np.asarray( fitness, dtype=float )
        if len( fitness ) != len( candidates ):
            raise ValueError( "There must be one fitness per candidate" )
        order = np.argsort( -fitness, kind="stable" )
        return Ranked( np.asarray( candidates )[ order ], fitness[ order ] )

    def update_mean( self, ranked: Ranked ) -> tuple[ np.ndarray, np.ndarray ]:
        """Move the mean to the weighted average of the best μ candidates.

        Args:
            ranked: The ranked candidates.

        Returns:
            The new mean and the displacement from the old mean.
        """
        new_mean = self.weights @ ranked.candidates[ : self.parent_count ]
        displacement = new_mean - self.mean
        self.mean = new_mean
        return new_mean, displacement

    def update_paths( self, displacement: np.ndarray ) -> float:
        """Update the evolution paths from the mean displacement.

        Args:
            displacement: The displacement of the mean this iteration.

        Returns:
            The stall gate H_σ.
        """
        n = self.dimension
        inverse_root = ( self.basis / self.scales ) @ self.basis.T
        self.path_sigma = (
            ( 1.0 - self.c_sigma ) * self.path_sigma
            + sqrt( self.c_sigma * ( 2.0 - self.c_sigma ) * self.mu_eff )
            * ( inverse_root @ displacement ) / self.sigma
        )
        trials = self.iteration + 1
        normalised = np.linalg.norm( self.path_sigma ) / sqrt( 1.0 - ( 1.0 - self.c_sigma ) ** ( 2 * trials ) )
        self.h_sigma = 1.0 if normalised < ( 1.4 + 2.0 / ( n + 1.0 ) ) * expected_norm( n ) else 0.0
        self.path_c = (
            ( 1.0 - self.c_c ) * self.path_c
            + self.h_sigma * sqrt( self.c_c * ( 2.0 - self.c_c ) )
            * ( sqrt( self.mu_eff ) / self.sigma ) * displacement
        )
        return self.h_sigma

    def update_covariance( self, ranked: Ranked, old_mean: np.ndarray ) -> np.ndarray:
        """Apply the rank-one and rank-μ updates to the covariance matrix.

        Args:
            ranked: The ranked candidates.
            old_mean: The mean the candidates were sampled around.

        Returns:
            The new covariance matrix.
        """
        deviations = ranked.candidates[ : self.parent_count ] - old_mean
        rank_mu = ( deviations.T * self.weights ) @ deviations / self.sigma ** 2
        covariance = (
            ( 1.0 - self.c_cov ) * self.covariance
            + ( self.c_cov / self.mu_cov ) * np.outer( self.path_c, self.path_c )
            + self.c_cov * ( 1.0 - 1.0 / self.mu_cov ) * rank_mu
        )
        self.covariance = ( covariance + covariance.T ) / 2.0
        try:
            self._decompose()
        except NumericalError as error:
            log_.warning( "Resetting the covariance matrix to the identity: %s", error )
            self.covariance = np.eye( self.dimension )
            self.basis = np.eye( self.dimension )
            self.scales = np.ones( self.dimension )
        return self.covariance

    def _decompose( self ) -> None:
        """Refresh B and E from the covariance matrix.

        Raises:
            NumericalError: If the decomposition fails.
        """
        if not np.all( np.isfinite( self.covariance ) ):
            raise NumericalError( "The covariance matrix is not finite" )
        try:
            values, vectors = np.linalg.eigh( self.covariance )
        except np.linalg.LinAlgError as error:
            raise NumericalError( f"Eigendecomposition failed: {error}" ) from None
        self.basis = vectors
        self.scales = np.sqrt( np.maximum( values, EIGEN_FLOOR ) )

    def update_step_size( self ) -> float:
        """Adapt the step size from the length of the step-size path.

        Returns:
            The new step size.
        """
        self.sigma *= exp(
            ( self.c_sigma / self.d_sigma )
            * ( np.linalg.norm( self.path_sigma ) / expected_norm( self.dimension ) - 1.0 )
        )
        return self.sigma

    def tell( self, candidates: np.ndarray, fitness: Sequence[ float ] | np.ndarray ) -> Ranked:
        """Run one full update from the evaluated candidates.

        Args:
            candidates: The candidates, one per row.
            fitness: The fitness of each candidate.

        Returns:
            The ranked candidates.
        """
        ranked = self.rank( candidates, fitness )
        if ranked.fitness[ 0 ] > self.best_fitness:
            self.best_fitness = float( ranked.fitness[ 0 ] )
            self.best_vector = ranked.candidates[ 0 ].copy()
        old_mean = self.mean
        _, displacement = self.update_mean( ranked )
        self.update_paths( displacement )
        self.update_covariance( ranked, old_mean )
        self.update_step_size()
        self.iteration += 1
        self.trace.append( TraceRow(
            self.iteration,
            self.sigma,
            float( ranked.fitness[ 0 ] ),
            float( np.mean( ranked.fitness ) ),
            float( ( self.scales.max() / self.scales.min() ) ** 2 )
        ) )
        return ranked

    def inflate( self, stagnation: int ) -> None:
        """Inflate the run for a new stagnation level.

        λ, μ, the weights and the learning rates are recomputed, the
        iteration budget becomes `ρ(1 + o)` and the step size is reset.

        Args:
            stagnation: The new stagnation level (o).
        """
        self.stagnation = stagnation
        self._configure()
        self.sigma = self.budget.initial_sigma( stagnation )

    def should_stop( self ) -> bool:
        """Has the run beaten its fitness target or used its iterations?"""
        return self.best_fitness > self.budget.f_stop or self.iteration >= self.tau_stop

### cma.py ends here
