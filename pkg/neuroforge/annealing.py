"""Provides the simulated-annealing schedule for the mutation rates."""

##############################################################################
# Python imports.
from dataclasses import dataclass, replace
from typing      import NamedTuple

##############################################################################
# Local imports.
from .config import MacroConfig

##############################################################################
def clamp( value: float, low: float, high: float ) -> float:
    """Clamp a value into `[low, high]`."""
    return max( low, min( high, value ) )

##############################################################################
class AnnealedRates( NamedTuple ):
    """The mutation rates in force for a generation."""

    pi_add_node: float
    """Probability of adding a node."""

    pi_add_link: float
    """Probability of adding a link."""

    p_mutate_only: float
    """Probability of reproducing by mutation alone."""

##############################################################################
@dataclass( frozen=True )
class AnnealState:
    """The state of the annealing schedule.

    `x_add_node` and `x_add_link` are kept unclamped so that they keep
    cooling while the emitted probability sits at its upper bound;
    `x_mutate_only` is kept inside its band.
    """

    x_add_node: float = 0.2
    x_add_link: float = 0.6
    x_mutate_only: float = 0.3

    temperature: int = 1
    """Generations since the last reset (T)."""

    k3: int = 1
    """Direction of the mutate-only drift: +1 while improving, -1 after a reset."""

    @staticmethod
    def start( config: MacroConfig ) -> "AnnealState":
        """The starting state for the given configuration."""
        return AnnealState(
            config.pi_add_node,
            config.pi_add_link,
            clamp( config.p_mutate_only, config.psi5, config.psi6 )
        )

    def reset( self, config: MacroConfig ) -> "AnnealState":
        """Reset the schedule after the population fails to improve.

        Returns:
            The state with the starting values, `T = 1` and `k3 = -1`.
        """
        return replace( AnnealState.start( config ), k3=-1 )

    def improving( self ) -> "AnnealState":
        """Note that the population improved (`k3 = +1`)."""
        return replace( self, k3=1 )

##############################################################################
def current_rates( state: AnnealState, config: MacroConfig ) -> AnnealedRates:
    """The clamped rates of a schedule state, without advancing it."""
    return AnnealedRates(
        clamp( state.x_add_node, config.psi1, config.psi2 ),
        clamp( state.x_add_link, config.psi3, config.psi4 ),
        state.x_mutate_only
    )

##############################################################################
def annealed_rates( state: AnnealState, config: MacroConfig ) -> tuple[ AnnealedRates, AnnealState ]:
    """Advance the annealing schedule by one generation.

    Args:
        state: The current schedule state.
        config: The macroscopic evolution configuration.

    Returns:
        The rates to use this generation and the advanced state.
    """
    if state.temperature < 1:
        raise ValueError( "The annealing temperature must be at least 1" )
    x_add_node = state.x_add_node - 1.0 / ( config.k1 * state.temperature )
    x_add_link = state.x_add_link - 1.0 / ( config.k2 * state.temperature )
    x_mutate_only = clamp(
        state.x_mutate_only + state.k3 * config.anneal_delta, config.psi5, config.psi6
    )
    return AnnealedRates(
        clamp( x_add_node, config.psi1, config.psi2 ),
        clamp( x_add_link, config.psi3, config.psi4 ),
        x_mutate_only
    ), replace(
        state,
        x_add_node    = x_add_node,
        x_add_link    = x_add_link,
        x_mutate_only = x_mutate_only,
        temperature   = state.temperature + 1
    )

### annealing.py ends here
