"""Provides residual temporal-difference training of value networks.

Three weight updates are available for a transition `x → x'` with reward
`R`, all driven by the TD error `δ = R + γ·V(x') − V(x)`:

* the direct update `α·δ·∂V(x)/∂w`;
* the residual-gradient update `−α·δ·(γ·∂V(x')/∂w − ∂V(x)/∂w)`;
* the residual update, which blends the two with `φ`.

Terminal successors have `V = 0` and a zero gradient.
"""

##############################################################################
# Python imports.
from typing import NamedTuple, Sequence

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from .config       import TDConfig
from .environments import Afterstate, Environment, State, greedy_index
from .network      import Network

##############################################################################
class Transition( NamedTuple ):
    """One step of experience."""

    state: Sequence[ float ]
    """The features of the state the step was taken from."""

    successor: Sequence[ float ] | None
    """The features of the state the step led to, or `None` if it is terminal."""

    reward: float
    """The reward for the step."""

##############################################################################
def td_error( reward: float, v_next: float, v_now: float, gamma: float ) -> float:
    """The reward prediction error `R + γ·V(x') − V(x)`."""
    return reward + gamma * v_next - v_now

def _deltas( network: Network, transition: Transition, config: TDConfig ) -> tuple[ np.ndarray, np.ndarray ]:
    """The direct and residual-gradient weight updates for a transition (not applied)."""
    v_now, g_now = network.value_and_gradient( transition.state )
    if transition.successor is None:
        v_next, g_next = 0.0, np.zeros_like( g_now )
    else:
        v_next, g_next = network.value_and_gradient( transition.successor )
    error = td_error( transition.reward, v_next, v_now, config.gamma )
    return (
        config.alpha * error * g_now,
        -config.alpha * error * ( config.gamma * g_next - g_now )
    )

def direct_delta( network: Network, transition: Transition, config: TDConfig ) -> np.ndarray:
    """The direct TD weight update for a transition (not applied).

    Args:
        network: The value network.
        transition: The transition.
        config: The TD configuration.

    Returns:
        The weight delta.
    """
    return _deltas( network, transition, config )[ 0 ]

def residual_gradient_delta( network: Network, transition: Transition, config: TDConfig ) -> np.ndarray:
    """The residual-gradient weight update for a transition (not applied).

    Args:
        network: The value network.
        transition: The transition.
        config: The TD configuration.

    Returns:
        The weight delta.
    """
    return _deltas( network, transition, config )[ 1 ]

def residual_delta( network: Network, transition: Transition, config: TDConfig ) -> np.ndarray:
    """The residual weight update: `(1 − φ)·direct + φ·residual-gradient`.

    Args:
        network: The value network.
        transition: The transition.
        config: The TD configuration.

    Returns:
        The weight delta.
    """
    direct, gradient = _deltas( network, transition, config )
    return ( 1.0 - config.phi ) * direct + config.phi * gradient

##############################################################################
def _transition( environment: Environment, state: State, chosen: Afterstate ) -> Transition:
    """The transition from a state into a chosen afterstate."""
    return Transition( environment.features( state ), chosen.features, chosen.reward )

def state_residuals( network: Network, environment: Environment, gamma: float ) -> list[ tuple[ State, float ] ]:
    """Get the Bellman residual of every non-terminal state.

    The residual of a state is `R + γ·V(x') − V(x)` along the greedy
    transition out of it.

    Args:
        network: The value network.
        environment: The environment.
        gamma: The discount factor.

    Returns:
        The states and their residuals, in the environment's state order.

    Raises:
        EnumerationError: If the environment can't enumerate its states.
    """
    residuals: list[ tuple[ State, float ] ] = []
    for state in environment.states():
        options = environment.afterstates( state )
        chosen = options[ greedy_index( network, options, gamma ) ]
        residuals.append( ( state, td_error(
            chosen.reward,
            0.0 if chosen.features is None else network.forward( chosen.features ),
            network.forward( environment.features( state ) ),
            gamma
        ) ) )
    return residuals

def bellman_residual( network: Network, environment: Environment, gamma: float ) -> float:
    """The mean squared Bellman residual over the non-terminal states.

    Raises:
        EnumerationError: If the environment can't enumerate its states.
    """
    residuals = [ residual for _, residual in state_residuals( network, environment, gamma ) ]
    return float( np.mean( np.square( residuals ) ) ) if residuals else 0.0

##############################################################################
def episode_starts( environment: Environment, count: int, rng: np.random.Generator ) -> list[ State ]:
    """Get the start state of each of a run of episodes.

    Environments with a fixed set of starts take turns through them; the
    others start wherever `initial_state` says.

    Args:
        environment: The environment.
        count: The number of episodes.
        rng: The random number generator.

    Returns:
        The start state of each episode.
    """
    if starts := environment.starts():
        return [ starts[ episode % len( starts ) ] for episode in range( count ) ]
    return [ environment.initial_state( rng ) for _ in range( count ) ]

##############################################################################
def train_episode(
    network: Network,
    environment: Environment,
    config: TDConfig,
    rng: np.random.Generator,
    start: State | None = None
) -> float:
    """Run one training episode, updating the weights after every step.

    Afterstates are picked ε-greedily on `R + γ·V(x')`.

    Args:
        network: The value network; its weights are updated in place.
        environment: The environment.
        config: The TD configuration.
        rng: The random number generator.
        start: The state to start in; defaults to the environment's initial state.

    Returns:
        The total reward of the episode.
    """
    state = environment.initial_state( rng ) if start is None else start
    total = 0.0
    for _ in range( config.max_steps_per_episode ):
        if environment.is_terminal( state ):
            break
        options = environment.afterstates( state )
        if rng.random() < config.epsilon:
            chosen = options[ int( rng.integers( len( options ) ) ) ]
        else:
            chosen = options[ greedy_index( network, options, config.gamma ) ]
        network.weights += residual_delta( network, _transition( environment, state, chosen ), config )
        total += chosen.reward
        state = chosen.successor
    return total

def greedy_episode(
    network: Network,
    environment: Environment,
    config: TDConfig,
    rng: np.random.Generator,
    start: State | None = None
) -> float:
    """Run one greedy episode without learning.

    Args:
        network: The value network.
        environment: The environment.
        config: The TD configuration.
        rng: The random number generator (used for the initial state).
        start: The state to start in; defaults to the environment's initial state.

    Returns:
        The total reward of the episode.
    """
    path = environment.greedy_path(
        network,
        environment.initial_state( rng ) if start is None else start,
        config.gamma,
        config.max_steps_per_episode
    )
    return sum( step.reward for step in path )

def sweep( network: Network, environment: Environment, config: TDConfig ) -> None:
    """Apply the residual update along the greedy transition of every state.

    Args:
        network: The value network; its weights are updated in place.
        environment: The environment.
        config: The TD configuration.

    Raises:
        EnumerationError: If the environment can't enumerate its states.
    """
    for state in environment.states():
        options = environment.afterstates( state )
        chosen = options[ greedy_index( network, options, config.gamma ) ]
        network.weights += residual_delta( network, _transition( environment, state, chosen ), config )

##############################################################################
def evaluate_fitness(
    network: Network, environment: Environment, config: TDConfig, rng: np.random.Generator
) -> float:
    """Train a network and score it.

    In `training` mode the fitness is the total reward collected over
    `episodes_per_eval` training episodes. In `greedy` mode the network is
    trained for that many episodes and then scored on as many greedy ones.
    Both runs of episodes start from `episode_starts`.

    Args:
        network: The value network; it is trained in place.
        environment: The environment.
        config: The TD configuration.
        rng: The random number generator.

    Returns:
        The raw fitness.
    """
    starts = episode_starts( environment, config.episodes_per_eval, rng )
    training = sum( train_episode( network, environment, config, rng, start ) for start in starts )
    if config.fitness_mode == "training":
        return float( training )
    return float( sum( greedy_episode( network, environment, config, rng, start ) for start in starts ) )

### td.py ends here
