"""Provides the deterministic episodic tasks networks are trained and scored on.

Every environment exposes its transitions as afterstates: for a state, the
list of `(successor, reward)` pairs one action away. A value network picks
the afterstate with the best `R + γ·V(successor)`.
"""

##############################################################################
# Python imports.
from abc    import ABC, abstractmethod
from typing import Hashable, NamedTuple, Sequence

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from .config  import EnvConfig
from .errors  import EnumerationError, NumericalError, TerminalError, ValidationError
from .network import Network

##############################################################################
State = Hashable
"""The type of an environment state."""

##############################################################################
class Afterstate( NamedTuple ):
    """One legal transition out of a state."""

    successor: State
    """The state the transition leads to."""

    features: tuple[ float, ... ] | None
    """The features of the successor, or `None` if it is terminal."""

    reward: float
    """The reward for making the transition."""

    action: int
    """The index of the action that makes the transition."""

    @property
    def terminal( self ) -> bool:
        """Does the transition end the episode?"""
        return self.features is None

##############################################################################
def afterstate_value( network: Network, afterstate: Afterstate, gamma: float ) -> float:
    """The one-step look-ahead value `R + γ·V(successor)` of an afterstate.

    Terminal successors have a value of zero.
    """
    if afterstate.features is None:
        return afterstate.reward
    return afterstate.reward + gamma * network.forward( afterstate.features )

def greedy_index( network: Network, afterstates: Sequence[ Afterstate ], gamma: float ) -> int:
    """Get the index of the best afterstate; the lowest index wins ties."""
    return int( np.argmax( [ afterstate_value( network, option, gamma ) for option in afterstates ] ) )

##############################################################################
class Environment( ABC ):
    """Base class for the environments."""

    name: str = ""
    """The name of the environment in the configuration."""

    @property
    @abstractmethod
    def n_features( self ) -> int:
        """The size of the feature vector of a state."""

    @abstractmethod
    def initial_state( self, rng: np.random.Generator ) -> State:
        """Get the state an episode starts in."""

    def starts( self ) -> tuple[ State, ... ]:
        """Get the states successive episodes take turns to start in.

        An empty tuple means every episode starts from `initial_state`.
        """
        return ()

    @abstractmethod
    def is_terminal( self, state: State ) -> bool:
        """Is the given state terminal?"""

    @abstractmethod
    def features( self, state: State ) -> tuple[ float, ... ]:
        """Get the feature vector of a non-terminal state."""

    @abstractmethod
    def _afterstates( self, state: State ) -> list[ Afterstate ]:
        ...

    def afterstates( self, state: State ) -> list[ Afterstate ]:
        """Get the transitions out of a state.

        Args:
            state: The state.

        Returns:
            Every legal transition, in action order.

        Raises:
            TerminalError: If the state is terminal.
        """
        if self.is_terminal( state ):
            raise TerminalError( f"{self.state_label( state )} is a terminal state" )
        return self._afterstates( state )

    def states( self ) -> list[ State ]:
        """Get every non-terminal state.

        Raises:
            EnumerationError: If the environment can't enumerate its states.
        """
        raise EnumerationError( f"The {self.name} environment can't enumerate its states" )

    def state_label( self, state: State ) -> str:
        """Get a printable label for a state."""
        return str( state )

    def greedy_path( self, network: Network, state: State, gamma: float, max_steps: int ) -> list[ Afterstate ]:
        """Follow the greedy policy from a state.

        Args:
            network: The value network.
            state: The state to start from.
            gamma: The discount factor.
            max_steps: The most steps to take.

        Returns:
            The transitions taken.
        """
        path: list[ Afterstate ] = []
        while len( path ) < max_steps and not self.is_terminal( state ):
            options = self.afterstates( state )
            path.append( chosen := options[ greedy_index( network, options, gamma ) ] )
            state = chosen.successor
        return path

    @abstractmethod
    def success( self, network: Network, gamma: float, max_steps: int ) -> bool:
        """Does the network's greedy policy solve the task?"""

##############################################################################
class ChainMDP( Environment ):
    """A line of states with a terminal at each end.

    Every step costs `step_reward`; entering the left or right end also
    pays that end's bonus. In forced mode the only move is to the right,
    the only terminal is the right end and no bonus is paid.
    """

    name = "chain"

    def __init__(
        self,
        length: int = 5,
        start: int | None = None,
        forced: bool = False,
        left_bonus: float = 1.0,
        right_bonus: float = 10.0,
        step_reward: float = -1.0
    ) -> None:
        """Initialise the chain.

        Args:
            length: The number of states.
            start: The starting state; defaults to the middle, or the left end when forced.
            forced: Only allow moves to the right?
            left_bonus: The bonus for entering the left end.
            right_bonus: The bonus for entering the right end.
            step_reward: The reward for every step.
        """
        if length < ( 2 if forced else 3 ):
            raise ValueError( f"A chain of length {length} has no non-terminal states" )
        self.length      = length
        self.forced      = forced
        self.left_bonus  = 0.0 if forced else left_bonus
        self.right_bonus = 0.0 if forced else right_bonus
        self.step_reward = step_reward
        self.start       = ( 0 if forced else length // 2 ) if start is None else start
        if self.is_terminal( self.start ) or not 0 <= self.start < length:
            raise ValueError( f"{self.start} is not a valid starting state" )

    @property
    def n_features( self ) -> int:
        """One indicator per position."""
        return self.length

    def initial_state( self, rng: np.random.Generator ) -> int:
        """Episodes always start in the starting state."""
        return self.start

    def is_terminal( self, state: State ) -> bool:
        """The right end is terminal, and so is the left end unless the chain is forced."""
        return state == self.length - 1 or ( state == 0 and not self.forced )

    def features( self, state: State ) -> tuple[ float, ... ]:
        """The one-hot encoding of the position."""
        return tuple( 1.0 if position == state else 0.0 for position in range( self.length ) )

    def _move( self, state: int, step: int, action: int ) -> Afterstate:
        """The afterstate of stepping from a state."""
        successor = state + step
        reward = self.step_reward
        if successor == self.length - 1:
            reward += self.right_bonus
        elif successor == 0:
            reward += self.left_bonus
        return Afterstate(
            successor,
            None if self.is_terminal( successor ) else self.features( successor ),
            reward,
            action
        )

    def _afterstates( self, state: State ) -> list[ Afterstate ]:
        """A step right, preceded by a step left unless the chain is forced."""
        assert isinstance( state, int )
        if self.forced:
            return [ self._move( state, 1, 0 ) ]
        return [ self._move( state, -1, 0 ), self._move( state, 1, 1 ) ]

    def states( self ) -> list[ State ]:
        """Every position between the ends."""
        return [ state for state in range( self.length ) if not self.is_terminal( state ) ]

    def success( self, network: Network, gamma: float, max_steps: int ) -> bool:
        """Does the greedy path from the start reach the right end?"""
        path = self.greedy_path( network, self.start, gamma, max_steps )
        return bool( path ) and path[ -1 ].successor == self.length - 1

##############################################################################
XOR_CONTEXTS = ( ( 0, 0 ), ( 0, 1 ), ( 1, 0 ), ( 1, 1 ) )
"""The four contexts of the XOR task."""

XOR_DONE = "done"
"""The terminal state of the XOR task."""

class XorBandit( Environment ):
    """A one-decision task whose correct answer is the XOR of the context.

    An episode starts in a decision state `(c1, c2)` whose features are
    `(c1, c2, 0.5)`. Answering moves to the answer state `(c1, c2, a)`
    with features `(c1, c2, a)` and no reward; the answer state then
    resolves into the terminal state with +1 when `a == c1 XOR c2` and
    -1 otherwise.
    """

    name = "xor"

    @property
    def n_features( self ) -> int:
        """The context and the answer slot."""
        return 3

    def initial_state( self, rng: np.random.Generator ) -> tuple[ int, ... ]:
        """Get a random context."""
        return XOR_CONTEXTS[ int( rng.integers( len( XOR_CONTEXTS ) ) ) ]

    def starts( self ) -> tuple[ State, ... ]:
        """Training and scoring take turns through the four contexts."""
        return XOR_CONTEXTS

    def is_terminal( self, state: State ) -> bool:
        """Only the resolved state is terminal."""
        return state == XOR_DONE

    def features( self, state: State ) -> tuple[ float, ... ]:
        """The context plus 0.5 for a decision state, or plus the answer."""
        assert isinstance( state, tuple )
        if len( state ) == 2:
            return ( float( state[ 0 ] ), float( state[ 1 ] ), 0.5 )
        return tuple( float( value ) for value in state )

    def _afterstates( self, state: State ) -> list[ Afterstate ]:
        """Both answers from a decision state, or the resolution of an answer."""
        assert isinstance( state, tuple )
        if len( state ) == 2:
            return [
                Afterstate( answer := ( *state, choice ), self.features( answer ), 0.0, choice )
                for choice in ( 0, 1 )
            ]
        first, second, choice = state
        return [ Afterstate( XOR_DONE, None, 1.0 if choice == first ^ second else -1.0, 0 ) ]

    def states( self ) -> list[ State ]:
        """The four decision states and the eight answer states."""
        return [
            *XOR_CONTEXTS,
            *( ( *context, choice ) for context in XOR_CONTEXTS for choice in ( 0, 1 ) )
        ]

    def answer( self, network: Network, context: tuple[ int, int ], gamma: float ) -> int:
        """Get the greedy answer of a network in a context."""
        options = self.afterstates( context )
        return options[ greedy_index( network, options, gamma ) ].action

    def success( self, network: Network, gamma: float, max_steps: int ) -> bool:
        """Is the greedy answer right in every context?"""
        return all(
            self.answer( network, context, gamma ) == context[ 0 ] ^ context[ 1 ]  # type: ignore[arg-type]
            for context in XOR_CONTEXTS
        )

##############################################################################
GRID_MOVES = ( ( 0, -1 ), ( 0, 1 ), ( -1, 0 ), ( 1, 0 ) )
"""The moves of the grid world: up, down, left and right."""

class GridWorld( Environment ):
    """A rectangular grid with a goal in the far corner.

    Moves off the grid leave the agent where it is. Every move costs
    `step_reward`; entering the goal also pays `goal_reward`.
    """

    name = "grid"

    def __init__(
        self,
        width: int = 4,
        height: int = 4,
        goal_reward: float = 10.0,
        step_reward: float = -1.0,
        start: tuple[ int, int ] = ( 0, 0 )
    ) -> None:
        """Initialise the grid.

        Args:
            width: The number of columns.
            height: The number of rows.
            goal_reward: The bonus for entering the goal.
            step_reward: The reward for every move.
            start: The starting cell.
        """
        if width < 1 or height < 1 or width * height < 2:
            raise ValueError( "A grid needs at least two cells" )
        self.width       = width
        self.height      = height
        self.goal        = ( width - 1, height - 1 )
        self.goal_reward = goal_reward
        self.step_reward = step_reward
        self.start       = start
        if not self._inside( *start ) or start == self.goal:
            raise ValueError( f"{start} is not a valid starting cell" )

    def _inside( self, x: int, y: int ) -> bool:
        """Is the cell on the grid?"""
        return 0 <= x < self.width and 0 <= y < self.height

    @property
    def n_features( self ) -> int:
        """The position and the distance to the goal on each axis."""
        return 4

    def initial_state( self, rng: np.random.Generator ) -> tuple[ int, int ]:
        """Episodes always start in the starting cell."""
        return self.start

    def is_terminal( self, state: State ) -> bool:
        """Only the goal is terminal."""
        return state == self.goal

    def features( self, state: State ) -> tuple[ float, ... ]:
        """The position and the distance to the goal, scaled by the grid size."""
        x, y = state  # type: ignore[misc]
        goal_x, goal_y = self.goal
        return (
            x / self.width,
            y / self.height,
            ( goal_x - x ) / self.width,
            ( goal_y - y ) / self.height
        )

    def _afterstates( self, state: State ) -> list[ Afterstate ]:
        """One move in each direction, in the order of `GRID_MOVES`."""
        x, y = state  # type: ignore[misc]
        options: list[ Afterstate ] = []
        for action, ( step_x, step_y ) in enumerate( GRID_MOVES ):
            successor = ( x + step_x, y + step_y ) if self._inside( x + step_x, y + step_y ) else ( x, y )
            if successor == self.goal:
                options.append( Afterstate( successor, None, self.step_reward + self.goal_reward, action ) )
            else:
                options.append( Afterstate( successor, self.features( successor ), self.step_reward, action ) )
        return options

    def states( self ) -> list[ State ]:
        """Every cell but the goal, row by row."""
        return [
            ( x, y ) for y in range( self.height ) for x in range( self.width ) if ( x, y ) != self.goal
        ]

    def success( self, network: Network, gamma: float, max_steps: int ) -> bool:
        """Does the greedy path from the start reach the goal?"""
        path = self.greedy_path( network, self.start, gamma, max_steps )
        return bool( path ) and path[ -1 ].successor == self.goal

##############################################################################
def optimal_values(
    environment: Environment, gamma: float, tolerance: float = 1e-12, max_sweeps: int = 100_000
) -> dict[ State, float ]:
    """Compute the optimal state values by value iteration.

    Args:
        environment: The environment; it must be able to enumerate its states.
        gamma: The discount factor.
        tolerance: Stop once no value changes by this much or more.
        max_sweeps: The most sweeps to make.

    Returns:
        V* for every non-terminal state; terminal states are worth zero.

    Raises:
        EnumerationError: If the environment can't enumerate its states.
        NumericalError: If the values don't settle.
    """
    states = environment.states()
    transitions = { state: environment.afterstates( state ) for state in states }
    values = { state: 0.0 for state in states }
    for _ in range( max_sweeps ):
        updated = {
            state: max(
                option.reward + ( 0.0 if option.terminal else gamma * values[ option.successor ] )
                for option in transitions[ state ]
            )
            for state in states
        }
        change = max( abs( updated[ state ] - values[ state ] ) for state in states )
        values = updated
        if change < tolerance:
            return values
    raise NumericalError( f"Value iteration did not settle within {max_sweeps} sweeps" )

##############################################################################
def make_environment( config: EnvConfig ) -> Environment:
    """Create the environment named in the configuration.

    Args:
        config: The environment configuration.

    Returns:
        The environment.

    Raises:
        ValidationError: If the parameters don't describe a usable environment.
    """
    try:
        if config.name == "chain":
            return ChainMDP(
                length      = config.length,
                start       = None if config.start < 0 else config.start,
                forced      = config.forced,
                left_bonus  = config.left_bonus,
                right_bonus = config.right_bonus,
                step_reward = config.step_reward
            )
        if config.name == "xor":
            return XorBandit()
        return GridWorld(
            width       = config.width,
            height      = config.height,
            goal_reward = config.goal_reward,
            step_reward = config.step_reward
        )
    except ValueError as error:
        raise ValidationError( str( error ) ) from None

### environments.py ends here
