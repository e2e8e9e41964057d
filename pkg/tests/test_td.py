"""Tests for residual temporal-difference training."""

##############################################################################
# Python imports.
from dataclasses import replace

##############################################################################
# Pytest imports.
import pytest

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from neuroforge.config       import TDConfig
from neuroforge.environments import XOR_CONTEXTS, ChainMDP, XorBandit, greedy_index, optimal_values
from neuroforge.genome       import InnovationRegistry, new_minimal_genome
from neuroforge.network      import Network, decode
from neuroforge.td           import (
    Transition, bellman_residual, direct_delta, episode_starts, evaluate_fitness, greedy_episode,
    residual_delta, residual_gradient_delta, state_residuals, sweep, td_error, train_episode
)

##############################################################################
CONFIG = TDConfig( alpha=0.05, gamma=0.9, phi=0.5 )

TERMINAL = Transition( [ 2.0 ], None, 1.0 )
"""A step from x = 2 into a terminal state, paying 1."""

ONWARD = Transition( [ 2.0 ], [ 1.0 ], 0.0 )
"""A step from x = 2 to x = 1, paying nothing."""

##############################################################################
@pytest.fixture
def linear( make_genome ) -> Network:
    """The value network V(x) = 0.2·x."""
    return decode( make_genome( [ ( 1, 3, 0.2, True, 1 ), ( 2, 3, 0.0, True, 2 ) ] ) )

def _chain_network( chain: ChainMDP, weights: list[ float ] | None = None, seed: int = 0 ) -> Network:
    """A network over the chain's one-hot features."""
    rng = np.random.default_rng( seed )
    genome = new_minimal_genome( chain.n_features, 1, InnovationRegistry(), rng )
    return decode( genome if weights is None else genome.with_weights( weights ) )

def _optimal_network( chain: ChainMDP, gamma: float ) -> Network:
    values = optimal_values( chain, gamma )
    return _chain_network( chain, [ values.get( state, 0.0 ) for state in range( chain.length ) ] + [ 0.0 ] )

##############################################################################
@pytest.mark.parametrize( "reward, v_next, v_now, gamma, expected", [
    ( 1.0, 0.0, 0.0, 0.9, 1.0 ),
    ( 0.0, 10.0, 9.0, 0.9, 0.0 ),
    ( -1.0, 5.0, 2.0, 0.9, 1.5 ),
] )
def test_td_error( reward, v_next, v_now, gamma, expected ) -> None:
    assert td_error( reward, v_next, v_now, gamma ) == pytest.approx( expected )

def test_td_error_identity() -> None:
    for value in ( -3.0, 0.0, 0.7, 12.5 ):
        assert td_error( 0.0, value / 0.9, value, 0.9 ) == pytest.approx( 0.0, abs=1e-12 )

##############################################################################
def test_direct_delta( linear ) -> None:
    assert direct_delta( linear, TERMINAL, CONFIG )[ 0 ] == pytest.approx( 0.06 )
    assert direct_delta( linear, ONWARD, CONFIG )[ 0 ] == pytest.approx( -0.022 )

def test_residual_gradient_delta( linear ) -> None:
    assert residual_gradient_delta( linear, TERMINAL, CONFIG )[ 0 ] == pytest.approx( 0.06 )
    assert residual_gradient_delta( linear, ONWARD, CONFIG )[ 0 ] == pytest.approx( -0.0121 )

def test_residual_delta( linear ) -> None:
    assert residual_delta( linear, ONWARD, CONFIG )[ 0 ] == pytest.approx( -0.01705 )

def test_residual_delta_endpoints( linear ) -> None:
    for transition in ( TERMINAL, ONWARD ):
        assert np.array_equal(
            residual_delta( linear, transition, replace( CONFIG, phi=0.0 ) ), direct_delta( linear, transition, CONFIG )
        )
        assert np.array_equal(
            residual_delta( linear, transition, replace( CONFIG, phi=1.0 ) ),
            residual_gradient_delta( linear, transition, CONFIG )
        )

def test_zero_error_gives_zero_deltas( linear ) -> None:
    settled = Transition( [ 2.0 ], None, 0.4 )
    assert not np.any( direct_delta( linear, settled, CONFIG ) )
    assert not np.any( residual_gradient_delta( linear, settled, CONFIG ) )

def test_deltas_vanish_at_the_optimal_values() -> None:
    chain = ChainMDP( 5 )
    network = _optimal_network( chain, 0.9 )
    for state in chain.states():
        options = chain.afterstates( state )
        option = options[ greedy_index( network, options, 0.9 ) ]
        transition = Transition( chain.features( state ), option.features, option.reward )
        assert residual_delta( network, transition, CONFIG ) == pytest.approx( np.zeros( 6 ), abs=1e-12 )

##############################################################################
def test_bellman_residual_of_a_blank_network() -> None:
    chain = ChainMDP( 3, forced=True )
    assert bellman_residual( _chain_network( chain, [ 0.0 ] * 4 ), chain, 0.9 ) == pytest.approx( 1.0 )

def test_bellman_residual_at_the_optimal_values() -> None:
    chain = ChainMDP( 5 )
    assert bellman_residual( _optimal_network( chain, 0.9 ), chain, 0.9 ) == pytest.approx( 0.0, abs=1e-12 )

def test_state_residuals_cover_every_state() -> None:
    chain = ChainMDP( 5 )
    residuals = state_residuals( _chain_network( chain ), chain, 0.9 )
    assert [ state for state, _ in residuals ] == chain.states()

def test_sweep_leaves_the_optimal_values_alone() -> None:
    chain = ChainMDP( 5 )
    network = _optimal_network( chain, 0.9 )
    before = network.weights.copy()
    sweep( network, chain, CONFIG )
    assert network.weights == pytest.approx( before, abs=1e-12 )

##############################################################################
def test_forced_chain_episode( rng ) -> None:
    chain = ChainMDP( 3, forced=True )
    assert train_episode( _chain_network( chain ), chain, CONFIG, rng ) == -2.0

def test_training_updates_the_weights( rng ) -> None:
    chain = ChainMDP( 3, forced=True )
    network = _chain_network( chain, [ 0.0 ] * 4 )
    train_episode( network, chain, CONFIG, rng )
    assert np.any( network.weights )

def test_forced_chain_fitness( rng ) -> None:
    chain = ChainMDP( 3, forced=True )
    assert evaluate_fitness( _chain_network( chain ), chain, TDConfig(), rng ) == -400.0
    assert evaluate_fitness( _chain_network( chain ), chain, replace( TDConfig(), fitness_mode="greedy" ), rng ) == -400.0

def test_no_episodes_no_fitness( rng ) -> None:
    chain = ChainMDP( 5 )
    assert evaluate_fitness( _chain_network( chain ), chain, TDConfig( episodes_per_eval=0 ), rng ) == 0.0

def test_fitness_is_reproducible() -> None:
    chain = ChainMDP( 7 )
    config = TDConfig( episodes_per_eval=20, epsilon=0.3 )
    first = evaluate_fitness( _chain_network( chain, seed=4 ), chain, config, np.random.default_rng( 9 ) )
    second = evaluate_fitness( _chain_network( chain, seed=4 ), chain, config, np.random.default_rng( 9 ) )
    assert first == second

def test_episodes_stop_at_the_step_cap( rng ) -> None:
    chain = ChainMDP( 9, left_bonus=0.0, right_bonus=0.0 )
    config = TDConfig( epsilon=0.0, alpha=1e-9, max_steps_per_episode=3 )
    assert train_episode( _chain_network( chain, [ 0.0 ] * 10 ), chain, config, rng ) == -3.0

def test_xor_episodes_take_turns_through_the_contexts( rng ) -> None:
    assert episode_starts( XorBandit(), 6, rng ) == [ *XOR_CONTEXTS, *XOR_CONTEXTS[ :2 ] ]

def test_chain_episodes_start_in_the_start_state( rng ) -> None:
    assert episode_starts( ChainMDP( 7 ), 3, rng ) == [ 3, 3, 3 ]

def test_episodes_can_be_given_a_start( rng ) -> None:
    chain = ChainMDP( 5 )
    assert greedy_episode( _optimal_network( chain, 0.9 ), chain, CONFIG, rng, start=3 ) == pytest.approx( 9.0 )

def test_greedy_episode_on_the_optimal_values( rng ) -> None:
    chain = ChainMDP( 5 )
    assert greedy_episode( _optimal_network( chain, 0.9 ), chain, CONFIG, rng ) == pytest.approx( 8.0 )

##############################################################################
def _hidden_chain_network( chain: ChainMDP, make_genome, seed: int ) -> Network:
    """A network over the chain's features with three hidden nodes and random weights."""
    sources = [ *range( 1, chain.length + 2 ) ]
    output = chain.length + 2
    hidden = ( output + 1, output + 2, output + 3 )
    links = [
        *( ( source, output ) for source in sources ),
        *( ( source, node ) for node in hidden for source in sources ),
        *( ( node, output ) for node in hidden )
    ]
    weights = np.random.default_rng( seed ).normal( 0.0, 0.5, len( links ) )
    genes = [
        ( *link, float( weight ), True, innovation )
        for innovation, ( link, weight ) in enumerate( zip( links, weights ), start=1 )
    ]
    return decode( make_genome(
        genes,
        inputs = sources[ :-1 ],
        bias   = sources[ -1 ],
        output = output,
        hidden = hidden
    ) )

def _value_error( network: Network, chain: ChainMDP, optimal: dict ) -> float:
    return max( abs( network.forward( chain.features( state ) ) - optimal[ state ] ) for state in chain.states() )

def test_the_hidden_chain_network( make_genome ) -> None:
    network = _hidden_chain_network( ChainMDP( 5 ), make_genome, 0 )
    assert network.input_count == 5
    assert len( network.weights ) == 27

##############################################################################
@pytest.mark.slow
def test_residual_sweeps_converge_on_the_chain( make_genome ) -> None:
    chain = ChainMDP( 5 )
    config = TDConfig( alpha=0.05, gamma=0.9, phi=0.5 )
    optimal = optimal_values( chain, config.gamma )
    sweeps = 50_000 // len( chain.states() )
    converged = 0
    for seed in range( 10 ):
        network = _hidden_chain_network( chain, make_genome, seed )
        for _ in range( sweeps ):
            sweep( network, chain, config )
            if bellman_residual( network, chain, config.gamma ) < 1e-2 and _value_error( network, chain, optimal ) <= 0.1:
                converged += 1
                break
    assert converged >= 8

@pytest.mark.slow
def test_residual_gradient_sweeps_never_raise_the_residual( make_genome ) -> None:
    chain = ChainMDP( 5 )
    config = TDConfig( alpha=0.05, gamma=0.9, phi=1.0 )
    steady = 0
    for seed in range( 10 ):
        network = _hidden_chain_network( chain, make_genome, seed )
        residuals = [ bellman_residual( network, chain, config.gamma ) ]
        for _ in range( 20 ):
            for _ in range( 100 ):
                sweep( network, chain, config )
            residuals.append( bellman_residual( network, chain, config.gamma ) )
        steady += all( later <= earlier * ( 1 + 1e-9 ) + 1e-12 for earlier, later in zip( residuals, residuals[ 1: ] ) )
    assert steady >= 9

### test_td.py ends here
