"""Tests for the CMA-ES weight optimiser."""

##############################################################################
# Python imports.
from math import log, pi, sqrt

##############################################################################
# Pytest imports.
import pytest

##############################################################################
# NumPy imports.
import numpy as np

##############################################################################
# Local imports.
from neuroforge     import cma
from neuroforge.cma import (
    CmaBudget, CmaState, expected_norm, expected_norm_approximation,
    recombination_weights, sample_size
)

##############################################################################
def _state( dimension: int = 3, stagnation: int = 0, **budget: float ) -> CmaState:
    return CmaState.start( np.zeros( dimension ), stagnation, CmaBudget( **budget ) ) # type: ignore[arg-type]

##############################################################################
def test_sample_size() -> None:
    assert sample_size( 10, 0 ) == 11
    assert sample_size( 10, 5 ) == 13

def test_recombination_weights() -> None:
    weights = recombination_weights( 2 )
    assert weights == pytest.approx( [ 0.7304, 0.2696 ], abs=1e-4 )
    assert 1.0 / np.sum( weights ** 2 ) == pytest.approx( 1.6497, abs=1e-4 )

@pytest.mark.parametrize( "mu", [ 1, 2, 5, 17 ] )
def test_recombination_weights_are_a_decreasing_distribution( mu ) -> None:
    weights = recombination_weights( mu )
    assert weights.sum() == pytest.approx( 1.0 )
    assert np.all( weights > 0 )
    assert np.all( np.diff( weights ) <= 0 )

def test_budget() -> None:
    budget = CmaBudget()
    assert budget.initial_sigma( 3 ) == pytest.approx( 0.51386, abs=1e-5 )
    assert budget.initial_sigma( 0 ) == 0.5
    assert CmaBudget( sigma_d=0.99, o_sigma=1.0 ).initial_sigma( 10 ) == 1.0
    assert budget.tau_stop( 0 ) == 1000
    assert budget.tau_stop( 2 ) == 3000

##############################################################################
def test_expected_norm_spot_values() -> None:
    assert expected_norm( 1 ) == pytest.approx( sqrt( 2 / pi ) )
    assert expected_norm( 1 ) == pytest.approx( 0.797885, abs=1e-6 )
    assert expected_norm_approximation( 1 ) == pytest.approx( 0.797619, abs=1e-6 )
    assert expected_norm( 4 ) == pytest.approx( 1.879971, abs=1e-6 )
    assert expected_norm_approximation( 4 ) == pytest.approx( 1.880952, abs=1e-6 )

def test_expected_norm_approximation_is_close() -> None:
    for n in range( 1, 101 ):
        assert expected_norm_approximation( n ) == pytest.approx( expected_norm( n ), rel=1e-3 )

def test_expected_norm_needs_a_dimension() -> None:
    with pytest.raises( ValueError ):
        expected_norm( 0 )

##############################################################################
def test_start() -> None:
    state = _state( 10, 0 )
    assert state.sample_count == 11
    assert state.parent_count == 5
    assert state.tau_stop == 1000
    assert state.sigma == 0.5
    assert np.array_equal( state.covariance, np.eye( 10 ) )

def test_start_needs_weights() -> None:
    with pytest.raises( ValueError ):
        CmaState.start( [], 0, CmaBudget() )

def test_ask_shape( rng ) -> None:
    state = _state( 4 )
    assert state.ask( rng ).shape == ( state.sample_count, 4 )

def test_ask_without_spread_returns_the_mean( rng ) -> None:
    state = CmaState.start( [ 0.5, -1.0 ], 0, CmaBudget() )
    state.sigma = 0.0
    assert np.array_equal( state.ask( rng ), np.tile( [ 0.5, -1.0 ], ( state.sample_count, 1 ) ) )

def test_ask_covariance( rng ) -> None:
    state = _state( 3 )
    state.sample_count = 100_000
    spread = np.cov( state.ask( rng ), rowvar=False )
    assert spread == pytest.approx( 0.25 * np.eye( 3 ), abs=0.05 * 0.25 )

##############################################################################
def test_rank_orders_best_first() -> None:
    ranked = CmaState.rank( np.array( [ [ 1.0 ], [ 2.0 ], [ 3.0 ], [ 4.0 ] ] ), [ 1.0, 3.0, 2.0, 3.0 ] )
    assert ranked.candidates[ :, 0 ].tolist() == [ 2.0, 4.0, 3.0, 1.0 ]
    assert ranked.fitness.tolist() == [ 3.0, 3.0, 2.0, 1.0 ]

def test_rank_needs_one_fitness_per_candidate() -> None:
    with pytest.raises( ValueError ):
        CmaState.rank( np.zeros( ( 3, 2 ) ), [ 1.0, 2.0 ] )

def test_update_mean() -> None:
    state = _state( 2 )
    state.parent_count = 2
    state.weights = recombination_weights( 2 )
    ranked = CmaState.rank( np.array( [ [ 0.0, 1.0 ], [ 5.0, 5.0 ], [ 1.0, 0.0 ] ] ), [ 2.0, 0.0, 3.0 ] )
    new_mean, displacement = state.update_mean( ranked )
    assert new_mean == pytest.approx( [ 0.7304, 0.2696 ], abs=1e-4 )
    assert np.array_equal( displacement, new_mean )

def test_update_paths_fixed_point() -> None:
    state = _state( 3 )
    assert state.update_paths( np.zeros( 3 ) ) == 1.0
    assert np.array_equal( state.path_sigma, np.zeros( 3 ) )
    assert np.array_equal( state.path_c, np.zeros( 3 ) )

def test_stall_gate_blocks_the_rank_one_path() -> None:
    state = _state( 3 )
    state.update_paths( np.array( [ 1e6, 0.0, 0.0 ] ) )
    assert state.h_sigma == 0.0
    assert np.array_equal( state.path_c, np.zeros( 3 ) )

def test_update_covariance_decays_without_information() -> None:
    state = _state( 3 )
    ranked = CmaState.rank( np.zeros( ( state.sample_count, 3 ) ), np.arange( state.sample_count ) )
    covariance = state.update_covariance( ranked, np.zeros( 3 ) )
    assert covariance == pytest.approx( ( 1.0 - state.c_cov ) * np.eye( 3 ) )

def test_broken_covariance_is_reset() -> None:
    state = _state( 3 )
    state.covariance[ 0, 0 ] = np.nan
    ranked = CmaState.rank( np.zeros( ( state.sample_count, 3 ) ), np.arange( state.sample_count ) )
    assert np.array_equal( state.update_covariance( ranked, np.zeros( 3 ) ), np.eye( 3 ) )

def test_step_size_fixed_point() -> None:
    state = _state( 5 )
    state.path_sigma = np.array( [ expected_norm( 5 ), 0.0, 0.0, 0.0, 0.0 ] )
    assert state.update_step_size() == pytest.approx( 0.5 )

def test_tell_keeps_the_invariants( rng ) -> None:
    state = _state( 4 )
    for _ in range( 30 ):
        candidates = state.ask( rng )
        state.tell( candidates, -np.sum( candidates ** 2, axis=1 ) )
        assert np.array_equal( state.covariance, state.covariance.T )
        assert np.all( state.scales > 0 )
        assert state.sigma > 0
    assert state.iteration == 30
    assert len( state.trace ) == 30
    assert state.trace[ -1 ].iteration == 30
    assert state.best_vector is not None

def test_the_trace_keeps_the_latest_rows( monkeypatch, rng ) -> None:
    monkeypatch.setattr( cma, "TRACE_LIMIT", 5 )
    state = _state( 2 )
    for _ in range( 12 ):
        candidates = state.ask( rng )
        state.tell( candidates, -np.sum( candidates ** 2, axis=1 ) )
    assert [ row.iteration for row in state.trace ] == [ 8, 9, 10, 11, 12 ]

##############################################################################
def test_inflate() -> None:
    state = _state( 10, 0 )
    state.sigma = 0.01
    state.inflate( 5 )
    assert state.sample_count == 13
    assert state.tau_stop == 6000
    assert state.sigma == pytest.approx( 0.5 + 0.01 * log( 6 ) )

def test_should_stop() -> None:
    state = _state( 2, f_stop=1.0 )
    assert not state.should_stop()
    state.best_fitness = 1.5
    assert state.should_stop()
    state = _state( 2, rho=1 )
    state.iteration = 1
    assert state.should_stop()

##############################################################################
def _optimise( objective, x0: np.ndarray, evaluations: int, target: float, seed: int ) -> tuple[ CmaState, int ]:
    """Maximise an objective until it beats the target or the evaluations run out."""
    state = CmaState.start( x0, 0, CmaBudget( sigma_d=0.5 ) )
    rng = np.random.default_rng( seed )
    used = 0
    while used < evaluations and state.best_fitness <= target:
        candidates = state.ask( rng )
        state.tell( candidates, [ objective( candidate ) for candidate in candidates ] )
        used += len( candidates )
    return state, used

def _sphere( x: np.ndarray ) -> float:
    return -float( np.sum( x ** 2 ) )

def _rosenbrock( x: np.ndarray ) -> float:
    return -float( np.sum( 100.0 * ( x[ 1: ] - x[ :-1 ] ** 2 ) ** 2 + ( 1.0 - x[ :-1 ] ) ** 2 ) )

def test_evaluations_are_counted() -> None:
    state, used = _optimise( _sphere, np.full( 10, 3.0 ), 30, -1e-10, 0 )
    assert used == state.iteration * state.sample_count == 33

@pytest.mark.slow
def test_sphere() -> None:
    solved = 0
    for seed in range( 20 ):
        state, used = _optimise( _sphere, np.full( 10, 3.0 ), 5_000, -1e-10, seed )
        solved += state.best_fitness > -1e-10 and used <= 5_000
    assert solved >= 18

@pytest.mark.slow
def test_rosenbrock() -> None:
    solved = 0
    for seed in range( 20 ):
        state, used = _optimise( _rosenbrock, np.zeros( 5 ), 50_000, -1e-6, seed )
        solved += state.best_fitness > -1e-6 and used <= 50_000
    assert solved >= 15

@pytest.mark.slow
def test_rosenbrock_finds_the_minimum() -> None:
    state, _ = _optimise( _rosenbrock, np.zeros( 2 ), 50_000, -1e-10, 5 )
    assert state.best_vector == pytest.approx( [ 1.0, 1.0 ], abs=1e-3 )

### test_cma.py ends here
