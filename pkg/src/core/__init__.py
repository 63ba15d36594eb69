"""
Core modules for mixcheck
"""

from .rng_dist import DistributionSpec, SeedSpec, UnitVector, moments, sample_iid, to_unit_vector
from .matrices import (
    PermutationConstraint,
    PermutationMatrix,
    equal_components_matrix,
    householder,
    random_permutation,
    unistochastic_from,
)
from .spectra import Lambda2Transform, eigenvalues, second_eigenvalue
from .critical_values import CriticalValueEstimator, CriticalValues, McConfig, establish_critical_values
from .ulam import PartitionSpec, TransitionData, empirical_matrix, load_transitions, transition_counts
from .mixing_test import MixingTest, Verdict, classify, froyland_entropy, mixing_rate, run_test
from .protocols import ProtocolSimulator, ProtocolSpec, simulate

__all__ = [
    'DistributionSpec',
    'SeedSpec',
    'UnitVector',
    'moments',
    'sample_iid',
    'to_unit_vector',
    'PermutationConstraint',
    'PermutationMatrix',
    'equal_components_matrix',
    'householder',
    'random_permutation',
    'unistochastic_from',
    'Lambda2Transform',
    'eigenvalues',
    'second_eigenvalue',
    'CriticalValueEstimator',
    'CriticalValues',
    'McConfig',
    'establish_critical_values',
    'PartitionSpec',
    'TransitionData',
    'empirical_matrix',
    'load_transitions',
    'transition_counts',
    'MixingTest',
    'Verdict',
    'classify',
    'froyland_entropy',
    'mixing_rate',
    'run_test',
    'ProtocolSimulator',
    'ProtocolSpec',
    'simulate',
]
