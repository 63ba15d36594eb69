"""
Command-line interface
Batch subcommands wiring critical values, simulation, the test and the closed forms
"""

import csv
import functools
import io
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import click
import numpy as np

from core.analytic import (
    Branch,
    TwoRegionCase,
    bound_table,
    expected_lambda2_beta,
    lambda2_two_region,
    two_region_matrix,
    two_region_tail_probability,
)
from core.critical_values import CriticalValueEstimator, CriticalValues, McConfig
from core.matrices import PermutationConstraint
from core.mixing_test import MixingTest, RateModel, froyland_entropy, suggest_partition_count
from core.protocols import ProtocolSimulator, ProtocolSpec
from core.rng_dist import DistributionSpec, SeedSpec, moments
from core.spectra import Lambda2Transform
from core.ulam import PartitionSpec, empirical_matrix, load_counts, load_transitions, transition_counts
from utils.config import Config
from utils.errors import MixCheckError, ParameterError
from utils.logger import setup_logger

logger = logging.getLogger('cli')

LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']


class _SpecType(click.ParamType):
    """Click type backed by a `parse` classmethod that raises ParameterError"""

    def __init__(self, name: str, parse: Callable):
        self.name = name
        self._parse = parse

    def convert(self, value, param, ctx):
        if not isinstance(value, str):
            return value
        try:
            return self._parse(value)
        except ParameterError as e:
            self.fail(str(e), param, ctx)


class _RangeType(click.ParamType):
    """`11..20` (inclusive) or a single integer"""

    name = 'range'

    def convert(self, value, param, ctx):
        if isinstance(value, range):
            return value
        lo, sep, hi = str(value).partition('..')
        try:
            start = int(lo)
            stop = int(hi) if sep else start
        except ValueError:
            self.fail(f"'{value}' is not N or A..B", param, ctx)
        if stop < start:
            self.fail(f"empty range '{value}'", param, ctx)
        return range(start, stop + 1)


class _PairType(click.ParamType):
    """Two comma-separated positive reals"""

    name = 'a,b'

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        try:
            a, b = (float(x) for x in str(value).split(','))
        except ValueError:
            self.fail(f"'{value}' is not A,B", param, ctx)
        return a, b


DIST = _SpecType('dist', DistributionSpec.parse)
PERM = _SpecType('perm', PermutationConstraint.parse)
PROTOCOL = _SpecType('protocol', ProtocolSpec.parse)
GRID = _SpecType('grid', PartitionSpec.parse)
RANGE = _RangeType()
PAIR = _PairType()
SEED = click.IntRange(min=0, max=2 ** 64 - 1)


@dataclass
class CliState:
    config: Config
    threads: int
    output: Optional[Path]


def _emit(state: CliState, text: str) -> None:
    if state.output is None:
        click.echo(text, nl=False)
        return
    with open(state.output, 'w', newline='') as f:
        f.write(text)
    logger.info(f"Wrote {state.output}")


def _json(data) -> str:
    return json.dumps(data, indent=2) + '\n'


def _csv_text(write: Callable) -> str:
    buffer = io.StringIO()
    write(buffer)
    return buffer.getvalue()


def _write_file(path: Path, write: Callable) -> None:
    with open(path, 'w', newline='') as f:
        write(f)
    logger.info(f"Wrote {path}")


def handle_errors(func):
    """Turn library errors into a clean exit code 1"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except MixCheckError as e:
            logger.error(f"{type(e).__name__}: {e}")
            raise click.ClickException(str(e)) from e
        except OSError as e:
            logger.error(f"I/O failure: {e}", exc_info=True)
            raise click.ClickException(str(e)) from e

    return wrapper


@click.group()
@click.option('--threads', type=click.IntRange(min=1), envvar='MIXCHECK_THREADS', default=None,
              help='Worker threads for Monte Carlo and simulation (never changes output)')
@click.option('--log-level', type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None,
              help='Log level for stderr')
@click.option('-o', '--output', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='Write the main result here instead of stdout')
@click.pass_context
def cli(ctx, threads, log_level, output):
    """Statistical weak-mixing test for measure-preserving stirring protocols"""
    config = Config()
    setup_logger('mixcheck', (log_level or config.log_level).upper(), config.log_dir)
    try:
        ctx.obj = CliState(config=config, threads=threads or config.threads, output=output)
    except MixCheckError as e:
        raise click.ClickException(str(e)) from e


@cli.command('critical-values')
@click.option('--n', 'n', type=int, required=True, help='Partition count')
@click.option('--N', 'samples', type=int, required=True, help='Monte Carlo sample size')
@click.option('--dist', type=DIST, default='normal', show_default=True,
              help='normal | gamma:A,B | beta:A,B | uniform:A,B | const:C')
@click.option('--alpha1', type=float, default=0.05, show_default=True)
@click.option('--alpha2', type=float, default=0.05, show_default=True)
@click.option('--c1-perm', type=PERM, default='identity', show_default=True,
              help='Permutation constraint for the c1 sample')
@click.option('--c2-perm', type=PERM, default='any', show_default=True,
              help='Permutation constraint for the c2 sample')
@click.option('--seed', type=SEED, required=True)
@click.option('--sample-out', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='CSV of every sampled lambda_2')
@click.option('--ecdf-out', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help='CSV of the empirical CDFs behind c1 and c2')
@click.pass_obj
@handle_errors
def critical_values_cmd(state: CliState, n, samples, dist, alpha1, alpha2, c1_perm, c2_perm, seed,
                        sample_out, ecdf_out):
    """Monte Carlo critical values c1 and c2 as JSON"""
    estimator = CriticalValueEstimator(threads=state.threads,
                                       max_permutation_attempts=state.config.max_permutation_attempts)
    cv, nulls = estimator.estimate(n, samples, dist, alpha1, alpha2, SeedSpec(seed),
                                   c1_constraint=c1_perm, c2_constraint=c2_perm)
    if sample_out:
        _write_file(sample_out, nulls.to_csv)
    if ecdf_out:
        _write_file(ecdf_out, nulls.ecdf_csv)
    _emit(state, _json(cv.to_dict()))


def _load_matrix(transitions: Optional[Path], counts: Optional[Path], n: Optional[int]):
    if (transitions is None) == (counts is None):
        raise click.UsageError("Give exactly one of --transitions or --counts")
    if transitions is not None:
        if n is None:
            raise click.UsageError("--transitions needs the region count")
        return empirical_matrix(transition_counts(load_transitions(str(transitions), n)))
    return empirical_matrix(load_counts(str(counts), n))


@cli.command('test')
@click.option('--transitions', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help='start,end CSV of region indices')
@click.option('--counts', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help='n x n transition count CSV')
@click.option('--critical-values', 'cv_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help='JSON written by critical-values')
@click.option('--epsilon', type=float, default=None, help='Mixing-rate threshold [config: 1e-3]')
@click.option('--rate-model', type=click.Choice([m.value for m in RateModel]), default=None,
              help='general | diagonalizable [config: general]')
@click.pass_obj
@handle_errors
def mixing_test_cmd(state: CliState, transitions, counts, cv_path, epsilon, rate_model):
    """Classify one stirring iteration; writes the test report JSON"""
    try:
        cv = CriticalValues.from_dict(json.loads(cv_path.read_text()))
    except json.JSONDecodeError as e:
        raise click.ClickException(f"{cv_path}: not valid JSON ({e})")

    p = _load_matrix(transitions, counts, cv.n)
    test = MixingTest(
        cv,
        epsilon=state.config.epsilon if epsilon is None else epsilon,
        low_count_threshold=state.config.low_count_threshold,
        rate_model=rate_model or state.config.rate_model,
    )
    report = test.run_matrix(p)
    _emit(state, _json(report.to_dict()))


@cli.command('simulate')
@click.option('--protocol', type=PROTOCOL, required=True,
              help='identity | rotation:THETA | rotation:golden | cat | baker')
@click.option('--grid', type=GRID, required=True, help='K (interval) or KxM (torus)')
@click.option('--points-per-region', type=click.IntRange(min=1), required=True)
@click.option('--seed', type=SEED, required=True)
@click.pass_obj
@handle_errors
def simulate_cmd(state: CliState, protocol, grid, points_per_region, seed):
    """Run a protocol once; writes start,end transition CSV"""
    data = ProtocolSimulator(threads=state.threads).simulate(protocol, grid, points_per_region, SeedSpec(seed))
    _emit(state, _csv_text(data.to_csv))


def _empirical_dist(kind: str, dist: Optional[DistributionSpec], alpha: Optional[float],
                    beta: float) -> DistributionSpec:
    if kind == 'normal':
        return DistributionSpec.normal()
    if kind == 'gamma':
        return DistributionSpec.gamma(alpha, beta)
    return dist


@cli.command('bounds')
@click.option('--kind', type=click.Choice(['general', 'normal', 'gamma']), required=True)
@click.option('--n', 'ns', type=RANGE, required=True, help='N or A..B')
@click.option('--dist', type=DIST, default=None, help='Distribution for the general bound')
@click.option('--alpha', type=float, default=None, help='Gamma shape')
@click.option('--beta', type=float, default=1.0, show_default=True,
              help='Gamma scale (the bound does not depend on it)')
@click.option('--empirical', type=click.IntRange(min=1), default=None,
              help='Also report the Monte Carlo mean of ||M - I||_F^2 over this many draws')
@click.option('--seed', type=SEED, default=None)
@click.pass_obj
@handle_errors
def bounds_cmd(state: CliState, kind, ns, dist, alpha, beta, empirical, seed):
    """Frobenius convergence bounds over a range of n as CSV"""
    if kind == 'general' and dist is None:
        raise click.UsageError("--kind general needs --dist")
    if kind == 'gamma' and alpha is None:
        raise click.UsageError("--kind gamma needs --alpha")
    if empirical is not None and seed is None:
        raise click.UsageError("--empirical needs --seed")

    rows = bound_table(kind, ns, moments_=moments(dist) if dist else None, alpha=alpha)

    header = ['n', 'bound', 'validity', 'reason']
    estimator = None
    if empirical is not None:
        header += ['empirical_mean', 'empirical_se']
        estimator = CriticalValueEstimator(threads=state.threads)
        draw_dist = _empirical_dist(kind, dist, alpha, beta)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        line = [row.n, repr(row.value), row.validity.value, row.reason or '']
        if estimator is not None:
            config = McConfig(row.n, empirical, draw_dist, PermutationConstraint.identity(),
                              SeedSpec(seed).substream(row.n))
            squared = estimator.sample_frobenius_distances(config, squared=True)
            se = float(np.std(squared, ddof=1) / math.sqrt(squared.size))
            line += [repr(float(squared.mean())), repr(se)]
        writer.writerow(line)
    _emit(state, buffer.getvalue())


@cli.command('entropy')
@click.option('--transitions', type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option('--counts', type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option('--n', 'n', type=click.IntRange(min=2), default=None, help='Region count for --transitions')
@click.option('--upper-bound', type=float, default=None,
              help='Upper bound on the map entropy (nats); suggests a partition count')
@click.pass_obj
@handle_errors
def entropy_cmd(state: CliState, transitions, counts, n, upper_bound):
    """Froyland entropy estimate and partition-count suggestion as JSON"""
    if transitions is None and counts is None and upper_bound is None:
        raise click.UsageError("Give --transitions/--counts, --upper-bound, or both")

    result = {}
    if transitions is not None or counts is not None:
        p = _load_matrix(transitions, counts, n)
        result['n'] = p.n
        result['entropy_nats'] = froyland_entropy(p)
        result['max_entropy_nats'] = math.log(p.n)
    if upper_bound is not None:
        result['upper_bound_nats'] = upper_bound
        result['suggested_partition_count'] = suggest_partition_count(upper_bound)
    _emit(state, _json(result))


@cli.command('two-region')
@click.option('--v1', type=click.FloatRange(-1.0, 1.0), default=None, help='First unit-vector component')
@click.option('--beta', 'beta_params', type=PAIR, default=None, help='v1 ~ Beta(A, B)')
@click.option('--branch', type=click.Choice([b.value for b in Branch]), default=Branch.PLUS.value,
              show_default=True, help='plus: identity permutation, minus: swap')
@click.option('--k', type=float, default=None, help='Tail threshold for exact probabilities (with --beta)')
@click.pass_obj
@handle_errors
def two_region_cmd(state: CliState, v1, beta_params, branch, k):
    """Closed-form lambda_2 for n = 2 as JSON"""
    if (v1 is None) == (beta_params is None):
        raise click.UsageError("Give exactly one of --v1 or --beta")
    if k is not None and beta_params is None:
        raise click.UsageError("--k needs --beta")

    branch = Branch(branch)
    if v1 is not None:
        case = TwoRegionCase(v1, branch)
        result = {
            'v1': v1,
            'branch': branch.value,
            'lambda2': lambda2_two_region(case),
            'matrix': two_region_matrix(case).tolist(),
        }
    else:
        a, b = beta_params
        result = {
            'alpha': a,
            'beta': b,
            'branch': branch.value,
            'expected_lambda2': expected_lambda2_beta(a, b, branch),
        }
        if k is not None:
            result['tail'] = {
                'k': k,
                'p_dist_from_one_above_k': two_region_tail_probability(
                    a, b, k, branch, Lambda2Transform.DIST_FROM_ONE),
                'p_modulus_above_k': two_region_tail_probability(
                    a, b, k, branch, Lambda2Transform.MODULUS),
            }
    _emit(state, _json(result))
