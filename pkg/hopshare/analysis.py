"""
Capture-probability analysis.

Closed forms are evaluated in exact rational arithmetic (:class:`fractions.Fraction`) and only
converted to floats for display. The figures printed in the source security analysis are kept
as report rows next to the computed values, with the difference in bits.
"""
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from hopshare.constants import CHANNEL_COUNT, LFSR_PERIOD, PAPER_P1_BITS, PAPER_P2_BITS
from hopshare.exceptions import AnalysisError, BadN
from hopshare.medium import Adversary, AdversaryMode, FixedChannelSet, IndependentPerPacket, Medium, adversary_observe
from hopshare.node import NodeState, master_prepare, slave_transmit

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

Probability = Union[Fraction, float, int]

MAX_EXACT_SET = 64


def _check_n(N: int) -> None:
    if N < 2:
        raise BadN("Channel count must be at least 2, got {}".format(N))


def p1_capture(N: int) -> Fraction:
    """
    Capture probability without sharing: the geometric series sum_{i>=1} (1/N)^i = 1/(N-1).
    """
    _check_n(N)
    return Fraction(1, N - 1)


def p2_capture(N: int, k: int) -> Fraction:
    """
    Capture probability with k-of-k sharing: all k packets must be captured, (1/N)^k.
    """
    _check_n(N)
    if k < 1:
        raise AnalysisError("k must be at least 1, got {}".format(k))
    return Fraction(1, N ** k)


def _check_set(n: int, k: int) -> None:
    if not 0 <= k <= n <= MAX_EXACT_SET:
        raise AnalysisError("Need 0 <= k <= n <= {}, got n={}, k={}".format(MAX_EXACT_SET, n, k))


def ways_exact(n: int, k: int) -> int:
    """
    Ways to pick exactly k of n objects.
    """
    _check_set(n, k)
    return comb(n, k)


def ways_at_most(n: int, k: int) -> int:
    """
    Ways to pick at least 1 and at most k of n objects.
    """
    _check_set(n, k)
    return sum(comb(n, i) for i in range(1, k + 1))


def channel_combinations(N: int, k: int) -> int:
    """
    Channel sets of size k an adversary would have to choose between.
    """
    _check_n(N)
    if not 1 <= k <= N:
        raise AnalysisError("Need 1 <= k <= N, got N={}, k={}".format(N, k))
    return comb(N, k)


def security_bits(p: Probability) -> float:
    """
    -log2(p). Fractions are handled through their numerator and denominator so tiny values
    such as 10^-50 never underflow.
    """
    if isinstance(p, int):
        p = Fraction(p)
    if isinstance(p, Fraction):
        if not 0 < p <= 1:
            raise AnalysisError("Probability must be within (0, 1], got {}".format(p))
        return math.log2(p.denominator) - math.log2(p.numerator)
    if not 0.0 < p <= 1.0:
        raise AnalysisError("Probability must be within (0, 1], got {}".format(p))
    return -math.log2(p)


def analysis_report(N: int = CHANNEL_COUNT, ks: Iterable[int] = range(1, 11)) -> List[Dict[str, Any]]:
    """
    One row per k: exact P1/P2, their security bits and the claims printed for them.
    """
    p1 = p1_capture(N)
    bits_p1 = security_bits(p1)
    rows = []
    for k in ks:
        p2 = p2_capture(N, k)
        bits_p2 = security_bits(p2)
        claim = PAPER_P2_BITS.get(k) if N == CHANNEL_COUNT else None
        claim_p1 = PAPER_P1_BITS if N == CHANNEL_COUNT else None
        combos = channel_combinations(N, k) if k <= N else None
        rows.append({
            'N': N,
            'k': k,
            'P1_exact': p1,
            'P2_exact': p2,
            'bits_P1': round(bits_p1, 6),
            'bits_P2': round(bits_p2, 6),
            'paper_claim': claim,
            'delta_bits': round(bits_p2 - claim, 6) if claim is not None else None,
            'paper_claim_P1': claim_p1,
            'delta_bits_P1': round(bits_p1 - claim_p1, 6) if claim_p1 is not None else None,
            'combinations': combos,
            'bits_combinations': round(math.log2(combos), 6) if combos else None,
        })
    return rows


def theorem_rows(n_max: int = 20) -> List[Dict[str, Any]]:
    """
    W1 = C(n, k) and W2 = sum_{i<=k} C(n, i) for every 1 <= k <= n <= n_max, with the k-th roots.

    W2 >= W1 always, so the k-th root of W2 is never below that of W1.
    """
    rows = []
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            w1, w2 = ways_exact(n, k), ways_at_most(n, k)
            rows.append({
                'n': n, 'k': k, 'W1': w1, 'W2': w2, 'W2_minus_W1': w2 - w1,
                'root_W1': w1 ** (1.0 / k), 'root_W2': w2 ** (1.0 / k),
            })
    return rows


@dataclass(frozen=True)
class CaptureScenario:
    """
    One Monte Carlo setup. ``n_parts`` defaults to ``k``: the message is cut into exactly k parts,
    which is the model behind P2.
    """
    channel_count: int
    k: int
    mode: AdversaryMode
    n_parts: Optional[int] = None
    message: bytes = b'HELLO'
    device_id: int = 1

    def __post_init__(self) -> None:
        _check_n(self.channel_count)
        if not 1 <= self.k <= self.parts <= self.channel_count:
            raise AnalysisError("Need 1 <= k <= n_parts <= channel_count")

    @property
    def parts(self) -> int:
        return self.n_parts if self.n_parts is not None else self.k

    @property
    def mode_label(self) -> str:
        if isinstance(self.mode, IndependentPerPacket):
            return 'independent(q={})'.format(self.mode.q)
        return 'fixed(m={})'.format(self.mode.m)


@dataclass(frozen=True)
class CaptureTally:
    trials: int = 0
    without_sharing: int = 0
    with_sharing: int = 0

    def __add__(self, other: 'CaptureTally') -> 'CaptureTally':
        return CaptureTally(
            self.trials + other.trials,
            self.without_sharing + other.without_sharing,
            self.with_sharing + other.with_sharing,
        )


@dataclass(frozen=True)
class CaptureStats:
    trials: int
    captures_without_sharing: int
    captures_with_sharing: int
    analytic_p1: Fraction
    analytic_p2: Fraction
    paper_p1: Fraction
    paper_p2: Fraction
    scenario: CaptureScenario = field(compare=False)

    @property
    def rate_without_sharing(self) -> float:
        return self.captures_without_sharing / self.trials

    @property
    def rate_with_sharing(self) -> float:
        return self.captures_with_sharing / self.trials

    @property
    def security_bits(self) -> Tuple[Optional[float], Optional[float]]:
        return (
            security_bits(self.analytic_p1) if self.analytic_p1 else None,
            security_bits(self.analytic_p2) if self.analytic_p2 else None,
        )

    def within(self, tolerance: float) -> bool:
        return (
            abs(self.rate_without_sharing - float(self.analytic_p1)) <= tolerance
            and abs(self.rate_with_sharing - float(self.analytic_p2)) <= tolerance
        )

    def as_records(self) -> List[Dict[str, Any]]:
        bits_p1, bits_p2 = self.security_bits
        common = {
            'N': self.scenario.channel_count,
            'k': self.scenario.k,
            'n_parts': self.scenario.parts,
            'mode': self.scenario.mode_label,
            'trials': self.trials,
        }
        return [
            dict(common, event='without_sharing', captures=self.captures_without_sharing,
                 empirical=self.rate_without_sharing, analytic=self.analytic_p1,
                 analytic_float=float(self.analytic_p1), security_bits=bits_p1, paper=self.paper_p1),
            dict(common, event='with_sharing', captures=self.captures_with_sharing,
                 empirical=self.rate_with_sharing, analytic=self.analytic_p2,
                 analytic_float=float(self.analytic_p2), security_bits=bits_p2, paper=self.paper_p2),
        ]


def analytic_capture(scenario: CaptureScenario) -> Tuple[Fraction, Fraction]:
    """
    Exact probabilities, for one parallel burst of ``n_parts`` packets on distinct channels, that
    the adversary captures at least one packet, and at least ``k`` packets.
    """
    n, k, N = scenario.parts, scenario.k, scenario.channel_count
    if isinstance(scenario.mode, IndependentPerPacket):
        q = Fraction(scenario.mode.q)
        hits = [comb(n, j) * q ** j * (1 - q) ** (n - j) for j in range(n + 1)]
    elif isinstance(scenario.mode, FixedChannelSet):
        m = scenario.mode.m
        total = comb(N, m)
        hits = [Fraction(comb(n, j) * comb(N - n, m - j), total) if m >= j else Fraction(0) for j in range(n + 1)]
    else:
        raise AnalysisError("Unknown adversary mode {!r}".format(scenario.mode))
    return 1 - hits[0], sum(hits[k:], Fraction(0))


def trial_rng(seed: int, index: int) -> random.Random:
    return random.Random('{}:{}'.format(seed, index))


def run_trial(scenario: CaptureScenario, rng: random.Random) -> Tuple[bool, bool]:
    """
    Prepares a fresh session with the full send pipeline, puts its first parallel burst (one
    packet per stream) on an empty medium and lets the adversary observe it.
    """
    state = NodeState(
        device_id=scenario.device_id,
        hop_seed=rng.randrange(1, LFSR_PERIOD + 1),
        share_rng_seed=rng.getrandbits(32),
        k=scenario.k,
        n_parts=scenario.parts,
        channel_count=scenario.channel_count,
        enforce_part_band=False,
    )
    plan = master_prepare(scenario.message, state)
    medium = Medium(channel_count=scenario.channel_count, loss_probability=0.0)
    slave_transmit(plan, medium, 0)
    captures = adversary_observe(Adversary(scenario.mode), medium, 0, rng)
    streams_captured = len({capture.channel for capture in captures})
    return bool(captures), streams_captured >= scenario.k


def run_trials(scenario: CaptureScenario, seed: int, indices: Iterable[int]) -> CaptureTally:
    trials = without = with_ = 0
    for index in indices:
        any_capture, full_capture = run_trial(scenario, trial_rng(seed, index))
        trials += 1
        without += any_capture
        with_ += full_capture
    return CaptureTally(trials, without, with_)


def stats_from_tally(scenario: CaptureScenario, tally: CaptureTally) -> CaptureStats:
    analytic_p1, analytic_p2 = analytic_capture(scenario)
    stats = CaptureStats(
        trials=tally.trials,
        captures_without_sharing=tally.without_sharing,
        captures_with_sharing=tally.with_sharing,
        analytic_p1=analytic_p1,
        analytic_p2=analytic_p2,
        paper_p1=p1_capture(scenario.channel_count),
        paper_p2=p2_capture(scenario.channel_count, scenario.k),
        scenario=scenario,
    )
    log.info("Monte Carlo %s over %d trials: without %.5f (analytic %.5f), with %.5f (analytic %.5f)",
             scenario.mode_label, stats.trials, stats.rate_without_sharing, float(analytic_p1),
             stats.rate_with_sharing, float(analytic_p2))
    return stats


def monte_carlo(scenario: CaptureScenario, trials: int, seed: int) -> CaptureStats:
    """
    Runs ``trials`` independent trials. Trial ``i`` draws all its randomness from a generator
    seeded with ``(seed, i)``, so any partition of the trials folds to the same tally.
    """
    if trials < 1:
        raise AnalysisError("trials must be at least 1")
    return stats_from_tally(scenario, run_trials(scenario, seed, range(trials)))


def fold(tallies: Sequence[CaptureTally]) -> CaptureTally:
    return sum(tallies, CaptureTally())
