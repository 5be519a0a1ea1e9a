"""The QKD protocol state machine: rounds, sifting, key statistics, security.

Each round: Alice draws a setting i and transmits the corresponding pentagon
ray (prepare-and-measure) or steers it through an entangled pair (entangled
mode); the in-flight state passes through the adversary hook; Bob draws j,
measures {P_j, I - P_j} and announces j; the round is sifted into case C1
(settings equal), C2 (neighbors) or C3 (out of context, discarded from the
key but kept in the transcript).

Round r consumes only the random stream derived as (seed, stream_id = r), so
sessions are reproducible bit for bit regardless of execution order or worker
count.  For throughput, outcome probabilities are precomputed into lookup
tables once per (basis, strategy) pair; the tables are exact Born-rule values,
not approximations.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adversary import FIXED, EveStrategy, estimate_pe, eve_guess
from .kcbs import KcbsBasis
from .qutrit import RngStream

__all__ = [
    "PREPARE_MEASURE",
    "ENTANGLED",
    "SECURITY_THRESHOLD",
    "ProtocolConfig",
    "RoundRecord",
    "Transcript",
    "KeyStats",
    "SecurityReport",
    "run_round",
    "run_session",
    "key_stats",
    "estimate_security",
    "mutual_information",
    "write_transcript_csv",
]

PREPARE_MEASURE = "prepare_measure"
ENTANGLED = "entangled"

SECURITY_THRESHOLD = 5.0 / 8.0

CSV_COLUMNS = (
    "index",
    "i",
    "j",
    "case",
    "bob_outcome",
    "alice_bit",
    "bob_bit",
    "eve_setting",
    "eve_outcome",
    "eve_guess",
)


@dataclass(frozen=True)
class ProtocolConfig:
    mode: str
    basis: KcbsBasis
    rounds: int
    sacrifice_fraction: float
    eve: EveStrategy
    seed: int

    def __post_init__(self) -> None:
        if self.mode not in (PREPARE_MEASURE, ENTANGLED):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if not 0.0 <= self.sacrifice_fraction <= 0.5:
            raise ValueError("sacrifice_fraction must lie in [0, 0.5]")


@dataclass(slots=True)
class RoundRecord:
    index: int
    alice_setting: int
    bob_setting: int
    bob_outcome: int
    sift_case: str
    alice_bit: int | None
    bob_bit: int | None
    eve_setting: int | None = None
    eve_outcome: int | None = None
    eve_guess: int | None = None
    attempts: int = 1  # entangled mode: Alice's draws until a positive click


@dataclass
class Transcript:
    config: ProtocolConfig
    rounds: list[RoundRecord]
    total_attempts: int


@dataclass(frozen=True)
class KeyStats:
    sift_rate: float
    p0: float
    p1: float
    shannon: float
    key_rate_per_transmission: float
    anticorr_fraction: float  # operational K(A,B) estimate = P(Bob guesses right)

    def to_json_dict(self) -> dict:
        return {
            "sift_rate": self.sift_rate,
            "p0": self.p0,
            "p1": self.p1,
            "shannon": self.shannon,
            "key_rate_per_transmission": self.key_rate_per_transmission,
            "anticorr_fraction": self.anticorr_fraction,
        }


@dataclass(frozen=True)
class SecurityReport:
    kab_estimate: float
    confidence_halfwidth: float
    threshold: float
    verdict: str  # Secure | Insecure | Inconclusive
    pe_estimate: float | None = None
    mutual_info_ab: float | None = None
    mutual_info_ae: float | None = None
    sacrificed_count: int = 0
    note: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "kab_estimate": self.kab_estimate,
            "confidence_halfwidth": self.confidence_halfwidth,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "pe_estimate": self.pe_estimate,
            "mutual_info_ab": self.mutual_info_ab,
            "mutual_info_ae": self.mutual_info_ae,
            "sacrificed_count": self.sacrificed_count,
            "note": self.note,
        }


def _sift_case(i: int, j: int) -> str:
    d = (j - i) % 5
    if d == 0:
        return "C1"
    if d in (1, 4):
        return "C2"
    return "C3"


class _ChannelTables:
    """Exact per-round outcome probabilities for a (basis, strategy) pair.

    overlap[i][j]       : P(Bob clicks | undisturbed ray i, setting j)
    eve_click[i][k]     : P(Eve clicks | ray i, Eve setting k)
    bob_click[i][k][e][j]: P(Bob clicks | ray i, Eve setting k, branch e, j)
    """

    def __init__(self, basis: KcbsBasis, strategy: EveStrategy) -> None:
        rays = [s.amplitudes for s in basis.source_vectors]
        proj = [p.matrix for p in basis.projectors]
        identity = np.eye(3, dtype=np.complex128)
        self.overlap = [
            [float(abs(np.vdot(rays[i], rays[j])) ** 2) for j in range(5)]
            for i in range(5)
        ]
        self.eve_present = strategy.present
        if not strategy.present:
            return
        self.eve_click = self.overlap
        self.bob_click = [[[None, None] for _ in range(5)] for _ in range(5)]
        for i in range(5):
            rho = np.outer(rays[i], rays[i].conj())
            for k in range(5):
                for e, m in ((1, proj[k]), (0, identity - proj[k])):
                    p_branch = float(np.trace(m @ rho).real)
                    if p_branch < 1e-15:
                        # branch never sampled; keep a placeholder row
                        self.bob_click[i][k][e] = [0.0] * 5
                        continue
                    if e == 1 and strategy.resend == "eigenstate":
                        rho_out = np.outer(rays[k], rays[k].conj())
                    else:
                        rho_out = m @ rho @ m / p_branch
                    self.bob_click[i][k][e] = [
                        float(np.trace(proj[j] @ rho_out).real) for j in range(5)
                    ]


_tables_cache: dict[tuple[int, EveStrategy], _ChannelTables] = {}


def _tables_for(cfg: ProtocolConfig) -> _ChannelTables:
    key = (id(cfg.basis), cfg.eve)
    tables = _tables_cache.get(key)
    if tables is None:
        tables = _ChannelTables(cfg.basis, cfg.eve)
        if len(_tables_cache) > 64:
            _tables_cache.clear()
        _tables_cache[key] = tables
    return tables


def _run_round(
    cfg: ProtocolConfig, tables: _ChannelTables, index: int, rng: RngStream
) -> RoundRecord:
    attempts = 1
    if cfg.mode == ENTANGLED:
        # Alice measures {P_i (x) I} on a fresh isotropic pair until she
        # clicks; each click has probability Tr(P_i)/3 = 1/3 exactly, and on
        # success Bob holds the (real) ray i, as in prepare-and-measure.
        while True:
            i = rng.integer(5)
            if rng.uniform() < 1.0 / 3.0:
                break
            attempts += 1
    else:
        i = rng.integer(5)

    eve_setting = eve_outcome = eve_bit_guess = None
    if tables.eve_present:
        k = cfg.eve.setting if cfg.eve.kind == FIXED else rng.integer(5)
        e = 1 if rng.uniform() < tables.eve_click[i][k] else 0
        eve_setting, eve_outcome, eve_bit_guess = k, e, eve_guess(e)
        j = rng.integer(5)
        p_click = tables.bob_click[i][k][e][j]
    else:
        j = rng.integer(5)
        p_click = tables.overlap[i][j]

    bob_outcome = 1 if rng.uniform() < p_click else 0
    case = _sift_case(i, j)
    if case == "C3":
        alice_bit = bob_bit = None
    else:
        alice_bit = 0 if case == "C1" else 1
        bob_bit = bob_outcome
    return RoundRecord(
        index=index,
        alice_setting=i,
        bob_setting=j,
        bob_outcome=bob_outcome,
        sift_case=case,
        alice_bit=alice_bit,
        bob_bit=bob_bit,
        eve_setting=eve_setting,
        eve_outcome=eve_outcome,
        eve_guess=eve_bit_guess,
        attempts=attempts,
    )


def run_round(
    cfg: ProtocolConfig, round_index: int, rng: RngStream | None = None
) -> RoundRecord:
    """Execute one protocol round on its own derived random stream."""
    if rng is None:
        rng = RngStream(cfg.seed, stream_id=round_index)
    return _run_round(cfg, _tables_for(cfg), round_index, rng)


def _worker_count() -> int:
    raw = os.environ.get("KCBS_THREADS", "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"KCBS_THREADS must be a positive integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"KCBS_THREADS must be a positive integer, got {raw!r}")
    return value


def run_session(cfg: ProtocolConfig, workers: int | None = None) -> Transcript:
    """Execute all rounds; output is bit-identical for a given config and seed.

    Rounds are independent given their per-round streams, so chunks may run on
    worker threads; records are always assembled in round-index order.
    """
    if workers is None:
        workers = _worker_count()
    tables = _tables_for(cfg)

    def run_chunk(bounds: tuple[int, int]) -> list[RoundRecord]:
        lo, hi = bounds
        return [
            _run_round(cfg, tables, r, RngStream(cfg.seed, stream_id=r))
            for r in range(lo, hi)
        ]

    if workers == 1 or cfg.rounds < 2 * workers:
        records = run_chunk((0, cfg.rounds))
    else:
        step = -(-cfg.rounds // workers)
        chunks = [(lo, min(lo + step, cfg.rounds)) for lo in range(0, cfg.rounds, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = [rec for part in pool.map(run_chunk, chunks) for rec in part]
    return Transcript(
        config=cfg,
        rounds=records,
        total_attempts=sum(rec.attempts for rec in records),
    )


def _entropy_bits(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def key_stats(t: Transcript) -> KeyStats:
    """Sift-rate, bit frequencies, entropy and key rate over sifted rounds."""
    sifted = [rec for rec in t.rounds if rec.sift_case != "C3"]
    if not sifted:
        raise ValueError("no sifted rounds: cannot compute key statistics")
    n = len(sifted)
    ones = sum(rec.alice_bit for rec in sifted)
    p1 = ones / n
    p0 = 1.0 - p1
    shannon = _entropy_bits(p1)
    sift_rate = n / len(t.rounds)
    anticorr = sum(1 for rec in sifted if rec.alice_bit != rec.bob_bit) / n
    return KeyStats(
        sift_rate=sift_rate,
        p0=p0,
        p1=p1,
        shannon=shannon,
        key_rate_per_transmission=sift_rate * shannon,
        anticorr_fraction=anticorr,
    )


def mutual_information(x_bits, y_bits) -> float:
    """Plug-in empirical mutual information between two bit sequences, in bits."""
    x = list(x_bits)
    y = list(y_bits)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 100:
        raise ValueError("need at least 100 samples for a mutual-information estimate")
    n = len(x)
    joint = [[0, 0], [0, 0]]
    for a, b in zip(x, y):
        joint[a][b] += 1
    total = 0.0
    for a in (0, 1):
        for b in (0, 1):
            p_ab = joint[a][b] / n
            if p_ab == 0.0:
                continue
            p_a = (joint[a][0] + joint[a][1]) / n
            p_b = (joint[0][b] + joint[1][b]) / n
            total += p_ab * math.log2(p_ab / (p_a * p_b))
    return max(total, 0.0)


def estimate_security(
    t: Transcript, sacrifice_fraction: float, rng: RngStream
) -> SecurityReport:
    """Sacrifice a uniform subset of sifted rounds and test K(A,B) > 5/8.

    Both parties publish their bits on the sacrificed subset; the verdict
    compares the observed anti-correlation fraction against the threshold
    with a 3-sigma normal halfwidth (floored at 1/m at the boundary values).
    Sacrificed rounds are excluded from the final key.
    """
    if not 0.0 <= sacrifice_fraction <= 1.0:
        raise ValueError("sacrifice_fraction must lie in [0, 1]")
    sifted = [rec for rec in t.rounds if rec.sift_case != "C3"]
    if not sifted:
        raise ValueError("no sifted rounds: cannot run a security test")
    m = int(round(sacrifice_fraction * len(sifted)))
    if m < 100:
        return SecurityReport(
            kab_estimate=float("nan"),
            confidence_halfwidth=float("nan"),
            threshold=SECURITY_THRESHOLD,
            verdict="Inconclusive",
            sacrificed_count=m,
            note=f"sacrificed subset too small ({m} < 100 sifted rounds)",
        )
    chosen = [sifted[idx] for idx in rng.subset(len(sifted), m)]
    kab = sum(1 for rec in chosen if rec.alice_bit != rec.bob_bit) / m
    if kab in (0.0, 1.0):
        halfwidth = 1.0 / m
    else:
        halfwidth = 3.0 * math.sqrt(kab * (1.0 - kab) / m)
    if kab - halfwidth > SECURITY_THRESHOLD:
        verdict = "Secure"
    elif kab + halfwidth < SECURITY_THRESHOLD:
        verdict = "Insecure"
    else:
        verdict = "Inconclusive"

    pe = None
    mi_ae = None
    if t.config.eve.present:
        pe = estimate_pe(t)
        mi_ae = mutual_information(
            [rec.alice_bit for rec in chosen], [rec.eve_guess for rec in chosen]
        )
    mi_ab = mutual_information(
        [rec.alice_bit for rec in chosen], [rec.bob_bit for rec in chosen]
    )
    return SecurityReport(
        kab_estimate=kab,
        confidence_halfwidth=halfwidth,
        threshold=SECURITY_THRESHOLD,
        verdict=verdict,
        pe_estimate=pe,
        mutual_info_ab=mi_ab,
        mutual_info_ae=mi_ae,
        sacrificed_count=m,
    )


def write_transcript_csv(t: Transcript, path: str) -> None:
    """One row per round; unset bits render as empty fields."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in t.rounds:
            writer.writerow(
                [
                    rec.index,
                    rec.alice_setting,
                    rec.bob_setting,
                    rec.sift_case,
                    rec.bob_outcome,
                    "" if rec.alice_bit is None else rec.alice_bit,
                    "" if rec.bob_bit is None else rec.bob_bit,
                    "" if rec.eve_setting is None else rec.eve_setting,
                    "" if rec.eve_outcome is None else rec.eve_outcome,
                    "" if rec.eve_guess is None else rec.eve_guess,
                ]
            )
    os.replace(tmp, path)
