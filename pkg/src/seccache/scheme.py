"""Four-phase secretive delivery for shared-cache networks, driven by a PDA.

Phases, in order:

  1. helper placement   - every file is encoded into F shares by a (Z, F)
                          non-perfect secret sharing; cache lam stores the
                          shares whose PDA rows are stars in column lam.
  2. association        - users attach to caches; caches are relabeled so
                          the per-cache user counts (the profile) are
                          nonincreasing, and the PDA columns are permuted
                          the same way.
  3. user key placement - the PDA is expanded into a per-user array G whose
                          integer entries become (s, i) pairs (i = user rank
                          within its cache); one uniform one-time-pad key is
                          generated per distinct pair and stored by exactly
                          the users whose columns carry that pair.
  4. delivery           - for each distinct pair, the server broadcasts the
                          XOR of the participants' demanded shares and the
                          pair's key; each participant strips the key and
                          its cached shares to recover one new share.

Relabeling caches after placement is pure bookkeeping: the share-to-cache
map never depends on the association, so sorting labels by load first and
placing second yields the identical system.

All rate and memory arithmetic is exact (fractions.Fraction).
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .field import BinaryField, default_field
from .pda import Pda, tau
from .sharing import (
    ShareMeta,
    SymbolMatrix,
    cauchy_matrix,
    random_vector,
    share_file,
    unshare_file,
)

Pair = tuple[int, int]


@dataclass(frozen=True)
class SystemConfig:
    """A (Lambda, K, M, N) shared-cache problem instance with unit user caches."""

    num_caches: int
    num_users: int
    num_files: int
    helper_memory: Fraction  # M, in file units
    file_bytes: int
    field: BinaryField = dataclass_field(default_factory=default_field)
    seed: int = 0
    user_memory: int = 1

    def __post_init__(self):
        if self.user_memory != 1:
            raise ValueError("the scheme requires exactly unit user caches")
        if not 1 <= self.num_caches <= self.num_users:
            raise ValueError("need K >= Lambda >= 1")
        if self.num_files < 1:
            raise ValueError("need at least one file")
        if self.helper_memory < 0:
            raise ValueError("helper memory cannot be negative")
        if self.file_bytes < 1:
            raise ValueError("files must be nonempty")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


def helper_memory_for(pda: Pda, num_files: int) -> Fraction:
    """The helper memory M for which Z/F = M/(M+N) holds exactly."""
    p = pda.params
    return Fraction(
        num_files * p.stars_per_column, p.num_rows - p.stars_per_column
    )


def worst_case_demands(num_users: int) -> tuple[int, ...]:
    """All-distinct demand vector (1, 2, ..., K); needs N >= K."""
    return tuple(range(1, num_users + 1))


@dataclass(frozen=True)
class Association:
    """User-to-cache attachment after load-sorted relabeling.

    profile[i] is the user count of (relabeled) cache i+1, nonincreasing;
    groups[i] lists that cache's users in original index order; cache_order
    maps each new label back to the caller's original cache label.
    """

    profile: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]
    user_to_cache: tuple[int, ...]
    cache_order: tuple[int, ...]

    def __post_init__(self):
        if any(a < b for a, b in zip(self.profile, self.profile[1:])):
            raise ValueError("profile must be nonincreasing")
        if sum(self.profile) != len(self.user_to_cache):
            raise ValueError("profile does not sum to the user count")
        for lam, group in enumerate(self.groups, start=1):
            if len(group) != self.profile[lam - 1]:
                raise ValueError(f"group {lam} does not match the profile")
            if any(self.user_to_cache[u - 1] != lam for u in group):
                raise ValueError("groups and user_to_cache disagree")

    @property
    def num_users(self) -> int:
        return len(self.user_to_cache)

    @property
    def num_caches(self) -> int:
        return len(self.profile)

    def rank_of(self, user: int) -> int:
        """1-based position of a user within its cache's group."""
        return self.groups[self.user_to_cache[user - 1] - 1].index(user) + 1

    @classmethod
    def from_assignment(cls, assignment, num_caches: int) -> "Association":
        """Build from a per-user cache label vector (labels in [1, Lambda])."""
        assignment = tuple(assignment)
        for user, cache in enumerate(assignment, start=1):
            if not 1 <= cache <= num_caches:
                raise ValueError(f"user {user} assigned to unknown cache {cache}")
        loads = [0] * num_caches
        for cache in assignment:
            loads[cache - 1] += 1
        # Stable relabel: sort by load descending, ties keep original order.
        cache_order = tuple(
            sorted(range(1, num_caches + 1), key=lambda c: (-loads[c - 1], c))
        )
        new_label = {orig: new for new, orig in enumerate(cache_order, start=1)}
        groups = tuple(
            tuple(u for u, c in enumerate(assignment, start=1) if c == orig)
            for orig in cache_order
        )
        return cls(
            profile=tuple(loads[c - 1] for c in cache_order),
            groups=groups,
            user_to_cache=tuple(new_label[c] for c in assignment),
            cache_order=cache_order,
        )

    @classmethod
    def from_profile(cls, profile) -> "Association":
        """Users 1..K assigned cache-major in the given order, then relabeled."""
        profile = tuple(profile)
        if any(n < 0 for n in profile):
            raise ValueError("profile entries must be nonnegative")
        assignment = [
            cache
            for cache, count in enumerate(profile, start=1)
            for _ in range(count)
        ]
        return cls.from_assignment(assignment, len(profile))


@dataclass(frozen=True)
class GArray:
    """Per-user expansion of a PDA: one column per user, integers tagged
    with the user's rank inside its cache as pairs (s, i)."""

    entries: tuple[tuple[Pair | None, ...], ...]  # F rows x K columns
    column_users: tuple[int, ...]

    @property
    def num_rows(self) -> int:
        return len(self.entries)

    @property
    def num_columns(self) -> int:
        return len(self.column_users)

    @cached_property
    def column_index(self) -> dict[int, int]:
        """User id -> 1-based column."""
        return {u: c for c, u in enumerate(self.column_users, start=1)}

    @cached_property
    def pair_occurrences(self) -> dict[Pair, tuple[tuple[int, int], ...]]:
        """Pair -> 1-based (row, column) positions, ordered s-major then i."""
        occ: dict[Pair, list[tuple[int, int]]] = {}
        for j, row in enumerate(self.entries, start=1):
            for k, entry in enumerate(row, start=1):
                if entry is not None:
                    occ.setdefault(entry, []).append((j, k))
        return {
            pair: tuple(occ[pair]) for pair in sorted(occ)
        }

    @property
    def pairs(self) -> tuple[Pair, ...]:
        return tuple(self.pair_occurrences)

    def column(self, col: int) -> tuple[Pair | None, ...]:
        return tuple(self.entries[j][col - 1] for j in range(self.num_rows))

    def column_of_user(self, user: int) -> tuple[Pair | None, ...]:
        return self.column(self.column_index[user])


def build_g_array(pda: Pda, association: Association) -> GArray:
    """Replicate each PDA column once per attached user, tagging integers
    with the user's rank; empty caches contribute no columns."""
    if association.num_caches != pda.num_caches:
        raise ValueError("association and PDA disagree on the cache count")
    columns: list[tuple[Pair | None, ...]] = []
    users: list[int] = []
    for lam in range(1, pda.num_caches + 1):
        group = association.groups[lam - 1]
        if not group:
            continue
        base = pda.column(lam)
        for i, user in enumerate(group, start=1):
            columns.append(
                tuple(None if e is None else (e, i) for e in base)
            )
            users.append(user)
    entries = tuple(
        tuple(col[j] for col in columns) for j in range(pda.num_rows)
    )
    return GArray(entries, tuple(users))


@dataclass(frozen=True)
class RateReport:
    """Worst-case delivery load: sum over s of the top load among the
    caches containing s, normalized by the share size."""

    num_transmissions: int
    rate: Fraction
    per_s_multiplicity: tuple[int, ...]


def rate_report(pda: Pda, profile) -> RateReport:
    profile = tuple(profile)
    if len(profile) != pda.num_caches:
        raise ValueError("profile length must equal the cache count")
    if any(a < b for a, b in zip(profile, profile[1:])):
        raise ValueError("profile must be nonincreasing")
    p = pda.params
    per_s = tuple(profile[tau(pda, s) - 1] for s in range(1, p.num_ints + 1))
    total = sum(per_s)
    return RateReport(total, Fraction(total, p.num_rows - p.stars_per_column), per_s)


# -- phase implementations -----------------------------------------------------


def helper_placement(
    pda: Pda, config: SystemConfig, library, enc: SymbolMatrix, rng
):
    """Share every file and map star rows to cache contents.

    Returns (shares, randomness, meta, cached_rows): shares[n][j] is share
    j+1 of file n+1; cached_rows[lam-1] lists the 1-based share rows every
    cache lam stores (for all files, per PDA column lam).
    """
    p = pda.params
    m, n = config.helper_memory, config.num_files
    if Fraction(p.stars_per_column, p.num_rows) != Fraction(m, m + n):
        raise ValueError(
            f"memory ratio mismatch: Z/F = {Fraction(p.stars_per_column, p.num_rows)}"
            f" but M/(M+N) = {Fraction(m, m + n)}"
        )
    library = list(library)
    if len(library) != n:
        raise ValueError(f"library must hold {n} files, got {len(library)}")
    if any(len(f) != config.file_bytes for f in library):
        raise ValueError("library files must all have the configured length")

    shares, randomness = [], []
    meta: ShareMeta | None = None
    for data in library:
        s, r, meta = share_file(data, enc, p.stars_per_column, config.field, rng)
        shares.append(s)
        randomness.append(r)
    cached_rows = tuple(pda.star_rows(lam) for lam in range(1, p.num_caches + 1))

    # Per-cache storage meets the memory budget with equality: N*Z*(B/(F-Z)) = M*B.
    stored_bits = n * p.stars_per_column * meta.share_bits
    assert Fraction(stored_bits) == m * meta.padded_bits
    return shares, randomness, meta, cached_rows


def user_key_placement(
    garray: GArray, symbols_per_share: int, field: BinaryField, rng
):
    """One uniform key per distinct pair, drawn in pair order; user k stores
    the keys of the pairs in its own column (exactly F - Z of them)."""
    key_pool = {
        pair: random_vector(symbols_per_share, field, rng)
        for pair in garray.pairs
    }
    user_keys = {
        user: {
            entry: key_pool[entry]
            for entry in garray.column_of_user(user)
            if entry is not None
        }
        for user in garray.column_users
    }
    return key_pool, user_keys


def deliver(
    garray: GArray,
    shares,
    demands,
    key_pool,
    strip_pads: bool = False,
) -> dict[Pair, np.ndarray]:
    """One broadcast per distinct pair (s-major order): the XOR of every
    participant's demanded share with the pair's key.

    strip_pads omits the keys; it exists only to sabotage the scheme for
    secrecy testing.
    """
    num_files = len(shares)
    for user in garray.column_users:
        if not 1 <= demands[user - 1] <= num_files:
            raise ValueError(f"user {user} demands unknown file {demands[user - 1]}")
    out: dict[Pair, np.ndarray] = {}
    for pair, occurrences in garray.pair_occurrences.items():
        acc = None
        for row, col in occurrences:
            d = demands[garray.column_users[col - 1] - 1]
            share = shares[d - 1][row - 1]
            acc = share.copy() if acc is None else acc ^ share
        if not strip_pads:
            acc = acc ^ key_pool[pair]
        out[pair] = acc
    return out


@dataclass
class SessionState:
    """Everything one end-to-end run produces; inputs to decode/verify."""

    config: SystemConfig
    pda: Pda | None  # canonical (column-permuted); None for the M=0 baseline
    association: Association
    enc: SymbolMatrix
    meta: ShareMeta
    library: tuple[bytes, ...]
    shares: list
    randomness: list
    cached_rows: tuple[tuple[int, ...], ...]
    garray: GArray
    key_pool: dict[Pair, np.ndarray]
    user_keys: dict[int, dict[Pair, np.ndarray]]
    demands: tuple[int, ...]
    transmissions: dict[Pair, np.ndarray]
    rate: RateReport
    pads_stripped: bool = False


def _stream(seed: int, tag: str) -> random.Random:
    """Independent deterministic generator derived from (seed, tag)."""
    digest = hashlib.sha256(f"{seed}:{tag}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def synthetic_library(config: SystemConfig) -> tuple[bytes, ...]:
    """Seed-derived stand-in library of N equal-length files."""
    rng = _stream(config.seed, "library")
    return tuple(
        bytes(rng.randrange(256) for _ in range(config.file_bytes))
        for _ in range(config.num_files)
    )


def run_session(
    pda: Pda,
    config: SystemConfig,
    library=None,
    assignment=None,
    profile=None,
    demands=None,
    strip_pads: bool = False,
) -> SessionState:
    """Drive all four phases and return the completed session."""
    if (assignment is None) == (profile is None):
        raise ValueError("give exactly one of assignment or profile")
    association = (
        Association.from_profile(profile)
        if profile is not None
        else Association.from_assignment(assignment, pda.num_caches)
    )
    if association.num_users != config.num_users:
        raise ValueError(
            f"association covers {association.num_users} users, "
            f"config says {config.num_users}"
        )
    if not (association.num_caches == config.num_caches == pda.num_caches):
        raise ValueError("cache counts disagree")

    if demands is None:
        if config.num_files < config.num_users:
            raise ValueError("worst-case demands need N >= K")
        demands = worst_case_demands(config.num_users)
    demands = tuple(demands)
    if len(demands) != config.num_users:
        raise ValueError("demand vector length must be K")
    if any(not 1 <= d <= config.num_files for d in demands):
        raise ValueError("demand out of range")

    if library is None:
        library = synthetic_library(config)
    library = tuple(bytes(f) for f in library)

    canonical = pda.permute_columns(association.cache_order)
    enc = cauchy_matrix(canonical.num_rows, config.field)
    shares, randomness, meta, cached_rows = helper_placement(
        canonical, config, library, enc, _stream(config.seed, "sharing")
    )
    garray = build_g_array(canonical, association)
    key_pool, user_keys = user_key_placement(
        garray, meta.symbols_per_share, config.field, _stream(config.seed, "keys")
    )
    transmissions = deliver(garray, shares, demands, key_pool, strip_pads)
    rate = rate_report(canonical, association.profile)
    assert len(transmissions) == rate.num_transmissions
    return SessionState(
        config=config,
        pda=canonical,
        association=association,
        enc=enc,
        meta=meta,
        library=library,
        shares=shares,
        randomness=randomness,
        cached_rows=cached_rows,
        garray=garray,
        key_pool=key_pool,
        user_keys=user_keys,
        demands=demands,
        transmissions=transmissions,
        rate=rate,
        pads_stripped=strip_pads,
    )


def decode_user(session: SessionState, user: int) -> bytes:
    """Recover the user's demanded file from its caches and the broadcasts.

    Every share it lacks is unlocked by one transmission: XOR away the
    pair's key and the other participants' shares (which sit in this
    user's helper cache, by the PDA's cross-star structure), then invert
    the sharing once all F shares are present.
    """
    garray = session.garray
    lam = session.association.user_to_cache[user - 1]
    col = garray.column_index[user]
    d = session.demands[user - 1]
    cached = set(session.cached_rows[lam - 1])

    recovered: dict[int, np.ndarray] = {
        j: session.shares[d - 1][j - 1] for j in cached
    }
    keys = session.user_keys[user]
    for j, entry in enumerate(garray.column(col), start=1):
        if entry is None:
            continue
        if entry not in session.transmissions:
            raise RuntimeError(f"transmission {entry} missing")
        if entry not in keys:
            raise RuntimeError(f"user {user} lacks key {entry}")
        acc = session.transmissions[entry] ^ keys[entry]
        for row, other_col in garray.pair_occurrences[entry]:
            if other_col == col:
                continue
            other_user = garray.column_users[other_col - 1]
            other_d = session.demands[other_user - 1]
            if row not in cached:
                raise RuntimeError("participant share not in this user's cache")
            acc = acc ^ session.shares[other_d - 1][row - 1]
        recovered[j] = acc

    ordered = [recovered[j] for j in range(1, session.meta.num_shares + 1)]
    return unshare_file(ordered, session.enc, session.meta, session.config.field)


def decode_all(session: SessionState) -> dict[int, bytes]:
    return {
        user: decode_user(session, user) for user in session.garray.column_users
    }


def pruning_savings(session: SessionState) -> int:
    """Broadcasts whose share payloads duplicate an earlier one (possible
    only under repeated demands).  A demand-aware server could merge them
    if keys were reissued; this scheme never prunes, so the value is
    informational."""
    seen = set()
    duplicates = 0
    for pair, occ in session.garray.pair_occurrences.items():
        payload = frozenset(
            (session.demands[session.garray.column_users[col - 1] - 1], row)
            for row, col in occ
        )
        if payload in seen:
            duplicates += 1
        seen.add(payload)
    return duplicates


def one_time_pad_session(
    config: SystemConfig, library=None, profile=None, assignment=None, demands=None
) -> SessionState:
    """The M = 0 scheme: no helper content, one whole-file pad per user.

    Files are kept whole (one share, no sharing randomness); each user's
    unit cache holds one uniform key, and the server broadcasts demanded
    file XOR key, once per user.  The rate is exactly K.
    """
    if config.helper_memory != 0:
        raise ValueError("the one-time-pad baseline is the M = 0 scheme")
    if (assignment is None) and (profile is None):
        profile = (config.num_users,) + (0,) * (config.num_caches - 1)
    association = (
        Association.from_profile(profile)
        if profile is not None
        else Association.from_assignment(assignment, config.num_caches)
    )
    if association.num_users != config.num_users:
        raise ValueError("association covers the wrong number of users")
    if demands is None:
        if config.num_files < config.num_users:
            raise ValueError("worst-case demands need N >= K")
        demands = worst_case_demands(config.num_users)
    demands = tuple(demands)
    if any(not 1 <= d <= config.num_files for d in demands):
        raise ValueError("demand out of range")
    if library is None:
        library = synthetic_library(config)
    library = tuple(bytes(f) for f in library)
    if any(len(f) != config.file_bytes for f in library):
        raise ValueError("library files must all have the configured length")

    field = config.field
    enc = SymbolMatrix(1, 1, ((1,),))
    meta = ShareMeta(
        num_shares=1,
        num_random=0,
        data_bits=8 * config.file_bytes,
        padded_bits=-(-8 * config.file_bytes // field.l) * field.l,
        symbols_per_share=-(-8 * config.file_bytes // field.l),
    )
    shares = []
    for data in library:
        subfile = int.from_bytes(data, "big") << (meta.padded_bits - meta.data_bits)
        mask = field.order - 1
        shares.append(
            [
                field.vector(
                    [
                        (subfile >> (meta.padded_bits - (t + 1) * field.l)) & mask
                        for t in range(meta.symbols_per_share)
                    ]
                )
            ]
        )

    columns, users = [], []
    for lam in range(1, association.num_caches + 1):
        for i, user in enumerate(association.groups[lam - 1], start=1):
            columns.append(((lam, i),))
            users.append(user)
    garray = GArray(tuple(zip(*columns)), tuple(users))

    key_pool, user_keys = user_key_placement(
        garray, meta.symbols_per_share, field, _stream(config.seed, "keys")
    )
    transmissions = deliver(garray, shares, demands, key_pool)
    per_s = tuple(load for load in association.profile if load > 0)
    rate = RateReport(config.num_users, Fraction(config.num_users), per_s)
    return SessionState(
        config=config,
        pda=None,
        association=association,
        enc=enc,
        meta=meta,
        library=library,
        shares=shares,
        randomness=[[] for _ in library],
        cached_rows=tuple(() for _ in range(config.num_caches)),
        garray=garray,
        key_pool=key_pool,
        user_keys=user_keys,
        demands=demands,
        transmissions=transmissions,
        rate=rate,
    )
