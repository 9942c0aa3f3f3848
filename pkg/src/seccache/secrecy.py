"""Exact secrecy verification for completed sessions.

Every quantity an observer sees (cached share symbols, key symbols,
broadcast symbols) is a GF(2^l)-linear function of the file symbols w and
the randomness symbols v (sharing randomness plus one-time-pad keys):

    observations = A w + B v        (all arithmetic over GF(2^l))

With v uniform and independent of w, the observations reveal nothing
about a set of protected files exactly when every protected file column
of A lies in the column space of B; equivalently rank([B | A_protected])
equals rank(B).  That rank condition is decided here by Gaussian
elimination, and backed by a brute-force distribution-enumeration oracle
on instances small enough to enumerate.

Rows are labeled with structured tuples: ("share", n, j, pos),
("key", s, i, pos), ("x", s, i, pos).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import BinaryField
from .scheme import SessionState
from .sharing import SymbolMatrix, bytes_to_subfiles

RowLabel = tuple


@dataclass
class LinearObservationModel:
    """Observations as an exact linear map of (file symbols, randomness)."""

    field: BinaryField
    num_files: int
    symbols_per_file: int
    obs_files: np.ndarray  # obs_dim x (num_files * symbols_per_file)
    obs_rand: np.ndarray  # obs_dim x rand_dim
    row_labels: tuple[RowLabel, ...]

    @property
    def obs_dim(self) -> int:
        return self.obs_files.shape[0]

    @property
    def file_dim(self) -> int:
        return self.obs_files.shape[1]

    @property
    def rand_dim(self) -> int:
        return self.obs_rand.shape[1]

    def file_columns(self, n: int) -> range:
        """Column range of file n's data symbols (1-based file index)."""
        if not 1 <= n <= self.num_files:
            raise ValueError(f"file {n} out of range")
        return range((n - 1) * self.symbols_per_file, n * self.symbols_per_file)

    def protected_columns(self, protected) -> np.ndarray:
        cols = [c for n in sorted(set(protected)) for c in self.file_columns(n)]
        return np.asarray(cols, dtype=np.intp)


@dataclass
class SecrecyVerdict:
    """Outcome of one independence check; a failing check carries a
    nonzero combination of observations that exposes a protected symbol."""

    holds: bool
    witness: np.ndarray | None = None
    witness_rows: tuple[tuple[RowLabel, int], ...] | None = None

    def __post_init__(self):
        assert self.holds == (self.witness is None)

    def witness_hex(self) -> str:
        if self.witness is None:
            return ""
        return " ".join(f"{int(c):x}" for c in self.witness)

    def witness_summary(self) -> str:
        """The witness restricted to its nonzero coefficients, labeled."""
        if not self.witness_rows:
            return ""
        return " + ".join(
            f"{coeff:x}*{kind}[{','.join(str(p) for p in rest)}]"
            for (kind, *rest), coeff in self.witness_rows
        )


def _verdict(model: "LinearObservationModel", witness: np.ndarray | None) -> SecrecyVerdict:
    if witness is None:
        return SecrecyVerdict(True)
    rows = tuple(
        (model.row_labels[r], int(witness[r]))
        for r in np.nonzero(witness)[0]
    )
    return SecrecyVerdict(False, witness, rows)


# -- elimination over GF(2^l) ----------------------------------------------


def _echelon(field: BinaryField, mat: np.ndarray, pivot_cols: int) -> int:
    """In-place row echelon using only the first pivot_cols columns for
    pivots; returns the pivot count.  Rows below the pivots end with zeros
    throughout those columns."""
    exp, log = field.exp_table, field.log_table
    rows = mat.shape[0]
    pivots = 0
    for col in range(pivot_cols):
        if pivots == rows:
            break
        candidates = np.nonzero(mat[pivots:, col])[0]
        if candidates.size == 0:
            continue
        r = pivots + int(candidates[0])
        if r != pivots:
            mat[[pivots, r]] = mat[[r, pivots]]
        prow = mat[pivots]
        pv = int(prow[col])
        if pv != 1:
            scaled = np.zeros_like(prow)
            nz = prow != 0
            scaled[nz] = exp[(field.order - 1 - log[pv]) + log[prow[nz]]]
            mat[pivots] = scaled
            prow = scaled
        below = mat[pivots + 1 :, col]
        hits = np.nonzero(below)[0]
        if hits.size:
            mat[pivots + 1 + hits] ^= field.scaled_outer(below[hits], prow)
        pivots += 1
    return pivots


def _exposing_combination(
    field: BinaryField, b: np.ndarray, a: np.ndarray
) -> np.ndarray | None:
    """A row combination phi with phi.B = 0 but phi.A != 0, or None when
    every column of A already lies in the column space of B."""
    if a.shape[0] == 0 or not a.any():
        return None
    work = np.concatenate([b, a], axis=1).copy()
    pivots = _echelon(field, work, b.shape[1])
    if not work[pivots:, b.shape[1] :].any():
        return None
    tracked = np.concatenate(
        [b, a, np.eye(b.shape[0], dtype=b.dtype)], axis=1
    )
    pivots = _echelon(field, tracked, b.shape[1])
    width = b.shape[1] + a.shape[1]
    for row in tracked[pivots:]:
        if row[b.shape[1] : width].any():
            return row[width:].copy()
    raise AssertionError("rank gap found but no witness row")


def check_zero_information(
    model: LinearObservationModel, protected
) -> SecrecyVerdict:
    """Decide exact statistical independence of the observations from the
    protected files via the rank criterion."""
    cols = model.protected_columns(protected)
    witness = _exposing_combination(
        model.field, model.obs_rand, model.obs_files[:, cols]
    )
    return _verdict(model, witness)


def evaluate_observations(
    model: LinearObservationModel, w: np.ndarray, v: np.ndarray
) -> np.ndarray:
    """A w + B v for a concrete assignment; used for model validation and
    witness soundness checks."""
    field = model.field
    out = field.zeros(model.obs_dim)
    stacked = np.concatenate([model.obs_files, model.obs_rand], axis=1)
    x = np.concatenate([field.vector(w), field.vector(v)])
    for r in range(model.obs_dim):
        row = stacked[r]
        acc = 0
        for c in np.nonzero(row)[0]:
            acc ^= field.mul(int(row[c]), int(x[c]))
        out[r] = acc
    return out


def apply_combination(
    model: LinearObservationModel, phi: np.ndarray, w: np.ndarray, v: np.ndarray
) -> int:
    """phi . (A w + B v): the value a witness functional extracts."""
    field = model.field
    obs = evaluate_observations(model, w, v)
    acc = 0
    for c, y in zip(phi, obs):
        acc ^= field.mul(int(c), int(y))
    return acc


# -- model construction from a session ---------------------------------------


class SessionAnalyzer:
    """Builds observation models for one session, sharing the expensive row
    blocks (per-cache shares, transmissions) across observers.

    Symbol positions of a share never interact, so a model restricted to
    the first `positions` of each vector is a faithful (and much smaller)
    model of those positions; the brute-force oracle relies on this to
    stay enumerable.
    """

    def __init__(self, session: SessionState, positions: int | None = None):
        self.session = session
        meta = session.meta
        self.fsym = (
            meta.symbols_per_share
            if positions is None
            else min(meta.symbols_per_share, positions)
        )
        self.nsub = meta.num_subfiles
        self.nrand = meta.num_random
        self.num_files = session.config.num_files
        self.spf = self.nsub * self.fsym
        self.file_dim = self.num_files * self.spf
        self.vdim = self.num_files * self.nrand * self.fsym
        self.pairs = session.garray.pairs
        self.rand_dim = self.vdim + len(self.pairs) * self.fsym
        self._key_col = {
            pair: self.vdim + idx * self.fsym
            for idx, pair in enumerate(self.pairs)
        }
        self._enc = session.enc
        self._cache_blocks: dict[int, tuple] = {}
        self._delivery_block: tuple | None = None

    def _file_col(self, n: int, m: int, pos: int) -> int:
        return (n - 1) * self.spf + m * self.fsym + pos

    def _v_col(self, n: int, z: int, pos: int) -> int:
        return (n - 1) * self.nrand * self.fsym + z * self.fsym + pos

    def _add_share(self, a_row, b_row, n: int, j: int, pos: int) -> None:
        coeffs = self._enc.row(j - 1)
        for m in range(self.nsub):
            a_row[self._file_col(n, m, pos)] ^= coeffs[m]
        for z in range(self.nrand):
            b_row[self._v_col(n, z, pos)] ^= coeffs[self.nsub + z]

    def _rows(self, count: int):
        field = self.session.config.field
        return field.zeros(count, self.file_dim), field.zeros(count, self.rand_dim)

    def cache_block(self, cache: int):
        """Rows for every share symbol stored by the given cache label."""
        if cache not in self._cache_blocks:
            rows = self.session.cached_rows[cache - 1]
            count = self.num_files * len(rows) * self.fsym
            a, b = self._rows(count)
            labels = []
            r = 0
            for n in range(1, self.num_files + 1):
                for j in rows:
                    for pos in range(self.fsym):
                        self._add_share(a[r], b[r], n, j, pos)
                        labels.append(("share", n, j, pos))
                        r += 1
            self._cache_blocks[cache] = (a, b, tuple(labels))
        return self._cache_blocks[cache]

    def key_block(self, user: int):
        keys = sorted(self.session.user_keys[user])
        a, b = self._rows(len(keys) * self.fsym)
        labels = []
        for r0, pair in enumerate(keys):
            for pos in range(self.fsym):
                r = r0 * self.fsym + pos
                b[r, self._key_col[pair] + pos] = 1
                labels.append(("key", *pair, pos))
        return a, b, tuple(labels)

    def delivery_block(self):
        """Rows for every broadcast symbol (shared by all observers)."""
        if self._delivery_block is None:
            session = self.session
            garray = session.garray
            pairs = list(session.transmissions)
            a, b = self._rows(len(pairs) * self.fsym)
            labels = []
            for r0, pair in enumerate(pairs):
                for pos in range(self.fsym):
                    r = r0 * self.fsym + pos
                    for row, col in garray.pair_occurrences[pair]:
                        user = garray.column_users[col - 1]
                        d = session.demands[user - 1]
                        self._add_share(a[r], b[r], d, row, pos)
                    if not session.pads_stripped:
                        b[r, self._key_col[pair] + pos] ^= 1
                    labels.append(("x", *pair, pos))
            self._delivery_block = (a, b, tuple(labels))
        return self._delivery_block

    def _assemble(self, blocks) -> LinearObservationModel:
        field = self.session.config.field
        if blocks:
            a = np.concatenate([blk[0] for blk in blocks], axis=0)
            b = np.concatenate([blk[1] for blk in blocks], axis=0)
            labels = tuple(lbl for blk in blocks for lbl in blk[2])
        else:
            a, b = self._rows(0)
            labels = ()
        return LinearObservationModel(
            field, self.num_files, self.spf, a, b, labels
        )

    def cache_model(self, cache: int) -> LinearObservationModel:
        if not 1 <= cache <= self.session.config.num_caches:
            raise ValueError(f"cache {cache} out of range")
        return self._assemble([self.cache_block(cache)])

    def user_model(self, user: int, include_delivery: bool) -> LinearObservationModel:
        if user not in self.session.garray.column_index:
            raise ValueError(f"unknown user {user}")
        cache = self.session.association.user_to_cache[user - 1]
        blocks = [self.cache_block(cache), self.key_block(user)]
        if include_delivery:
            blocks.append(self.delivery_block())
        return self._assemble(blocks)

    def eavesdropper_model(self) -> LinearObservationModel:
        return self._assemble([self.delivery_block()])

    def variable_assignment(self) -> tuple[np.ndarray, np.ndarray]:
        """The session's actual (w, v) values, for model validation."""
        session = self.session
        field = session.config.field
        w = field.zeros(self.file_dim)
        for n, data in enumerate(session.library, start=1):
            subfiles, _ = bytes_to_subfiles(
                data, session.meta.num_shares, session.meta.num_random, field
            )
            for m, sub in enumerate(subfiles):
                for pos, sym in enumerate(sub[: self.fsym]):
                    w[self._file_col(n, m, pos)] = sym
        v = field.zeros(self.rand_dim)
        for n, vecs in enumerate(session.randomness, start=1):
            for z, vec in enumerate(vecs):
                for pos, sym in enumerate(vec[: self.fsym]):
                    v[self._v_col(n, z, pos)] = sym
        for pair, key in session.key_pool.items():
            base = self._key_col[pair]
            for pos, sym in enumerate(key[: self.fsym]):
                v[base + pos] = sym
        return w, v


def build_observation_model(
    session: SessionState,
    observer: int,
    scope: str = "caches-plus-delivery",
    positions: int | None = None,
) -> LinearObservationModel:
    """Everything user `observer` sees, symbol by symbol."""
    if scope not in ("caches-only", "caches-plus-delivery"):
        raise ValueError(f"unknown scope {scope!r}")
    return SessionAnalyzer(session, positions).user_model(
        observer, include_delivery=(scope == "caches-plus-delivery")
    )


def cache_observation_model(session: SessionState, cache: int) -> LinearObservationModel:
    """What the helper cache itself stores (no user keys, no broadcasts)."""
    return SessionAnalyzer(session).cache_model(cache)


def check_external_eavesdropper(session: SessionState) -> SecrecyVerdict:
    """Broadcast-only observer; every file is protected."""
    model = SessionAnalyzer(session).eavesdropper_model()
    return check_zero_information(model, range(1, session.config.num_files + 1))


def share_subset_model(
    enc: SymbolMatrix, num_random: int, rows, field: BinaryField
) -> LinearObservationModel:
    """Observation of selected shares (1-based rows) of a single shared
    file with one symbol per subfile; used for sharing-level checks."""
    nsub = enc.rows - num_random
    a = field.zeros(len(rows), nsub)
    b = field.zeros(len(rows), num_random)
    labels = []
    for r, j in enumerate(rows):
        coeffs = enc.row(j - 1)
        a[r, :] = coeffs[:nsub]
        b[r, :] = coeffs[nsub:]
        labels.append(("share", 1, j, 0))
    return LinearObservationModel(field, 1, nsub, a, b, tuple(labels))


# -- brute-force oracle -------------------------------------------------------


def enumerate_independence(
    model: LinearObservationModel,
    protected,
    max_symbols: int = 12,
    max_states: int = 1 << 22,
) -> bool:
    """Enumerate every (w, v), build the exact joint distribution of
    (protected file symbols, observations), and test independence.

    Deliberately ignorant of the rank criterion: it compares empirical
    joint counts against the product of the marginals.
    """
    field = model.field
    dims = model.file_dim + model.rand_dim
    states = field.order**dims
    if dims > max_symbols or states > max_states:
        raise ValueError(
            f"instance too large to enumerate ({dims} symbols over "
            f"GF(2^{field.l}))"
        )
    exp, log = field.exp_table, field.log_table

    codes = np.arange(states, dtype=np.int64)
    inputs = np.empty((states, dims), dtype=field.dtype)
    for d in range(dims):
        inputs[:, d] = (codes // (field.order**d)) % field.order

    stacked = np.concatenate([model.obs_files, model.obs_rand], axis=1)
    obs = np.zeros((states, model.obs_dim), dtype=field.dtype)
    for r in range(model.obs_dim):
        for c in np.nonzero(stacked[r])[0]:
            col = inputs[:, c]
            term = np.zeros(states, dtype=field.dtype)
            nz = col != 0
            term[nz] = exp[log[int(stacked[r, c])] + log[col[nz]]]
            obs[:, r] ^= term

    wp = inputs[:, model.protected_columns(protected)]
    joint = np.concatenate([wp, obs], axis=1)
    joint_rows, joint_counts = np.unique(joint, axis=0, return_counts=True)
    wp_rows, wp_inverse = np.unique(
        joint_rows[:, : wp.shape[1]], axis=0, return_inverse=True
    )
    obs_rows, obs_inverse = np.unique(
        joint_rows[:, wp.shape[1] :], axis=0, return_inverse=True
    )
    if len(joint_rows) != len(wp_rows) * len(obs_rows):
        return False
    wp_counts = np.zeros(len(wp_rows), dtype=np.int64)
    np.add.at(wp_counts, wp_inverse, joint_counts)
    obs_counts = np.zeros(len(obs_rows), dtype=np.int64)
    np.add.at(obs_counts, obs_inverse, joint_counts)
    return bool(
        np.all(
            joint_counts * states
            == wp_counts[wp_inverse] * obs_counts[obs_inverse]
        )
    )


def brute_force_secrecy(
    session: SessionState,
    observer: int,
    protected,
    scope: str = "caches-plus-delivery",
    positions: int | None = 1,
    max_symbols: int = 12,
    max_states: int = 1 << 22,
) -> SecrecyVerdict:
    """Enumeration-based verdict for a tiny session, restricted to the
    first `positions` symbol positions (positions never interact).

    The hold/fail decision comes entirely from the enumeration; on failure
    the reported witness is extracted from the linear model (a failing
    distribution always has one).
    """
    model = build_observation_model(session, observer, scope, positions)
    if enumerate_independence(model, protected, max_symbols, max_states):
        return SecrecyVerdict(True)
    witness = _exposing_combination(
        model.field, model.obs_rand, model.obs_files[:, model.protected_columns(protected)]
    )
    assert witness is not None
    return _verdict(model, witness)


# -- whole-session verification ------------------------------------------------


@dataclass
class SecrecyReport:
    """Rank-check verdicts for every cache and user, plus the eavesdropper."""

    cache_placement: dict[int, SecrecyVerdict]
    user_placement: dict[int, SecrecyVerdict]
    user_delivery: dict[int, SecrecyVerdict] | None
    eavesdropper: SecrecyVerdict | None

    @property
    def all_hold(self) -> bool:
        verdicts = list(self.cache_placement.values())
        verdicts += list(self.user_placement.values())
        if self.user_delivery is not None:
            verdicts += list(self.user_delivery.values())
        if self.eavesdropper is not None:
            verdicts.append(self.eavesdropper)
        return all(v.holds for v in verdicts)


def verify_session(
    session: SessionState,
    include_delivery: bool = True,
    max_workers: int | None = None,
) -> SecrecyReport:
    """Run the full battery: per-cache placement secrecy, per-user
    placement secrecy, per-user delivery secrecy (all files but the
    demanded one), and the broadcast-only eavesdropper.

    The per-user checks are pure reads over a completed session, so with
    max_workers they fan out across a thread pool; the shared row blocks
    are built up front so workers never mutate the analyzer.
    """
    analyzer = SessionAnalyzer(session)
    session.config.field.exp_table  # warm the tables before fanning out
    for lam in range(1, session.config.num_caches + 1):
        analyzer.cache_block(lam)
    if include_delivery:
        analyzer.delivery_block()
    all_files = range(1, session.config.num_files + 1)
    users = session.garray.column_users

    def placement_check(user: int) -> SecrecyVerdict:
        return check_zero_information(
            analyzer.user_model(user, include_delivery=False), all_files
        )

    def delivery_check(user: int) -> SecrecyVerdict:
        return check_zero_information(
            analyzer.user_model(user, include_delivery=True),
            set(all_files) - {session.demands[user - 1]},
        )

    cache_placement = {
        lam: check_zero_information(analyzer.cache_model(lam), all_files)
        for lam in range(1, session.config.num_caches + 1)
    }
    if max_workers is not None and max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers) as pool:
            user_placement = dict(zip(users, pool.map(placement_check, users)))
            user_delivery = (
                dict(zip(users, pool.map(delivery_check, users)))
                if include_delivery
                else None
            )
    else:
        user_placement = {user: placement_check(user) for user in users}
        user_delivery = (
            {user: delivery_check(user) for user in users}
            if include_delivery
            else None
        )
    eavesdropper = (
        check_zero_information(analyzer.eavesdropper_model(), all_files)
        if include_delivery
        else None
    )
    return SecrecyReport(cache_placement, user_placement, user_delivery, eavesdropper)
