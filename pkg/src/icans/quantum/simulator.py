"""Batched statevector simulation with shot sampling and Pauli-trajectory noise.

Noisy shots are pure-state trajectories: after every gate, each qubit the
gate touched suffers a uniformly random X/Y/Z with probability ``p1`` (one
qubit gates) or ``p2`` (entanglers). Every circuit execution draws a fresh
trajectory. For small registers the trajectories are assembled from cached
prefix unitaries of the noiseless circuit, so a shot with ``m`` errors costs
``2m + 1`` small matrix-vector products instead of a full circuit replay.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .circuit import AnsatzCircuit
from .pauli import BASIS_CHANGE, PAULI_MATRICES, PauliObservable, pauli_action

# registers up to this size use the cached-prefix trajectory path
PREFIX_PATH_MAX_QUBITS = 4
_TRAJ_CHUNK = 1 << 15
_SNAPSHOT_BYTES = 64 << 20


@dataclass(frozen=True)
class NoiseModel:
    """Stochastic Pauli-insertion noise proxy plus classical readout flips."""

    p1: float = 0.001
    p2: float = 0.02
    readout_flip: float = 0.03
    enabled: bool = True

    def __post_init__(self):
        for name in ("p1", "p2", "readout_flip"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} is not a probability")

    @classmethod
    def off(cls) -> "NoiseModel":
        return cls(0.0, 0.0, 0.0, enabled=False)

    @property
    def gate_noise(self) -> bool:
        return self.enabled and (self.p1 > 0 or self.p2 > 0)

    @property
    def readout(self) -> float:
        return self.readout_flip if self.enabled else 0.0


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ValueError(f"expected {2**self.n_qubits} amplitudes, got {amps.shape}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm^2 = {norm})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class SampleResult:
    mean: float
    single_shot_variance: float
    shots: int
    circuit_executions: int


# --------------------------------------------------------------------------
# compiled circuit programs


@dataclass(frozen=True)
class _Op:
    kind: str
    qubit: int
    axis: str | None
    param: int | None
    angle: float
    diag: np.ndarray | None  # CZ phase pattern


@dataclass(frozen=True)
class _Program:
    n: int
    ops: tuple[_Op, ...]
    # error sites: snapshot index (1-based gate count), qubit, probability class
    site_pos: np.ndarray
    site_qubit: np.ndarray
    site_two_qubit: np.ndarray
    # gate j as a matrix: cos(h_j) const[j] + sin(h_j) gen[j], h_j = half angle (0 for CZ)
    const: np.ndarray
    gen: np.ndarray
    param_of: np.ndarray  # -1 when the angle is fixed
    fixed_half: np.ndarray


@lru_cache(maxsize=128)
def _compile(circuit: AnsatzCircuit) -> _Program:
    n = circuit.n_qubits
    dim = 2**n
    idx = np.arange(dim)
    ops = []
    pos, qub, two = [], [], []
    for j, gate in enumerate(circuit.gates):
        if gate.kind == "rotation":
            ops.append(_Op("rot", gate.qubits[0], gate.axis, gate.param, gate.angle, None))
        else:
            a, b = gate.qubits
            both = ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
            ops.append(_Op("cz", a, None, None, 0.0, (1 - 2 * both).astype(float)))
        for q in gate.qubits:
            pos.append(j + 1)
            qub.append(q)
            two.append(len(gate.qubits) == 2)
    G = len(ops)
    const = np.zeros((G, dim, dim), dtype=complex)
    gen = np.zeros((G, dim, dim), dtype=complex)
    param_of = np.full(G, -1)
    fixed_half = np.zeros(G)
    for j, op in enumerate(ops):
        if op.kind == "cz":
            const[j] = np.diag(op.diag)
            continue
        const[j] = np.eye(dim)
        pauli = PAULI_MATRICES[op.axis.upper()]
        gen[j] = -1j * reduce(np.kron, [pauli if q == op.qubit else np.eye(2) for q in range(n)])
        if op.param is None:
            fixed_half[j] = 0.5 * op.angle
        else:
            param_of[j] = op.param
    return _Program(n, tuple(ops), np.array(pos, dtype=int), np.array(qub, dtype=int),
                    np.array(two, dtype=bool), const, gen, param_of, fixed_half)


# batches at most this large use matrix prefix products instead of gate-by-gate updates
_SCAN_MAX_ROWS = 4


def _prefix_unitaries(prog: _Program, thetas: np.ndarray) -> np.ndarray:
    """out[b, j] = G_{j+1} ... G_1 for row b, by a log-depth inclusive scan."""
    half = np.where(prog.param_of >= 0, 0.5 * thetas[:, np.maximum(prog.param_of, 0)],
                    prog.fixed_half)
    mats = (np.cos(half)[:, :, None, None] * prog.const
            + np.sin(half)[:, :, None, None] * prog.gen)
    G = mats.shape[1]
    offset = 1
    while offset < G:
        mats[:, offset:] = mats[:, offset:] @ mats[:, :G - offset]
        offset *= 2
    return mats


@lru_cache(maxsize=32)
def _single_pauli_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """perm[q, t], phase[q, t] for Pauli t in (X, Y, Z) on qubit q."""
    dim = 2**n
    perm = np.empty((n, 3, dim), dtype=int)
    phase = np.empty((n, 3, dim), dtype=complex)
    for q in range(n):
        for t, ch in enumerate("XYZ"):
            word = "I" * q + ch + "I" * (n - q - 1)
            perm[q, t], phase[q, t] = pauli_action(word)
    return perm, phase


@lru_cache(maxsize=256)
def _word_action(word: str) -> tuple[np.ndarray, np.ndarray]:
    return pauli_action(word)


@lru_cache(maxsize=64)
def _basis_unitary(basis: str) -> np.ndarray:
    return reduce(np.kron, [BASIS_CHANGE[ch] for ch in basis], np.eye(1, dtype=complex))


def _apply_op(states: np.ndarray, n: int, op: _Op, thetas: np.ndarray | None) -> np.ndarray:
    if op.kind == "cz":
        return states * op.diag
    T = states.shape[0]
    q = op.qubit
    psi = states.reshape(T, 2**q, 2, 2 ** (n - q - 1))
    a0 = psi[:, :, 0, :]
    a1 = psi[:, :, 1, :]
    if op.param is None:
        half = np.full((T, 1, 1), 0.5 * op.angle)
    else:
        half = 0.5 * thetas[:, op.param].reshape(T, 1, 1)
    out = np.empty_like(psi)
    if op.axis == "z":
        out[:, :, 0, :] = a0 * np.exp(-1j * half)
        out[:, :, 1, :] = a1 * np.exp(1j * half)
    else:
        c, s = np.cos(half), np.sin(half)
        if op.axis == "y":
            out[:, :, 0, :] = c * a0 - s * a1
            out[:, :, 1, :] = s * a0 + c * a1
        else:
            out[:, :, 0, :] = c * a0 - 1j * s * a1
            out[:, :, 1, :] = -1j * s * a0 + c * a1
    return out.reshape(T, -1)


def _check_thetas(circuit: AnsatzCircuit, thetas) -> np.ndarray:
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim == 1:
        thetas = thetas[None, :]
    if thetas.ndim != 2 or thetas.shape[1] != circuit.param_count:
        raise ValueError(
            f"circuit takes {circuit.param_count} parameters, got array of shape {thetas.shape}"
        )
    return thetas


def simulate(circuit: AnsatzCircuit, thetas) -> np.ndarray:
    """Noiseless U(theta)|0...0> for every row of ``thetas``; returns (B, 2**n)."""
    thetas = _check_thetas(circuit, thetas)
    prog = _compile(circuit)
    if thetas.shape[0] <= _SCAN_MAX_ROWS and prog.ops:
        return _prefix_unitaries(prog, thetas)[:, -1, :, 0].copy()
    states = np.zeros((thetas.shape[0], 2**prog.n), dtype=complex)
    states[:, 0] = 1.0
    for op in prog.ops:
        states = _apply_op(states, prog.n, op, thetas)
    return states


def _bernoulli_positions(rng: np.random.Generator, size: int, p: float) -> np.ndarray:
    """Sorted indices in [0, size) that fire with independent probability p."""
    if p <= 0.0 or size == 0:
        return np.empty(0, dtype=int)
    if p >= 1.0:
        return np.arange(size)
    if p > 0.2:
        return np.flatnonzero(rng.random(size) < p)
    hits = []
    start = 0
    while True:
        expected = int((size - start) * p * 1.2) + 16
        gaps = rng.geometric(p, size=expected)
        pos = start + np.cumsum(gaps) - 1
        hits.append(pos[pos < size])
        if pos[-1] >= size:
            break
        start = pos[-1] + 1
    return np.concatenate(hits)


def _apply_paulis(states, rows, qubits, kinds, n):
    perm, phase = _single_pauli_tables(n)
    p = perm[qubits, kinds]
    ph = phase[qubits, kinds]
    states[rows] = ph * np.take_along_axis(states[rows], p, axis=1)


def _direct_trajectories(circuit: AnsatzCircuit, thetas: np.ndarray, noise: NoiseModel,
                         rng: np.random.Generator) -> np.ndarray:
    """One full noisy replay per row of ``thetas``."""
    prog = _compile(circuit)
    n = prog.n
    T = thetas.shape[0]
    states = np.zeros((T, 2**n), dtype=complex)
    states[:, 0] = 1.0
    gate_of_site = prog.site_pos - 1
    for j, op in enumerate(prog.ops):
        states = _apply_op(states, n, op, thetas)
        if not noise.gate_noise:
            continue
        for site in np.flatnonzero(gate_of_site == j):
            p = noise.p2 if prog.site_two_qubit[site] else noise.p1
            rows = _bernoulli_positions(rng, T, p)
            if rows.size:
                kinds = rng.integers(0, 3, size=rows.size)
                _apply_paulis(states, rows, np.full(rows.size, prog.site_qubit[site]), kinds, n)
    return states


def apply_circuit(circuit: AnsatzCircuit, theta, noise: NoiseModel | None = None,
                  rng: np.random.Generator | None = None) -> StateVector:
    """U(theta)|0...0>, or one noisy trajectory of it when gate noise is on."""
    thetas = _check_thetas(circuit, theta)
    if thetas.shape[0] != 1:
        raise ValueError("apply_circuit takes a single parameter vector")
    if noise is not None and noise.gate_noise:
        if rng is None:
            raise ValueError("a generator is required for noisy trajectories")
        amps = _direct_trajectories(circuit, thetas, noise, rng)[0]
    else:
        amps = simulate(circuit, thetas)[0]
    return StateVector(circuit.n_qubits, amps)


# --------------------------------------------------------------------------
# expectation values


def expectation_batch(states: np.ndarray, obs: PauliObservable) -> np.ndarray:
    states = np.atleast_2d(states)
    if states.shape[1] != 2**obs.n_qubits:
        raise ValueError("state and observable act on different qubit counts")
    total = np.zeros(states.shape[0])
    for coeff, word in obs.terms:
        perm, phase = _word_action(word)
        total += coeff * np.einsum("bk,bk->b", states.conj(), phase * states[:, perm]).real
    return total


def expectation(state: StateVector, obs: PauliObservable) -> float:
    """Exact <psi|A|psi>."""
    if state.n_qubits != obs.n_qubits:
        raise ValueError(
            f"state has {state.n_qubits} qubits but observable has {obs.n_qubits}"
        )
    return float(expectation_batch(state.amplitudes[None, :], obs)[0])


# --------------------------------------------------------------------------
# sampling


def _readout_masks(rng, size: int, n: int, p: float) -> np.ndarray:
    mask = np.zeros(size, dtype=int)
    if p <= 0:
        return mask
    for q in range(n):
        mask[_bernoulli_positions(rng, size, p)] |= 1 << (n - 1 - q)
    return mask


def _draw_indices(probs: np.ndarray, row_ids: np.ndarray, rng) -> np.ndarray:
    """One basis index per entry of ``row_ids`` from the rows of ``probs``."""
    B, dim = probs.shape
    cum = np.cumsum(probs, axis=1)
    cum /= cum[:, -1:]
    cum[:, -1] = 1.0
    flat = (cum + np.arange(B)[:, None]).ravel()
    u = row_ids + rng.random(row_ids.size)
    g = np.searchsorted(flat, u, side="right")
    return np.clip(g - row_ids * dim, 0, dim - 1)


def _sample_ideal(states, shots, groups, readout, rng, n):
    row_ids = np.repeat(np.arange(states.shape[0]), shots)
    acc = np.zeros(row_ids.size)
    for group in groups:
        rotated = states @ _basis_unitary(group.basis).T
        idx = _draw_indices(np.abs(rotated) ** 2, row_ids, rng)
        idx ^= _readout_masks(rng, idx.size, n, readout)
        acc += group.values[idx]
    return acc


def _row_pieces(shots: np.ndarray, per_shot: int, limit: int):
    """Split rows into (row, start, count) pieces; yield lists within ``limit`` trajectories."""
    batch, used = [], 0
    for row, s in enumerate(shots):
        start = 0
        while start < s:
            room = max((limit - used) // per_shot, 1)
            take = int(min(s - start, room))
            batch.append((row, start, take))
            used += take * per_shot
            start += take
            if used >= limit:
                yield batch
                batch, used = [], 0
    if batch:
        yield batch


def _snapshots(prog: _Program, thetas: np.ndarray) -> np.ndarray:
    """snaps[j, b, c, :] = (G_j ... G_1) e_c for row b, j = 0..n_gates."""
    B = thetas.shape[0]
    dim = 2**prog.n
    if B <= _SCAN_MAX_ROWS and prog.ops:
        snaps = np.empty((len(prog.ops) + 1, B, dim, dim), dtype=complex)
        snaps[0] = np.eye(dim)
        snaps[1:] = np.swapaxes(_prefix_unitaries(prog, thetas), 0, 1).swapaxes(-1, -2)
        return snaps
    states = np.tile(np.eye(dim, dtype=complex), (B, 1))
    reps = np.repeat(thetas, dim, axis=0)
    snaps = np.empty((len(prog.ops) + 1, B, dim, dim), dtype=complex)
    snaps[0] = states.reshape(B, dim, dim)
    for j, op in enumerate(prog.ops):
        states = _apply_op(states, prog.n, op, reps)
        snaps[j + 1] = states.reshape(B, dim, dim)
    return snaps


def _prefix_trajectory_states(prog, snaps, traj_row, noise, rng):
    """Final noisy states for trajectories whose ideal prefixes are in ``snaps``."""
    n = prog.n
    G = len(prog.ops)
    T = traj_row.size
    final = snaps[G, traj_row, 0, :].copy()

    # one Bernoulli field per probability class over the (site, trajectory) grid
    ev_traj, ev_site = [], []
    for two_qubit, p in ((False, noise.p1), (True, noise.p2)):
        sites = np.flatnonzero(prog.site_two_qubit == two_qubit)
        hit = _bernoulli_positions(rng, sites.size * T, p)
        ev_site.append(sites[hit // T])
        ev_traj.append(hit % T)
    ev_traj = np.concatenate(ev_traj)
    ev_site = np.concatenate(ev_site)
    if ev_traj.size == 0:
        return final
    ev_kind = rng.integers(0, 3, size=ev_traj.size)
    order = np.lexsort((ev_site, ev_traj))
    ev_traj, ev_site, ev_kind = ev_traj[order], ev_site[order], ev_kind[order]

    first = np.r_[True, ev_traj[1:] != ev_traj[:-1]]
    starts = np.flatnonzero(first)
    counts = np.diff(np.r_[starts, ev_traj.size])
    rank = np.arange(ev_traj.size) - np.repeat(starts, counts)
    last = np.r_[ev_traj[1:] != ev_traj[:-1], True]
    ev_pos = prog.site_pos[ev_site]
    next_pos = np.where(last, G, np.r_[ev_pos[1:], G])

    noisy = ev_traj[first]
    local = np.full(T, -1)
    local[noisy] = np.arange(noisy.size)
    rows = traj_row[noisy]
    v = snaps[ev_pos[first], rows, 0, :].copy()
    for r in range(int(rank.max()) + 1):
        sel = np.flatnonzero(rank == r)
        li = local[ev_traj[sel]]
        _apply_paulis(v, li, prog.site_qubit[ev_site[sel]], ev_kind[sel], n)
        move = ev_pos[sel] != next_pos[sel]
        sel, li = sel[move], li[move]
        if li.size == 0:
            continue
        b = rows[li]
        back = np.einsum("tco,to->tc", snaps[ev_pos[sel], b].conj(), v[li])
        v[li] = np.einsum("tco,tc->to", snaps[next_pos[sel], b], back)
    final[noisy] = v
    return final


def _sample_noisy(circuit, thetas, shots, groups, noise, rng):
    prog = _compile(circuit)
    n = prog.n
    dim = 2**n
    ng = len(groups)
    out = [np.zeros(int(s)) for s in shots]
    prefix = n <= PREFIX_PATH_MAX_QUBITS
    row_bytes = (len(prog.ops) + 1) * dim * dim * 16
    row_chunk = max(1, _SNAPSHOT_BYTES // row_bytes)
    unitaries = [_basis_unitary(g.basis) for g in groups]

    for r0 in range(0, thetas.shape[0], row_chunk):
        block = thetas[r0:r0 + row_chunk]
        snaps = _snapshots(prog, block) if prefix else None
        for pieces in _row_pieces(shots[r0:r0 + row_chunk], ng, _TRAJ_CHUNK):
            rows = np.array([p[0] for p in pieces])
            takes = np.array([p[2] for p in pieces])
            # layout: piece-major, then group, then shot
            traj_row = np.repeat(np.repeat(rows, ng), np.repeat(takes, ng))
            traj_group = np.concatenate([np.repeat(np.arange(ng), t) for t in takes])
            if prefix:
                final = _prefix_trajectory_states(prog, snaps, traj_row, noise, rng)
            else:
                final = _direct_trajectories(circuit, block[traj_row], noise, rng)
            values = np.empty(traj_row.size)
            for g, (group, U) in enumerate(zip(groups, unitaries)):
                sel = np.flatnonzero(traj_group == g)
                probs = np.abs(final[sel] @ U.T) ** 2
                idx = _draw_indices(probs, np.arange(sel.size), rng)
                idx ^= _readout_masks(rng, idx.size, n, noise.readout)
                values[sel] = group.values[idx]
            offset = 0
            for (row, start, take) in pieces:
                chunk = values[offset:offset + ng * take].reshape(ng, take).sum(axis=0)
                out[r0 + row][start:start + take] = chunk
                offset += ng * take
    return out


def sample_batch(circuit: AnsatzCircuit, thetas, obs: PauliObservable, shots,
                 noise: NoiseModel | None = None,
                 rng: np.random.Generator | None = None) -> tuple[list[np.ndarray], int]:
    """Composite single-shot outcomes for each parameter row.

    One composite shot executes the circuit once per measurement group and
    returns the sum of the groups' readout values. Returns the per-row
    outcome arrays and the total number of circuit executions.
    """
    thetas = _check_thetas(circuit, thetas)
    if obs.n_qubits != circuit.n_qubits:
        raise ValueError("observable and circuit act on different qubit counts")
    shots = np.broadcast_to(np.asarray(shots, dtype=int), (thetas.shape[0],))
    if np.any(shots < 1):
        raise ValueError("every row needs at least one shot")
    if rng is None:
        raise ValueError("sampling requires an explicit generator")
    groups = obs.groupings()
    executions = int(shots.sum()) * len(groups)
    if noise is not None and noise.gate_noise:
        return _sample_noisy(circuit, thetas, shots, groups, noise, rng), executions
    readout = noise.readout if noise is not None else 0.0
    acc = _sample_ideal(simulate(circuit, thetas), shots, groups, readout, rng, circuit.n_qubits)
    return np.split(acc, np.cumsum(shots)[:-1]), executions


def summarize(outcomes: np.ndarray, executions: int) -> SampleResult:
    var = float(np.var(outcomes, ddof=1)) if outcomes.size > 1 else 0.0
    return SampleResult(float(np.mean(outcomes)), var, int(outcomes.size), executions)


def sample_expectation(circuit: AnsatzCircuit, theta, obs: PauliObservable, shots: int,
                       noise: NoiseModel | None = None,
                       rng: np.random.Generator | None = None) -> SampleResult:
    """Shot estimate of <A> at ``theta`` with its unbiased single-shot variance."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    outcomes, executions = sample_batch(circuit, np.atleast_2d(theta), obs, [shots], noise, rng)
    return summarize(outcomes[0], executions)
