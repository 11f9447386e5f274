"""Benchmark cost functions: fixed-input-state compiling and Heisenberg VQE."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gradients import lipschitz_bound
from .quantum import (
    DENSE_QUBIT_CAP,
    AnsatzCircuit,
    PauliObservable,
    SampleResult,
    build_ansatz,
    eigen_bounds,
    expectation_batch,
    ring_edges,
    sample_batch,
    simulate,
    summarize,
)

TRIANGLE = ((0, 1), (1, 2), (0, 2))


def random_angles(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.uniform(0.0, 2 * np.pi, size)


def _cost_range(obs: PauliObservable) -> tuple[float, float]:
    # exact spectrum when it is cheap, else the coefficient-sum enclosure
    if obs.n_qubits <= DENSE_QUBIT_CAP:
        return eigen_bounds(obs)
    norm = obs.coefficient_norm()
    return (-norm, norm)


class Problem:
    """Cost ``theta -> <A>`` on a parameterized circuit.

    Subclasses set ``name``, ``circuit`` (the circuit that is actually
    measured), ``observable`` (whose shot outcomes average to the cost) and
    ``lipschitz_observable`` (used for Lipschitz bounds).
    """

    name: str
    circuit: AnsatzCircuit
    observable: PauliObservable
    lipschitz_observable: PauliObservable
    cost_range: tuple[float, float]

    @property
    def n_params(self) -> int:
        return self.circuit.param_count

    def exact_batch(self, thetas) -> np.ndarray:
        return expectation_batch(simulate(self.circuit, thetas), self.observable)

    def exact(self, theta) -> float:
        return float(self.exact_batch(np.atleast_2d(theta))[0])

    def sample(self, thetas, shots, noise=None, rng=None):
        return sample_batch(self.circuit, thetas, self.observable, shots, noise, rng)

    def cost(self, theta, shots: int | None = None, noise=None, rng=None):
        """Exact cost, or a :class:`SampleResult` when ``shots`` is given."""
        if shots is None:
            return self.exact(theta)
        if shots < 1:
            raise ValueError("shots must be at least 1")
        outcomes, executions = self.sample(np.atleast_2d(theta), [shots], noise, rng)
        return summarize(outcomes[0], executions)

    def lipschitz(self, use_spectrum: bool | None = None) -> float:
        """Gradient Lipschitz constant.

        By default the spectral half-width is used whenever the register is
        small enough to diagonalize, and the coefficient sum otherwise.
        """
        if use_spectrum is None:
            use_spectrum = self.lipschitz_observable.n_qubits <= DENSE_QUBIT_CAP
        return lipschitz_bound(self.lipschitz_observable, use_spectrum)

    def initial_point(self, rng: np.random.Generator) -> np.ndarray:
        return random_angles(rng, self.n_params)


class ObservableProblem(Problem):
    """Cost ``<0| U(theta)^dag A U(theta) |0>`` for any circuit and observable."""

    def __init__(self, circuit: AnsatzCircuit, observable: PauliObservable, name: str = "custom"):
        if circuit.n_qubits != observable.n_qubits:
            raise ValueError("circuit and observable act on different registers")
        self.name = name
        self.circuit = circuit
        self.observable = observable
        self.lipschitz_observable = observable
        self.cost_range = _cost_range(observable)


@dataclass(eq=False)
class CompilingProblem(Problem):
    """C(theta) = 1 - |<0|U(target)^dag U(theta)|0>|^2.

    Shot outcomes are 0 when the register reads all zeros and 1 otherwise.
    """

    n: int = 3
    depth: int = 6
    target: np.ndarray | None = None
    name: str = field(default="compile", init=False)

    def __post_init__(self):
        self.ansatz = build_ansatz(self.n, self.depth)
        if self.target is None:
            raise ValueError("a target angle vector is required")
        self.target = np.asarray(self.target, dtype=float)
        self.circuit = self.ansatz.followed_by(self.ansatz.bound_inverse(self.target))
        self.projector = PauliObservable.zero_projector(self.n)
        self.observable = PauliObservable.identity(self.n) - self.projector
        self.lipschitz_observable = self.projector
        self.cost_range = (0.0, 1.0)

    @classmethod
    def random(cls, rng: np.random.Generator, n: int = 3, depth: int = 6):
        count = 2 * n * (depth + 1)
        return cls(n=n, depth=depth, target=random_angles(rng, count))

    def exact_batch(self, thetas) -> np.ndarray:
        states = simulate(self.circuit, thetas)
        return 1.0 - np.abs(states[:, 0]) ** 2

    def compiling_cost(self, theta, shots: int | None = None, noise=None, rng=None
                       ) -> SampleResult | float:
        return self.cost(theta, shots, noise, rng)


def heisenberg_hamiltonian(n: int, edges=None, J: float = 1.0, B: float = 3.0) -> PauliObservable:
    """J sum_<ij> (XX + YY + ZZ) + B sum_i Z_i."""
    if edges is None:
        edges = TRIANGLE if n == 3 else ring_edges(n)
    terms = []
    for i, j in edges:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValueError(f"invalid edge ({i}, {j}) for {n} qubits")
        for p in "XYZ":
            word = ["I"] * n
            word[i] = word[j] = p
            terms.append((J, "".join(word)))
    for i in range(n):
        word = ["I"] * n
        word[i] = "Z"
        terms.append((B, "".join(word)))
    return PauliObservable.from_terms(terms, n)


def exact_ground_energy(obs: PauliObservable) -> float:
    return eigen_bounds(obs)[0]


@dataclass(eq=False)
class VqeProblem(Problem):
    n: int = 3
    depth: int = 6
    edges: tuple[tuple[int, int], ...] | None = None
    J: float = 1.0
    B: float = 3.0
    name: str = field(default="vqe", init=False)

    def __post_init__(self):
        if self.edges is None:
            self.edges = TRIANGLE if self.n == 3 else tuple(ring_edges(self.n))
        self.circuit = build_ansatz(self.n, self.depth)
        self.observable = heisenberg_hamiltonian(self.n, self.edges, self.J, self.B)
        self.lipschitz_observable = self.observable
        self.cost_range = _cost_range(self.observable)

    @property
    def ground_energy(self) -> float:
        return exact_ground_energy(self.observable)

    def vqe_energy(self, theta, shots: int | None = None, noise=None, rng=None
                   ) -> SampleResult | float:
        return self.cost(theta, shots, noise, rng)


def make_problem(task: str, rng: np.random.Generator, n: int = 3, depth: int = 6, **kwargs) -> Problem:
    if task == "compile":
        return CompilingProblem.random(rng, n, depth)
    if task == "vqe":
        return VqeProblem(n=n, depth=depth, **kwargs)
    raise ValueError(f"unknown task {task!r}")
