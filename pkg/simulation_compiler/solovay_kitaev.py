"""
Solovay-Kitaev decomposition of single-qubit unitaries into words over {H, T}.

Words are strings over the letters "H" and "T" written in time order: the
first letter is applied first, so the matrix of "HT" is T @ H.

Internally every SU(2) element is handled as a unit quaternion (a, b, c, d)
with U = a I - i (b X + c Y + d Z). Matrix products map to quaternion
products, and the phase-invariant spectral distance between two unitaries is
2 sin(arccos|<q_u, q_v>| / 2).
"""

import logging
import os
from dataclasses import dataclass
from functools import cache, lru_cache
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from core.errors import ToleranceUnreachable

logger = logging.getLogger(__name__)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
T_GATE = np.diag([1, np.exp(1j * np.pi / 4)])

BASE_NET_FORMAT_VERSION = 1
DEFAULT_MAX_LENGTH = 24
DEFAULT_MAX_SIZE = 200_000
DEFAULT_MAX_DEPTH = 5

_KEY_DECIMALS = 9


# ---------------------------------------------------------------------------
# SU(2) <-> quaternion
# ---------------------------------------------------------------------------
def to_su2(u: np.ndarray) -> np.ndarray:
    """Rescale a 2x2 unitary to determinant 1."""
    return np.sqrt(1 / np.linalg.det(u)) * u


def _canonical(q: np.ndarray) -> np.ndarray:
    # q and -q are the same rotation; pick the sign making the first
    # significant component positive. Works on (4,) and (N, 4).
    q = np.atleast_2d(q)
    significant = np.abs(q) > 1e-9
    first = np.argmax(significant, axis=1)
    signs = np.sign(q[np.arange(len(q)), first])
    signs[signs == 0] = 1.0
    return q * signs[:, None] + 0.0


def su2_to_quaternion(u: np.ndarray) -> np.ndarray:
    """(a, b, c, d) for one matrix (2, 2) or a stack (N, 2, 2); canonical sign."""
    u = np.asarray(u)
    stack = u.reshape(-1, 2, 2)
    u00, u01, u10, u11 = stack[:, 0, 0], stack[:, 0, 1], stack[:, 1, 0], stack[:, 1, 1]
    q = np.stack(
        [
            np.real(u00 + u11) / 2,
            -np.imag(u01 + u10) / 2,
            np.real(u10 - u01) / 2,
            np.imag(u11 - u00) / 2,
        ],
        axis=1,
    )
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    q = _canonical(q)
    return q[0] if u.ndim == 2 else q


def quaternion_to_su2(q: np.ndarray) -> np.ndarray:
    a, b, c, d = q
    return np.array([[a - 1j * d, -1j * b - c], [-1j * b + c, a + 1j * d]])


def projective_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over global phase of ||u - e^{i phi} v||_2, for single-qubit unitaries."""
    overlap = abs(float(np.dot(su2_to_quaternion(to_su2(u)), su2_to_quaternion(to_su2(v)))))
    return 2 * np.sin(np.arccos(min(overlap, 1.0)) / 2)


def rx(phi: float) -> np.ndarray:
    return quaternion_to_su2(np.array([np.cos(phi / 2), np.sin(phi / 2), 0.0, 0.0]))


def ry(phi: float) -> np.ndarray:
    return quaternion_to_su2(np.array([np.cos(phi / 2), 0.0, np.sin(phi / 2), 0.0]))


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


# ---------------------------------------------------------------------------
# Word algebra
# ---------------------------------------------------------------------------
_LETTER_ORDER = {"H": 2, "T": 8}
_LETTER_MATRIX = {"H": to_su2(HADAMARD), "T": to_su2(T_GATE)}


def simplify_word(word: str) -> str:
    """Cancel H H and T^8 runs."""
    stack: list[list] = []
    for letter in word:
        if letter not in _LETTER_ORDER:
            raise ValueError(f"word letters must be H or T, got {letter!r}")
        if stack and stack[-1][0] == letter:
            stack[-1][1] = (stack[-1][1] + 1) % _LETTER_ORDER[letter]
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([letter, 1])
    return "".join(letter * count for letter, count in stack)


def inverse_word(word: str) -> str:
    return simplify_word("".join("H" if letter == "H" else "T" * 7 for letter in reversed(word)))


def word_matrix(word: str) -> np.ndarray:
    """SU(2) matrix of a word (identity for the empty word)."""
    matrix = np.eye(2, dtype=complex)
    for letter in word:
        matrix = _LETTER_MATRIX[letter] @ matrix
    return matrix


# ---------------------------------------------------------------------------
# Base net
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class BaseNet:
    """
    Breadth-first enumeration of distinct {H, T} words, shortest word kept per
    group element, with a kd-tree over the quaternions for nearest lookups.
    """

    words: tuple[str, ...]
    quaternions: np.ndarray
    max_length: int
    max_size: int

    def __post_init__(self) -> None:
        # Index both signs so Euclidean nearest neighbour is projective nearest neighbour.
        tree = cKDTree(np.vstack([self.quaternions, -self.quaternions]))
        object.__setattr__(self, "_tree", tree)

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def build(cls, max_length: int = DEFAULT_MAX_LENGTH, max_size: int = DEFAULT_MAX_SIZE) -> "BaseNet":
        seen: set[bytes] = set()
        words: list[str] = []
        quats: list[np.ndarray] = []

        def admit(batch_words: list[str], batch_mats: np.ndarray) -> tuple[list[str], np.ndarray]:
            q = su2_to_quaternion(batch_mats)
            keys = np.round(q, _KEY_DECIMALS) + 0.0
            keep = []
            for i, key in enumerate(keys):
                raw = key.tobytes()
                if raw in seen or len(words) >= max_size:
                    continue
                seen.add(raw)
                words.append(batch_words[i])
                quats.append(q[i])
                keep.append(i)
            return [batch_words[i] for i in keep], batch_mats[keep]

        frontier_words, frontier = admit([""], np.eye(2, dtype=complex)[None])
        for length in range(1, max_length + 1):
            if not frontier_words or len(words) >= max_size:
                break
            candidate_words = []
            candidate_mats = []
            for letter, matrix in _LETTER_MATRIX.items():
                candidate_words.extend(w + letter for w in frontier_words)
                candidate_mats.append(np.einsum("ij,njk->nik", matrix, frontier))
            frontier_words, frontier = admit(candidate_words, np.concatenate(candidate_mats))
            logger.debug("base_net_level length=%s new=%s total=%s", length, len(frontier_words), len(words))

        logger.info("base_net_built size=%s max_length=%s", len(words), max_length)
        return cls(tuple(words), np.array(quats), max_length, max_size)

    def nearest(self, u: np.ndarray) -> tuple[str, float]:
        q = su2_to_quaternion(to_su2(u))
        _, index = self._tree.query(q)
        index %= len(self.words)
        overlap = min(abs(float(np.dot(q, self.quaternions[index]))), 1.0)
        return self.words[index], 2 * np.sin(np.arccos(overlap) / 2)

    def spacing(self, samples: int = 2000, seed: int = 0) -> float:
        """Largest nearest-neighbour distance seen over Haar-random SU(2) samples."""
        rng = np.random.default_rng(seed)
        points = rng.standard_normal((samples, 4))
        points /= np.linalg.norm(points, axis=1, keepdims=True)
        distances, _ = self._tree.query(points)
        # Chord length between unit quaternions equals the projective distance.
        return float(distances.max())

    def save(self, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(
            path,
            version=BASE_NET_FORMAT_VERSION,
            max_length=self.max_length,
            max_size=self.max_size,
            words=np.array(self.words),
            quaternions=self.quaternions,
        )
        logger.info("base_net_saved path=%s size=%s", path, len(self))

    @classmethod
    def load(cls, path: Path) -> "BaseNet":
        with np.load(Path(path), allow_pickle=False) as data:
            version = int(data["version"])
            if version != BASE_NET_FORMAT_VERSION:
                raise ValueError(f"base net cache version {version} != {BASE_NET_FORMAT_VERSION}")
            return cls(
                tuple(str(w) for w in data["words"]),
                data["quaternions"],
                int(data["max_length"]),
                int(data["max_size"]),
            )

    @classmethod
    def load_or_build(
        cls, path: Path | None, max_length: int = DEFAULT_MAX_LENGTH, max_size: int = DEFAULT_MAX_SIZE
    ) -> "BaseNet":
        if path is not None and Path(path).exists():
            try:
                net = cls.load(path)
            except (OSError, KeyError, ValueError) as exc:
                logger.warning("base_net_cache_unusable path=%s error=%s", path, exc)
            else:
                if (net.max_length, net.max_size) == (max_length, max_size):
                    return net
                logger.info("base_net_cache_stale path=%s cached_length=%s", path, net.max_length)
        net = cls.build(max_length, max_size)
        if path is not None:
            net.save(path)
        return net


def default_base_net(max_length: int = DEFAULT_MAX_LENGTH) -> BaseNet:
    return _cached_base_net(max_length)


@cache
def _cached_base_net(max_length: int) -> BaseNet:
    cache_path = os.getenv("BASE_NET_CACHE_PATH")
    return BaseNet.load_or_build(Path(cache_path) if cache_path else None, max_length)


# ---------------------------------------------------------------------------
# Recursion
# ---------------------------------------------------------------------------
def _rotation_between(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Quaternion of the rotation taking unit vector p onto unit vector q."""
    dot = float(np.dot(p, q))
    if dot < -1 + 1e-12:
        # Antiparallel: half turn about any axis orthogonal to p.
        helper = np.eye(3)[np.argmin(np.abs(p))]
        axis = np.cross(p, helper)
        return np.concatenate([[0.0], axis / np.linalg.norm(axis)])
    s = np.concatenate([[1 + dot], np.cross(p, q)])
    return s / np.linalg.norm(s)


def group_commutator(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Balanced V, W in SU(2) with V W V^dag W^dag = u (up to sign)."""
    q = su2_to_quaternion(to_su2(u))
    if q[0] < 0:
        q = -q
    vector = q[1:]
    norm = np.linalg.norm(vector)
    if norm < 1e-12:
        return np.eye(2, dtype=complex), np.eye(2, dtype=complex)

    theta = 2 * np.arccos(min(q[0], 1.0))
    phi = 2 * np.arcsin(np.sqrt(np.sin(theta / 4)))
    v, w = rx(phi), ry(phi)
    commutator = su2_to_quaternion(v @ w @ v.conj().T @ w.conj().T)
    if commutator[0] < 0:
        commutator = -commutator
    c_vector = commutator[1:] / np.linalg.norm(commutator[1:])
    s = quaternion_to_su2(_rotation_between(c_vector, vector / norm))
    return s @ v @ s.conj().T, s @ w @ s.conj().T


def _approximate(u: np.ndarray, depth: int, net: BaseNet) -> tuple[str, np.ndarray]:
    if depth == 0:
        word, _ = net.nearest(u)
        return word, word_matrix(word)
    prev_word, prev = _approximate(u, depth - 1, net)
    v, w = group_commutator(u @ prev.conj().T)
    v_word, v_mat = _approximate(v, depth - 1, net)
    w_word, w_mat = _approximate(w, depth - 1, net)
    word = simplify_word(prev_word + inverse_word(w_word) + inverse_word(v_word) + w_word + v_word)
    return word, v_mat @ w_mat @ v_mat.conj().T @ w_mat.conj().T @ prev


def sk_decompose(
    target: np.ndarray,
    delta: float,
    net: BaseNet | None = None,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> str:
    """
    Shortest-depth {H, T} word within delta of target (phase-invariant).

    Depth grows from 0 until the tolerance is met; ToleranceUnreachable carries
    the best distance found when max_depth is not enough.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    net = net or default_base_net()
    u = to_su2(np.asarray(target, dtype=complex))

    best = np.inf
    for depth in range(max_depth + 1):
        word, _ = _approximate(u, depth, net)
        distance = projective_distance(word_matrix(word), u)
        best = min(best, distance)
        if distance <= delta:
            logger.debug("sk_decompose depth=%s length=%s distance=%.3e", depth, len(word), distance)
            return word
    raise ToleranceUnreachable(delta, best, max_depth)


@lru_cache(maxsize=65536)
def rz_word(theta: float, delta: float, max_length: int = DEFAULT_MAX_LENGTH) -> str:
    return sk_decompose(rz_matrix(theta), delta, default_base_net(max_length))


def sk_tolerance(epsilon: float, m: int, chi: int, r: int) -> float:
    """Per-rotation budget so 2 m 5^(chi-1) r rotations add up to epsilon / 2."""
    if not (epsilon > 0 and m > 0 and chi > 0 and r > 0):
        raise ValueError("sk_tolerance needs positive epsilon, m, chi and r")
    return epsilon / (4 * m * 5 ** (chi - 1) * r)
