"""Systems with declared Jordan structure and their contractive hitting times.

Systems are never analyzed spectrally after the fact; they are *constructed*
from a declared list of (eigenvalue, block size) pairs, so every invariant
subspace is known by construction. A block of size b contributes a bidiagonal
Jordan factor (eigenvalue on the diagonal, ones on the superdiagonal), and the
whole matrix is A = S J S^-1 for a similarity S chosen by policy.

The first contractive hitting time

    k_hat = min { k : ||A^k|| < 1 }

is the sub-sampling gap at which the chain's k-step kernel becomes a
Wasserstein contraction. This module computes it exactly by scanning matrix
powers, and evaluates two closed-form sufficient bounds on it driven by the
block structure alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import (
    ConstructionError,
    ConvergenceError,
    InvalidInputError,
    NotContractiveError,
)
from .linalg import as_matrix, operator_norm, pseudo_inverse, singular_values
from .rng import generator

__all__ = [
    "SpectralSpec",
    "BlockSubspace",
    "InvariantDecomposition",
    "HittingTimeReport",
    "jordan_block",
    "build_system",
    "jordan_power_norm_bounds",
    "block_hitting_time_bound",
    "worst_block_hitting_time",
    "first_contractive_hitting_time",
]

_SIMILARITIES = ("identity", "random-orthogonal", "random-invertible")


@dataclass(frozen=True)
class SpectralSpec:
    """Declared eigenstructure: blocks of (eigenvalue, size), similarity policy, seed.

    Wire format (JSON)::

        {"blocks": [{"lambda": 0.9, "size": 2}],
         "similarity": "identity",
         "seed": 7}

    ``condition_cap`` only applies to the ``random-invertible`` policy and may
    be supplied in JSON under the same name.
    """

    blocks: tuple[tuple[float, int], ...]
    similarity: str = "identity"
    seed: int = 0
    condition_cap: float = 1e3

    def __post_init__(self):
        object.__setattr__(
            self, "blocks", tuple((float(l), int(b)) for l, b in self.blocks)
        )
        if not self.blocks:
            raise InvalidInputError("spec needs at least one block")
        for lam, size in self.blocks:
            if lam == 0.0:
                raise InvalidInputError("eigenvalues must be non-zero")
            if size < 1:
                raise InvalidInputError(f"block size must be >= 1, got {size}")
        if self.similarity not in _SIMILARITIES:
            raise InvalidInputError(
                f"similarity must be one of {_SIMILARITIES}, got {self.similarity!r}"
            )
        if self.condition_cap <= 1.0:
            raise InvalidInputError("condition_cap must exceed 1")

    @property
    def dimension(self) -> int:
        return sum(size for _, size in self.blocks)

    @classmethod
    def from_json(cls, text: str) -> "SpectralSpec":
        doc = json.loads(text)
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "SpectralSpec":
        try:
            blocks = tuple((b["lambda"], b["size"]) for b in doc["blocks"])
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed spectral spec document: {exc}") from exc
        kwargs = {}
        if "condition_cap" in doc:
            kwargs["condition_cap"] = float(doc["condition_cap"])
        return cls(
            blocks=blocks,
            similarity=doc.get("similarity", "identity"),
            seed=int(doc.get("seed", 0)),
            **kwargs,
        )

    def to_dict(self) -> dict:
        doc = {
            "blocks": [{"lambda": lam, "size": size} for lam, size in self.blocks],
            "similarity": self.similarity,
            "seed": self.seed,
        }
        if self.similarity == "random-invertible":
            doc["condition_cap"] = self.condition_cap
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class BlockSubspace:
    """One invariant subspace: its eigenvalue, basis columns, and projector."""

    eigenvalue: float
    size: int
    basis: np.ndarray      # n x size columns spanning the subspace
    projector: np.ndarray  # n x n projector onto the subspace


@dataclass(frozen=True)
class InvariantDecomposition:
    """A constructed system together with its invariant-subspace data.

    ``projectors_orthogonal`` is True for identity and orthogonal similarity
    policies, where the projector onto each block is the orthogonal projector
    M (M^T M)^+ M^T and distinct projectors annihilate each other. For a
    general invertible similarity the subspaces are not mutually orthogonal,
    and the spectral (oblique) projectors S 1_block S^-1 are used instead so
    that the projectors still sum to the identity.
    """

    spec: SpectralSpec
    a: np.ndarray
    blocks: tuple[BlockSubspace, ...]
    similarity_matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.a.shape[0]

    @property
    def projectors_orthogonal(self) -> bool:
        return self.spec.similarity in ("identity", "random-orthogonal")

    def subspace_residuals(self, tol=DEFAULT_TOLERANCES) -> dict:
        """Diagnostic residuals for the decomposition invariants.

        Returns max over blocks of the A-invariance residual
        ||(I - M M^+) A M||, the deviation ||sum_i E_i - I||, and (for
        orthogonal policies) the largest cross-projector product norm.
        """
        n = self.dimension
        inv_residual = 0.0
        for blk in self.blocks:
            m = blk.basis
            gram_pinv = pseudo_inverse(m.T @ m, tol)
            leave = (np.eye(n) - m @ gram_pinv @ m.T) @ (self.a @ m)
            inv_residual = max(inv_residual, operator_norm(leave))
        total = sum(blk.projector for blk in self.blocks)
        sum_residual = operator_norm(total - np.eye(n))
        cross = 0.0
        if self.projectors_orthogonal:
            for i, bi in enumerate(self.blocks):
                for bj in self.blocks[i + 1 :]:
                    cross = max(cross, operator_norm(bi.projector @ bj.projector))
        return {
            "invariance": inv_residual,
            "projector_sum": sum_residual,
            "projector_cross": cross,
        }


def jordan_block(lam: float, size: int) -> np.ndarray:
    """Bidiagonal Jordan factor: lam on the diagonal, ones above it."""
    j = np.eye(size) * lam
    for i in range(size - 1):
        j[i, i + 1] = 1.0
    return j


def _sample_similarity(spec: SpectralSpec) -> np.ndarray:
    n = spec.dimension
    if spec.similarity == "identity":
        return np.eye(n)
    rng = generator(spec.seed)
    if spec.similarity == "random-orthogonal":
        q, r = np.linalg.qr(rng.standard_normal((n, n)))
        return q * np.sign(np.diag(r))
    for _ in range(100):
        s = rng.standard_normal((n, n))
        spectrum = singular_values(s)
        if spectrum.condition_number <= spec.condition_cap:
            return s
    raise ConstructionError(
        f"no similarity with condition number <= {spec.condition_cap} in 100 samples"
    )


def build_system(spec: SpectralSpec) -> InvariantDecomposition:
    """Construct A = S J S^-1 and its per-block bases and projectors.

    Deterministic given ``spec.seed``. Basis columns for each block are the
    matching columns of S; projectors are orthogonal for identity/orthogonal
    similarity and spectral (oblique) otherwise.
    """
    n = spec.dimension
    j = np.zeros((n, n))
    offset = 0
    spans = []
    for lam, size in spec.blocks:
        j[offset : offset + size, offset : offset + size] = jordan_block(lam, size)
        spans.append((offset, size))
        offset += size

    s = _sample_similarity(spec)
    if spec.similarity == "identity":
        a = j.copy()
        s_inv = np.eye(n)
    elif spec.similarity == "random-orthogonal":
        a = s @ j @ s.T
        s_inv = s.T
    else:
        s_inv = np.linalg.solve(s, np.eye(n))
        a = s @ j @ s_inv

    blocks = []
    for (lam, size), (start, width) in zip(spec.blocks, spans):
        basis = s[:, start : start + width]
        if spec.similarity in ("identity", "random-orthogonal"):
            proj = basis @ pseudo_inverse(basis.T @ basis) @ basis.T
        else:
            proj = basis @ s_inv[start : start + width, :]
        blocks.append(
            BlockSubspace(eigenvalue=lam, size=width, basis=basis, projector=proj)
        )
    return InvariantDecomposition(
        spec=spec, a=a, blocks=tuple(blocks), similarity_matrix=s
    )


def jordan_power_norm_bounds(lam: float, block_size: int, k: int) -> tuple[float, float]:
    """Closed-form bracket for ||A^k|| restricted to one Jordan block.

        lower = |lam|^k * sum_{m=0}^{b-1} |lam|^-m
        upper = lower * k^b

    Evaluated in log space so the sum never overflows; results that exceed
    the float range saturate to inf. The upper bound is rigorous;
    the lower expression can exceed the true 2-norm for small k (it ignores
    cancellation between superdiagonals) and is reported for auditing only.
    """
    if k < 1 or block_size < 1:
        raise InvalidInputError("k and block_size must be >= 1")
    if lam == 0.0:
        raise InvalidInputError("eigenvalue must be non-zero")
    log_lower = _log_bracket_lower(lam, block_size, k)
    log_upper = log_lower + block_size * math.log(k)
    return _safe_exp(log_lower), _safe_exp(log_upper)


def _log_bracket_lower(lam: float, block_size: int, k: int) -> float:
    l = abs(lam)
    # logsumexp of (-m log l) for m = 0..b-1
    terms = [-m * math.log(l) for m in range(block_size)]
    peak = max(terms)
    log_sum = peak + math.log(sum(math.exp(t - peak) for t in terms))
    return k * math.log(l) + log_sum


def _safe_exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def block_hitting_time_bound(lam: float, block_size: int, k_cap: int = 10**8) -> int:
    """Smallest k whose size satisfies the self-referential contraction test

        k >= ln(b)/ln(1/|lam|) + b ln(k)/ln(1/|lam|) + (b - 1),

    a sufficient condition for ||A^k|| < 1 on a stable size-b Jordan block.
    Found by scanning k upward from 1. Only defined for 0 < |lam| < 1.
    """
    l = abs(lam)
    if not 0.0 < l < 1.0:
        raise InvalidInputError(f"bound requires 0 < |lam| < 1, got {lam}")
    if block_size < 1:
        raise InvalidInputError("block_size must be >= 1")
    rate = math.log(1.0 / l)
    offset = math.log(block_size) / rate + (block_size - 1)
    for k in range(1, k_cap + 1):
        if k >= offset + block_size * math.log(k) / rate:
            return k
    raise ConvergenceError(f"no satisfying k below {k_cap}")


def worst_block_hitting_time(blocks) -> int:
    """Sufficient sub-sampling gap from the worst block:

        ceil( max_i  4 b_i ln(b_i) / ln(1/|lam_i|) ),

    floored at 1. Size-1 blocks contribute 0 (ln 1 = 0). Requires every
    eigenvalue to satisfy |lam| < 1.
    """
    worst = 0.0
    for lam, size in blocks:
        l = abs(float(lam))
        if l >= 1.0:
            raise InvalidInputError(f"all eigenvalues must satisfy |lam| < 1, got {lam}")
        if l == 0.0:
            raise InvalidInputError("eigenvalues must be non-zero")
        if size > 1:
            worst = max(worst, 4.0 * size * math.log(size) / math.log(1.0 / l))
    return max(1, math.ceil(worst))


@dataclass(frozen=True)
class HittingTimeReport:
    """Exact first contractive hitting time plus the norm trace behind it.

    ``log_norms[i]`` is log ||A^(i+1)||; ``norms`` is the same trace in
    linear scale with entries above the float range saturated to inf.
    ``per_block_k`` and the bound fields are populated when the system's
    block structure is available (and, for the bounds, stable); a block
    whose projected powers never contracted within the scan budget reports
    None in its slot.
    """

    k_hat: int
    log_norms: tuple[float, ...]
    per_block_k: tuple[int | None, ...] | None = None
    block_bounds: tuple[int, ...] | None = None
    worst_case_bound: int | None = None
    contraction_norm: float = math.nan

    @property
    def norms(self) -> tuple[float, ...]:
        return tuple(_safe_exp(x) for x in self.log_norms)


def first_contractive_hitting_time(
    a,
    k_max: int | None = None,
    decomposition: InvariantDecomposition | None = None,
) -> HittingTimeReport:
    """Scan powers of A for the first k with ||A^k|| < 1.

    Powers are formed by sequential multiplication (every intermediate norm
    is needed) with running rescaling, so explosive transients are diagnosed
    in log space instead of overflowing. When a decomposition is supplied,
    the per-block hitting times min{k : ||A^k E_i|| < 1} are scanned as well,
    and the closed-form block bounds are attached if every block is stable.

    Raises NotContractiveError (carrying the log-norm trace) if no power
    within ``k_max`` (default 100 * n) is contractive.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError("matrix must be square")
    n = a.shape[0]
    budget = 100 * n if k_max is None else int(k_max)
    if budget < 1:
        raise InvalidInputError("k_max must be >= 1")

    projectors = [blk.projector for blk in decomposition.blocks] if decomposition else []
    block_k: list[int | None] = [None] * len(projectors)

    log_norms: list[float] = []
    k_hat = None
    contraction_norm = math.nan
    power = np.eye(n)
    log_scale = 0.0
    for k in range(1, budget + 1):
        power = power @ a
        peak = float(np.abs(power).max())
        if peak == 0.0:
            # nilpotent-like exact zero power
            if k_hat is None:
                k_hat, contraction_norm = k, 0.0
                log_norms.append(-math.inf)
            for i in range(len(block_k)):
                block_k[i] = block_k[i] or k
            break
        if not (1e-100 < peak < 1e100):
            power = power / peak
            log_scale += math.log(peak)
        log_norm = log_scale + math.log(operator_norm(power))
        if k_hat is None:
            log_norms.append(log_norm)
        if k_hat is None and log_norm < 0.0:
            k_hat = k
            contraction_norm = math.exp(log_norm)
        for i, proj in enumerate(projectors):
            if block_k[i] is None:
                block_log = log_scale + math.log(max(operator_norm(power @ proj), 5e-324))
                if block_log < 0.0:
                    block_k[i] = k
        if k_hat is not None and all(b is not None for b in block_k):
            break
    if k_hat is None:
        raise NotContractiveError(
            f"no contractive power within k_max={budget}", log_norms=log_norms
        )

    block_bounds = None
    worst_case = None
    per_block = None
    if decomposition is not None:
        per_block = tuple(block_k)
        if all(abs(lam) < 1.0 for lam, _ in decomposition.spec.blocks):
            block_bounds = tuple(
                block_hitting_time_bound(lam, size)
                for lam, size in decomposition.spec.blocks
            )
            worst_case = worst_block_hitting_time(decomposition.spec.blocks)
    return HittingTimeReport(
        k_hat=k_hat,
        log_norms=tuple(log_norms),
        per_block_k=per_block,
        block_bounds=block_bounds,
        worst_case_bound=worst_case,
        contraction_norm=contraction_norm,
    )
