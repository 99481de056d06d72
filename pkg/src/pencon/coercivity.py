"""Coercivity: linear maps, sums of semidirect sums, composites, and a numeric probe.

A linear map is normcoercive iff it is injective. For ``F >= F1 [+] F2`` on
``X1 (+) X2`` and ``G >= G1 [+] G2`` on ``Y1 (+) Y2`` with ``F1, G1`` coercive
and locally bounded below and ``F2, G2`` bounded below, ``F + G`` is coercive
on every complement of ``X2 & Y2``; it is coercive on ``X1 + Y1`` when both
splittings are orthogonal. The probe is a sampling heuristic and never
counts as a proof.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import AmbientMismatch, CapabilityMissing, DimensionMismatch, NotDirect
from .functions import ConvexFn, SemidirectSum
from .subspaces import (
    RANK_TOL,
    Subspace,
    as_matrix,
    intersect,
    is_orthogonal,
    nullspace,
    orthogonal_complement,
    split,
    sum_subspaces,
)

DOMINATION_SAMPLES = 1000


@dataclass(frozen=True)
class DecomposedFn:
    """``whole >= part1 [+] part2`` with ``part1`` on ``S1`` and ``part2`` on ``S2``.

    ``part1`` and ``part2`` act on coordinates in the bases of ``S1`` and
    ``S2``. ``whole`` defaults to the semidirect sum itself; a separately
    given ``whole`` is taken to dominate the sum (``dominates``), which is
    spot-checked but cannot be proved from oracles.
    """

    part1: ConvexFn
    S1: Subspace
    part2: ConvexFn
    S2: Subspace
    whole: Optional[ConvexFn] = None
    dominates: bool = True

    def __post_init__(self):
        if self.S1.ambient_dim != self.S2.ambient_dim:
            raise AmbientMismatch("S1 and S2 live in different spaces")
        if self.part1.dim != self.S1.dim or self.part2.dim != self.S2.dim:
            raise DimensionMismatch("part dimension differs from its subspace")
        res = sum_subspaces(self.S1, self.S2)
        if not res.is_direct or res.subspace.dim != self.S1.ambient_dim:
            raise NotDirect("S1 (+) S2 must be direct and span the space")
        if self.whole is None:
            object.__setattr__(self, "whole", SemidirectSum(self.part1, self.S1, self.part2, self.S2))
        elif self.whole.dim != self.S1.ambient_dim:
            raise DimensionMismatch("whole lives in a different space")

    @property
    def ambient_dim(self) -> int:
        return self.S1.ambient_dim

    @property
    def orthogonal(self) -> bool:
        return is_orthogonal(self.S1, self.S2)

    def missing_caps(self) -> list:
        out = []
        if not self.part1.caps.coercive:
            out.append("part1 coercive")
        if not self.part1.caps.locally_bounded_below:
            out.append("part1 locally bounded below")
        if not self.part2.caps.bounded_below:
            out.append("part2 bounded below")
        if not self.dominates:
            out.append("whole dominates part1 [+] part2")
        return out

    def domination_spot_check(self, n: int = DOMINATION_SAMPLES, seed: int = 0, box: float = 10.0) -> bool:
        """``whole(x) >= part1(x1) + part2(x2)`` on ``n`` random points."""
        if isinstance(self.whole, SemidirectSum) and self.whole.F1 is self.part1:
            return True
        rng = np.random.default_rng(seed)
        for x in rng.uniform(-box, box, size=(n, self.ambient_dim)):
            c1, c2 = split(self.S1, self.S2, x)
            lower = self.part1(c1) + self.part2(c2)
            w = self.whole(x)
            if w < lower - 1e-9 * max(1.0, abs(lower)):
                return False
        return True

    def __call__(self, x) -> float:
        return self.whole(x)


@dataclass(frozen=True)
class ProbeResult:
    radii: tuple
    shell_minima: tuple
    verdict: str
    witness: Optional[np.ndarray] = None
    witness_radius: float = math.nan

    @property
    def supported(self) -> bool:
        return self.verdict == "supported"


@dataclass(frozen=True)
class CoercivityVerdict:
    """Outcome of :func:`sum_coercivity`.

    ``status`` is ``certified_on`` (``subspace`` holds the certified space),
    ``refused`` (``reason`` is ``capability`` or ``orthogonality``) or
    ``witness_found`` (refused, and the optional probe found a shell sequence
    whose minima do not grow). ``valid_complement`` is
    ``(S2_F & S2_G)^perp``, one member of the family of complements of
    ``S2_F & S2_G`` on which coercivity holds; it is reported when the
    capability hypotheses hold, including when orthogonality fails, and is
    ``None`` after a capability refusal.
    """

    status: str
    reason: str = ""
    orth1: bool = False
    orth2: bool = False
    subspace: Optional[Subspace] = None
    valid_complement: Optional[Subspace] = None
    missing: tuple = ()
    probe: Optional[ProbeResult] = None
    detail: str = ""

    @property
    def certified(self) -> bool:
        return self.status == "certified_on"


def is_normcoercive(A, rank_tol: float = RANK_TOL) -> bool:
    """A linear map is normcoercive iff its nullspace is ``{0}``."""
    return nullspace(A, rank_tol).is_trivial


def min_singular_value(A) -> float:
    """``sigma_min`` with ``|Ax| >= sigma_min |x|``; 0 for non-injective maps."""
    A = as_matrix(A)
    if A.shape[0] < A.shape[1]:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False)[-1])


def sum_coercivity(F: DecomposedFn, G: DecomposedFn, probe: Optional[dict] = None,
                   domination_samples: int = DOMINATION_SAMPLES) -> CoercivityVerdict:
    """Decide coercivity of ``F + G`` from the decompositions.

    Parameters
    ----------
    probe : dict, optional
        ``{"radii": [...], "samples_per_shell": k, "seed": s}``; when the
        verdict is a refusal the probe runs on ``F + G`` over the whole space
        and a witness upgrades the status to ``witness_found``.

    Raises
    ------
    AmbientMismatch
        When ``F`` and ``G`` live in different spaces.
    """
    if F.ambient_dim != G.ambient_dim:
        raise AmbientMismatch(f"F on R^{F.ambient_dim}, G on R^{G.ambient_dim}")
    orth1, orth2 = F.orthogonal, G.orthogonal
    Z = orthogonal_complement(intersect(F.S2, G.S2))
    missing = [f"F: {m}" for m in F.missing_caps()] + [f"G: {m}" for m in G.missing_caps()]
    for tag, D in (("F", F), ("G", G)):
        if D.dominates and not D.domination_spot_check(domination_samples):
            missing.append(f"{tag}: domination spot check failed")
    if missing:
        verdict = CoercivityVerdict("refused", "capability", orth1, orth2, None, None, tuple(missing),
                                    detail="hypotheses of the sum theorem not declared: " + "; ".join(missing))
    elif not (orth1 and orth2):
        verdict = CoercivityVerdict(
            "refused", "orthogonality", orth1, orth2, None, Z,
            detail="non-orthogonal splitting: coercive on any complement of S2_F & S2_G, "
                   "but not certified on S1_F + S1_G",
        )
    else:
        return CoercivityVerdict("certified_on", "", orth1, orth2, Z, Z)
    if probe:
        total = ConvexFn(F.ambient_dim, lambda x: F(x) + G(x), name="F+G")
        res = coercivity_probe(total, probe["radii"], probe.get("samples_per_shell", 200),
                               seed=probe.get("seed", 0))
        status = "witness_found" if not res.supported else verdict.status
        verdict = CoercivityVerdict(status, verdict.reason, orth1, orth2, None, verdict.valid_complement,
                                    verdict.missing, res,
                                    verdict.detail)
    return verdict


def composite_coercive(H, K, phi: ConvexFn, psi: ConvexFn) -> bool:
    """Whether ``x -> phi(Hx) + psi(Kx)`` is certified lsc and coercive.

    True iff ``N(H) & N(K) = {0}``, given ``phi`` and ``psi`` proper, lsc and
    coercive.

    Raises
    ------
    CapabilityMissing
        When ``phi`` or ``psi`` does not declare proper, lsc and coercive.
    """
    H, K = as_matrix(H), as_matrix(K)
    if H.shape[1] != K.shape[1]:
        raise DimensionMismatch("H and K have different domains")
    if phi.dim != H.shape[0] or psi.dim != K.shape[0]:
        raise DimensionMismatch("phi/psi dimension does not match H/K")
    for name, f in (("phi", phi), ("psi", psi)):
        miss = [c for c in ("proper", "lsc", "coercive") if not getattr(f.caps, c)]
        if miss:
            raise CapabilityMissing(f"{name} does not declare {', '.join(miss)}")
    return intersect(nullspace(H), nullspace(K)).is_trivial


def _shell_points(k: int, r: float, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Points of norm ``r`` in ``R^k``: axes, random directions and points hugging coordinate hyperplanes."""
    pts = [np.eye(k) * r, -np.eye(k) * r]
    D = rng.standard_normal((samples, k))
    pts.append(r * D / np.linalg.norm(D, axis=1, keepdims=True))
    for i in range(k if k >= 2 else 0):
        for small in (1.0 / r, 1.0 / r ** 2):
            if small >= r:
                continue
            big = math.sqrt(r * r - small * small)
            for j in range(k):
                if j == i:
                    continue
                for si in (1.0, -1.0):
                    for sj in (1.0, -1.0):
                        e = np.zeros(k)
                        e[i], e[j] = si * small, sj * big
                        pts.append(e[None, :])
    return np.vstack(pts)


def coercivity_probe(f: ConvexFn, radii, samples_per_shell: int = 200, subspace: Optional[Subspace] = None,
                     seed: int = 0, growth_tol: float = 1e-9) -> ProbeResult:
    """Sample ``f`` on spheres and watch the shell minima.

    The verdict is ``supported`` when the minima increase from the second
    shell on by more than ``growth_tol * max(1, |previous minimum|)``, else ``witness`` with the direction of the offending
    shell minimizer. With ``subspace`` the spheres lie in that subspace.
    """
    radii = [float(r) for r in radii]
    if len(radii) < 3:
        raise ValueError("need at least three shells")
    if any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise ValueError("radii must be positive and strictly increasing")
    S = Subspace.full(f.dim) if subspace is None else subspace
    if S.ambient_dim != f.dim:
        raise AmbientMismatch("subspace and function live in different spaces")
    if S.is_trivial:
        raise ValueError("cannot probe on the trivial subspace")
    rng = np.random.default_rng(seed)
    minima, argmins = [], []
    for r in radii:
        X = _shell_points(S.dim, r, samples_per_shell, rng) @ S.basis.T
        vals = np.array([f(x) for x in X])
        i = int(np.argmin(vals))
        minima.append(float(vals[i]))
        argmins.append(X[i])
    for k in range(1, len(radii) - 1):
        if not minima[k + 1] > minima[k] + growth_tol * max(1.0, abs(minima[k])):
            d = argmins[k + 1] / np.linalg.norm(argmins[k + 1])
            return ProbeResult(tuple(radii), tuple(minima), "witness", d, radii[k + 1])
    return ProbeResult(tuple(radii), tuple(minima), "supported")
