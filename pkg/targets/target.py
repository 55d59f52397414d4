"""
Elicited Target Distributions

This module represents the elicited target predictive distributions T(Y | X_r)
over a set of covariate rows, exposing the log-CDF, log-density/mass, a sampler
and the support of each target.

The module includes:
- Support: the observable's support (real line, positive half line or (0, a]) plus atoms
- TargetSpec: a distribution, its support and a label
- CovariateRow / CovariateSet: the conditioning information for each target
- TargetSet: one (CovariateRow, TargetSpec) pair per covariate row
- target_from_config: build a TargetSpec from a config mapping
- require_supported: sampling check that every target stays on its support

Covariate-independent targets are a TargetSet with a single empty row.
Rows are indexed from 0.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple
import logging

import numpy as np

from distributions import families
from distributions.families import DistSpec, Distribution, MixtureSpec
from distributions.rng import RngLike, RngState

logger = logging.getLogger(__name__)


class SupportKind(str, Enum):
    REAL_LINE = "real_line"
    POSITIVE_HALF_LINE = "positive_half_line"
    BOUNDED_INTERVAL = "bounded_interval"


@dataclass(frozen=True)
class Support:
    """
    Support of the observable.

    Attributes:
        kind (SupportKind): Real line, (0, inf) or (0, upper].
        upper (Optional[float]): a for the bounded kind.
        atoms (tuple[float, ...]): Point-mass locations within the closure of the interval.
    """

    kind: SupportKind
    upper: Optional[float] = None
    atoms: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", SupportKind(self.kind))
        object.__setattr__(self, "atoms", tuple(float(a) for a in self.atoms))
        if self.kind is SupportKind.BOUNDED_INTERVAL:
            if self.upper is None or not self.upper > 0:
                raise ValueError(f"bounded support needs upper > 0, got {self.upper}")
            object.__setattr__(self, "upper", float(self.upper))
        elif self.upper is not None:
            raise ValueError(f"{self.kind.value} support takes no upper bound")
        for atom in self.atoms:
            if not self._in_closure(atom):
                raise ValueError(f"atom {atom} lies outside the {self.kind.value} support")

    @classmethod
    def real_line(cls) -> "Support":
        return cls(SupportKind.REAL_LINE)

    @classmethod
    def positive_half_line(cls) -> "Support":
        return cls(SupportKind.POSITIVE_HALF_LINE)

    @classmethod
    def bounded(cls, upper: float, atoms: Sequence[float] = ()) -> "Support":
        return cls(SupportKind.BOUNDED_INTERVAL, upper, tuple(atoms))

    def _in_closure(self, y: float) -> bool:
        if self.kind is SupportKind.REAL_LINE:
            return np.isfinite(y)
        if self.kind is SupportKind.POSITIVE_HALF_LINE:
            return 0 <= y < np.inf
        return 0 <= y <= self.upper

    def contains(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.kind is SupportKind.REAL_LINE:
            return np.isfinite(y)
        if self.kind is SupportKind.POSITIVE_HALF_LINE:
            return (y > 0) & np.isfinite(y)
        return (y > 0) & (y <= self.upper)


@dataclass(frozen=True)
class TargetSpec:
    """
    An elicited target: distribution, support and a human-readable label.

    The distribution must be LCDF-capable: a DistSpec/MixtureSpec, or a
    FunctionalDist (plain CDFs go through distributions.from_cdf first).
    """

    dist: Distribution
    support: Support
    label: str = ""

    def __post_init__(self):
        if isinstance(self.dist, DistSpec):
            object.__setattr__(self, "dist", MixtureSpec.single(self.dist))

    def log_cdf(self, y) -> np.ndarray:
        return families.log_cdf(self.dist, y)

    def log_density(self, y) -> np.ndarray:
        return families.log_density(self.dist, y)

    def log_continuous_density(self, y) -> np.ndarray:
        return families.log_continuous_density(self.dist, y)

    def log_mass(self, y) -> np.ndarray:
        return families.log_mass(self.dist, y)

    def sample(self, n: int, rng: RngLike) -> np.ndarray:
        return families.sample(self.dist, n, rng)

    def check_support(self, n: int, rng: RngLike) -> bool:
        """Sampling check that the distribution's mass sits on the support."""
        inside = self.support.contains(self.sample(n, rng))
        if not inside.all():
            logger.warning("target '%s': %d of %d draws fall outside its support", self.label, int((~inside).sum()), n)
        return bool(inside.all())


@dataclass(frozen=True)
class CovariateRow:
    """
    Conditioning information for one target.

    Attributes:
        values (np.ndarray): Real covariate vector (may be empty).
        conditioning (Mapping[str, float]): Named scalars such as the censoring time.
        key (int): Stable identity used to derive this row's random stream.
    """

    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    conditioning: Mapping[str, float] = field(default_factory=dict)
    key: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_1d(np.asarray(self.values, dtype=float)))
        object.__setattr__(self, "conditioning", dict(self.conditioning))

    def __getitem__(self, name: str) -> float:
        return self.conditioning[name]


@dataclass(frozen=True)
class CovariateSet:
    rows: Tuple[CovariateRow, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows:
            raise ValueError("a covariate set needs at least one row")
        dims = {row.values.size for row in rows}
        names = {tuple(sorted(row.conditioning)) for row in rows}
        if len(dims) != 1 or len(names) != 1:
            raise ValueError("all covariate rows must have the same dimension and conditioning names")

    @property
    def R(self) -> int:
        return len(self.rows)

    @classmethod
    def empty(cls) -> "CovariateSet":
        return cls((CovariateRow(),))


@dataclass(frozen=True)
class TargetSet:
    """One target per covariate row; T(Y | X) is the product over rows."""

    pairs: Tuple[Tuple[CovariateRow, TargetSpec], ...]

    def __post_init__(self):
        pairs = tuple(self.pairs)
        object.__setattr__(self, "pairs", pairs)
        CovariateSet(tuple(row for row, _ in pairs))

    @classmethod
    def single(cls, target: TargetSpec) -> "TargetSet":
        return cls(((CovariateRow(), target),))

    @classmethod
    def from_rows(cls, rows: Sequence[CovariateRow], targets: Sequence[TargetSpec]) -> "TargetSet":
        if len(rows) != len(targets):
            raise ValueError(f"got {len(rows)} covariate rows but {len(targets)} targets")
        return cls(tuple(zip(rows, targets)))

    @property
    def R(self) -> int:
        return len(self.pairs)

    @property
    def covariates(self) -> CovariateSet:
        return CovariateSet(tuple(row for row, _ in self.pairs))

    def row(self, r: int) -> CovariateRow:
        return self.pairs[self._check_index(r)][0]

    def target(self, r: int) -> TargetSpec:
        return self.pairs[self._check_index(r)][1]

    def _check_index(self, r: int) -> int:
        if not 0 <= r < self.R:
            raise IndexError(f"covariate row index {r} out of range for R={self.R}")
        return r


def target_log_cdf(ts: TargetSet, r: int, y) -> np.ndarray:
    return ts.target(r).log_cdf(y)


def target_sample(ts: TargetSet, r: int, n: int, rng: RngLike) -> np.ndarray:
    return ts.target(r).sample(n, rng)


class TargetSupportError(ValueError):
    """A target puts mass outside the support it declares."""


def require_supported(ts: TargetSet, n: int, rng: RngState) -> None:
    """
    Sampling check of every target in ts; row r draws from rng.spawn(r).

    Raises:
        TargetSupportError: Naming the first row whose draws leave the support.
    """
    for r, (_, target) in enumerate(ts.pairs):
        if not target.check_support(n, rng.spawn(r)):
            raise TargetSupportError(
                f"target '{target.label}' for covariate row {r} puts mass outside its "
                f"{target.support.kind.value} support"
            )


def target_from_config(mapping: Mapping[str, Any], label: str = "configured") -> TargetSpec:
    """
    Build a TargetSpec from a config mapping:

        support: {kind: bounded_interval, upper: 1.0}
        components: [{weight: 1.0, family: beta, params: [3, 3]}]
        atoms: [{weight: 0.05, location: 21.0}]

    Weights are rescaled to sum to one.
    """
    support_cfg: Dict[str, Any] = dict(mapping.get("support", {}))
    atoms = [(float(a["weight"]), float(a["location"])) for a in mapping.get("atoms", [])]
    support = Support(
        SupportKind(support_cfg.get("kind", SupportKind.REAL_LINE.value)),
        support_cfg.get("upper"),
        tuple(loc for _, loc in atoms),
    )
    components = [
        (float(c.get("weight", 1.0)), DistSpec(c["family"], tuple(c["params"]), c.get("upper")))
        for c in mapping.get("components", [])
    ]
    return TargetSpec(MixtureSpec.normalized(components, atoms), support, mapping.get("label", label))
