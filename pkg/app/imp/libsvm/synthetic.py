from logging import getLogger

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from app.core import ContractViolationError

from .domain import Dataset, DatasetSplit

# =============================================================================
# CONSTANTS
# =============================================================================

_LOGGER = getLogger(__name__)


# =============================================================================
# GENERATOR
# =============================================================================


def make_synthetic_classification(
    n: int = 20_000,
    d: int = 123,
    density: float = 0.11,
    seed: int = 0,
    test_fraction: float = 0.0,
) -> tuple[Dataset, Dataset | None]:
    """Generate a seeded binary dataset shaped like the sparse LIBSVM sets.

    Features are 0/1 with the given density, as in one-hot encoded data.
    Labels are drawn from ``Bernoulli(φ(⟨a, w⟩))`` for a hidden Gaussian
    ``w`` scaled so that the margins have unit spread. The first
    ``⌈(1 − test_fraction)·n⌉`` rows form the training split.

    :raise ContractViolationError: If a size, the density or the test
        fraction is out of range.
    """
    if n < 1 or d < 1:
        raise ContractViolationError(message="n and d must be positive.")
    if not 0.0 < density <= 1.0:
        raise ContractViolationError(message="density must lie in (0, 1].")
    if not 0.0 <= test_fraction < 1.0:
        raise ContractViolationError(
            message="test_fraction must lie in [0, 1).",
        )
    rng = np.random.default_rng(seed)
    features = sp.random(
        n,
        d,
        density=density,
        format="csr",
        random_state=rng,
        data_rvs=np.ones,
    )
    weights = rng.standard_normal(d)
    margins = features @ weights
    spread = float(np.std(margins)) or 1.0
    labels = (rng.random(n) < expit(margins / spread)).astype(np.float64)

    n_train = n - int(np.floor(test_fraction * n))
    name = "synthetic-%d-%d-s%d" % (n, d, seed)
    train = Dataset(features[:n_train], labels[:n_train], name)
    test = None
    if n_train < n:
        test = Dataset(
            features[n_train:],
            labels[n_train:],
            name,
            DatasetSplit.TEST,
        )
    _LOGGER.debug("Generated %r.", train)
    return train, test
