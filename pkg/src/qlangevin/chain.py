"""Exact repeated interactions on the truncated chain H_S (x) (C^{N+1})^{(x) n}.

Chain sites are numbered 1..n left to right in interaction order; site k is
the k-th copy the system meets.
"""

from dataclasses import dataclass

import numpy as np

from qlangevin import numkit
from qlangevin.config import get_settings
from qlangevin.dynamics import validate_density_matrix
from qlangevin.errors import DimensionError, ResourceGuardError, ValidationError
from qlangevin.logs import get_logger
from qlangevin.model import ModelSpec, interaction_unitary

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class ChainOperator:
    k: int
    d: int
    site_dim: int
    op: np.ndarray

    def __post_init__(self):
        expected = self.d * self.site_dim**self.k
        if self.op.shape != (expected, expected):
            raise DimensionError(f"chain operator has shape {self.op.shape}, expected {expected}")

    @property
    def dim(self) -> int:
        return self.op.shape[0]


def check_chain_size(d: int, site_dim: int, n_sites: int, limit: int | None = None) -> None:
    limit = get_settings().max_chain_dim if limit is None else limit
    total = d * site_dim**n_sites
    if total > limit:
        raise ResourceGuardError(
            f"chain dimension {total} (d={d}, {n_sites} sites of dim {site_dim}) exceeds {limit}"
        )


def ampliate(a: np.ndarray, site: int, k: int, d: int, site_dim: int) -> ChainOperator:
    """
    Places an operator on one chain site, identity elsewhere.

    :param a: Operator on a single site (size site_dim) or on system (x) site
              (size d * site_dim).
    :param site: Target site, 1..k.
    :param k: Number of chain sites.
    :param d: System dimension.
    :param site_dim: Dimension of one site, N + 1.
    :return: The ampliated ChainOperator.
    """
    if not 1 <= site <= k:
        raise ValidationError(f"site {site} out of range 1..{k}")
    a = numkit.require_square(a)
    before = np.eye(site_dim ** (site - 1))
    after = np.eye(site_dim ** (k - site))

    if a.shape[0] == site_dim:
        op = numkit.kron(np.eye(d), before, a, after)
    elif a.shape[0] == d * site_dim:
        a4 = a.reshape(d, site_dim, d, site_dim)
        op = np.zeros((d * site_dim**k,) * 2, dtype=np.complex128)
        for p in range(site_dim):
            for q in range(site_dim):
                block = a4[:, p, :, q]
                if not np.any(block):
                    continue
                unit = np.zeros((site_dim, site_dim))
                unit[p, q] = 1.0
                op += numkit.kron(block, before, unit, after)
    else:
        raise DimensionError(
            f"operator of size {a.shape[0]} acts on neither a site ({site_dim}) "
            f"nor system and site ({d * site_dim})"
        )
    return ChainOperator(k=k, d=d, site_dim=site_dim, op=op)


def repeated_product(
    model: ModelSpec, tau: float, k: int, n_sites: int | None = None
) -> ChainOperator:
    """
    V_k = U_k ... U_1, the first k interactions on a chain of n_sites >= k sites.

    :raises ResourceGuardError: If the chain exceeds the configured dimension.
    """
    n_sites = k if n_sites is None else n_sites
    if k < 0 or n_sites < k:
        raise ValidationError(f"need 0 <= k <= n_sites, got k={k}, n_sites={n_sites}")
    site_dim = model.N + 1
    check_chain_size(model.d, site_dim, n_sites)

    total = np.eye(model.d * site_dim**n_sites, dtype=np.complex128)
    u = interaction_unitary(model, tau)
    for site in range(1, k + 1):
        total = ampliate(u, site, n_sites, model.d, site_dim).op @ total
    return ChainOperator(k=n_sites, d=model.d, site_dim=site_dim, op=total)


def reduced_state_after(
    model: ModelSpec,
    tau: float,
    rho0: np.ndarray,
    k: int,
    site_states: list | None = None,
) -> np.ndarray:
    """
    System state after k interactions, every chain site traced out.

    :param rho0: Initial system density matrix.
    :param k: Number of interactions.
    :param site_states: Initial state of every chain site, at least k of them;
                        defaults to k copies of the bath state.
    :return: The reduced density matrix.
    """
    rho0 = validate_density_matrix(rho0)
    if site_states is None:
        site_states = [model.bath.density()] * k
    n_sites = len(site_states)
    if k == 0:
        return rho0

    chain = repeated_product(model, tau, k, n_sites=n_sites)
    initial = numkit.kron(rho0, *site_states)
    final = chain.op @ initial @ numkit.dagger(chain.op)
    reduced = numkit.partial_trace_right(final, model.d, chain.site_dim**n_sites)
    logger.debug(f"Chain oracle: {k} interactions on {n_sites} sites, dimension {chain.dim}")
    return validate_density_matrix(reduced)
