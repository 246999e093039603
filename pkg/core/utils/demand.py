from typing import List

import numpy as np
from django.conf import settings

from core.exceptions import ValidationError
from core.models import Instance, Network


SEED_MASK = (1 << 64) - 1


def instance_rng(seed: int, index: int) -> np.random.Generator:
    """Random stream of one instance.

    Philox is a counter-based generator with a fixed, documented output on every
    platform. Keying the stream on ``(seed, index)`` makes each instance
    reproducible on its own, whatever the batch size or the order of generation.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & SEED_MASK, index])))


def generate_instances(net: Network, count: int, seed: int, spread: float = None) -> List[Instance]:
    """Generate demand instances by uniform perturbation of the baseline.

    Each bus draws ``d_n ~ U[(1 - spread) d_base, (1 + spread) d_base]``; the
    draws consume the instance stream in bus order.

    Args:
        net (Network): The grid.
        count (int): Number of instances, at least 1.
        seed (int): 64-bit seed. Negative values are taken modulo 2**64.
        spread (float): Relative half-width in [0, 1]. Defaults to
            ``settings.OTS_DEMAND_SPREAD``.

    Returns:
        list: ``count`` instances with indices ``0 .. count - 1``.
    """
    if spread is None:
        spread = settings.OTS_DEMAND_SPREAD
    if count < 1:
        raise ValidationError(f'count must be positive, got {count}.')
    if not 0.0 <= spread <= 1.0:
        raise ValidationError(f'spread must lie in [0, 1], got {spread}.')

    base = np.array([bus.d_base for bus in net.buses], dtype=float)
    low = (1.0 - spread) * base
    high = (1.0 + spread) * base

    instances = []
    for index in range(count):
        demand = np.clip(instance_rng(seed, index).uniform(low, high), low, high)
        inst = Instance(network_name=net.name, demand=tuple(demand.tolist()), seed=seed, index=index)
        inst.validate_for(net)
        instances.append(inst)
    return instances
