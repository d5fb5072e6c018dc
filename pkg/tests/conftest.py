"""Shared fixtures: deterministic batteries of random attacks."""

import numpy as np
import pytest

from sqkd.channels import ForwardAttack, derive_vectors, random_symmetric_attack


@pytest.fixture(scope="session")
def attack_battery():
    """100 random symmetric attack pairs: 50 with ancilla dim 2, 50 with 4.

    Each pair carries a random forward bias.  Samples whose conclusive
    vectors nearly vanish are redrawn so the two-dimensional reduction of
    Eve's conditional state stays well conditioned.
    """
    rng = np.random.default_rng(0x5EC0)
    battery = []
    for eve_dim in (2, 4):
        kept = 0
        while kept < 50:
            fwd = ForwardAttack(float(rng.uniform(-0.4, 0.4)))
            attack = random_symmetric_attack(rng, eve_dim)
            v = derive_vectors(fwd, attack)
            if np.vdot(v.l1, v.l1).real < 1e-6 or np.vdot(v.l2, v.l2).real < 1e-6:
                continue
            battery.append((fwd, attack))
            kept += 1
    return battery
