"""Central finite-difference gradient checking, shared by unit and acceptance tests."""

import numpy as np

from gdabench.lp import default_config, init_model
from gdabench.lp.train import accumulate_grads, pair_losses_and_grads


def fd_check_instance(kind, seed, dim=8, eps=1e-5):
    """Max relative error between analytic and central-difference gradients.

    Returns None when the sampled instance sits too close to the hinge kink
    (the margin loss is not differentiable there); callers re-sample.
    """
    rng = np.random.default_rng(seed)
    cfg = default_config(kind, dim=dim)
    model = init_model(6, 2, cfg, rng)
    pos = np.array([[0, 0, 1]])
    neg = np.array([[2, 0, 3]])
    losses, contribs = pair_losses_and_grads(model, cfg, pos, neg)
    if cfg.margin is not None and losses[0] < 1e-3:
        return None
    merged = accumulate_grads(contribs, 1.0)
    worst = 0.0
    for name, (rows, grads) in merged.items():
        params = model.all_params()[name]
        for k, row in enumerate(rows):
            for j in range(dim):
                orig = params[row, j]
                params[row, j] = orig + eps
                up = pair_losses_and_grads(model, cfg, pos, neg)[0][0]
                params[row, j] = orig - eps
                dn = pair_losses_and_grads(model, cfg, pos, neg)[0][0]
                params[row, j] = orig
                fd = (up - dn) / (2 * eps)
                err = abs(fd - grads[k, j]) / max(1.0, abs(fd), abs(grads[k, j]))
                worst = max(worst, err)
    return worst
