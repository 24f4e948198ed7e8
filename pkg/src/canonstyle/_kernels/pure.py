"""Pure-torch reference implementations of the hot kernels.

These are the fallback path when the compiled extension is unavailable and
the ground truth the Cython kernels are tested against. Autograd handles
the backward pass.
"""

import torch
import torch.nn.functional as F


def compose(sigma, color, delta, background):
    """Alpha-composite samples along rays.

    sigma: (N, S) non-negative densities, color: (N, S, 3), delta: (N, S)
    segment lengths, background: (3,). Returns (pixel (N, 3), trans (N,)).
    """
    alpha = 1.0 - torch.exp(-sigma * delta)
    keep = 1.0 - alpha
    acc = torch.cumprod(keep, dim=1)
    tpre = torch.cat([torch.ones_like(acc[:, :1]), acc[:, :-1]], dim=1)
    weights = alpha * tpre
    pixel = (weights.unsqueeze(-1) * color).sum(dim=1)
    trans = acc[:, -1]
    pixel = pixel + trans.unsqueeze(-1) * background
    return pixel, trans


def film_siren(x, v, w0, b0, wh, bh, wd, bd, wc, bc, gamma, beta):
    """FiLM-modulated SIREN field: returns (sigma (P,), rgb (P, 3)).

    x: (P, 3) points, v: (P, 3) view directions, wh/bh: stacked hidden
    layers (NL-1, H, H)/(NL-1, H), gamma/beta: (NL, H) per-layer FiLM.
    """
    h = torch.sin(gamma[0] * F.linear(x, w0, b0) + beta[0])
    for l in range(wh.shape[0]):
        h = torch.sin(gamma[l + 1] * F.linear(h, wh[l], bh[l]) + beta[l + 1])
    sigma = F.softplus(F.linear(h, wd, bd)).squeeze(-1)
    rgb = torch.sigmoid(F.linear(torch.cat([h, v], dim=-1), wc, bc))
    return sigma, rgb
