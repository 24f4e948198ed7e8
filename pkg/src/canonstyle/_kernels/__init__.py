"""Hot-kernel dispatch: compiled Cython extensions with a pure-torch fallback.

The compiled path wraps hand-derived backward passes in autograd Functions;
set CANONSTYLE_PURE_KERNELS=1 to force the fallback. ``backend()`` reports
which path is active.
"""

import os

import numpy as np
import torch

from . import pure

try:
    from . import _compose as _compose_ext
    from . import _field as _field_ext

    _HAVE_EXT = True
except ImportError:  # extension not built; fall back silently
    _compose_ext = None
    _field_ext = None
    _HAVE_EXT = False

_FORCE_PURE = os.environ.get("CANONSTYLE_PURE_KERNELS", "") not in ("", "0")


def backend():
    return "pure" if (_FORCE_PURE or not _HAVE_EXT) else "compiled"


def _np(t):
    return t.detach().numpy()


class _ComposeFn(torch.autograd.Function):
    @staticmethod
    def forward(ctx, sigma, color, delta, background):
        n, s = sigma.shape
        dt = sigma.dtype
        pixel = torch.empty((n, 3), dtype=dt)
        trans = torch.empty((n,), dtype=dt)
        alpha = np.empty((n, s), dtype=_np(sigma).dtype)
        tpre = np.empty((n, s), dtype=alpha.dtype)
        _compose_ext.compose_forward(_np(sigma), _np(color), _np(delta),
                                     _np(background), _np(pixel), _np(trans),
                                     alpha, tpre)
        ctx.save_for_backward(sigma, color, delta, background, trans)
        ctx.alpha = alpha
        ctx.tpre = tpre
        return pixel, trans

    @staticmethod
    def backward(ctx, grad_pixel, grad_trans):
        sigma, color, delta, background, trans = ctx.saved_tensors
        dsigma = torch.empty_like(sigma)
        dcolor = torch.empty_like(color)
        ddelta = torch.empty_like(delta)
        dbackground = torch.empty_like(background)
        _compose_ext.compose_backward(
            _np(sigma), _np(color), _np(delta), _np(background), _np(trans),
            ctx.alpha, ctx.tpre,
            _np(grad_pixel.contiguous()), _np(grad_trans.contiguous()),
            _np(dsigma), _np(dcolor), _np(ddelta), _np(dbackground))
        out = [None] * 4
        if ctx.needs_input_grad[0]:
            out[0] = dsigma
        if ctx.needs_input_grad[1]:
            out[1] = dcolor
        if ctx.needs_input_grad[2]:
            out[2] = ddelta
        if ctx.needs_input_grad[3]:
            out[3] = dbackground
        return tuple(out)


def compose(sigma, color, delta, background):
    """Volume-rendering compositing; see pure.compose for semantics."""
    if backend() == "pure":
        return pure.compose(sigma, color, delta, background)
    return _ComposeFn.apply(sigma.contiguous(), color.contiguous(),
                            delta.contiguous(), background.contiguous())


class _FieldFn(torch.autograd.Function):
    @staticmethod
    def forward(ctx, x, v, w0, b0, wh, bh, wd, bd, wc, bc, gamma, beta):
        p = x.shape[0]
        hdim = w0.shape[0]
        nl = gamma.shape[0]
        dt = x.dtype
        npdt = _np(x).dtype
        pre = np.empty((nl, p, hdim), dtype=npdt)
        hid = np.empty((nl, p, hdim), dtype=npdt)
        ad = np.empty((p,), dtype=npdt)
        ac = np.empty((p, 3), dtype=npdt)
        sigma = torch.empty((p,), dtype=dt)
        rgb = torch.empty((p, 3), dtype=dt)
        _field_ext.field_forward(_np(x), _np(v), _np(w0), _np(b0), _np(wh),
                                 _np(bh), _np(wd), _np(bd), _np(wc), _np(bc),
                                 _np(gamma), _np(beta), pre, hid, ad, ac,
                                 _np(sigma), _np(rgb))
        ctx.save_for_backward(x, v, w0, wh, wd, wc, gamma, beta)
        ctx.stash = (pre, hid, ad, ac)
        return sigma, rgb

    @staticmethod
    def backward(ctx, gsigma, grgb):
        x, v, w0, wh, wd, wc, gamma, beta = ctx.saved_tensors
        pre, hid, ad, ac = ctx.stash
        p, hdim = x.shape[0], w0.shape[0]
        dw0 = torch.zeros_like(w0)
        db0 = torch.zeros(hdim, dtype=x.dtype)
        dwh = torch.zeros_like(wh)
        dbh = torch.zeros(wh.shape[0], hdim, dtype=x.dtype)
        dwd = torch.zeros_like(wd)
        dbd = torch.zeros(1, dtype=x.dtype)
        dwc = torch.zeros_like(wc)
        dbc = torch.zeros(3, dtype=x.dtype)
        dgamma = torch.zeros_like(gamma)
        dbeta = torch.zeros_like(beta)
        npdt = _np(x).dtype
        dh = np.empty((p, hdim), dtype=npdt)
        dz = np.empty((p, hdim), dtype=npdt)
        dhead = np.empty((p, 3), dtype=npdt)
        tmp = np.empty((p, hdim), dtype=npdt)
        ones = np.ones((p,), dtype=npdt)
        _field_ext.field_backward(
            _np(x), _np(v), _np(w0), _np(wh), _np(wd), _np(wc), _np(gamma),
            _np(beta), pre, hid, ad, ac,
            _np(gsigma.contiguous()), _np(grgb.contiguous()),
            _np(dw0), _np(db0), _np(dwh), _np(dbh), _np(dwd), _np(dbd),
            _np(dwc), _np(dbc), _np(dgamma), _np(dbeta), dh, dz, dhead,
            tmp, ones)
        return (None, None, dw0, db0, dwh, dbh, dwd, dbd, dwc, dbc,
                dgamma, dbeta)


def film_siren(x, v, w0, b0, wh, bh, wd, bd, wc, bc, gamma, beta):
    """FiLM-SIREN field evaluation; see pure.film_siren for semantics."""
    if backend() == "pure":
        return pure.film_siren(x, v, w0, b0, wh, bh, wd, bd, wc, bc,
                               gamma, beta)
    return _FieldFn.apply(x.contiguous(), v.contiguous(), w0.contiguous(),
                          b0.contiguous(), wh.contiguous(), bh.contiguous(),
                          wd.contiguous(), bd.contiguous(), wc.contiguous(),
                          bc.contiguous(), gamma.contiguous(),
                          beta.contiguous())
