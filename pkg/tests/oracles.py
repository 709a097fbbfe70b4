"""Independent reference implementations used to cross-check the package.

Everything here is written as literal loops over scalars (plus python
complex arithmetic), deliberately sharing no code with the package under
test. Slow on purpose; only ever applied to tiny shapes.
"""

import cmath
import math

import numpy as np


def gaussian_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def gelu_scalar(x: float) -> float:
    return x * gaussian_cdf(x)


def activation_scalar(name: str, slope: float = 0.2):
    if name == "identity":
        return lambda v: v
    if name == "leaky_relu":
        return lambda v: v if v > 0 else slope * v
    if name == "relu":
        return lambda v: v if v > 0 else 0.0
    if name == "gelu":
        return gelu_scalar
    raise ValueError(name)


# -- discrete Fourier transform ------------------------------------------------


def dft_loop(signal):
    """One-sided coefficients by direct cosine/sine sums."""
    signal = list(signal)
    length = len(signal)
    k_count = length // 2 + 1
    re = [0.0] * k_count
    im = [0.0] * k_count
    for k in range(k_count):
        for n in range(length):
            angle = 2.0 * math.pi * k * n / length
            re[k] += signal[n] * math.cos(angle)
            im[k] -= signal[n] * math.sin(angle)
    return np.array(re), np.array(im)


def dft_full_loop(signal):
    """All L complex coefficients of the two-sided transform."""
    signal = list(signal)
    length = len(signal)
    out = []
    for k in range(length):
        acc = 0j
        for n in range(length):
            acc += signal[n] * cmath.exp(-2j * math.pi * k * n / length)
        out.append(acc)
    return np.array(out)


def idft_loop(re, im, length):
    """Expand one-sided coefficients by conjugate symmetry, invert, take Re."""
    k_count = length // 2 + 1
    full = [0j] * length
    for k in range(k_count):
        full[k] = complex(re[k], im[k])
    for k in range(k_count, length):
        mirror = full[length - k]
        full[k] = mirror.conjugate()
    out = []
    for n in range(length):
        acc = 0j
        for k in range(length):
            acc += full[k] * cmath.exp(2j * math.pi * k * n / length)
        out.append((acc / length).real)
    return np.array(out)


def freq_mlp_loop(re, im, w_real, w_imag, b_real, b_imag, activation="identity", slope=0.2):
    """Apply (W_r + jW_i)(re + j*im) + (b_r + j*b_i) per coefficient vector.

    `re`/`im` have the feature axis last; the complex matrix multiplies
    each feature vector.
    """
    act = activation_scalar(activation, slope)
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    dim = re.shape[-1]
    flat_re = re.reshape(-1, dim)
    flat_im = im.reshape(-1, dim)
    out_re = np.zeros_like(flat_re)
    out_im = np.zeros_like(flat_im)
    for row in range(flat_re.shape[0]):
        vec = [complex(flat_re[row, d], flat_im[row, d]) for d in range(dim)]
        for d_out in range(dim):
            acc = complex(b_real[d_out], b_imag[d_out])
            for d_in in range(dim):
                weight = complex(w_real[d_out, d_in], w_imag[d_out, d_in])
                acc += weight * vec[d_in]
            out_re[row, d_out] = act(acc.real)
            out_im[row, d_out] = act(acc.imag)
    return out_re.reshape(re.shape), out_im.reshape(im.shape)


def spectral_pipeline_loop(x, axis, w_real, w_imag, b_real, b_imag, activation, slope=0.2):
    """transform -> filter -> inverse along `axis` of (B, L, D), by loops."""
    x = np.asarray(x, dtype=float)
    moved = np.moveaxis(x, axis, 0)  # (extent, ..., D)
    extent = moved.shape[0]
    k_count = extent // 2 + 1
    rest = moved.shape[1:]
    re = np.zeros((k_count,) + rest)
    im = np.zeros((k_count,) + rest)
    for idx in np.ndindex(rest):
        signal = [moved[(n,) + idx] for n in range(extent)]
        r, i = dft_loop(signal)
        for k in range(k_count):
            re[(k,) + idx] = r[k]
            im[(k,) + idx] = i[k]
    # feature axis is last in (k,) + rest layout as well
    re_f, im_f = freq_mlp_loop(re, im, w_real, w_imag, b_real, b_imag, activation, slope)
    out = np.zeros_like(moved)
    for idx in np.ndindex(rest):
        r = [re_f[(k,) + idx] for k in range(k_count)]
        i = [im_f[(k,) + idx] for k in range(k_count)]
        rec = idft_loop(r, i, extent)
        for n in range(extent):
            out[(n,) + idx] = rec[n]
    return np.moveaxis(out, 0, axis)


# -- model pieces ------------------------------------------------------------------


def ffn_rule_loop(x, extra, w1, b1, w2, b2, gain, bias, eps=1e-8):
    """layer_norm(gelu(x@w1+b1)@w2 + b2 + x + extra), position by position."""
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, x.shape[-1])
    flat_extra = None if extra is None else np.asarray(extra, dtype=float).reshape(flat.shape)
    dim = flat.shape[1]
    hidden_dim = w1.shape[1]
    out = np.zeros_like(flat)
    for row in range(flat.shape[0]):
        hidden = [0.0] * hidden_dim
        for h in range(hidden_dim):
            acc = b1[h]
            for d in range(dim):
                acc += flat[row, d] * w1[d, h]
            hidden[h] = gelu_scalar(acc)
        resid = [0.0] * dim
        for d in range(dim):
            acc = b2[d]
            for h in range(hidden_dim):
                acc += hidden[h] * w2[h, d]
            resid[d] = acc + flat[row, d]
            if flat_extra is not None:
                resid[d] += flat_extra[row, d]
        mu = sum(resid) / dim
        var = sum((v - mu) ** 2 for v in resid) / dim
        inv = 1.0 / math.sqrt(var + eps)
        for d in range(dim):
            out[row, d] = (resid[d] - mu) * inv * gain[d] + bias[d]
    return out.reshape(x.shape)


def attention_loop(e, pad_mask, wq, wk, wv, wo, head_count):
    """Per-position masked multi-head attention, before the FFN stage."""
    e = np.asarray(e, dtype=float)
    batch, length, dim = e.shape
    head_dim = dim // head_count
    scale = 1.0 / math.sqrt(head_dim)
    q = e @ wq
    k = e @ wk
    v = e @ wv
    ctx = np.zeros_like(e)
    for b in range(batch):
        for h in range(head_count):
            lo, hi = h * head_dim, (h + 1) * head_dim
            for t in range(length):
                scores = []
                for s in range(length):
                    allowed = s <= t and pad_mask[b, s]
                    if allowed:
                        dot = sum(q[b, t, lo + d] * k[b, s, lo + d] for d in range(head_dim))
                        scores.append(dot * scale)
                    else:
                        scores.append(-1e9)
                m = max(scores)
                exps = [math.exp(sc - m) for sc in scores]
                total = sum(exps)
                weights = [ex / total for ex in exps]
                for d in range(head_dim):
                    ctx[b, t, lo + d] = sum(weights[s] * v[b, s, lo + d] for s in range(length))
    return ctx @ wo


def cross_entropy_loop(hidden, item_table, targets, valid_mask):
    """Mean -log softmax(target) over valid positions, items 1..V."""
    hidden = np.asarray(hidden, dtype=float)
    table = np.asarray(item_table, dtype=float)[1:]  # drop the padding row
    total = 0.0
    count = 0
    batch, length, _ = hidden.shape
    for b in range(batch):
        for t in range(length):
            if not valid_mask[b, t]:
                continue
            logits = [float(np.dot(hidden[b, t], table[i])) for i in range(table.shape[0])]
            m = max(logits)
            lse = m + math.log(sum(math.exp(v - m) for v in logits))
            total += -(logits[targets[b, t] - 1] - lse)
            count += 1
    return total / count


def distance_loop(p, t, kind):
    p = np.asarray(p, dtype=float).ravel()
    t = np.asarray(t, dtype=float).ravel()
    l1 = sum(abs(a - b) for a, b in zip(p, t)) / p.size
    l2 = sum((a - b) ** 2 for a, b in zip(p, t)) / p.size
    if kind == "l1":
        return l1
    if kind == "l2":
        return l2
    return 0.5 * (l1 + l2)


def frequency_loss_loop(pred, target, kind):
    """One-sided transform along axis 1, distances on both parts."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    batch, length, dim = pred.shape
    k_count = length // 2 + 1
    re_p = np.zeros((batch, k_count, dim))
    im_p = np.zeros((batch, k_count, dim))
    re_t = np.zeros((batch, k_count, dim))
    im_t = np.zeros((batch, k_count, dim))
    for b in range(batch):
        for d in range(dim):
            r, i = dft_loop(pred[b, :, d])
            re_p[b, :, d] = r
            im_p[b, :, d] = i
            r, i = dft_loop(target[b, :, d])
            re_t[b, :, d] = r
            im_t[b, :, d] = i
    return distance_loop(re_p, re_t, kind) + distance_loop(im_p, im_t, kind)


# -- ranking ------------------------------------------------------------------------


def rank_loop(scores, target):
    """Brute force: sort items by (score desc, id asc), find the target."""
    order = sorted(range(1, len(scores) + 1), key=lambda item: (-scores[item - 1], item))
    return order.index(target) + 1


def adam_scalar_recurrence(grad_fn, w0, steps, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Run Adam on a single scalar with plain python floats."""
    w, m, v = w0, 0.0, 0.0
    for t in range(1, steps + 1):
        g = grad_fn(w)
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        m_hat = m / (1 - beta1**t)
        v_hat = v / (1 - beta2**t)
        w -= lr * m_hat / (math.sqrt(v_hat) + eps)
    return w
