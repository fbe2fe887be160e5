"""Arbitrary-precision reference values for the learning-rate schedule tests."""
from mpmath import mp, mpf, cos, pi, floor

mp.dps = 40

def exp_decay(init, rate, steps, ep):
    return mpf(init) * mpf(rate) ** (mpf(ep) / steps)

def one_cycle(start, mx, mn, end, p_ep, d_ep, epochs, ep):
    start, mx, mn, end = map(mpf, (start, mx, mn, end))
    if ep < p_ep:
        return start + (mx - start) / p_ep * ep
    if ep < d_ep:
        return mx - (mx - mn) / (d_ep - p_ep) * (ep - p_ep)
    return mn - (mn - end) / (epochs - d_ep) * (ep - d_ep)

def cyclical(mn, mx, h, ep):
    mn, mx = mpf(mn), mpf(mx)
    pos = ep % (2 * h)
    if pos < h:
        return mn + (mx - mn) * pos / h
    return mx - (mx - mn) * (pos - h) / h

def dec_cyclical(mn, mx, c, epochs, ep):
    mn, mx = mpf(mn), mpf(mx)
    n = ep // c
    dec = (mx - mn) / (mpf(epochs) / c - 1)
    cur = mx - dec * n
    lr = cur - (cur - mn) * mpf(ep % c) / c
    return max(lr, mn)

def warm_equal(mn, mx, peaks, epochs, ep):
    mn, mx = mpf(mn), mpf(mx)
    frac = mpf((ep * peaks) % epochs) / epochs
    return mn + (mx - mn) * mpf("0.5") * (1 + cos(pi * frac))

print("exp_decay ep1", mp.nstr(exp_decay("1e-2", "0.98", 1, 1), 20))
print("exp_decay ep35", mp.nstr(exp_decay("1e-2", "0.98", 1, 35), 20))
for ep in (45, 90, 180, 200):
    print("one_cycle", ep, mp.nstr(one_cycle("1e-5", "1e-2", "1e-5", "1e-8", 90, 180, 200, ep), 20))
for ep in (10, 25, 50):
    print("cyclical", ep, mp.nstr(cyclical("1e-5", "1e-2", 25, ep), 20))
for ep in (20, 40, 160):
    print("dec_cyclical", ep, mp.nstr(dec_cyclical("1e-5", "1e-2", 40, 200, ep), 20))
for ep in (25, 50):
    print("warm_equal", ep, mp.nstr(warm_equal("1e-5", "1e-2", 4, 200, ep), 20))
# geometric boundaries for T_max=4, T_mult=2 over 200 epochs
b, t, acc = [], 4, 0
while acc + t <= 200:
    acc += t; b.append(acc); t *= 2
print("geometric boundaries", b)
print("carbon p_train", mp.nstr(mpf("1.58") * 450 / 1000, 20), mp.nstr(mpf("1.58") * 750 / 1000, 20))
print("carbon co2e", mp.nstr(mpf("0.954") * mpf("0.711") * 9, 20))
print("reduction 19/200", mp.nstr(100 * (1 - mpf(19) / 200), 20))
print("speedups", mp.nstr(mpf(200) / 19, 10), mp.nstr(mpf(77) / 19, 10))
