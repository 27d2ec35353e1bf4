"""Term-by-term evaluation of the three-term second-order solver mean for a
delta prior at m, in 50-digit arithmetic.

Schedule: linear beta 1e-3 -> 0.2, T = 10. Inputs are fixed below."""
from mpmath import mp, mpf, sqrt, log, exp

mp.dps = 50
T = 10
b0, b1 = mpf("1e-3"), mpf("0.2")
betas = [b0 + (b1 - b0) * i / (T - 1) for i in range(T)]
ab = [mpf(1)]
for b in betas:
    ab.append(ab[-1] * (1 - b))

def lam(s):
    return (log(ab[s]) - log(1 - ab[s])) / 2

def ratio(s):
    if s == 0:
        return mpf(0)
    return log(sqrt(ab[s])) / log(sqrt(1 - ab[s]))

def h(s, form):
    if form == "log-snr-diff":
        return lam(s) - lam(s + 1)
    return ratio(s) - ratio(s + 1)

m = [mpf("0.3"), mpf("0.7")]

def eps(x, s):
    return [(xi - sqrt(ab[s]) * mi) / sqrt(1 - ab[s]) for xi, mi in zip(x, m)]

def pred(x, s, target):
    e = eps(x, s)
    if target == "noise":
        return e
    return [(xi - sqrt(1 - ab[s]) * ei) / sqrt(ab[s]) for xi, ei in zip(x, e)]

def mean(t, x, xn, form, target):
    hp = h(t - 1, form)
    damp = 1 - exp(-2 * hp)
    c_x = sqrt(1 - ab[t - 1]) / sqrt(1 - ab[t]) * exp(-hp)
    c_p = sqrt(ab[t - 1]) * damp
    p = pred(x, t, target)
    out = [c_x * xi + c_p * pi for xi, pi in zip(x, p)]
    if xn is not None:
        c_c = mpf("0.5") * sqrt(ab[t - 1]) * damp * (-h(t, form) / hp)
        pn = pred(xn, t + 1, target)
        out = [o + c_c * (a - b) for o, a, b in zip(out, pn, p)]
    return out

x = [mpf("0.4"), mpf("-0.2")]
xn = [mpf("1.1"), mpf("0.5")]
for form, target in [("log-snr-diff", "data"), ("log-snr-diff", "noise"), ("log-ratio", "noise"), ("log-ratio", "data")]:
    print(form, target, "t=5", [mp.nstr(v, 20) for v in mean(5, x, xn, form, target)])
print("log-snr-diff data t=10", [mp.nstr(v, 20) for v in mean(10, x, None, "log-snr-diff", "data")])
