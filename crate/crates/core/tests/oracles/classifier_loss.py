"""Cross-entropy of two fixed toy models, 50-digit mpmath."""
from mpmath import mp, mpf, exp, log, tanh

mp.dps = 50

def dense(W, b, x):
    n = len(x)
    return [sum(mpf(W[r * n + i]) * x[i] for i in range(n)) + mpf(b[r]) for r in range(len(b))]

def ce(logits, y):
    return log(sum(exp(z) for z in logits)) - logits[y]

x = [mpf("0.2"), mpf("0.9"), mpf("-0.4")]
lin = dense(["0.5", "-1.25", "2.0", "0.75", "-0.3", "0.1"], ["0.1", "-0.2"], x)
print("linear y=0", mp.nstr(ce(lin, 0), 20))

h = [tanh(v) for v in dense(["0.3", "-0.8", "1.1", "0.5", "0.25", "-0.6"], ["0.05", "-0.1"], x)]
out = dense(["1.5", "-0.7", "-0.4", "2.2", "0.9", "0.3"], ["0.0", "0.2", "-0.3"], h)
print("mlp tanh y=2", mp.nstr(ce(out, 2), 20))
