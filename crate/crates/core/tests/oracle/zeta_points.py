"""Reference values of zeta(s) at 100 points with sigma in [-1, 3], |t| <= 1e4.

Writes ../data/zeta_oracle.csv: sigma,t,re,im (mpmath at 30 digits).
"""
import random
from mpmath import mp, mpf, mpc, zeta

mp.dps = 30
rng = random.Random(20240611)
pts = [(-0.49, 10.0), (0.5, 14.134725141734693), (2.0, 0.0), (0.0, 0.0), (-1.0, 0.0),
       (-0.49, 2000.0), (0.51, 2000.0), (1.51, 2000.0), (1.02, 4000.0), (-0.24, 500.0)]
while len(pts) < 100:
    sigma = round(rng.uniform(-1.0, 3.0), 6)
    mag = 10 ** rng.uniform(-1, 4)
    t = round(mag * rng.choice([-1, 1]), 6)
    if abs(sigma - 1) < 1e-3 and abs(t) < 1e-3:
        continue
    pts.append((sigma, t))
with open("../data/zeta_oracle.csv", "w") as f:
    f.write("sigma,t,re,im\n")
    for s, t in pts:
        z = zeta(mpc(mpf(s), mpf(t)))
        f.write(f"{s!r},{t!r},{mp.nstr(z.real, 20)},{mp.nstr(z.imag, 20)}\n")
