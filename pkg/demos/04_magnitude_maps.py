"""
Signal-magnitude maps over nuclear positions (d_par, d_perp) at 27 G with
t2 = 200 us. Counts the cells above the 0.02 contour for CPMG (r = 1/3) and
two designed sequences, and the sign structure of their difference.
"""
import numpy as np

from ddsense import (DecayEnvelope, build_cpmg, build_designed3, magnitude_map,
                     map_difference)

B = 27e-4
axis = np.linspace(0.075e-9, 3e-9, 40)
env = DecayEnvelope(200e-6, 3)

maps = {"1/3": magnitude_map(B, build_cpmg(30), axis, axis, env, workers=0)}
for r in ("5/18", "3/10"):
    maps[r] = magnitude_map(B, build_designed3(30, r), axis, axis, env)

for r, m in maps.items():
    print(f"r = {r:5s} cells >= 0.02: {m.area_above(0.02):4d} of {m.values.size}")

diff = map_difference(maps["3/10"], maps["5/18"]).values
print(f"3/10 - 5/18: {np.sum(diff > 1e-3)} cells positive, {np.sum(diff < -1e-3)} negative")
