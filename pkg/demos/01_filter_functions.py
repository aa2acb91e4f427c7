"""Filter functions of CPMG and the designed sequences, and where their peaks sit."""
import math

import numpy as np

from ddsense import (build_cpmg, build_designed3, build_designed5, filter_numeric,
                     locate_peak_numeric, peak_height3, peak_height5)

n = 30
cpmg = build_cpmg(n)
d3 = build_designed3(n, "3/10")
d5 = build_designed5(n, "3/20", "17/40")

# CPMG has one big peak at omega t / 2 pi = n / 2; the designed sequences
# put a smaller one much earlier
u = np.linspace(0, 20, 4001)
for seq in (cpmg, d3, d5):
    f = filter_numeric(seq, 2 * math.pi * u)
    print(f"{seq.describe():32s} max F on [0, 20] = {f.max():9.2f} at {u[f.argmax()]:.3f}")

print()
print("closed-form heights at the nominal centres")
print(f"  designed3(30, 3/10) at 5:       {peak_height3(n, '3/10'):.4f}")
print(f"  designed5(30, 3/20, 17/40) at 3: {peak_height5(n, '3/20', '17/40'):.4f}")

# the true maxima sit slightly to the right of the nominal centres
for seq, window in ((d3, (4, 6)), (d5, (2, 4)), (cpmg, (14, 16))):
    rep = locate_peak_numeric(seq, *window)
    print(f"  {seq.describe():32s} peak at {rep.center_omega_t_over_2pi:.4f}, "
          f"height {rep.height:.4f}, FWHM {rep.width_at_half_max:.3f}")

# r = 1/3 is CPMG again, so the early peak vanishes
print()
print("r = 1/3 reproduces CPMG:", build_designed3(n, "1/3").pulse_fractions == cpmg.pulse_fractions)
