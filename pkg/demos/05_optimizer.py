"""Pick the designed3 and designed5 parameters that best separate one spin from another."""
import math

from ddsense import NuclearSpin, optimize_params, signal_magnitude, build_designed3

B = 27e-4
target = NuclearSpin.from_geometry(1e-9, math.radians(60))
others = [NuclearSpin.from_hz(-2e3, 10e3), NuclearSpin.from_hz(1.5e3, 8e3)]

for family in ("designed3", "designed5"):
    best = optimize_params(target, others, B, family, 30, grid_resolution=20)
    params = ", ".join(f"{k}={v}" for k, v in best.params.items())
    print(f"{family}: {params}  score {best.score:.3f} "
          f"(target {best.target_magnitude:.3f}, worst other {best.interferer_magnitude:.3f})")

print("for comparison, r = 3/10:", round(signal_magnitude(target, B, build_designed3(30, "3/10")), 3))
