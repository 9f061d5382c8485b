"""
Sample Python script for stepping a film profile by hand.

Samples a 2:1 semi-ellipse, advances it with the BDF2 stepper and prints the
diagnostics every 20 steps.
"""

import math

import dewet_pfem
from dewet_pfem import scheme_type

curve = dewet_pfem.from_shape(dewet_pfem.ShapeSpec.semi_ellipse(2.0, 1.0), 64)
params = dewet_pfem.SchemeParams(tau=0.01, theta_young=5 * math.pi / 6)

print('initial curve:', curve)
area0 = dewet_pfem.enclosed_area(curve)
print('A0 =', area0)
print()

stepper = dewet_pfem.make_stepper(scheme_type.BDF2, curve, params)

for m in range(1, 201):
    curve = stepper.step()
    if m % 20 == 0:
        diag = dewet_pfem.diagnostics(curve, params.sigma)
        print(f't = {stepper.time:5.2f}  W = {diag.energy:.10f}  '
              f'dA/A0 = {(diag.area - area0) / area0:+.3e}  Psi = {diag.mesh_ratio:.6f}  '
              f'theta = ({diag.theta_left:.6f}, {diag.theta_right:.6f})')

print()
print('final curve:', curve)

# snapshot
dewet_pfem.write_curve_csv('semi_ellipse_t2.csv', curve)
print('written semi_ellipse_t2.csv')
