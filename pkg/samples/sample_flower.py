"""
Sample Python script for comparing the schemes on a non-convex film.

Evolves the flower profile r = 2 + cos(6 theta) with every scheme to T = 5
and prints the normalized energy, relative area change and mesh ratio at the
final time.
"""

import math

import dewet_pfem
from dewet_pfem import scheme_type

curve0 = dewet_pfem.from_shape(dewet_pfem.ShapeSpec.flower(), 160)
params = dewet_pfem.SchemeParams(tau=1e-3, theta_young=5 * math.pi / 6)

print('flower:', curve0)
print()

for scheme in scheme_type.SCHEMES:
    record = dewet_pfem.evolve(curve0, scheme, params, T=5.0, stride=100, keep_snapshots=False)
    last = record.rows[-1]
    print(f'{scheme:5s}  W/W0 = {record.normalized_energy()[-1]:.8f}  '
          f'dA/A0 = {last.area_change:+.3e}  Psi = {last.mesh_ratio:.6f}  '
          f'max energy increase = {record.max_energy_increase:.2e}')
