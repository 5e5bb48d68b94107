"""Collision probability of brick-wall circuits approaching the global-Haar value.

Orthogonal circuits anticoncentrate to 3/(2^n + 2), unitary ones to 2/(2^n + 1).
"""

from momentnet import anticoncentration_curve, z_haar

n = 12
layers = [1, 2, 4, 8, 16, 32, 48]
zo = anticoncentration_curve(n, layers, "O4")
zu = anticoncentration_curve(n, layers, "U4")
print(f"{'n_L':>4} {'Z_O':>14} {'Z_U':>14}")
for (layer, a, _), (_, b, _) in zip(zo, zu):
    print(f"{layer:>4} {a:>14.10f} {b:>14.10f}")
print(f"Haar {z_haar(n, 'O'):>14.10f} {z_haar(n, 'U'):>14.10f}")
