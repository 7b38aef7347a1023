"""Physical constants and unit conventions shared across the package.

Unit system (chosen so every number stays O(1)):
    frequency   GHz (ordinary frequency, not angular)
    time        ns
    energy      meV (junction-side quantities: gap, bias, Fermi smearing)
    voltage     mV  (so e*V in meV is numerically equal to V in mV)
    temperature K

The single conversion that couples the two energy scales is h/k_B in
K/GHz; it is pinned to the value below and k_B is derived from it so
that Boltzmann factors written either as exp(-H_OVER_KB*f/T) or as
exp(-h*f/(k_B*T)) agree to the last bit.
"""

# h/k_B in K/GHz: Boltzmann factor for a transition at frequency f (GHz)
# and temperature T (K) is exp(-H_OVER_KB * f / T).
H_OVER_KB = 0.0479924

# Planck constant in meV/GHz (CODATA h = 4.135667696e-15 eV s).
H_MEV_PER_GHZ = 4.135667696e-3

# Boltzmann constant in meV/K, derived so H_MEV_PER_GHZ / KB_MEV_PER_K
# equals H_OVER_KB exactly (consistency beats the 7th significant digit).
KB_MEV_PER_K = H_MEV_PER_GHZ / H_OVER_KB

# One photon of 1 GHz in attojoules (h = 6.62607015e-34 J s, 1 aJ = 1e-18 J).
AJ_PER_GHZ = 6.62607015e-7
