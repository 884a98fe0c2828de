"""Performance analysis of cascaded mixture Exponential-Generalized-Gamma channels.

The closed-form metrics are sums of Fox H-functions evaluated by
:mod:`egg_cascade.fox_h`; :mod:`egg_cascade.montecarlo` samples the physical
model as an independent check.
"""

from .channel import (
    CascadeChannel,
    EggLayer,
    cascade_irradiance_cdf,
    cascade_irradiance_pdf,
    cascade_snr_cdf,
    cascade_snr_pdf,
    layer_pdf_direct,
    layer_pdf_h,
)
from .fox_h import HParams, evaluate
from .metrics import (
    Modulation,
    avg_ber_asymptotic,
    avg_ber_asymptotic_residues,
    avg_ber_exact,
    diversity_order,
    ergodic_capacity_asymptotic,
    ergodic_capacity_exact,
    outage_probability,
)
from .montecarlo import RngSpec, estimate_ber, estimate_capacity, estimate_outage

__version__ = "0.1.0"
