"""Pricing and replication of barrier-style claims on log price and
quadratic variation under a continuous price with independent volatility."""

__version__ = "0.1.0"

from .charfun import (Branch, CharRoot, RebateRoot, charfun_identity_rhs,
                      conditional_charfun, root_u, root_v)
from .claims import ClaimKind, ClaimSpec
from .payoffs import (BarrierSpec, PayoffFn, QuadratureSpec, dbko_image,
                      frac_ki_payoff, powerexp_payoff, ratio_ki_payoff,
                      rebate_psi, sbko_image, sbko_image_upper, ski_psi,
                      ski_psi_derivs)
from .pricer import (ContourSpec, EmpiricalLaw, MixtureLaw, SmoothingSpec,
                     TargetGrid, heaviside_kernel, law_from_qv_samples,
                     price_dbko_powerexp, price_european_style,
                     price_payoff_under_law, price_powerexp_european,
                     price_rebate_powerexp, price_sbko_powerexp)
from .simulator import (DeterministicVol, HitResult, McEstimate, Monitoring,
                        PathRecord, RegimeSwitchingVol, detect_barrier,
                        detect_barriers, dump_paths_csv, mc_price,
                        simulate_batch, simulate_vol, simulate_x)
from .spanning import SpanningPortfolio, span_payoff
from .hedger import QEngine, hedge_report, q_value, simulate_hedge
