from hypothesis import assume
from hypothesis import strategies as st

from bic_explore.prior_model import DiscretePrior


@st.composite
def negative_tail_priors(draw, max_k: int = 6, min_plus: float = 0.05, min_decay: float = 0.4):
    """Valid two-point priors with mu_2 < 0; each p_plus is a decayed copy of the previous one."""
    k = draw(st.integers(min_value=2, max_value=max_k))
    zero = draw(st.floats(min_value=0.05, max_value=0.9))
    minus_share = draw(st.floats(min_value=0.05, max_value=0.95))
    minus = (1.0 - zero) * minus_share
    plus = 1.0 - zero - minus
    first_mean = plus - minus
    p = draw(st.floats(min_value=min_plus, max_value=0.45))
    assume(2.0 * p - 1.0 < first_mean)
    tails = [p]
    for _ in range(k - 2):
        tails.append(tails[-1] * draw(st.floats(min_value=min_decay, max_value=0.9)))
    return DiscretePrior.from_lists((plus, zero, minus), tails)


def enumerable_priors():
    return negative_tail_priors(max_k=4, min_plus=0.15, min_decay=0.6)
