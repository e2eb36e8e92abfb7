"""Choosing between PIR and CSS-PIR by leave-one-out prediction error.

Each held-out row is predicted from a linear fit of Y on the directions
estimated without it. Lower is better.
"""

import warnings

import numpy as np

from cssdr import Dataset, gen_design, gen_response, loo_cv

rng = np.random.default_rng(11)
X = gen_design(80, 4, rng=rng)
Y = gen_response(X, "I", rng=rng)
ds = Dataset(X, Y)

warnings.simplefilter("ignore", RuntimeWarning)
for method in ("pir", "css-pir"):
    print(f"{method.upper():<8} LOO sum of squared errors: {loo_cv(ds, method, 2):9.1f}")
