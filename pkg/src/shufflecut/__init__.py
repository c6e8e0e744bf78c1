"""Adjacent-transposition shuffles, their particle projections, and the
order/coupling toolkit used to measure how fast they mix.

Layout:

- :mod:`shufflecut.perms` - permutations, height surfaces, coarse grids
- :mod:`shufflecut.paths` - particle paths, lattice order, typicality tests
- :mod:`shufflecut.statespace` - dense state enumeration and move tables
- :mod:`shufflecut.dynamics` - stochastic update streams and couplings
- :mod:`shufflecut.exact` - exact laws, distances, censored evolution
- :mod:`shufflecut.inequalities` - correlation and censoring inequalities
- :mod:`shufflecut.spectral` - eigendata, heat profiles, mixing bounds
- :mod:`shufflecut.cornerflip` - coupled corner-flip pair dynamics
- :mod:`shufflecut.experiments` - reproducible experiment reports
"""

from ._version import __version__
from .dynamics import (CensoringScheme, UpdateStream, grand_coupling,
                       run_sep, run_trajectory, sample_update_stream)
from .exact import (DistributionVector, evolve, point_mass, poisson_sandwich,
                    separation, separation_via_extremal, total_variation,
                    uniform)
from .paths import LatticePath, extremal_paths, in_bad_set, lattice_max, lattice_min
from .perms import (BlockPartition, Comparison, HeightField, Permutation,
                    block_sort, compare, height_field, leq, semi_skeleton,
                    skeleton)
from .statespace import StateCapExceeded, at_space, sep_space

__all__ = [
    "__version__",
    "Permutation",
    "HeightField",
    "Comparison",
    "BlockPartition",
    "height_field",
    "compare",
    "leq",
    "skeleton",
    "semi_skeleton",
    "block_sort",
    "LatticePath",
    "extremal_paths",
    "lattice_min",
    "lattice_max",
    "in_bad_set",
    "at_space",
    "sep_space",
    "StateCapExceeded",
    "UpdateStream",
    "CensoringScheme",
    "sample_update_stream",
    "run_trajectory",
    "run_sep",
    "grand_coupling",
    "DistributionVector",
    "point_mass",
    "uniform",
    "evolve",
    "total_variation",
    "separation",
    "separation_via_extremal",
    "poisson_sandwich",
]
