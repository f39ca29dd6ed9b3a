"""m-bonacci van der Corput/Halton sequences, Rauzy fractal geometry,
and discrepancy measurement.

Submodules:
    numeration   greedy digit expansions over the m-bonacci basis
    spectral     dominant root, incidence matrix, lattice coordinates
    rauzy        fixed-point words, fractal clouds, tiling checks
    rotation     sequence values, interval partitions, local discrepancies
    discrepancy  exact star discrepancy, decay fits, box dimensions
    cli          command-line interface
    verify       self-check suite behind `mbonacci verify`

Kept import-light on purpose: the CLI applies its thread cap before the
numeric backends load.
"""

__version__ = "0.1.0"
