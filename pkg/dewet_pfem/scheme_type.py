"""Scheme, shape and curvature-mode constants

The time-stepping schemes, the initial shapes known to the shape library and
the two ways the curvature enters the assembled system.

ORDER maps every scheme to its temporal order of accuracy.
"""

ZJB     = 'zjb'
PC      = 'pc'
BDF2    = 'bdf2'
BDF3    = 'bdf3'
BDF4    = 'bdf4'

SCHEMES = (ZJB, PC, BDF2, BDF3, BDF4)

ORDER = {
    ZJB: 1,
    PC: 2,
    BDF2: 2,
    BDF3: 3,
    BDF4: 4,
}

BDF_STEPS = {
    BDF2: 2,
    BDF3: 3,
    BDF4: 4,
}

SEMI_ELLIPSE = 'semi-ellipse'
FLOWER       = 'flower'
WULFF        = 'wulff'
FILE         = 'file'

SHAPES = (SEMI_ELLIPSE, FLOWER, WULFF, FILE)

# curvature treatment in the assembled system
IMPLICIT    = 'implicit'
TRAPEZOIDAL = 'trapezoidal'
