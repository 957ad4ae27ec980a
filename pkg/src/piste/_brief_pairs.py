"""Sampling pattern for the binary descriptor.

Each row is (dx1, dy1, dx2, dy2): bit = I(p + d1) < I(p + d2) on the smoothed
image. Offsets lie in [-15, 15]. Drawn once from an isotropic Gaussian
(sigma = 31/5, rounded, clipped) and frozen here for reproducibility.
"""

BRIEF_PAIRS = (
    (-1, 2, -6, 10), (1, -11, 6, 2), (-4, -5, 5, 1), (12, -1, 9, -4),
    (-1, -5, -3, 7), (-6, -5, 3, 4), (0, -2, 5, -1), (6, -1, 1, 1),
    (6, 5, 6, 1), (9, 1, -1, 0), (0, -7, 6, 6), (-3, -2, 6, -4),
    (6, 10, -4, 3), (-4, 0, 8, 1), (1, -9, 15, 3), (1, -10, -4, -4),
    (9, -5, -2, 6), (8, -4, 0, -3), (8, 4, -9, 4), (-7, -4, -11, -7),
    (-8, -4, 1, -6), (-6, 5, 6, -11), (7, -2, 7, 13), (0, -9, -2, 2),
    (-5, -10, 3, 4), (0, -7, -4, -8), (3, 10, 6, -2), (6, 5, 2, 3),
    (8, -3, -4, 6), (3, 1, 7, -5), (-3, -13, 2, -4), (-13, 9, -6, -5),
    (0, -4, 3, -2), (8, -2, -5, 3), (-4, -4, -5, -1), (3, -11, 0, 15),
    (-4, -2, 4, 8), (8, 6, 9, -7), (6, 1, 6, 10), (6, -4, 9, 8),
    (-4, -8, -5, 5), (3, -1, 6, -5), (0, -2, -1, 0), (5, 2, -4, 7),
    (-4, 13, 2, 1), (4, 6, -1, 0), (-8, 10, -11, -1), (-10, -4, 2, 2),
    (7, -15, -4, -10), (14, 7, -6, 3), (6, -3, -7, 12), (-2, 1, -9, 2),
    (12, -2, 6, -12), (-6, 1, -3, -2), (-5, -5, 0, 1), (7, 0, -1, 10),
    (-2, -6, 5, -10), (-7, 0, 11, 12), (-11, -7, 3, 1), (-2, 0, -3, 1),
    (-1, 3, -4, -11), (-1, 6, 4, 8), (-4, -11, -3, 3), (-4, -2, 4, 0),
    (5, -15, 4, 9), (-3, -8, 2, 3), (5, -8, 3, -10), (0, 4, 4, 1),
    (-1, -5, 7, 1), (-2, -7, 15, -6), (5, 9, -10, -6), (-3, -7, -3, -4),
    (3, 0, -3, 3), (2, -2, -8, -4), (-5, 6, -5, 7), (3, 15, -7, 1),
    (6, 5, -4, -2), (1, 1, -1, 2), (3, 1, -3, -1), (6, 1, 2, -3),
    (7, 7, -4, 4), (0, 10, 7, -3), (1, 5, -5, -1), (-3, 5, 6, 2),
    (2, -3, -4, 10), (-5, -1, 3, 3), (-6, 5, 0, 7), (-10, 0, -13, -3),
    (9, -3, -11, 6), (-10, -8, -7, -2), (9, 3, -11, -4), (-13, 2, 0, 0),
    (6, 1, -9, 0), (-13, -4, 3, -5), (-1, -11, -4, -8), (1, -12, -3, -1),
    (-1, 6, 0, -2), (-5, 0, 7, 8), (8, 7, 9, -2), (4, 1, 3, -5),
    (-10, -8, -6, -7), (-11, -5, 1, -14), (-9, 14, 4, 0), (-9, -15, 6, 0),
    (2, 8, 3, -5), (6, -9, 12, -3), (8, 1, 4, 2), (2, -6, -1, -1),
    (-4, -9, 9, 2), (-8, 15, 6, 1), (3, 0, 1, -9), (5, 1, -1, 6),
    (1, 2, 11, 5), (2, 1, 5, 3), (-2, 7, 0, -6), (15, -1, -6, 6),
    (-3, -5, 1, 0), (-3, 1, -2, -8), (2, 0, -7, -3), (7, 4, 4, 11),
    (-5, 10, 7, 9), (5, -2, 6, 10), (-5, -7, 5, -1), (3, -2, 2, -3),
    (-1, -2, 3, 0), (4, 8, -15, 5), (-1, 8, 4, -5), (-4, -2, 8, 2),
    (8, -8, -6, 1), (7, -1, 2, 3), (-2, -11, 10, 1), (-1, 5, -1, -2),
    (3, 4, 1, -3), (-1, -6, 2, -11), (-3, 3, -6, 14), (2, 5, 5, 2),
    (4, -13, 14, -10), (3, -6, 11, -3), (7, 7, 5, -5), (5, 2, 6, -5),
    (7, 2, -4, -3), (-5, 6, 3, -3), (5, 9, -8, -6), (-2, 0, -6, -4),
    (1, -1, 12, -2), (-12, 6, 8, 6), (7, -1, 6, 2), (-3, 0, -3, -9),
    (-5, 3, 5, 8), (3, -9, 11, -4), (-11, 6, -3, 8), (-7, 6, -4, 10),
    (-12, 0, 4, -2), (-6, 6, -3, 7), (0, 2, 5, -5), (3, -4, 5, -15),
    (-7, 3, 6, 6), (-8, -7, -4, -5), (-4, -11, 0, 0), (9, 4, 1, 11),
    (0, -5, 2, -4), (-10, 4, 4, -9), (-8, -2, -7, 6), (1, -1, 3, 0),
    (-6, -8, -6, 1), (-4, 8, -8, -6), (3, -7, 1, 8), (0, -5, 1, 0),
    (2, 6, 1, 12), (5, -10, -1, -2), (-15, -6, 0, -2), (6, 2, -6, 1),
    (0, 0, 2, 0), (0, 14, 6, -3), (1, -2, -1, -3), (-8, -5, 12, 0),
    (8, 14, -2, -7), (4, -5, -2, 0), (8, 2, -7, 1), (6, 0, 12, 4),
    (-2, 3, -9, -3), (13, -1, 9, -1), (7, -4, 14, 1), (-2, 1, -5, 7),
    (3, 2, -8, 15), (-4, -5, -1, -12), (2, 6, 10, 0), (3, 0, -2, -2),
    (-3, 4, -5, 5), (-5, -1, -7, 7), (-5, 1, -5, -2), (-10, 5, -2, -11),
    (5, -9, -8, 10), (9, -5, 8, 7), (5, 6, -4, -6), (3, 2, -2, 1),
    (-8, 6, -8, 5), (-1, -4, -7, 1), (7, -15, 7, -3), (1, -1, -6, 12),
    (4, 2, -7, -2), (-5, 6, 0, -5), (3, 8, -8, -7), (1, 13, 4, 6),
    (-8, -8, 1, -4), (11, 3, -4, 0), (-6, -4, 11, -1), (-9, -7, 11, 5),
    (-1, -4, -1, 4), (-2, 3, 14, 15), (-13, 9, -8, -5), (-3, -1, 1, -2),
    (-3, 0, -4, 10), (10, 1, 2, -4), (5, 8, -8, -8), (-6, -4, 2, 6),
    (-4, 2, 7, 3), (-8, 1, 5, -1), (1, -4, 6, 0), (1, 6, -3, 4),
    (-5, 8, -4, 7), (6, 5, -7, 1), (2, -3, -6, 0), (-11, 9, -2, -14),
    (4, 2, 6, -1), (11, -1, -13, 3), (-5, 1, 1, 5), (7, 12, 2, -5),
    (-3, 8, 0, 1), (-1, 2, -5, -6), (-4, -1, -7, 2), (7, -6, -1, 11),
    (-6, -10, -1, -9), (-14, 5, -9, 3), (6, 9, 0, 4), (1, -8, -1, 6),
    (-3, -2, -2, -12), (12, -3, 1, -2), (-15, -1, 10, 6), (-8, -11, 0, -15),
    (-1, 2, 11, 4), (4, 6, 0, 3), (-8, -1, 1, 2), (-6, -8, -10, 0),
    (0, -2, -2, -3), (-1, 6, 0, 12), (1, 12, -12, -8), (-5, 3, -6, -2),
    (-8, -1, -7, 0), (-11, 1, 0, 3), (-2, 10, 1, -2), (3, -6, -2, 11),
    (4, 10, 7, 6), (5, -12, 3, 1), (1, -2, 0, -5), (-3, -3, 4, 8),
)
