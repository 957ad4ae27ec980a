import numpy as np

DOMAIN = np.array([[0.0, 0.0], [1279.0, 0.0], [1279.0, 719.0], [0.0, 719.0]])


def four_point_matrix(src, dst) -> np.ndarray:
    """Exact homography through 4 correspondences by solving the 8x8 system
    with h22 fixed to 1 (independent of the SVD-based fitter)."""
    a, b = [], []
    for (x, y), (u, v) in zip(src, dst):
        a.append([x, y, 1, 0, 0, 0, -u * x, -u * y])
        a.append([0, 0, 0, x, y, 1, -v * x, -v * y])
        b += [u, v]
    h = np.linalg.solve(np.array(a, dtype=float), np.array(b, dtype=float))
    return np.append(h, 1.0).reshape(3, 3)


def random_homography_matrix(rng, displacement: float = 30.0) -> np.ndarray:
    """Projective map of a 1280x720 domain whose corners move by <= displacement px."""
    dst = DOMAIN + rng.uniform(-displacement, displacement, DOMAIN.shape)
    return four_point_matrix(DOMAIN, dst)


def apply_matrix(m, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    q = np.c_[pts, np.ones(len(pts))] @ np.asarray(m).T
    return q[:, :2] / q[:, 2:]


# one "PASS/FAIL criterion N: ..." line per acceptance criterion, echoed in the
# terminal summary by conftest
ACCEPTANCE_RESULTS: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_RESULTS.append(line)
    print(line)
