"""Self-checks of the exact-kernel oracle, runnable from the command line.

Each suite returns a list of :class:`Check` records. ``mutate=True`` swaps in
a perturbed conditional f(x | y) for the live kernels, which the stationarity
and sampler suites must detect.
"""

import copy
from dataclasses import asdict, dataclass

import numpy as np

from .core import da_step
from .rng import make_rng
from .spectral import (
    BlockedDiscreteJoint,
    DiscreteJoint,
    GaussianToy,
    PermutationGroup,
    adda_exact_kernel_discrete,
    build_da_joint_kernel,
    build_da_kernel,
    check_detailed_balance,
    conditional_projection,
    group_middle_kernel,
    haar_triviality_check,
    nystrom_spectrum,
    spectrum,
    stationary_distribution,
    verify_dominance,
)
from .spectral.discrete import _row_cdf

__all__ = ["Check", "SUITES", "perturb_conditional", "run_suites"]


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    statistic: float
    tolerance: float

    def to_dict(self):
        return asdict(self)


def perturb_conditional(joint, amount=0.2):
    """Copy of ``joint`` whose f(x | y = 0) moves ``amount`` of mass from its
    largest entry to its smallest; marginals and f(y | x) are untouched."""
    bad = copy.copy(joint)
    cond = joint.x_given_y.copy()
    row = cond[0]
    hi, lo = int(np.argmax(row)), int(np.argmin(row))
    shift = amount * row[hi]
    row[hi] -= shift
    row[lo] += shift
    bad.x_given_y = cond
    bad._cum_x = _row_cdf(cond)
    return bad


def _random_joints(rng, count, max_size):
    for _ in range(count):
        yield DiscreteJoint.random(rng, int(rng.integers(2, max_size + 1)), int(rng.integers(2, max_size + 1)))


def suite_stationarity(rng, mutate):
    worst_stat = worst_bal = 0.0
    for joint in _random_joints(rng, 100, 20):
        live = perturb_conditional(joint) if mutate else joint
        k = build_da_kernel(live).matrix
        worst_stat = max(worst_stat, float(np.max(np.abs(joint.f_x @ k - joint.f_x))))
        worst_bal = max(worst_bal, check_detailed_balance(k, joint.f_x))
    return [Check("stationarity", "f_X K = f_X on 100 random joints", worst_stat <= 1e-12, worst_stat, 1e-12),
            Check("stationarity", "detailed balance on 100 random joints", worst_bal <= 1e-12, worst_bal, 1e-12)]


def suite_toy(rng, mutate):
    joint = DiscreteJoint(np.array([[0.4, 0.1], [0.1, 0.4]]))
    k = build_da_kernel(perturb_conditional(joint) if mutate else joint).matrix
    err_k = float(np.max(np.abs(k - np.array([[0.68, 0.32], [0.32, 0.68]]))))
    err_pi = float(np.max(np.abs(stationary_distribution(k) - 0.5)))
    err_eig = float(abs(spectrum(k, joint.f_x).eigenvalues[0] - 0.36))
    return [Check("toy", "2x2 kernel entries", err_k <= 1e-14, err_k, 1e-14),
            Check("toy", "2x2 stationary law", err_pi <= 1e-14, err_pi, 1e-14),
            Check("toy", "2x2 mean-zero eigenvalue", err_eig <= 1e-14, err_eig, 1e-14)]


def suite_sampler(rng, mutate, steps=400_000, z=4.5):
    joint = DiscreteJoint.random(rng, 3, 4)
    live = perturb_conditional(joint, 0.5) if mutate else joint
    exact = build_da_kernel(joint).matrix
    sx = exact.shape[0]
    starts = np.repeat(np.arange(sx), steps // sx)
    ends = da_step(live.augmented_model(), starts, rng)
    worst = 0.0
    for x in range(sx):
        counts = np.bincount(ends[starts == x], minlength=sx)
        n = counts.sum()
        p = exact[x]
        se = np.sqrt(p * (1 - p) / n)
        worst = max(worst, float(np.max(np.abs(counts / n - p) / se)))
    return [Check("sampler", "live DA transitions vs exact kernel (max |z|)", worst <= z, worst, z)]


def suite_dominance(rng, mutate):
    worst = -np.inf
    for _ in range(100):
        sy = 2 * int(rng.integers(1, 8))
        joint = DiscreteJoint.random(rng, int(rng.integers(2, 15)), sy)
        report = verify_dominance(joint, group_middle_kernel(joint.f_y, PermutationGroup.reflection(sy)),
                                  strict=False)
        gap = max(float(np.max(report.sandwich_eigenvalues - report.beta_squared)),
                  report.sandwich_norm - report.da_norm)
        worst = max(worst, gap)
    walsh = np.array([[1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]], dtype=float).T
    beta = np.array([0.5, 0.25, 0.1])
    joint = DiscreteJoint(np.full((4, 4), 1 / 16) * (1 + (walsh * beta) @ walsh.T))
    report = verify_dominance(joint, conditional_projection(joint.f_y, walsh[:, 0]), strict=False)
    equality = report.index_criterion_consistent and report.retained_criterion_consistent
    return [Check("dominance", "sandwich eigenvalues and norm dominated (100 instances)", worst <= 1e-10,
                  worst, 1e-10),
            Check("dominance", "equality exactly on fixed singular functions", equality,
                  float(not equality), 0.0)]


def suite_haar(rng, mutate):
    f_y = np.array([0.1, 0.2, 0.2, 0.3, 0.1, 0.1])
    cond = rng.dirichlet(np.ones(4), size=3)
    cols = np.stack([cond[0], cond[1], cond[2], cond[2], cond[1], cond[0]], axis=1)
    group = PermutationGroup.reflection(6)
    invariant = DiscreteJoint(cols * f_y)
    generic = DiscreteJoint.random(rng, 4, 6)
    ok_inv = haar_triviality_check(invariant, group)
    ok_gen = not haar_triviality_check(generic, group)
    return [Check("haar", "orbit-invariant joint leaves the kernel unchanged", ok_inv, float(not ok_inv), 0.0),
            Check("haar", "generic joint lowers an eigenvalue", ok_gen, float(not ok_gen), 0.0)]


def suite_adda(rng, mutate):
    worst = 0.0
    for eps in (0.0, 0.3, 1.0):
        for _ in range(20):
            blocked = BlockedDiscreteJoint.random(rng, int(rng.integers(2, 5)),
                                                  (int(rng.integers(2, 4)), int(rng.integers(2, 4))))
            k = adda_exact_kernel_discrete(blocked, rng.random(blocked.f_x.size), eps).matrix
            pi = blocked.pmf.ravel()
            worst = max(worst, float(np.max(np.abs(pi @ k - pi))))
    blocked = BlockedDiscreteJoint.random(rng, 3, (2, 3))
    diff = float(np.max(np.abs(adda_exact_kernel_discrete(blocked, rng.random(3), 1.0).matrix
                               - build_da_joint_kernel(blocked).matrix)))
    return [Check("adda", "joint law invariant under the exact asynchronous kernel", worst <= 1e-12, worst, 1e-12),
            Check("adda", "epsilon = 1 equals the joint DA kernel", diff <= 1e-15, diff, 1e-15)]


def suite_gaussian(rng, mutate):
    # index 0 is the trivial unit eigenvalue
    eig = nystrom_spectrum(GaussianToy(0.5), 400)[1:4]
    err = float(np.max(np.abs(eig - np.array([0.25, 0.0625, 0.015625]))))
    return [Check("gaussian", "leading eigenvalues of the Gaussian toy", err <= 1e-3, err, 1e-3)]


SUITES = {
    "stationarity": suite_stationarity,
    "toy": suite_toy,
    "sampler": suite_sampler,
    "dominance": suite_dominance,
    "haar": suite_haar,
    "adda": suite_adda,
    "gaussian": suite_gaussian,
}


def run_suites(names=None, seed=0, mutate=False):
    """Run the named suites (all by default), each from its own stream of ``seed``."""
    names = list(SUITES) if not names or names == ["all"] else names
    checks = []
    for i, name in enumerate(SUITES):
        if name in names:
            checks.extend(SUITES[name](make_rng(seed, i), mutate))
    return checks
