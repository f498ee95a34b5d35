"""Experiment drivers: alignment, generalization, and verification suites.

Every run is a pure function of its configuration.  Trial seeds are
derived as master_seed + trial_index * 10007, each row carries its trial
seed, and all randomness flows through per-purpose substreams, so a rerun
with the same config reproduces the CSV byte for byte and any single row
can be re-derived in isolation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import kernels, krr, link_functions, spectral
from .errors import ConfigError, InsufficientData
from .expansion import fit_residual_slope, residual_decay_probe
from .mlp import train_mlp
from .rng import SeededStream
from .spiked_covariance import make_spiked, sqrt as cov_sqrt, matvec
from .link_functions import from_name

EXPERIMENTS = (
    "alignment",
    "generalization",
    "s-table",
    "verify-eigen",
    "expansion-residual",
    "kernel-check",
)

TRIAL_SEED_STRIDE = 10007
CV_FOLDS = 5
WARP_CHECK_TRIPLES = 10_000
RESIDUAL_PAIRS_PER_DIM = 200


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameter set; unused fields are ignored by each driver."""

    experiment: str
    dims: tuple = (50, 100, 200, 400, 800, 1600, 3200)
    b_exponents: tuple = (0.3, 0.5, 0.7, 0.9)
    b_scale: float = 5.0
    a_coef: float = 1.2
    n_train: tuple = (50, 100, 200, 400, 800, 1600, 3200)
    n_test: int = 600
    trials: int = 10
    master_seed: int = 54643
    link: str = "paper_target"
    lambda_grid: tuple = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0)
    mlp_width: int = 400
    mlp_epochs: int = 1
    mlp_batch: int = 64
    lr_grid: tuple = (1e-3, 1e-2, 1e-1, 1.0)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if any(d < 2 for d in self.dims) or not self.dims:
            raise ConfigError("all dims must be at least 2")
        if self.n_test < 1 or any(n < 1 for n in self.n_train):
            raise ConfigError("sample counts must be positive")
        if self.mlp_width < 1 or self.mlp_epochs < 0 or self.mlp_batch < 1:
            raise ConfigError("bad MLP settings")


_PER_EXPERIMENT_DEFAULTS = {
    "alignment": {"master_seed": 54643},
    "generalization": {
        "master_seed": 558812,
        "dims": (300,),
        "b_exponents": (0.7,),
    },
    "s-table": {"trials": 1},
    "verify-eigen": {
        "dims": (100,),
        "b_exponents": (0.5,),
        "n_test": 4000,
    },
    "expansion-residual": {
        "dims": (100, 200, 400, 800),
        "b_exponents": (0.5,),
        "a_coef": 1.0,
    },
    "kernel-check": {"dims": (5, 10, 20, 40)},
}


def default_config(experiment: str) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    return ExperimentConfig(experiment=experiment, **_PER_EXPERIMENT_DEFAULTS.get(experiment, {}))


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from a JSON-style dict; unknown keys are rejected."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "experiment" not in data:
        raise ConfigError("config must name an experiment")
    base = default_config(data["experiment"])
    coerced = {}
    for f in fields(ExperimentConfig):
        if f.name not in data:
            continue
        value = data[f.name]
        if isinstance(value, list):
            value = tuple(value)
        coerced[f.name] = value
    try:
        return replace(base, **coerced)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_from_json(text: str) -> ExperimentConfig:
    try:
        return config_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc


def config_to_json(cfg: ExperimentConfig) -> str:
    data = asdict(cfg)
    for key, value in data.items():
        if isinstance(value, tuple):
            data[key] = list(value)
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def trial_seed(master_seed: int, trial_index: int) -> int:
    return master_seed + trial_index * TRIAL_SEED_STRIDE


@dataclass(frozen=True)
class Check:
    """One verified invariant with its measured value."""

    name: str
    value: float
    passed: bool


@dataclass(frozen=True)
class ExperimentResult:
    header: tuple
    rows: list
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(result: ExperimentResult, path) -> None:
    """Write rows with a header; floats carry 17 significant digits."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(result.header) + "\n")
        for row in result.rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _unit_axis(d: int, axis: int = 0) -> np.ndarray:
    e = np.zeros(d)
    e[axis] = 1.0
    return e


# -- alignment ----------------------------------------------------------------

def run_alignment(cfg: ExperimentConfig) -> ExperimentResult:
    """Top-eigenvector alignment with the quadratic zonal harmonic.

    For each (trial, d) a fresh point cloud is drawn from the stream
    (trial_seed, stream_id=d); the isotropic kernel is scored once and the
    spiked kernel once per spike exponent.
    """
    rows = []
    for trial in range(cfg.trials):
        tseed = trial_seed(cfg.master_seed, trial)
        for d in cfg.dims:
            stream = SeededStream(tseed, stream_id=d)
            X = stream.standard_normal((cfg.n_test, d))
            w_star = _unit_axis(d)
            feats = spectral.harmonic_features(X, w_star)
            v0 = spectral.top_eigenvector(kernels.k0_gram(X))
            align0 = spectral.alignment(v0, feats.y2_hat)
            for expo in cfg.b_exponents:
                b = cfg.b_scale * d ** expo
                cov = make_spiked(cfg.a_coef, b, w_star)
                v1 = spectral.top_eigenvector(kernels.k1_gram(X, cov))
                align1 = spectral.alignment(v1, feats.y2_hat)
                rows.append((d, expo, trial, tseed, align0, align1))
    return ExperimentResult(
        header=("d", "b_exponent", "trial", "trial_seed", "alignment_k0", "alignment_k1"),
        rows=rows,
    )


# -- generalization -----------------------------------------------------------

def train_mlp_baseline(cfg: ExperimentConfig, data_train, data_test, rng: SeededStream):
    """Cross-validated MLP baseline; returns (test_mse, selected_lr).

    The learning rate comes from K-fold validation over cfg.lr_grid, each
    candidate trained from its own substream; the winner is retrained on
    the full training set.
    """
    X, y = data_train
    Xt, yt = data_test
    parts = krr.fold_indices(X.shape[0], CV_FOLDS, rng.substream(0))
    all_idx = np.arange(X.shape[0])
    best_lr = None
    best_err = np.inf
    for li, lr in enumerate(sorted(float(l) for l in cfg.lr_grid)):
        errs = []
        for fi, val in enumerate(parts):
            train_idx = np.setdiff1d(all_idx, val)
            net = train_mlp(
                X[train_idx], y[train_idx], cfg.mlp_width, lr,
                cfg.mlp_epochs, cfg.mlp_batch, rng.substream(1 + li * CV_FOLDS + fi),
            )
            errs.append(krr.mse(net.predict(X[val]), y[val]))
        err = float(np.mean(errs))
        if err < best_err:
            best_err = err
            best_lr = lr
    net = train_mlp(X, y, cfg.mlp_width, best_lr, cfg.mlp_epochs, cfg.mlp_batch,
                    rng.substream(1_000_003))
    return krr.mse(net.predict(Xt), yt), best_lr


def run_generalization(cfg: ExperimentConfig) -> ExperimentResult:
    """Test MSE of isotropic KRR, spiked KRR, and the MLP across sample sizes."""
    d = cfg.dims[0]
    link = from_name(cfg.link)
    w_star = _unit_axis(d)
    if min(cfg.n_train) < CV_FOLDS:
        raise InsufficientData(f"training sizes must be at least {CV_FOLDS}")
    rows = []
    for trial in range(cfg.trials):
        tseed = trial_seed(cfg.master_seed, trial)
        test_stream = SeededStream(tseed, stream_id=0)
        Xt = test_stream.standard_normal((cfg.n_test, d))
        yt = link.eval(Xt @ w_star)
        for N in cfg.n_train:
            stream = SeededStream(tseed, stream_id=N)
            X = stream.standard_normal((N, d))
            y = link.eval(X @ w_star)

            lam0 = krr.kfold_select(kernels.k0_cross, X, y, cfg.lambda_grid,
                                    CV_FOLDS, stream.substream(1))
            coefs0 = krr.fit(kernels.k0_gram(X), y, lam0)
            rows.append((N, "k0-krr", "", trial, tseed, lam0,
                         krr.mse(krr.predict(kernels.k0_cross(Xt, X), coefs0), yt)))

            for ei, expo in enumerate(cfg.b_exponents):
                cov = make_spiked(cfg.a_coef, cfg.b_scale * d ** expo, w_star)
                k1 = lambda left, right, _cov=cov: kernels.k1_cross(left, right, _cov)
                lam1 = krr.kfold_select(k1, X, y, cfg.lambda_grid,
                                        CV_FOLDS, stream.substream(2 + ei))
                coefs1 = krr.fit(kernels.k1_gram(X, cov), y, lam1)
                rows.append((N, "k1-krr", expo, trial, tseed, lam1,
                             krr.mse(krr.predict(kernels.k1_cross(Xt, X, cov), coefs1), yt)))

            mlp_mse, lr = train_mlp_baseline(cfg, (X, y), (Xt, yt), stream.substream(500))
            rows.append((N, "mlp", "", trial, tseed, lr, mlp_mse))
    return ExperimentResult(
        header=("n_train", "model", "b_exponent", "trial", "trial_seed",
                "lambda_or_lr", "test_mse"),
        rows=rows,
    )


# -- verification suites --------------------------------------------------------

_S_TABLE_EXACT = {
    "identity": 1.0,
    "quadratic": 6.0,
    "relu": 0.5,
}


def _run_s_table(cfg: ExperimentConfig) -> ExperimentResult:
    rows = []
    checks = []
    for kind in link_functions.CATALOGUE:
        link = from_name(kind)
        mu1 = link.mu1()
        s = link.s_coefficient()
        m2 = link.second_moment()
        rows.append((kind, mu1, s, m2))
        if kind in _S_TABLE_EXACT:
            err = abs(s - _S_TABLE_EXACT[kind])
            checks.append(Check(f"s[{kind}]", s, err < 1e-9))
    s_bump = from_name("gauss_bump").s_coefficient()
    checks.append(Check("s[gauss_bump]<0", s_bump, s_bump < 0.0))
    s_in = from_name("indicator_inside").s_coefficient()
    checks.append(Check("s[indicator_inside]in[-1/2,0)", s_in, -0.5 <= s_in < 0.0))
    s_out = from_name("indicator_outside").s_coefficient()
    checks.append(Check("s[indicator_outside]>0", s_out, s_out > 0.0))
    mu_target = from_name("paper_target").mu1()
    expected = 3.0 + 8.0 * np.exp(-2.0)
    checks.append(Check("mu1[paper_target]", mu_target, abs(mu_target - expected) < 1e-9))
    return ExperimentResult(header=("link", "mu1", "s", "second_moment"),
                            rows=rows, checks=checks)


def _run_kernel_check(cfg: ExperimentConfig) -> ExperimentResult:
    """Warped-input identity: k1(x, x') equals k0 on square-root-warped inputs."""
    stream = SeededStream(cfg.master_seed, stream_id=1)
    rows = []
    worst = 0.0
    per_dim = -(-WARP_CHECK_TRIPLES // len(cfg.dims))
    for di, d in enumerate(cfg.dims):
        sub = stream.substream(di)
        dev = 0.0
        for _ in range(per_dim):
            x = sub.standard_normal(d)
            xp = sub.standard_normal(d)
            a = float(sub.uniform(0.5, 2.5, ()))
            b = a * float(sub.uniform(-0.9, 8.0, ()))
            u = sub.standard_normal(d)
            cov = make_spiked(a, b, u)
            root = cov_sqrt(cov)
            direct = kernels.k1_relu(x, xp, cov)
            warped = kernels.k0_relu(matvec(root, x), matvec(root, xp))
            dev = max(dev, abs(direct - warped))
        rows.append((d, per_dim, dev))
        worst = max(worst, dev)
    checks = [Check("warp_identity_max_dev", worst, worst < 1e-12)]
    return ExperimentResult(header=("d", "triples", "max_deviation"), rows=rows, checks=checks)


def _run_expansion_residual(cfg: ExperimentConfig) -> ExperimentResult:
    stream = SeededStream(cfg.master_seed, stream_id=2)
    rows = residual_decay_probe(
        cfg.dims, cfg.b_exponents[0], RESIDUAL_PAIRS_PER_DIM, stream,
        b_scale=cfg.b_scale, a_coef=cfg.a_coef,
    )
    slope = fit_residual_slope(rows)
    checks = [Check("residual_slope", slope, 0.75 <= slope <= 1.25)]
    return ExperimentResult(
        header=("d", "b_value", "max_residual", "mean_residual", "predicted_scale"),
        rows=rows, checks=checks,
    )


def _run_verify_eigen(cfg: ExperimentConfig) -> ExperimentResult:
    """Linear-eigenspace split measured by Rayleigh quotients on Gram matrices."""
    d = cfg.dims[0]
    N = cfg.n_test
    a = cfg.a_coef
    b = cfg.b_scale * d ** cfg.b_exponents[0]
    w_star = _unit_axis(d)
    cov = make_spiked(a, b, w_star)
    rows = []
    aligned, orth, orth_k0 = [], [], []
    for trial in range(cfg.trials):
        tseed = trial_seed(cfg.master_seed, trial)
        stream = SeededStream(tseed, stream_id=3)
        X = stream.standard_normal((N, d))
        psi_aligned = X @ w_star
        psi_perp = X @ _unit_axis(d, 1)
        K1 = kernels.k1_gram(X, cov)
        K0 = kernels.k0_gram(X)
        ra = spectral.rayleigh_eigenvalue(K1, psi_aligned)
        ro = spectral.rayleigh_eigenvalue(K1, psi_perp)
        r0 = spectral.rayleigh_eigenvalue(K0, psi_perp)
        aligned.append(ra)
        orth.append(ro)
        orth_k0.append(r0)
        rows.append((trial, tseed, ra, ro, r0))
    ratio = float(np.median(aligned) / np.median(orth))
    target_ratio = (a + b) / a
    orth_med = float(np.median(orth))
    invariance = float(np.median(np.array(orth) / np.array(orth_k0)))
    checks = [
        Check("aligned_orth_ratio", ratio, abs(ratio - target_ratio) <= 0.25 * target_ratio),
        Check("orth_quotient", orth_med, abs(orth_med - a / (4 * d)) <= 0.15 * a / (4 * d)),
        Check("orth_invariance", invariance, abs(invariance - a) <= 0.15 * a),
    ]
    return ExperimentResult(
        header=("trial", "trial_seed", "rayleigh_aligned", "rayleigh_orthogonal",
                "rayleigh_orthogonal_k0"),
        rows=rows, checks=checks,
    )


def run_verification(cfg: ExperimentConfig) -> ExperimentResult:
    runners = {
        "s-table": _run_s_table,
        "kernel-check": _run_kernel_check,
        "expansion-residual": _run_expansion_residual,
        "verify-eigen": _run_verify_eigen,
    }
    if cfg.experiment not in runners:
        raise ConfigError(f"{cfg.experiment!r} is not a verification experiment")
    return runners[cfg.experiment](cfg)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    if cfg.experiment == "alignment":
        return run_alignment(cfg)
    if cfg.experiment == "generalization":
        return run_generalization(cfg)
    return run_verification(cfg)
