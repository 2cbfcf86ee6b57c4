"""Surprise-modulated belief updates with confidence-corrected surprise."""

from .baselines import (
    FixedGammaEstimator,
    OnlineEmState,
    fixed_gamma_step,
    naive_bayes_maze_step,
    online_em_init,
    online_em_step,
)
from .dirichlet import (
    dirichlet_entropy,
    dirichlet_smile_step,
    dirichlet_surprise,
    estimate_transition_matrix,
    kl_dirichlet,
    maze_smile_step,
    new_table,
)
from .environments import (
    GaussianChangePointEnv,
    MazeEnv,
    MazeTopology,
    build_torus_topology,
    permute_topology,
    true_transition_matrix,
)
from .errors import SmileError
from .experiments import (
    ExperimentConfig,
    ema,
    run_gaussian_experiment,
    run_maze_experiment,
    run_sweep,
)
from .gaussian import GaussianBelief, GaussianObservation, gaussian_smile_step
from .smile import SmileConfig, SmileStepDiagnostics, smile_step, smile_update
from .special import digamma, log_gamma
from .surprise import (
    bayesian_surprise,
    confidence_corrected_surprise,
    entropy,
    kl_categorical,
    raw_surprise,
    scaled_likelihood,
    shannon_surprise,
)

__version__ = "0.1.0"
