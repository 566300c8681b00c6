"""
Soft Coding Configuration for the straggler-tolerant sketching simulator
Environment-driven defaults for instances, solver runs, verification suites and outputs
"""

import os


def _int_list(name, default):
    return [int(v) for v in os.getenv(name, default).split(',') if v.strip()]


def _float_list(name, default):
    return [float(v) for v in os.getenv(name, default).split(',') if v.strip()]


# SIMULATION CONFIGURATION - Soft Coded
SIMULATION_CONFIG = {
    'n_rows': int(os.getenv('SIM_N_ROWS', '2000')),
    'n_columns': int(os.getenv('SIM_N_COLUMNS', '40')),
    'n_blocks': int(os.getenv('SIM_N_BLOCKS', '100')),
    'dof': float(os.getenv('SIM_DOF', '3')),
    'noise_sigma': float(os.getenv('SIM_NOISE_SIGMA', '1.0')),
    'instance_seed': int(os.getenv('SIM_INSTANCE_SEED', '0')),
    'servers': int(os.getenv('SIM_SERVERS', '500')),
    'q': int(os.getenv('SIM_Q', '50')),
    'runtime': os.getenv('SIM_RUNTIME', 'shifted-exp:1.0,0.0'),
    'master_seed': int(os.getenv('SIM_MASTER_SEED', '0')),
}

# SOLVER CONFIGURATION - Soft Coded
SOLVER_CONFIG = {
    'iterations': int(os.getenv('SOLVER_ITERATIONS', '600')),
    'trials': int(os.getenv('SOLVER_TRIALS', '6')),
    'policy': os.getenv('SOLVER_POLICY', 'conservative'),
    'step_scale': float(os.getenv('SOLVER_STEP_SCALE', '0.25')),
    'compare_scales': _float_list('SOLVER_COMPARE_SCALES', '0.0004,0.0042,0.0421,0.4207'),
    'compare_sketches': os.getenv('SOLVER_COMPARE_SKETCHES', 'block_lvg,gaussian,block_srht,none').split(','),
    'track_bound': os.getenv('SOLVER_TRACK_BOUND', 'true').lower() == 'true',
}

# VERIFICATION CONFIGURATION - Soft Coded
VERIFICATION_CONFIG = {
    'master_seed': int(os.getenv('VERIFY_MASTER_SEED', '0')),
    'embedding_threshold': float(os.getenv('VERIFY_EMBEDDING_THRESHOLD', '0.5')),
    'embedding_trials': int(os.getenv('VERIFY_EMBEDDING_TRIALS', '200')),
    'embedding_qs': _int_list('VERIFY_EMBEDDING_QS', '10,25,50,100'),
    'betas': _float_list('VERIFY_BETAS', '1.0,0.8,0.6'),
    'srht_qs': _int_list('VERIFY_SRHT_QS', '25,50,100'),
    'srht_trials': int(os.getenv('VERIFY_SRHT_TRIALS', '50')),
    'weighted_instances': int(os.getenv('VERIFY_WEIGHTED_INSTANCES', '10')),
    'weighted_draws': int(os.getenv('VERIFY_WEIGHTED_DRAWS', '100')),
    'sts_trials': int(os.getenv('VERIFY_STS_TRIALS', '100000')),
    'distinct_trials': int(os.getenv('VERIFY_DISTINCT_TRIALS', '100000')),
    'distortion_instances': int(os.getenv('VERIFY_DISTORTION_INSTANCES', '100')),
    'unbiased_rounds': int(os.getenv('VERIFY_UNBIASED_ROUNDS', '10000')),
    'contraction_trials': int(os.getenv('VERIFY_CONTRACTION_TRIALS', '10000')),
    'decoding_iterations': int(os.getenv('VERIFY_DECODING_ITERATIONS', '600')),
    'convergence_horizons': _int_list('VERIFY_CONVERGENCE_HORIZONS', '100,200,400'),
    'convergence_seeds': int(os.getenv('VERIFY_CONVERGENCE_SEEDS', '20')),
    'convergence_instance': {
        'n_rows': int(os.getenv('VERIFY_CONVERGENCE_N_ROWS', '400')),
        'n_columns': int(os.getenv('VERIFY_CONVERGENCE_N_COLUMNS', '8')),
        'n_blocks': int(os.getenv('VERIFY_CONVERGENCE_N_BLOCKS', '40')),
        'dof': float(os.getenv('VERIFY_CONVERGENCE_DOF', '30')),
        'servers': int(os.getenv('VERIFY_CONVERGENCE_SERVERS', '200')),
        'q': int(os.getenv('VERIFY_CONVERGENCE_Q', '10')),
    },
}

# OUTPUT CONFIGURATION - Soft Coded
OUTPUT_CONFIG = {
    'results_dir': os.getenv('SIM_RESULTS_DIR', 'results'),
}


def get_simulator_config():
    """
    Get complete simulator configuration with environment overrides
    """
    return {
        'simulation': SIMULATION_CONFIG,
        'solver': SOLVER_CONFIG,
        'verification': VERIFICATION_CONFIG,
        'output': OUTPUT_CONFIG,
    }
