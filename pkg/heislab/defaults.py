threads = None
seed = 0
outdir_env = "HEISLAB_OUTDIR"

# finite differences
fd_step = 1e-5
axis_guard = 1e-6

# distance root finding
bisection_steps = 60
newton_steps = 2

# radial quadrature
quadrature_nodes = 48
inner_nodes = 64
tail_tolerance = 1e-16
tail_safety = 1.5
quadrature_rtol = 1e-8

# sampler
batches = 50
target_acceptance = 0.35
tune_interval = 50
proposal_scale = 0.5
chains = 64
chain_units = 8
tau_window = 5.0

# coercive lab
exp_theta = 0.5
exp_cap = 50.0
block_nodes = 24
block_iterations = 50
residual_tolerance = 1e-3
