# Channel with pressure inflow/outflow, no-slip walls and a packing of gas bubbles.
import numpy as np
import blockforge

gas_bubbles = sphere_pack(60, 20, 20, 3)
c = {}


@blockforge.callback("config")
def config():
    global c
    c = {
        'Physical': {
            'viscosity': 1e-5*m*m/s,
            'surface_tension': 1e-4*N/m,
            'dx': 0.01*m,
            'max_velocity': 0.005*m/s,
            'density': 1000*kg/m**3,
        },
        'Control': {
            'timesteps': 10000,
            'vtk_output_interval': 100,
            'mode': 'fslbm',
        },
        'Domain': {
            'size': [60, 20, 20],
            'block_size': [30, 20, 20],
            'periodic': [False, False, False],
        },
        'Physics': {'pressure_W': 1.001},
    }
    c['Physical']['dt'] = find_optimal_dt(c)
    nondimensionalize(c)
    return c


@blockforge.callback("domain_init")
def boundary_setup(cell):
    p_w = c['Physics']['pressure_W']
    boundary = []
    if is_at_border(cell, 'NSTB'):
        boundary = ['noslip']
    elif is_at_border(cell, 'W'):
        boundary = ['pressure', p_w]
    elif is_at_border(cell, 'E'):
        boundary = ['pressure', 1.0]
    fl = 1 - gas_bubbles.overlap(cell)
    return {'fill_level': fl, 'boundary': boundary}


@blockforge.callback("at_end_of_timestep")
def evaluation(blockstorage, bubbles):
    # distributed evaluation
    x_vel_max = 0
    for block in blockstorage:
        vel_field = np.asarray(block['velocity'])
        x_vel_max = max(vel_field[:, :, :, 0].max(), x_vel_max)

    x_vel_max = mpi.reduce(x_vel_max, mpi.MAX)
    if x_vel_max:  # valid on root only
        log.result("Max X Vel", x_vel_max)

    # gather and evaluate locally
    size = blockstorage.numberOfCells()
    vel_profile_z = gather_slice(x=size[0] / 2, y=size[1] / 2, coarsen=4)
    if vel_profile_z:  # valid on root only
        log.result("Centerline mean", float(np.mean(vel_profile_z)))
