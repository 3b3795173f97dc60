# Periodic shear flow with in-situ evaluation of the velocity maximum and a centerline profile.
import math
import numpy as np
import blockforge

N = 32


@blockforge.callback("config")
def config():
    return {
        'Physical': {'omega': 1.6},
        'Control': {'timesteps': 100},
        'Domain': {'size': [N, N, N], 'block_size': [16, 16, 16], 'periodic': [True, True, True]},
    }


@blockforge.callback("domain_init")
def init(cell):
    return {'initVel': (0.01 * math.sin(2 * math.pi * cell[1] / N), 0.0, 0.0)}


@blockforge.callback("at_end_of_timestep")
def evaluation(blockstorage, step):
    x_vel_max = 0
    for block in blockstorage:
        vel_field = np.asarray(block['velocity'])
        x_vel_max = max(vel_field[:, :, :, 0].max(), x_vel_max)
    x_vel_max = mpi.reduce(x_vel_max, mpi.MAX)
    if x_vel_max:
        log.result("Max X Vel", x_vel_max)
    if step % 50 == 0:
        size = blockstorage.numberOfCells()
        profile = gather_slice(x=size[0] / 2, z=size[2] / 2, coarsen=4)
        if profile:
            log.result("Profile", ' '.join('%.6e' % v for v in profile))
