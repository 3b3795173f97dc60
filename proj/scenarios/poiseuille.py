# Pressure driven flow between two plates, in lattice units.
import blockforge

NX, NY, H = 256, 2, 32
RHO_IN, RHO_OUT = 1.0006, 1.0


@blockforge.callback("config")
def config():
    return {
        'Physical': {'viscosity': 0.1},
        'Control': {'timesteps': 5000, 'mode': 'lbm'},
        'Domain': {
            'size': [NX, NY, H + 2],
            'periodic': [False, True, False],
        },
    }


@blockforge.callback("domain_init")
def setup(cell):
    if is_at_border(cell, 'TB'):
        return {'boundary': 'noslip'}
    if is_at_border(cell, 'W'):
        return {'boundary': ['pressure', RHO_IN]}
    if is_at_border(cell, 'E'):
        return {'boundary': ['pressure', RHO_OUT]}
    return {}
