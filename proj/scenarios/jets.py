# Two inclined pipes shooting liquid jets into a gas filled box.
import blockforge

size = (64, 32, 48)
diameter, length = 8, 16
max_vel = 0.03

leftPipe = Pipe(diameter, length, (8, 16, 12))
leftPipe.rotate(45)
rightPipe = Pipe(diameter, length, (56, 16, 12))
rightPipe.rotate(135)


@blockforge.callback("config")
def config():
    return {
        'Physical': {'viscosity': 0.02, 'surface_tension': 0.0},
        'Control': {'timesteps': 200, 'vtk_output_interval': 50, 'mode': 'fslbm'},
        'Domain': {'size': list(size), 'block_size': [32, 32, 24]},
    }


@blockforge.callback("domain_init")
def pipeSetup(cell):
    for p in [leftPipe, rightPipe]:
        if p.contains(cell):
            return {'initVel': p.parabolicVel(cell, max_vel)}
        if p.shellContains(cell):
            return {'boundary': 'NoSlip'}
    if is_at_border(cell, 'WENSTB'):
        return {'boundary': 'noslip'}
    return {'fill_level': 0.0}
