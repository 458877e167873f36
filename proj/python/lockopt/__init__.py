"""Behavioral logic locking optimizer.

The heavy lifting lives in the compiled extension; this package re-exports
its surface. Typical flow:

    import lockopt

    program = lockopt.parse(open("design.c").read())
    points = lockopt.find_points(program)
    key = lockopt.Key.random(lockopt.key_bits([1] * len(points), points), seed=7)
    tests = lockopt.random_inputs(program, 100, seed=11)
    wrong = lockopt.make_wrong_keys(key, 100, seed=13)
    ctx = lockopt.Context(program, points, key, tests, wrong)
    result = ctx.ga_explore()
"""

try:
    from ._lockopt import *  # noqa: F401,F403
    from ._lockopt import __version__  # noqa: F401
except ImportError:  # running against a build tree
    from _lockopt import *  # noqa: F401,F403
    from _lockopt import __version__  # noqa: F401
