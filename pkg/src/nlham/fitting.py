import numpy as np


def loglog_slope(x, y) -> float:
    """Least-squares slope of log|y| against log|x|."""
    x = np.abs(np.asarray(x, float))
    y = np.abs(np.asarray(y, float))
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
