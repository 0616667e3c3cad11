# Lyapunov Energy Pricer
__version__ = "1.0.0"
