# Fixed-magnetization Ising toolkit on random regular graphs
__version__ = "1.0.0"
