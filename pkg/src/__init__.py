# Low-rank massive MIMO simulator

__version__ = "1.0.0"
