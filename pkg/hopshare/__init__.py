"""
hopshare
^^^^^^^^

Secret-shared, frequency-hopped multi-channel transmission over a simulated ISM band

"""
__license__ = 'MIT'
__version__ = '0.1.0'
