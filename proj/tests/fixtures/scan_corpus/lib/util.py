import os

# helper for settings
def setting(name):
    return os.getenv(name)
