"""Detection of Byzantine relays in a Gaussian two-hop network with a secured direct link."""

from ._relaydetect import *  # noqa: F401,F403
from ._relaydetect import __version__  # noqa: F401
