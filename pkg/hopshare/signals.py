"""
Implements signals based on blinker if available, otherwise
falls silently back to a noop.

The fallback mirrors Flask's:
https://github.com/pallets/flask/blob/master/flask/signals.py
"""
import logging
from typing import Any

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

signals_available = False


class _FakeNamespace(object):
    def signal(self, name, doc=None):
        return _FakeSignal(name, doc)


class _FakeSignal(object):
    """
    If blinker is unavailable, create a fake class with the same
    interface that allows sending of signals but will fail with an
    error on anything else.  Instead of doing anything on send, it
    will just ignore the arguments and do nothing instead.
    """

    def __init__(self, name, doc=None):
        self.name = name
        self.__doc__ = doc

    def _fail(self, *args, **kwargs):
        raise RuntimeError('signalling support is unavailable '
                           'because the blinker library is '
                           'not installed.')

    send = lambda *a, **kw: None  # noqa
    connect = disconnect = has_receivers_for = receivers_for = \
        temporarily_connected_to = _fail
    del _fail


try:
    from blinker import Namespace
    signals_available = True
except ImportError:  # pragma: no cover
    Namespace = _FakeNamespace  # type: ignore[assignment, misc, unused-ignore]

_signals = Namespace()

packet_transmitted = _signals.signal(
    'packet_transmitted', doc='A packet entered the medium: slot, channel, packet, outcome')
packet_captured = _signals.signal(
    'packet_captured', doc='An adversary observed a delivered packet: slot, channel, packet')
sync_flooded = _signals.signal(
    'sync_flooded', doc='A node flooded its SYNC packet: slot, node_id, clock')
sync_replied = _signals.signal(
    'sync_replied', doc='A node adopted a clock: slot, node_id, source_device')


def emit(signal: Any, sender: Any, **kwargs: Any) -> None:
    """
    Sends ``signal``, logging and swallowing receiver failures.
    """
    try:
        signal.send(sender, **kwargs)
    except Exception:
        log.exception("%s receiver threw an exception.", getattr(signal, 'name', signal))
