"""Register protocol implementations.

Step-machine implementations of the three signature-free register types
(verifiable, authenticated, sticky) plus the deliberately flawed
first-2f+1-replies verifier used for negative testing.  The actual state
machines live in the engine module; this is the stable import surface.
"""

from byzreg.engine import impl as _impl

Protocol = _impl.Protocol
VerifiableRegister = _impl.VerifiableRegister
FlawedVerifiableRegister = _impl.FlawedVerifiableRegister
AuthenticatedRegister = _impl.AuthenticatedRegister
StickyRegister = _impl.StickyRegister

PROTOCOLS = _impl.PROTOCOLS

# Register types a scenario may name, and the sequential spec each checks
# against.  The flawed variant shares the verifiable register's spec: that
# is the point of the negative tests.
REGISTER_TYPES = {
    "verifiable": "verifiable",
    "verifiable_flawed": "verifiable",
    "authenticated": "authenticated",
    "sticky": "sticky",
    "tos_verifiable": "tos",
    "tos_authenticated": "tos",
    "tos_sticky": "tos",
    "naive_quorum": "tos",
}
