"""engrasp: enveloping-grasp affordance templates for underactuated hands.

Synthesizes candidate whole-hand grasps around a target object, keeps the
ones that cage the object's center of mass inside the hull of their
contacts, ranks them by how centered that cage is, and exports the result
for visual review. A separate layer retargets recorded human hand motion
onto the seven control channels of the robot hand.
"""

__version__ = "0.1.0"

from .errors import EngraspError

__all__ = ["EngraspError", "__version__"]
