"""One delivery slot on a 26-content library, request by request.

Three SBSs, caches of five contents: A-C cached whole, D-I coded with T=1,
J-Z left at the MBS.  Coded queues hold 3, 2 and 1 distinct contents, so
the three delivery steps see 3, 2 and 1 busy queues.
"""
from hybridcache.cli import emit_fig1_walkthrough

print(emit_fig1_walkthrough())
print("with every user asking for Z, one broadcast serves all of them:\n")
print(emit_fig1_walkthrough(["Z" * 8, "Z" * 4, "Z" * 6]))
